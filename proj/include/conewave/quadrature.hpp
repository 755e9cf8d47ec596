#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "special_fn.hpp"

namespace conewave {

struct Rule {
    std::vector<double> x;
    std::vector<double> w;

    std::size_t size() const { return x.size(); }

    template <typename F>
    auto integrate(F&& f) const
    {
        using R = decltype(f(x[0]));
        CompensatedSum<R> acc;
        for (std::size_t i = 0; i < x.size(); ++i)
            acc.add(w[i] * f(x[i]));
        return acc.value();
    }
};

namespace detail {

inline Rule compute_gauss_legendre(int n)
{
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return r;
}

// Golub-Welsch for weight (1-x)^a (1+x)^b on [-1,1]
inline Rule compute_gauss_jacobi(int n, double a, double b)
{
    Eigen::VectorXd diag(n), off(std::max(n - 1, 1));
    const double ab = a + b;
    diag[0] = (b - a) / (ab + 2.0);
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + ab;
        diag[k] = (b * b - a * a) / (s * (s + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + ab;
        off[k - 1] = (k == 1)
            ? std::sqrt(4.0 * (1.0 + a) * (1.0 + b) / (s * s * (s + 1.0)))
            : std::sqrt(4.0 * k * (k + a) * (k + b) * (k + ab)
                        / (s * s * (s + 1.0) * (s - 1.0)));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off.head(std::max(n - 1, 0)), Eigen::ComputeEigenvectors);
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0)
                                + std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        r.x[i] = es.eigenvalues()[i];
        const double v = es.eigenvectors()(0, i);
        r.w[i] = mu0 * v * v;
    }
    return r;
}

} // namespace detail

// reference rule on [-1,1]; cached per n
inline const Rule& gauss_legendre(int n)
{
    if (n < 1)
        throw std::invalid_argument("gauss_legendre: n must be positive");
    static std::mutex mtx;
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
    return it->second;
}

inline const Rule& gauss_jacobi(int n, double a, double b)
{
    if (n < 1 || !(a > -1.0) || !(b > -1.0))
        throw std::invalid_argument("gauss_jacobi: need n >= 1 and a, b > -1");
    static std::mutex mtx;
    static std::map<std::tuple<int, double, double>, Rule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_tuple(n, a, b);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, detail::compute_gauss_jacobi(n, a, b)).first;
    return it->second;
}

inline Rule mapped(const Rule& ref, double lo, double hi)
{
    Rule r;
    const double c = 0.5 * (hi + lo), h = 0.5 * (hi - lo);
    r.x.resize(ref.size());
    r.w.resize(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        r.x[i] = c + h * ref.x[i];
        r.w[i] = h * ref.w[i];
    }
    return r;
}

// composite Gauss-Legendre over the given panel edges
inline Rule composite(const std::vector<double>& edges, int n)
{
    const Rule& ref = gauss_legendre(n);
    Rule r;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        if (!(edges[p + 1] > edges[p]))
            continue;
        Rule m = mapped(ref, edges[p], edges[p + 1]);
        r.x.insert(r.x.end(), m.x.begin(), m.x.end());
        r.w.insert(r.w.end(), m.w.begin(), m.w.end());
    }
    return r;
}

inline Rule composite_uniform(double lo, double hi, int panels, int n)
{
    std::vector<double> e(panels + 1);
    for (int i = 0; i <= panels; ++i)
        e[i] = lo + (hi - lo) * i / panels;
    return composite(e, n);
}

inline std::vector<double> geometric_edges(double lo, double first, double hi, int panels)
{
    std::vector<double> e{lo};
    const double q = std::pow(hi / first, 1.0 / (panels - 1));
    double x = first;
    for (int i = 0; i < panels; ++i) {
        if (x > lo && x < hi)
            e.push_back(x);
        x *= q;
    }
    e.push_back(hi);
    return e;
}

} // namespace conewave
