#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "cone_geom.hpp"
#include "errors.hpp"
#include "fft.hpp"
#include "quadrature.hpp"
#include "special_fn.hpp"
#include "zero_cache.hpp"

namespace conewave {

struct TruncatedCone {
    Cone cone;
    double R = 1.0;

    TruncatedCone() = default;
    TruncatedCone(double rho, double R_) : cone(rho), R(R_)
    {
        if (!(R_ > 0.0))
            throw std::domain_error("TruncatedCone: R must be positive");
    }
};

struct EigenMode {
    int k = 0;
    int m = 1;
    double nu = 0.0;
    double j = 0.0;      // j_{nu,m}
    double lambda = 0.0; // j / R
    double norm_const = 0.0;
};

inline double angular_order(int k, double rho) { return static_cast<double>(std::abs(k)) / rho; }

inline double mode_norm_const(double rho, double R, double nu, double j)
{
    const double jp = bessel_j(nu + 1.0, j);
    return 1.0 / std::sqrt(2.0 * pi * rho * 0.5 * R * R * jp * jp);
}

inline bool mode_less(const EigenMode& a, const EigenMode& b)
{
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.k != b.k) return a.k < b.k;
    return a.m < b.m;
}

inline std::vector<EigenMode> build_basis(const TruncatedCone& tc, double lambda_max,
                                          ZeroCache* cache = nullptr)
{
    if (!(lambda_max > 0.0))
        throw std::domain_error("build_basis: lambda_max must be positive");
    ZeroCache local;
    ZeroCache& zc = cache ? *cache : local;
    const double rho = tc.cone.rho;
    const double xmax = lambda_max * tc.R;
    std::vector<EigenMode> modes;
    for (int k = 0;; ++k) {
        const double nu = angular_order(k, rho);
        if (nu >= xmax)
            break;
        const auto zs = zc.zeros_below(nu, xmax);
        if (zs.empty() && nu > 0.0)
            break;
        for (std::size_t i = 0; i < zs.size(); ++i) {
            EigenMode e;
            e.k = k;
            e.m = static_cast<int>(i + 1);
            e.nu = nu;
            e.j = zs[i];
            e.lambda = zs[i] / tc.R;
            e.norm_const = mode_norm_const(rho, tc.R, nu, zs[i]);
            modes.push_back(e);
            if (k != 0) {
                e.k = -k;
                modes.push_back(e);
            }
        }
    }
    std::sort(modes.begin(), modes.end(), mode_less);
    return modes;
}

inline double weyl_main_term(const TruncatedCone& tc, double lambda)
{
    return tc.cone.rho * tc.R * tc.R * lambda * lambda / 4.0;
}

inline std::size_t mode_count(const std::vector<EigenMode>& basis, double lambda)
{
    return static_cast<std::size_t>(std::count_if(basis.begin(), basis.end(),
        [&](const EigenMode& e) { return e.lambda <= lambda; }));
}

inline cplx eigenfunction(const EigenMode& e, const TruncatedCone& tc, double r, double theta)
{
    if (r > tc.R)
        return 0.0;
    const double a = e.norm_const * bessel_j(e.nu, e.j * r / tc.R);
    return std::polar(a, e.k * theta / tc.cone.rho);
}

struct ClusterWindow {
    double lambda0 = 0.0;
    double width = 1.0;
    std::vector<EigenMode> modes;

    int max_abs_k() const
    {
        int K = 0;
        for (const auto& e : modes)
            K = std::max(K, std::abs(e.k));
        return K;
    }
    double max_j() const
    {
        double J = 0.0;
        for (const auto& e : modes)
            J = std::max(J, e.j);
        return J;
    }
};

inline ClusterWindow make_window(const std::vector<EigenMode>& basis, double lambda0, double width = 1.0)
{
    ClusterWindow w{lambda0, width, {}};
    for (const auto& e : basis)
        if (e.lambda >= lambda0 && e.lambda <= lambda0 + width)
            w.modes.push_back(e);
    return w;
}

inline ClusterWindow make_window(const TruncatedCone& tc, double lambda0, double width = 1.0,
                                 ZeroCache* cache = nullptr)
{
    return make_window(build_basis(tc, lambda0 + width, cache), lambda0, width);
}

struct PolarGrid {
    double rho = 1.0;
    double R = 1.0;
    std::vector<double> r;
    std::vector<double> wr;
    int n_theta = 16;

    int n_r() const { return static_cast<int>(r.size()); }
    double dtheta() const { return 2.0 * pi * rho / n_theta; }
    double theta(int j) const { return -pi * rho + dtheta() * j; }
};

inline PolarGrid make_grid(const TruncatedCone& tc, int n_r, int n_theta)
{
    if (n_r < 1 || n_theta < 1)
        throw std::invalid_argument("make_grid: counts must be positive");
    PolarGrid g;
    g.rho = tc.cone.rho;
    g.R = tc.R;
    g.n_theta = n_theta;
    const Rule rule = mapped(gauss_legendre(n_r), 0.0, tc.R);
    g.r = rule.x;
    g.wr = rule.w;
    return g;
}

// N_theta = 4 max|k| + 16, N_r = 4 max j / pi + 32, both scaled by `factor`
inline PolarGrid grid_for(const TruncatedCone& tc, int max_k, double max_j, double factor = 1.0)
{
    const int nt = static_cast<int>(std::ceil(factor * (4.0 * max_k + 16.0)));
    const int nr = static_cast<int>(std::ceil(factor * (4.0 * max_j / pi + 32.0)));
    return make_grid(tc, nr, nt);
}

inline PolarGrid grid_for(const TruncatedCone& tc, const ClusterWindow& w, double factor = 1.0)
{
    return grid_for(tc, w.max_abs_k(), w.max_j(), factor);
}

struct GridFunction {
    int nr = 0;
    int nt = 0;
    std::vector<cplx> v;

    cplx& operator()(int i, int j) { return v[static_cast<std::size_t>(i) * nt + j]; }
    cplx operator()(int i, int j) const { return v[static_cast<std::size_t>(i) * nt + j]; }
};

inline GridFunction sample(const PolarGrid& g, const std::function<cplx(double, double)>& f)
{
    GridFunction out{g.n_r(), g.n_theta, std::vector<cplx>(static_cast<std::size_t>(g.n_r()) * g.n_theta)};
    for (int i = 0; i < g.n_r(); ++i)
        for (int j = 0; j < g.n_theta; ++j)
            out(i, j) = f(g.r[i], g.theta(j));
    return out;
}

namespace detail {

inline void check_resolution(const ClusterWindow& w, const PolarGrid& g)
{
    if (g.n_theta <= 2 * w.max_abs_k())
        throw ResolutionError("grid under-resolves the window: N_theta = " + std::to_string(g.n_theta)
                              + " <= 2 max|k| = " + std::to_string(2 * w.max_abs_k()));
    if (g.n_r() < static_cast<int>(std::ceil(w.max_j() / pi)) + 1)
        throw ResolutionError("grid under-resolves the window radially: N_r = " + std::to_string(g.n_r()));
}

inline int wrap(int k, int n) { return ((k % n) + n) % n; }

// radial profiles norm * J_nu(j r_i / R) for every window mode
inline std::vector<std::vector<double>> radial_table(const ClusterWindow& w, const PolarGrid& g)
{
    std::vector<std::vector<double>> t(w.modes.size(), std::vector<double>(g.n_r()));
    for (std::size_t q = 0; q < w.modes.size(); ++q) {
        const auto& e = w.modes[q];
        // modes k and -k share the radial profile
        if (q > 0 && w.modes[q - 1].j == e.j && w.modes[q - 1].nu == e.nu) {
            t[q] = t[q - 1];
            continue;
        }
        for (int i = 0; i < g.n_r(); ++i)
            t[q][i] = e.norm_const * bessel_j(e.nu, e.j * g.r[i] / g.R);
    }
    return t;
}

} // namespace detail

class WindowProjector {
public:
    WindowProjector(const ClusterWindow& w, const PolarGrid& g) : w_(w), g_(g)
    {
        detail::check_resolution(w_, g_);
        table_ = detail::radial_table(w_, g_);
    }

    const ClusterWindow& window() const { return w_; }
    const PolarGrid& grid() const { return g_; }
    const std::vector<std::vector<double>>& table() const { return table_; }

    std::vector<cplx> project(const GridFunction& f) const
    {
        if (f.nr != g_.n_r() || f.nt != g_.n_theta)
            throw std::invalid_argument("project: sample array does not match the grid");
        std::vector<cplx> a = f.v;
        dft_rows(a, f.nr, f.nt, -1);
        const double dt = g_.dtheta();
        std::vector<cplx> c(w_.modes.size());
        for (std::size_t q = 0; q < w_.modes.size(); ++q) {
            const int k = w_.modes[q].k;
            const int col = detail::wrap(k, f.nt);
            const double sgn = (std::abs(k) % 2) ? -1.0 : 1.0;
            CompensatedSum<cplx> acc;
            for (int i = 0; i < f.nr; ++i)
                acc.add(g_.wr[i] * g_.r[i] * table_[q][i] * a[static_cast<std::size_t>(i) * f.nt + col]);
            c[q] = sgn * dt * acc.value();
        }
        return c;
    }

    GridFunction reconstruct(const std::vector<cplx>& c) const
    {
        if (c.size() != w_.modes.size())
            throw std::invalid_argument("reconstruct: coefficient count mismatch");
        const int nr = g_.n_r(), nt = g_.n_theta;
        GridFunction out{nr, nt, std::vector<cplx>(static_cast<std::size_t>(nr) * nt)};
        for (std::size_t q = 0; q < c.size(); ++q) {
            const int k = w_.modes[q].k;
            const int col = detail::wrap(k, nt);
            const double sgn = (std::abs(k) % 2) ? -1.0 : 1.0;
            for (int i = 0; i < nr; ++i)
                out.v[static_cast<std::size_t>(i) * nt + col] += sgn * c[q] * table_[q][i];
        }
        dft_rows(out.v, nr, nt, +1);
        return out;
    }

private:
    ClusterWindow w_;
    PolarGrid g_;
    std::vector<std::vector<double>> table_;
};

inline std::vector<cplx> project(const ClusterWindow& w, const GridFunction& f, const PolarGrid& g)
{
    return WindowProjector(w, g).project(f);
}

inline GridFunction reconstruct(const ClusterWindow& w, const std::vector<cplx>& c, const PolarGrid& g)
{
    return WindowProjector(w, g).reconstruct(c);
}

inline double coefficient_norm(const std::vector<cplx>& c)
{
    CompensatedSum<double> s;
    for (auto z : c)
        s.add(std::norm(z));
    return std::sqrt(s.value());
}

namespace detail {

// vertex of the parabola through (x0,f0),(x1,f1),(x2,f2), if it is a maximum inside [x0,x2]
inline double parabola_peak_gain(double x0, double f0, double x1, double f1, double x2, double f2)
{
    const double d1 = (f1 - f0) / (x1 - x0), d2 = (f2 - f1) / (x2 - x1);
    const double a = (d2 - d1) / (x2 - x0);
    if (!(a < 0.0))
        return 0.0;
    const double xv = 0.5 * (x0 + x1) - d1 / (2.0 * a);
    if (xv < x0 || xv > x2)
        return 0.0;
    const double fv = f0 + d1 * (xv - x0) + a * (xv - x0) * (xv - x1);
    return std::max(0.0, fv - f1);
}

} // namespace detail

inline double lq_norm(const GridFunction& g, const PolarGrid& grid, double q)
{
    if (g.nr != grid.n_r() || g.nt != grid.n_theta)
        throw std::invalid_argument("lq_norm: sample array does not match the grid");
    if (std::isinf(q)) {
        int bi = 0, bj = 0;
        double best = -1.0;
        for (int i = 0; i < g.nr; ++i)
            for (int j = 0; j < g.nt; ++j) {
                const double a = std::norm(g(i, j));
                if (a > best) {
                    best = a;
                    bi = i;
                    bj = j;
                }
            }
        // one quadratic refinement in theta and r around the max node
        const double h = grid.dtheta();
        const double fm = std::norm(g(bi, detail::wrap(bj - 1, g.nt)));
        const double fp = std::norm(g(bi, detail::wrap(bj + 1, g.nt)));
        double gain = detail::parabola_peak_gain(-h, fm, 0.0, best, h, fp);
        if (bi > 0 && bi + 1 < g.nr)
            gain += detail::parabola_peak_gain(grid.r[bi - 1], std::norm(g(bi - 1, bj)), grid.r[bi], best,
                                               grid.r[bi + 1], std::norm(g(bi + 1, bj)));
        return std::sqrt(best + gain);
    }
    if (!(q == 2.0 || q == 4.0 || q == 6.0))
        throw std::invalid_argument("lq_norm: q must be 2, 4, 6 or infinity");
    CompensatedSum<double> acc;
    for (int i = 0; i < g.nr; ++i) {
        double row = 0.0;
        for (int j = 0; j < g.nt; ++j)
            row += std::pow(std::norm(g(i, j)), 0.5 * q);
        acc.add(grid.wr[i] * grid.r[i] * row);
    }
    return std::pow(acc.value() * grid.dtheta(), 1.0 / q);
}

// sum_j |phi_j(r)|^2 for the window; independent of theta
inline double window_square_sum(const ClusterWindow& w, double R, double r)
{
    CompensatedSum<double> s;
    for (const auto& e : w.modes) {
        const double a = e.norm_const * bessel_j(e.nu, e.j * r / R);
        s.add(a * a);
    }
    return s.value();
}

inline double cluster_sup_operator_norm(const ClusterWindow& w, const PolarGrid& grid)
{
    if (w.modes.empty())
        return 0.0;
    const double R = grid.R;
    std::vector<double> rs{0.0};
    rs.insert(rs.end(), grid.r.begin(), grid.r.end());
    rs.push_back(R);
    std::vector<double> vals(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i)
        vals[i] = window_square_sum(w, R, rs[i]);

    // refine the largest local maxima
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const bool left = (i == 0) || vals[i] >= vals[i - 1];
        const bool right = (i + 1 == rs.size()) || vals[i] >= vals[i + 1];
        if (left && right)
            peaks.push_back(i);
    }
    std::sort(peaks.begin(), peaks.end(), [&](auto a, auto b) { return vals[a] > vals[b]; });
    if (peaks.size() > 6)
        peaks.resize(6);
    double best = *std::max_element(vals.begin(), vals.end());
    for (auto i : peaks) {
        const double lo = rs[i == 0 ? 0 : i - 1];
        const double hi = rs[std::min(i + 1, rs.size() - 1)];
        if (!(hi > lo))
            continue;
        auto neg = [&](double r) { return -window_square_sum(w, R, r); };
        std::uintmax_t it = 60;
        const auto res = boost::math::tools::brent_find_minima(neg, lo, hi, 40, it);
        best = std::max(best, -res.second);
    }
    return std::sqrt(best);
}

struct LowerBoundReport {
    double ratio = 0.0;
    std::string best_kind;
    double single_mode_max = 0.0;
    double random_max = 0.0;
    double tip_coherent = 0.0;
    double point_coherent_max = 0.0;
    std::vector<double> random_ratios;
};

inline LowerBoundReport lower_bound_2_to_q(const TruncatedCone& tc, const ClusterWindow& w,
                                           double q, int trials, std::uint64_t seed = 0x5EED)
{
    if (trials < 1)
        throw std::invalid_argument("lower_bound_2_to_q: trials must be >= 1");
    LowerBoundReport rep;
    if (w.modes.empty())
        return rep;
    const PolarGrid grid = grid_for(tc, w, std::max(1.0, q / 2.0));
    const WindowProjector P(w, grid);
    const auto& tab = P.table();

    auto consider = [&](double v, const char* kind) {
        if (v > rep.ratio) {
            rep.ratio = v;
            rep.best_kind = kind;
        }
    };

    // single modes: |phi| is radial
    for (std::size_t m = 0; m < w.modes.size(); ++m) {
        CompensatedSum<double> s;
        for (int i = 0; i < grid.n_r(); ++i)
            s.add(grid.wr[i] * grid.r[i] * std::pow(std::abs(tab[m][i]), q));
        const double v = std::pow(2.0 * pi * tc.cone.rho * s.value(), 1.0 / q);
        rep.single_mode_max = std::max(rep.single_mode_max, v);
    }
    consider(rep.single_mode_max, "single-mode");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N01;
    for (int t = 0; t < trials; ++t) {
        std::vector<cplx> c(w.modes.size());
        for (auto& z : c)
            z = cplx(N01(rng), N01(rng));
        const double v = lq_norm(P.reconstruct(c), grid, q) / coefficient_norm(c);
        rep.random_ratios.push_back(v);
        rep.random_max = std::max(rep.random_max, v);
    }
    consider(rep.random_max, "random");

    auto coherent = [&](double r0) {
        std::vector<cplx> c(w.modes.size());
        for (std::size_t m = 0; m < w.modes.size(); ++m) {
            const auto& e = w.modes[m];
            c[m] = e.norm_const * bessel_j(e.nu, e.j * r0 / tc.R);
        }
        const double n2 = coefficient_norm(c);
        if (n2 == 0.0)
            return 0.0;
        return lq_norm(P.reconstruct(c), grid, q) / n2;
    };
    rep.tip_coherent = coherent(0.0);
    consider(rep.tip_coherent, "tip-coherent");
    for (int s = 1; s <= 9; ++s)
        rep.point_coherent_max = std::max(rep.point_coherent_max, coherent(0.1 * s * tc.R));
    consider(rep.point_coherent_max, "point-coherent");
    return rep;
}

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // rms of log residuals
};

inline ScalingFit fit_scaling_exponent(const std::vector<std::pair<double, double>>& rows)
{
    if (rows.size() < 4)
        throw InsufficientData("fit_scaling_exponent: need at least 4 rows");
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].first > rows[i - 1].first))
            throw std::invalid_argument("fit_scaling_exponent: lambda must increase");
    const double n = static_cast<double>(rows.size());
    double sx = 0, sy = 0;
    for (const auto& [l, v] : rows) {
        if (!(l > 0.0) || !(v > 0.0))
            throw std::domain_error("fit_scaling_exponent: values must be positive");
        sx += std::log(l);
        sy += std::log(v);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (const auto& [l, v] : rows) {
        const double dx = std::log(l) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(v) - my);
    }
    ScalingFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rr = 0;
    for (const auto& [l, v] : rows) {
        const double e = std::log(v) - (f.intercept + f.slope * std::log(l));
        rr += e * e;
    }
    f.residual = std::sqrt(rr / n);
    return f;
}

// (1/2)(1/2 - 1/q) for 2 <= q <= 6, 2(1/2 - 1/q) - 1/2 for q >= 6
inline double delta_exponent(double q)
{
    if (!(q >= 2.0))
        throw std::domain_error("delta_exponent: q must be >= 2");
    const double iq = std::isinf(q) ? 0.0 : 1.0 / q;
    return q <= 6.0 ? 0.5 * (0.5 - iq) : 2.0 * (0.5 - iq) - 0.5;
}

struct SectorReport {
    double alpha = 0.0;
    double rho = 0.0;
    std::vector<double> sector;
    std::vector<double> cone_odd;
    double max_abs_diff = 0.0;
    bool matched = false;
};

// Dirichlet sector of opening alpha vs the odd (k >= 1) modes of the cone rho = alpha/pi
inline SectorReport sector_correspondence_check(double alpha, double lambda_max, double R = 1.0,
                                                double tol = 1e-9)
{
    if (!(alpha > 0.0 && alpha < 2.0 * pi))
        throw std::domain_error("sector_correspondence_check: alpha must lie in (0, 2 pi)");
    SectorReport rep;
    rep.alpha = alpha;
    rep.rho = alpha / pi;
    const double xmax = lambda_max * R;
    for (int n = 1;; ++n) {
        const double order = n * pi / alpha;
        if (order >= xmax)
            break;
        for (double j : bessel_zeros_below(order, xmax))
            rep.sector.push_back(j / R);
    }
    for (const auto& e : build_basis(TruncatedCone(rep.rho, R), lambda_max))
        if (e.k >= 1)
            rep.cone_odd.push_back(e.lambda);
    std::sort(rep.sector.begin(), rep.sector.end());
    std::sort(rep.cone_odd.begin(), rep.cone_odd.end());
    if (rep.sector.size() != rep.cone_odd.size()) {
        rep.max_abs_diff = INFINITY;
        return rep;
    }
    for (std::size_t i = 0; i < rep.sector.size(); ++i)
        rep.max_abs_diff = std::max(rep.max_abs_diff, std::abs(rep.sector[i] - rep.cone_odd[i]));
    rep.matched = rep.max_abs_diff <= tol;
    return rep;
}

} // namespace conewave
