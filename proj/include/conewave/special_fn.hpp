#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/tools/roots.hpp>

namespace conewave {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

// Neumaier variant of Kahan summation
template <typename T>
struct CompensatedSum {
    T sum{};
    T carry{};

    void add(T x)
    {
        T t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    T value() const { return sum + carry; }
};

template <typename T>
struct CompensatedSum<std::complex<T>> {
    CompensatedSum<T> re, im;

    void add(std::complex<T> z)
    {
        re.add(z.real());
        im.add(z.imag());
    }
    std::complex<T> value() const { return {re.value(), im.value()}; }
};

// Lanczos approximation, g = 7, n = 9
inline double gamma(double x)
{
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::domain_error("gamma: argument must be positive and finite");
    if (x < 0.5)
        return pi / (std::sin(pi * x) * gamma(1.0 - x));

    static constexpr double c[9] = {
        0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,   12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

    x -= 1.0;
    double a = c[0];
    for (int i = 1; i < 9; ++i)
        a += c[i] / (x + i);
    const double t = x + 7.5;
    const double half = std::pow(t, 0.5 * (x + 0.5));
    return std::sqrt(2.0 * pi) * half * (std::exp(-t) * half) * a;
}

struct BesselOrder {
    double nu = 0.0;

    BesselOrder() = default;
    BesselOrder(double v) : nu(v)
    {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::domain_error("BesselOrder: order must be finite and nonnegative");
    }
    operator double() const { return nu; }
};

namespace detail {

inline double bessel_series_limit(double nu)
{
    return std::max(12.0, 2.0 * std::sqrt(nu + 1.0));
}

// ascending series (x/2)^nu / Gamma(nu+1) * sum (-x^2/4)^k / (k! (nu+1)_k)
inline double bessel_j_series(double nu, double x)
{
    const double y = -0.25 * x * x;
    CompensatedSum<double> acc;
    double term = 1.0;
    acc.add(term);
    for (int k = 1; k < 500; ++k) {
        term *= y / (k * (nu + k));
        acc.add(term);
        if (std::abs(term) < 1e-18 * std::abs(acc.value()) && k > -y / (nu + 1.0))
            break;
    }
    const double pref = (nu == 0.0)
        ? 1.0
        : std::exp(nu * std::log(0.5 * x) - std::lgamma(nu + 1.0));
    return pref * acc.value();
}

} // namespace detail

inline double bessel_j(BesselOrder order, double x)
{
    if (!(x >= 0.0))
        throw std::domain_error("bessel_j: argument must be nonnegative");
    const double nu = order.nu;
    if (x == 0.0)
        return nu == 0.0 ? 1.0 : 0.0;
    if (x <= detail::bessel_series_limit(nu))
        return detail::bessel_j_series(nu, x);
    return boost::math::cyl_bessel_j(nu, x);
}

inline double bessel_j_prime(BesselOrder order, double x)
{
    const double nu = order.nu;
    if (x == 0.0)
        return nu == 1.0 ? 0.5 : (nu == 0.0 || nu > 1.0 ? 0.0 : INFINITY);
    return nu / x * bessel_j(nu, x) - bessel_j(nu + 1.0, x);
}

namespace detail {

inline constexpr double zero_scan_step = 1.5;

inline double refine_zero(double nu, double a, double b)
{
    auto f = [nu](double x) {
        return std::make_tuple(bessel_j(nu, x), bessel_j_prime(nu, x));
    };
    std::uintmax_t iters = 100;
    return boost::math::tools::newton_raphson_iterate(f, 0.5 * (a + b), a, b, 52, iters);
}

} // namespace detail

// Appends consecutive zeros of J_nu to `zeros` until it holds `count` entries
// or the last zero exceeds `xmax`. Scan nodes are x_i = nu + i*h.
inline void extend_bessel_zeros(double nu, std::vector<double>& zeros,
                                std::size_t count, double xmax)
{
    const double h = detail::zero_scan_step;
    long i = 0;
    if (!zeros.empty())
        i = static_cast<long>(std::floor((zeros.back() - nu) / h)) + 1;
    double xa = nu + i * h;
    double fa = bessel_j(nu, xa);
    while (zeros.size() < count && (zeros.empty() || zeros.back() <= xmax)) {
        const double xb = nu + (i + 1) * h;
        const double fb = bessel_j(nu, xb);
        if (fa == 0.0 && xa > 0.0) {
            zeros.push_back(xa);
        } else if ((fa < 0.0) != (fb < 0.0) && fb != 0.0) {
            zeros.push_back(detail::refine_zero(nu, xa, xb));
        }
        xa = xb;
        fa = fb;
        ++i;
    }
}

inline double bessel_zero(BesselOrder order, int m)
{
    if (m < 1)
        throw std::domain_error("bessel_zero: index must be positive");
    std::vector<double> z;
    extend_bessel_zeros(order.nu, z, static_cast<std::size_t>(m), INFINITY);
    return z.back();
}

// all zeros of J_nu in (0, xmax]
inline std::vector<double> bessel_zeros_below(BesselOrder order, double xmax)
{
    std::vector<double> z;
    extend_bessel_zeros(order.nu, z, SIZE_MAX, xmax);
    while (!z.empty() && z.back() > xmax)
        z.pop_back();
    return z;
}

struct KummerRayPoint {
    double magnitude = 0.0;

    KummerRayPoint() = default;
    explicit KummerRayPoint(double m) : magnitude(m)
    {
        if (!(m >= 0.0) || !std::isfinite(m))
            throw std::domain_error("KummerRayPoint: magnitude must be finite and nonnegative");
    }

    static KummerRayPoint from_complex(cplx z, double tol = 1e-12)
    {
        const double m = std::abs(z);
        if (m > 0.0 && std::abs(std::arg(z) - 0.25 * pi) > tol)
            throw std::domain_error("kummer_F: point is off the arg(z) = pi/4 ray");
        return KummerRayPoint(m);
    }

    cplx z() const { return std::polar(magnitude, 0.25 * pi); }
};

inline constexpr double kummer_switch_radius = 8.0;

// F(z) = sqrt(pi) e^{w} - (2/z) sum_{l>=1} w^l/(1/2)_l,  w = z^2/4
inline cplx kummer_F_series(KummerRayPoint p)
{
    using ld = long double;
    using lc = std::complex<ld>;
    if (p.magnitude == 0.0)
        return {std::sqrt(pi), 0.0};
    const lc z = std::polar(static_cast<ld>(p.magnitude), std::numbers::pi_v<ld> / 4);
    const lc w = z * z / ld(4);
    CompensatedSum<lc> even, odd;
    lc te = 1, to = 1;
    even.add(te);
    const ld wabs = std::abs(w);
    for (int l = 1; l < 4000; ++l) {
        te *= w / ld(l);
        to *= w / (ld(l) - ld(0.5));
        even.add(te);
        odd.add(to);
        if (l > wabs && std::abs(to) < ld(1e-22) && std::abs(te) < ld(1e-22))
            break;
    }
    const lc f = std::sqrt(std::numbers::pi_v<ld>) * even.value() - ld(2) / z * odd.value();
    return {static_cast<double>(f.real()), static_cast<double>(f.imag())};
}

// continued fraction for sqrt(pi) e^{zeta^2} erfc(zeta), zeta = z/2:
// 1/(zeta + (1/2)/(zeta + 1/(zeta + (3/2)/(zeta + ...))))
inline cplx kummer_F_asymptotic(KummerRayPoint p)
{
    const cplx zeta = 0.5 * p.z();
    const double tiny = 1e-300;
    cplx f = zeta;
    cplx C = f, D = 0.0;
    for (int n = 1; n < 20000; ++n) {
        const double a = 0.5 * n;
        D = zeta + a * D;
        if (std::abs(D) < tiny) D = tiny;
        D = 1.0 / D;
        C = zeta + a / C;
        if (std::abs(C) < tiny) C = tiny;
        const cplx delta = C * D;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16)
            break;
    }
    return 1.0 / f;
}

inline cplx kummer_F(KummerRayPoint p)
{
    if (p.magnitude > 200.0)
        throw std::domain_error("kummer_F: magnitude exceeds 200");
    if (p.magnitude <= kummer_switch_radius)
        return kummer_F_series(p);
    return kummer_F_asymptotic(p);
}

// int_0^inf e^{i mu s^2} s^k ds
inline cplx fresnel_moment(int k, double mu)
{
    if (k < 0)
        throw std::domain_error("fresnel_moment: k must be nonnegative");
    if (!(mu > 0.0))
        throw std::domain_error("fresnel_moment: mu must be positive");
    const double e = 0.5 * (k + 1);
    return 0.5 * gamma(e) * std::polar(std::pow(mu, -e), 0.5 * pi * e);
}

} // namespace conewave
