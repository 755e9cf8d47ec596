#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>

#include "cone_geom.hpp"
#include "errors.hpp"
#include "fft.hpp"
#include "quadrature.hpp"
#include "special_fn.hpp"

namespace conewave {

// exp(-1/(1-x^2)) on (-1, 1)
inline double bump(double x)
{
    const double q = 1.0 - x * x;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

// smooth step: 1 for y <= 0, 0 for y >= 1
inline double smooth_step(double y)
{
    if (y <= 0.0)
        return 1.0;
    if (y >= 1.0)
        return 0.0;
    const double a = std::exp(-1.0 / (1.0 - y)), b = std::exp(-1.0 / y);
    return a / (a + b);
}

// 1 on |x| <= 1/4, 0 on |x| >= 1/2
inline double psi(double x) { return smooth_step(4.0 * std::abs(x) - 1.0); }

// 0 below w = 3, 1 above w = 6
inline double sigma_switch(double w) { return 1.0 - smooth_step((w - 3.0) / 3.0); }

// J_0(w) = Re(e^{iw} b(w)); b has the (1+w)^{-1/2-k} derivative decay
inline cplx b_amplitude(double w)
{
    if (w < 0.0)
        throw std::domain_error("b_amplitude: w must be nonnegative");
    const double s = sigma_switch(w);
    const double j0 = boost::math::cyl_bessel_j(0, w);
    const double y0 = s > 0.0 ? boost::math::cyl_neumann(0, w) : 0.0;
    return std::polar(1.0, -w) * cplx(j0, s * y0);
}

class ChiProfile {
public:
    explicit ChiProfile(double delta = 0.1) : delta_(delta)
    {
        if (!(delta > 0.0 && delta <= 0.25))
            throw std::domain_error("make_chi: delta must lie in (0, 1/4]");
        chi0_ = chi(0.0);
        if (!(chi0_ > 0.0))
            throw std::runtime_error("make_chi: chi(0) is not positive");
    }

    double delta() const { return delta_; }
    double chi0() const { return chi0_; }

    // B((|t| - 3 delta/2)/(delta/2)), supported in delta < |t| < 2 delta
    double chi_hat(double t) const { return bump((std::abs(t) - 1.5 * delta_) / (0.5 * delta_)); }

    // (1/pi) int_delta^{2 delta} chi_hat(t) cos(t xi) dt
    double chi(double xi) const
    {
        const int panels = 16 + static_cast<int>(std::ceil(std::abs(xi) * delta_ / 10.0));
        const Rule r = composite_uniform(delta_, 2.0 * delta_, panels, 24);
        CompensatedSum<double> s;
        for (std::size_t i = 0; i < r.size(); ++i)
            s.add(r.w[i] * chi_hat(r.x[i]) * std::cos(r.x[i] * xi));
        return s.value() / pi;
    }

    std::vector<double> sample(const std::vector<double>& xi) const
    {
        std::vector<double> out(xi.size());
        for (std::size_t i = 0; i < xi.size(); ++i)
            out[i] = chi(xi[i]);
        return out;
    }

private:
    double delta_;
    double chi0_ = 0.0;
};

inline ChiProfile make_chi(double delta) { return ChiProfile(delta); }

// a_lambda(zeta) = int e^{-i tau zeta} chi(tau) psi(tau/lambda) b(zeta (lambda - tau)) d tau
class Amplitude {
public:
    Amplitude(const ChiProfile& chi, double lambda) : chi_(chi), lambda_(lambda)
    {
        if (!(lambda >= 1.0))
            throw std::domain_error("a_lambda: lambda must be >= 1");
        const double half = 0.5 * lambda;
        const int panels = std::max(8, static_cast<int>(std::ceil(lambda / 5.0)));
        const Rule r = composite_uniform(-half, half, panels, 16);
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double p = psi(r.x[i] / lambda);
            if (p == 0.0)
                continue;
            tau_.push_back(r.x[i]);
            w_.push_back(r.w[i] * p * chi.chi(r.x[i]));
        }
    }

    double lambda() const { return lambda_; }
    const ChiProfile& chi() const { return chi_; }

    cplx operator()(double zeta) const
    {
        if (zeta < 0.0)
            throw std::domain_error("a_lambda: zeta must be nonnegative");
        CompensatedSum<cplx> s;
        for (std::size_t i = 0; i < tau_.size(); ++i)
            s.add(w_[i] * std::polar(1.0, -tau_[i] * zeta) * b_amplitude(zeta * (lambda_ - tau_[i])));
        return s.value();
    }

private:
    ChiProfile chi_;
    double lambda_;
    std::vector<double> tau_;
    std::vector<double> w_;
};

inline cplx a_lambda(const ChiProfile& chi, double lambda, double zeta) { return Amplitude(chi, lambda)(zeta); }

// single value through chi-hat: (1/2pi) int chi_hat(s) lambda int e^{-i lambda tau (zeta - s)} b(lambda zeta (1-tau)) psi(tau) d tau ds;
// cost grows like lambda rather than lambda^{3/2}, so this is the route for isolated points at large lambda
inline cplx a_lambda_point(const ChiProfile& chi, double lambda, double zeta)
{
    if (!(lambda >= 1.0))
        throw std::domain_error("a_lambda: lambda must be >= 1");
    if (zeta < 0.0)
        throw std::domain_error("a_lambda: zeta must be nonnegative");
    const double d = chi.delta();
    const Rule pos = composite_uniform(d, 2.0 * d, 12, 24);
    const int panels = 16 + static_cast<int>(std::ceil(lambda * (zeta + 2.0 * d) / 4.0));
    const Rule inner = composite_uniform(-0.5, 0.5, panels, 20);
    std::vector<cplx> bp(inner.size());
    for (std::size_t j = 0; j < inner.size(); ++j)
        bp[j] = inner.w[j] * psi(inner.x[j]) * b_amplitude(lambda * zeta * (1.0 - inner.x[j]));
    CompensatedSum<cplx> acc;
    for (double sg : {1.0, -1.0})
        for (std::size_t i = 0; i < pos.size(); ++i) {
            const double s = sg * pos.x[i];
            const double eta = lambda * (zeta - s);
            cplx in = 0.0;
            for (std::size_t j = 0; j < inner.size(); ++j)
                in += bp[j] * std::polar(1.0, -inner.x[j] * eta);
            acc.add(pos.w[i] * chi.chi_hat(s) * lambda * in);
        }
    return acc.value() / (2.0 * pi);
}

// piecewise Chebyshev interpolant of a complex function on [lo, hi]
class ChebTable {
public:
    ChebTable() = default;
    ChebTable(const std::function<cplx(double)>& f, double lo, double hi, int panels, int n = 16)
        : lo_(lo), hi_(hi), panels_(panels), n_(n)
    {
        if (!(hi > lo) || panels < 1 || n < 2)
            throw std::invalid_argument("ChebTable: bad range or sizes");
        h_ = (hi - lo) / panels;
        for (int k = 0; k < n; ++k) {
            x_.push_back(std::cos(pi * (2 * k + 1) / (2.0 * n)));
            bw_.push_back((k % 2 ? -1.0 : 1.0) * std::sin(pi * (2 * k + 1) / (2.0 * n)));
        }
        v_.resize(static_cast<std::size_t>(panels) * n);
        for (int p = 0; p < panels; ++p)
            for (int k = 0; k < n; ++k)
                v_[static_cast<std::size_t>(p) * n + k] = f(lo + h_ * (p + 0.5 * (1.0 + x_[k])));
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }

    cplx operator()(double x) const
    {
        if (x < lo_ || x > hi_)
            throw std::domain_error("ChebTable: argument outside the tabulated range");
        const int p = std::min(panels_ - 1, static_cast<int>((x - lo_) / h_));
        const double u = 2.0 * (x - lo_ - h_ * p) / h_ - 1.0;
        cplx num = 0.0;
        double den = 0.0;
        for (int k = 0; k < n_; ++k) {
            const double d = u - x_[k];
            if (d == 0.0)
                return v_[static_cast<std::size_t>(p) * n_ + k];
            const double c = bw_[k] / d;
            num += c * v_[static_cast<std::size_t>(p) * n_ + k];
            den += c;
        }
        return num / den;
    }

private:
    double lo_ = 0.0, hi_ = 1.0, h_ = 1.0;
    int panels_ = 1, n_ = 16;
    std::vector<double> x_, bw_;
    std::vector<cplx> v_;
};

// a_lambda tabulated on [0, zeta_max]; panels of width ~1/lambda
inline ChebTable amplitude_table(const Amplitude& a, double zeta_max)
{
    const int panels = std::max(4, static_cast<int>(std::ceil(zeta_max * a.lambda())));
    return ChebTable([&](double z) { return a(z); }, 0.0, zeta_max, panels, 24);
}

struct R2KernelValue {
    double full = 0.0;      // lambda int chi(tau) sgn(lambda - tau) J_0(z |lambda - tau|) d tau
    double main = 0.0;      // Re(lambda e^{i lambda z} a_lambda(z))
    double remainder = 0.0; // full - main
};

// full kernel by the t-route: (2/pi) lambda int_z^inf sin(t lambda)(t^2 - z^2)^{-1/2} chi_hat(t) dt,
// which vanishes identically for z >= 2 delta
inline double r2_cluster_kernel_full(const ChiProfile& chi, double lambda, double z)
{
    if (!(z > 0.0))
        throw std::domain_error("r2_cluster_kernel: z must be positive");
    const double d = chi.delta();
    if (z >= 2.0 * d)
        return 0.0;
    // t^2 = z^2 + v^2 removes the inverse square root
    const double v0 = z < d ? std::sqrt(d * d - z * z) : 0.0;
    const double v1 = std::sqrt(4.0 * d * d - z * z);
    const int panels = 8 + static_cast<int>(std::ceil(lambda * (v1 - v0) / 4.0));
    const Rule r = composite_uniform(v0, v1, panels, 16);
    CompensatedSum<double> s;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double t = std::hypot(z, r.x[i]);
        s.add(r.w[i] * std::sin(t * lambda) * chi.chi_hat(t) / t);
    }
    return 2.0 / pi * lambda * s.value();
}

inline R2KernelValue r2_cluster_kernel(const Amplitude& a, double z)
{
    if (!(a.lambda() >= 10.0))
        throw std::domain_error("r2_cluster_kernel: lambda must be >= 10");
    R2KernelValue v;
    v.full = r2_cluster_kernel_full(a.chi(), a.lambda(), z);
    v.main = std::real(a.lambda() * std::polar(1.0, a.lambda() * z) * a(z));
    v.remainder = v.full - v.main;
    return v;
}

// 1_{[-pi, pi]}(theta) e^{i lambda G} a_lambda(G)
template <class A>
cplx cone_geo_cluster_kernel(const A& amp, double lambda, double r1, double r2, double theta)
{
    if (!(lambda >= 10.0))
        throw std::domain_error("cone_geo_cluster_kernel: lambda must be >= 10");
    if (std::abs(theta) > pi)
        return 0.0;
    const double G = chord(r1, r2, theta);
    return std::polar(1.0, lambda * G) * amp(G);
}

struct OscValue {
    cplx value = 0.0;
    double error_estimate = 0.0;
};

namespace detail {

// sin(theta/rho)/(cosh(s/rho) - cos(theta/rho)) with the denominator written as a sum of squares
inline double diff_bracket(double s, double theta, double rho)
{
    const double a = std::sinh(0.5 * s / rho), b = std::sin(0.5 * theta / rho);
    return std::sin(theta / rho) / (2.0 * (a * a + b * b));
}

} // namespace detail

// int_0^inf e^{i lambda D(s)} bracket(s) a_lambda(D(s)) ds, truncated where D(s) leaves the table
template <class A>
OscValue diff_cluster_kernel(const A& amp, double lambda, double r1, double r2, double theta, const Cone& cone,
                             double zeta_max, int nodes = 16)
{
    if (!(r1 > 0.0) || !(r2 > 0.0))
        throw std::domain_error("diff_cluster_kernel: radii must be positive");
    const double rho = cone.rho;
    const double gap = std::abs(std::remainder(theta / rho, 2.0 * pi));
    if (gap < 1e-12)
        throw SingularConfiguration("diff_cluster_kernel: theta/rho is a multiple of 2 pi");
    OscValue out;
    if (std::abs(std::sin(theta / rho)) == 0.0)
        return out;
    const double a = r1 + r2;
    if (zeta_max <= a)
        return out;
    // D(s_end) = zeta_max
    const double s_end = std::acosh(1.0 + (zeta_max * zeta_max - a * a) / (2.0 * r1 * r2));

    // panels: resolve the bracket peak (width rho * gap), the stationary point (lambda r1 r2)^{-1/2},
    // and keep the phase change per panel below ~pi
    const double focus = rho * gap;
    const double sstar = 1.0 / std::sqrt(lambda * r1 * r2);
    std::vector<double> edges{0.0};
    double s = 0.0;
    while (s < s_end) {
        const double dphase = lambda * dD_ds(r1, r2, s);
        double h = std::max(0.5 * std::max(s, focus), 1e-3 * sstar);
        h = std::min({h, 0.5 * sstar + 0.5 * s, 0.25});
        if (dphase > 0.0)
            h = std::min(h, pi / dphase);
        s = std::min(s_end, s + h);
        edges.push_back(s);
    }
    auto integrate = [&](int n) {
        const Rule r = composite(edges, n);
        CompensatedSum<cplx> acc;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double Dv = D(r1, r2, r.x[i]);
            acc.add(r.w[i] * std::polar(1.0, lambda * Dv) * detail::diff_bracket(r.x[i], theta, rho) * amp(Dv));
        }
        return acc.value();
    };
    out.value = integrate(nodes);
    const cplx fine = integrate(2 * nodes);
    out.error_estimate = std::max(std::abs(fine - out.value), 4.0 * std::numeric_limits<double>::epsilon() * std::abs(out.value));
    return out;
}

// H(theta) = C_H int_0^inf e^{i mu s^2} theta/(s^2 + theta^2) ds, C_H = 2 rho (r1+r2)^{1/2} a_lambda(r1+r2)
inline cplx h_prefactor(double rho, double r1, double r2, cplx a_sum)
{
    return 2.0 * rho * std::sqrt(r1 + r2) * a_sum;
}

inline void check_h_regime(double lambda, double r1, double r2, double delta)
{
    if (!(r1 >= 1.0 / lambda) || !(r2 >= 1.0 / lambda))
        throw RegimeError("H: need r1, r2 >= 1/lambda");
    if (!(r1 + r2 > 0.5 * delta && r1 + r2 < 2.0 * delta))
        throw RegimeError("H: need r1 + r2 in (delta/2, 2 delta)");
}

// int_0^inf e^{i mu s^2} theta/(s^2+theta^2) ds on the contour s = e^{i pi/4} u
inline cplx h_integral_direct(double mu, double theta)
{
    if (!(mu > 0.0))
        throw std::domain_error("h_integral_direct: mu must be positive");
    if (theta == 0.0)
        return 0.0;
    const double th = std::abs(theta);
    const double umax = std::sqrt(45.0 / mu);
    const double first = std::min(th, 1.0 / std::sqrt(mu)) / 4.0;
    std::vector<double> edges = first < umax / 4.0 ? geometric_edges(0.0, first, umax, std::max(4, static_cast<int>(std::ceil(std::log2(umax / first))) + 2))
                                                   : std::vector<double>{0.0, umax};
    const Rule r = composite(edges, 24);
    CompensatedSum<cplx> acc;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double u = r.x[i];
        acc.add(r.w[i] * std::exp(-mu * u * u) * th / cplx(th * th, u * u));
    }
    const cplx v = std::polar(1.0, pi / 4) * acc.value();
    return theta > 0.0 ? v : -v;
}

template <class A>
cplx H_approx(const A& amp, double lambda, double r1, double r2, double theta, double rho, double delta)
{
    check_h_regime(lambda, r1, r2, delta);
    return h_prefactor(rho, r1, r2, amp(r1 + r2)) * h_integral_direct(lambda * r1 * r2, theta);
}

// -i sgn(xi) e^{-s |xi|}
inline cplx conjugate_poisson_multiplier(double s, double xi)
{
    if (!(s > 0.0))
        throw std::domain_error("conjugate_poisson_multiplier: s must be positive");
    if (xi == 0.0)
        return 0.0;
    return cplx(0.0, xi > 0.0 ? -1.0 : 1.0) * std::exp(-s * std::abs(xi));
}

// Fourier transform in theta of int_0^inf e^{i mu s^2} theta/(s^2+theta^2) ds, i.e. H with C_H = 1:
// (pi/2) e^{-i pi/4} sgn(xi) mu^{-1/2} F(e^{i pi/4} |xi| / sqrt(mu))
inline cplx h_symbol(double mu, double xi)
{
    if (!(mu > 0.0))
        throw std::domain_error("H_multiplier: lambda r1 r2 must be positive");
    if (xi == 0.0)
        return 0.0;
    const double sg = xi > 0.0 ? 1.0 : -1.0;
    return sg * (0.5 * pi) * std::polar(1.0, -pi / 4) / std::sqrt(mu)
           * kummer_F(KummerRayPoint(std::abs(xi) / std::sqrt(mu)));
}

// the same symbol by termwise summation of (-|xi|)^k/k! int_0^inf e^{i mu s^2} s^k ds
inline cplx h_symbol_series(double mu, double xi, int terms = 80)
{
    if (xi == 0.0)
        return 0.0;
    const double sg = xi > 0.0 ? 1.0 : -1.0;
    CompensatedSum<cplx> s;
    double c = 1.0; // (-|xi|)^k / k!
    for (int k = 0; k < terms; ++k) {
        s.add(c * fresnel_moment(k, mu));
        c *= -std::abs(xi) / (k + 1);
    }
    return sg * cplx(0.0, -pi) * s.value();
}

template <class A>
cplx H_multiplier(const A& amp, double lambda, double r1, double r2, double xi, double rho)
{
    return h_prefactor(rho, r1, r2, amp(r1 + r2)) * h_symbol(lambda * r1 * r2, xi);
}

// (i/pi) int_0^inf h_symbol(xi) sin(theta xi) d xi, with the 1/xi tail subtracted in closed form
inline cplx h_integral_multiplier(double mu, double theta)
{
    if (theta == 0.0)
        return 0.0;
    const double th = std::abs(theta);
    const double kappa = std::sqrt(mu);
    const cplx A(0.0, -pi); // h_symbol ~ A / xi
    auto rem = [&](double xi) { return h_symbol(mu, xi) - A * xi / (xi * xi + kappa * kappa); };
    const double top = 199.0 * kappa; // kummer_F range ends at |z| = 200
    const double width = std::min(0.25 * kappa, 0.5 * pi / th);
    const int panels = static_cast<int>(std::ceil(top / width));
    const Rule r = composite_uniform(0.0, top, panels, 16);
    CompensatedSum<cplx> acc;
    for (std::size_t i = 0; i < r.size(); ++i)
        acc.add(r.w[i] * rem(r.x[i]) * std::sin(th * r.x[i]));
    // beyond `top` the remainder is (2 pi - i pi) kappa^2 / xi^3 to leading order
    const cplx c3(2.0 * pi * mu, -pi * mu);
    CompensatedSum<cplx> tail;
    {
        const double span = 40.0 * top;
        const int tp = static_cast<int>(std::ceil((span - top) / width));
        const Rule rt = composite_uniform(top, span, std::min(tp, 200000), 8);
        for (std::size_t i = 0; i < rt.size(); ++i)
            tail.add(rt.w[i] * c3 / (rt.x[i] * rt.x[i] * rt.x[i]) * std::sin(th * rt.x[i]));
    }
    acc.add(tail.value());
    const cplx base = acc.value() + A * (0.5 * pi) * std::exp(-kappa * th);
    const cplx v = cplx(0.0, 1.0 / pi) * base;
    return theta > 0.0 ? v : -v;
}

template <class A>
cplx H_via_multiplier(const A& amp, double lambda, double r1, double r2, double theta, double rho, double delta)
{
    check_h_regime(lambda, r1, r2, delta);
    return h_prefactor(rho, r1, r2, amp(r1 + r2)) * h_integral_multiplier(lambda * r1 * r2, theta);
}

struct EnvelopeReport {
    double mu = 0.0;
    double plateau_const = 0.0; // sup |m| mu^{1/2} over |xi| <= mu^{1/2}
    double tail_const = 0.0;    // sup |m| |xi| over |xi| >= 10 mu^{1/2}
    double middle_const = 0.0;  // sup |m| |xi| over the crossover
    double constant = 0.0;      // max of the three
};

// two-regime envelope of the normalised symbol on a log grid
inline EnvelopeReport multiplier_envelope(double mu, int points = 400)
{
    EnvelopeReport e;
    e.mu = mu;
    const double k = std::sqrt(mu);
    const double lo = 1e-3 * k, hi = 150.0 * k;
    for (int i = 0; i < points; ++i) {
        const double xi = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
        const double m = std::abs(h_symbol(mu, xi));
        if (xi <= k)
            e.plateau_const = std::max(e.plateau_const, m * k);
        else if (xi >= 10.0 * k)
            e.tail_const = std::max(e.tail_const, m * xi);
        else
            e.middle_const = std::max(e.middle_const, m * xi);
    }
    e.constant = std::max({e.plateau_const, e.tail_const, e.middle_const});
    return e;
}

// Phi = 1 on |xi| <= 1, 0 on |xi| >= 3/2
inline double lp_phi(double xi) { return smooth_step(2.0 * (std::abs(xi) - 1.0)); }

// beta_0 = Phi(2 xi), beta_l = Phi(2^{1-l} xi) - Phi(2^{2-l} xi), last band takes the remainder
inline std::vector<std::vector<double>> littlewood_paley(const std::vector<double>& xi, int ell_max)
{
    if (ell_max < 1)
        throw std::invalid_argument("littlewood_paley: ell_max must be >= 1");
    std::vector<std::vector<double>> out(ell_max + 1, std::vector<double>(xi.size()));
    for (std::size_t i = 0; i < xi.size(); ++i) {
        out[0][i] = lp_phi(2.0 * xi[i]);
        for (int l = 1; l < ell_max; ++l)
            out[l][i] = lp_phi(std::ldexp(xi[i], 1 - l)) - lp_phi(std::ldexp(xi[i], 2 - l));
        out[ell_max][i] = 1.0 - lp_phi(std::ldexp(xi[i], 2 - ell_max));
    }
    return out;
}

inline double lp_beta(int ell, double xi)
{
    if (ell == 0)
        return lp_phi(2.0 * xi);
    return lp_phi(std::ldexp(xi, 1 - ell)) - lp_phi(std::ldexp(xi, 2 - ell));
}

struct SobolevReport {
    double norm6 = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
    bool high_branch = false;
};

// f on the circle of length 2 pi rho, f(theta) = sum_k c_k e^{i k theta / rho}, k = -K..K stored at K + k.
// Computes || H_l * f ||_6 with the normalised symbol, and the piecewise bound.
inline SobolevReport sobolev_piece_bound(double lambda, double r1, double r2, int ell,
                                         const std::vector<cplx>& f_coeffs, double rho = 1.0)
{
    if (ell < 0)
        throw std::invalid_argument("sobolev_piece_bound: ell must be >= 0");
    if (f_coeffs.size() % 2 != 1)
        throw std::invalid_argument("sobolev_piece_bound: coefficients must be indexed -K..K");
    const double mu = lambda * r1 * r2;
    const int K = static_cast<int>(f_coeffs.size() / 2);
    int n = 16;
    while (n < 8 * (K + 1))
        n *= 2;
    std::vector<cplx> g(n, 0.0);
    double l2 = 0.0;
    for (int k = -K; k <= K; ++k) {
        const double xi = k / rho;
        const cplx bf = lp_beta(ell, xi) * f_coeffs[K + k];
        l2 += std::norm(bf);
        g[((k % n) + n) % n] = h_symbol(mu, xi) * bf;
    }
    dft(g, +1);
    const double dth = 2.0 * pi * rho / n;
    double s6 = 0.0;
    for (const auto& z : g)
        s6 += std::pow(std::norm(z), 3.0);
    SobolevReport rep;
    rep.norm6 = std::pow(s6 * dth, 1.0 / 6.0);
    const double l2norm = std::sqrt(2.0 * pi * rho * l2);
    rep.high_branch = std::ldexp(1.0, ell) > std::sqrt(mu);
    rep.bound = (rep.high_branch ? std::pow(2.0, -2.0 * ell / 3.0) : std::pow(mu, -0.5) * std::pow(2.0, ell / 3.0)) * l2norm;
    rep.ratio = rep.bound > 0.0 ? rep.norm6 / rep.bound : 0.0;
    return rep;
}

struct YoungReport {
    double norm = 0.0;
    double envelope = 0.0;
    double ratio = 0.0;
};

// L^q norm over the circle of length 2 pi rho of sin(theta/rho)/(cosh(s/rho) - cos(theta/rho))
inline YoungReport theta_young_norm(double s, double rho, double q)
{
    if (!(s > 0.0))
        throw std::domain_error("theta_young_norm: s must be positive");
    if (!(q >= 1.0))
        throw std::domain_error("theta_young_norm: q must be >= 1");
    // phi = theta/rho in (0, pi), doubled by symmetry; the peak sits at phi ~ s/rho
    const double w = s / rho;
    std::vector<double> edges = w < 0.25 ? geometric_edges(0.0, 0.25 * w, pi, std::max(6, static_cast<int>(std::ceil(std::log2(4.0 * pi / w))) + 2))
                                         : std::vector<double>{0.0, 0.5 * pi, pi};
    const Rule r = composite(edges, 24);
    CompensatedSum<double> acc;
    for (std::size_t i = 0; i < r.size(); ++i)
        acc.add(r.w[i] * std::pow(std::abs(detail::diff_bracket(s, rho * r.x[i], rho)), q));
    YoungReport rep;
    rep.norm = std::pow(2.0 * rho * acc.value(), 1.0 / q);
    rep.envelope = s < 1.0 ? std::pow(s, 1.0 / q - 1.0) : std::exp(-s / rho);
    rep.ratio = rep.norm / rep.envelope;
    return rep;
}

} // namespace conewave
