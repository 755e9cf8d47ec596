#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cone_geom.hpp"
#include "errors.hpp"
#include "fft.hpp"
#include "quadrature.hpp"
#include "spectrum.hpp"

namespace conewave {

struct GeomValue {
    double value = 0.0;
    bool singular = false;
    int images = 0;
};

// sum over images of (t^2 - chord^2)_+^{-1/2}; the bare sum, without 1/(2 pi)
inline GeomValue geom_kernel(double t, const PolarPoint& p1, const PolarPoint& p2, const Cone& cone)
{
    if (!(t > 0.0))
        throw std::domain_error("geom_kernel: t must be positive");
    GeomValue out;
    const double tol = 1e-12 * std::max(1.0, t);
    for (double v : image_angles(p1.theta, p2.theta, cone)) {
        ++out.images;
        const double c = chord(p1.r, p2.r, v);
        if (std::abs(t - c) <= tol) {
            out.singular = true;
            continue;
        }
        if (c < t)
            out.value += 1.0 / std::sqrt((t - c) * (t + c));
    }
    if (out.singular)
        out.value = std::numeric_limits<double>::infinity();
    return out;
}

struct DiffValue {
    double value = 0.0;
    double error_estimate = 0.0;
};

namespace detail {

// distance of phi to 2 pi Z
inline double phase_gap(double phi) { return std::abs(std::remainder(phi, 2.0 * pi)); }

inline double sinhc(double u) { return std::abs(u) < 1e-4 ? 1.0 + u * u / 6.0 : std::sinh(u) / u; }

} // namespace detail

// Nodes for int_0^beta (alpha - cosh s)^{-1/2} B(s) ds at fixed (t, r1, r2). The prefactor
// -1/(4 pi^2 rho sqrt(2 r1 r2)) is folded into the weights; B depends on theta1 - theta2 only.
class DiffQuadrature {
public:
    // `focus` is the width rho * gap of the narrowest bracket peak at s = 0
    DiffQuadrature(double t, double r1, double r2, double rho, int n, double focus = INFINITY)
        : rho_(rho)
    {
        if (!(r1 > 0.0) || !(r2 > 0.0))
            throw std::domain_error("diff_kernel: radii must be positive");
        if (t <= r1 + r2)
            return;
        const DiffractionGeometry g = diffraction_geometry(t, r1, r2, 0.0, Cone(rho));
        const double beta = g.beta;
        if (!(beta > 0.0))
            return;
        const double pref = -1.0 / (4.0 * pi * pi * rho * std::sqrt(2.0 * r1 * r2));
        const double split = 0.5 * beta;

        // (alpha - cosh s) = 2 sinh((beta+s)/2) sinh((beta-s)/2), written without cancellation
        auto gap = [&](double s) {
            return 2.0 * std::sinh(0.5 * (beta + s)) * std::sinh(0.5 * (beta - s));
        };

        std::vector<double> edges{0.0, split};
        if (focus < 0.25 * split)
            edges = geometric_edges(0.0, focus, split, std::max(2, static_cast<int>(std::ceil(std::log2(split / focus))) + 1));
        const Rule front = composite(edges, n);
        for (std::size_t i = 0; i < front.size(); ++i)
            push(front.x[i], pref * front.w[i] / std::sqrt(gap(front.x[i])));

        // weight (beta - s)^{-1/2} on [split, beta]
        const Rule& gj = gauss_jacobi(n, -0.5, 0.0);
        const double half = 0.5 * (beta - split);
        for (std::size_t i = 0; i < gj.size(); ++i) {
            const double s = split + half * (1.0 + gj.x[i]);
            const double u = 0.5 * (beta - s);
            // (beta - s)^{1/2} (alpha - cosh s)^{-1/2} = (sinh((beta+s)/2) sinhc(u))^{-1/2}
            const double h = std::sinh(0.5 * (beta + s)) * detail::sinhc(u);
            push(s, pref * std::sqrt(half) * gj.w[i] / std::sqrt(h));
        }
    }

    bool empty() const { return w_.empty(); }
    std::size_t size() const { return w_.size(); }

    // bracket sum for phi1, phi2
    double value(double phi1, double phi2) const
    {
        const double a1 = std::sin(0.5 * phi1), a2 = std::sin(0.5 * phi2);
        const double s1 = std::sin(phi1), s2 = std::sin(phi2);
        const double c1 = 2.0 * a1 * a1, c2 = 2.0 * a2 * a2;
        CompensatedSum<double> acc;
        for (std::size_t i = 0; i < w_.size(); ++i) {
            // cosh(s/rho) - cos(phi) = 2 sinh^2(s/(2 rho)) + 2 sin^2(phi/2)
            acc.add(w_[i] * (s1 / (sh_[i] + c1) + s2 / (sh_[i] + c2)));
        }
        return acc.value();
    }

private:
    void push(double s, double w)
    {
        const double h = std::sinh(0.5 * s / rho_);
        sh_.push_back(2.0 * h * h);
        w_.push_back(w);
    }

    double rho_;
    std::vector<double> sh_;
    std::vector<double> w_;
};

inline DiffValue diff_kernel(double t, const PolarPoint& p1, const PolarPoint& p2, const Cone& cone,
                             int nodes = 32)
{
    if (!(p1.r > 0.0) || !(p2.r > 0.0))
        throw std::domain_error("diff_kernel: radii must be positive");
    if (t <= p1.r + p2.r)
        return {};
    const DiffractionGeometry g = diffraction_geometry(t, p1.r, p2.r, p1.theta - p2.theta, cone);
    const double gap = std::min(detail::phase_gap(g.phi1), detail::phase_gap(g.phi2));
    if (gap < 1e-12)
        throw SingularConfiguration("diff_kernel: phi1 or phi2 is a multiple of 2 pi");
    const double focus = cone.rho * gap;
    const double v1 = DiffQuadrature(t, p1.r, p2.r, cone.rho, nodes, focus).value(g.phi1, g.phi2);
    const double v2 = DiffQuadrature(t, p1.r, p2.r, cone.rho, 2 * nodes, focus).value(g.phi1, g.phi2);
    DiffValue out;
    out.value = v1;
    out.error_estimate = std::max(std::abs(v2 - v1), 4.0 * std::numeric_limits<double>::epsilon() * std::abs(v1));
    return out;
}

// kernel of sin(t sqrt(Delta))/sqrt(Delta): geometric part with the 1/(2 pi) of the plane, plus diffracted part
inline double propagator_kernel(double t, const PolarPoint& p1, const PolarPoint& p2, const Cone& cone)
{
    const GeomValue g = geom_kernel(t, p1, p2, cone);
    return g.value / (2.0 * pi) + diff_kernel(t, p1, p2, cone).value;
}

struct KernelSample {
    double t = 0.0;
    PolarPoint p1, p2;
    double geom_value = 0.0;
    bool geom_singular = false;
    double diff_value = 0.0;
    bool diff_singular = false;
    double quadrature_error_estimate = 0.0;
};

inline KernelSample kernel_sample(double t, const PolarPoint& p1, const PolarPoint& p2, const Cone& cone)
{
    KernelSample k;
    k.t = t;
    k.p1 = p1;
    k.p2 = p2;
    const GeomValue g = geom_kernel(t, p1, p2, cone);
    k.geom_value = g.value;
    k.geom_singular = g.singular;
    try {
        const DiffValue d = diff_kernel(t, p1, p2, cone);
        k.diff_value = d.value;
        k.quadrature_error_estimate = d.error_estimate;
    } catch (const SingularConfiguration&) {
        k.diff_singular = true;
        k.diff_value = std::numeric_limits<double>::quiet_NaN();
    }
    return k;
}

// Gaussian in cone distance around (r0, theta0), cut to the polar box
// |r - r0| <= 6 sigma, |theta - theta0| <= asin(6 sigma / r0)
struct GaussianBump {
    double r0 = 0.3;
    double theta0 = 0.0;
    double sigma = 0.04;

    GaussianBump() = default;
    GaussianBump(double r0_, double theta0_, double sigma_) : r0(r0_), theta0(theta0_), sigma(sigma_)
    {
        if (!(sigma_ > 0.0) || !(6.0 * sigma_ < r0_))
            throw std::domain_error("GaussianBump: need 0 < 6 sigma < r0");
    }

    double r_lo() const { return r0 - 6.0 * sigma; }
    double r_hi() const { return r0 + 6.0 * sigma; }
    double half_angle() const { return std::asin(6.0 * sigma / r0); }

    double at_offset(double r, double d) const
    {
        if (r < r_lo() || r > r_hi() || std::abs(d) > half_angle())
            return 0.0;
        const double c = chord(r, r0, d);
        return std::exp(-c * c / (2.0 * sigma * sigma));
    }

    double operator()(const Cone& cone, double r, double theta) const
    {
        return at_offset(r, cone.reduce(theta - theta0));
    }

    // every point of the box lies within this distance of the centre
    double reach() const
    {
        const double a = half_angle();
        return std::max(chord(r_lo(), r0, a), chord(r_hi(), r0, a));
    }
};

struct PairingOptions {
    double lambda_max = 120.0;
    int box_nodes = 32;      // per dimension, Gauss-Legendre over a bump box
    int v_panels = 8;
    int v_nodes = 16;
    int arc_nodes = 48;
    int diff_nodes = 16;     // per panel of the diffracted s-integral
    int radial_nodes = 128;  // spectral route, radial nodes over a bump box
    double cutoff_sigmas = 8.0;
    ZeroCache* cache = nullptr;
};

struct PairingResult {
    double kernel_route = 0.0;
    double spectral_route = 0.0;
    double abs_diff = 0.0;
    double rel_diff = 0.0;
    double geom_part = 0.0;
    double diff_part = 0.0;
    double spectral_tail = 0.0;
    std::size_t modes_used = 0;
};

namespace detail {

struct BoxRule {
    Rule r, th;
};

inline BoxRule box_rule(const GaussianBump& b, int n)
{
    const double a = b.half_angle();
    return {mapped(gauss_legendre(n), b.r_lo(), b.r_hi()), mapped(gauss_legendre(n), b.theta0 - a, b.theta0 + a)};
}

// (1/2 pi) int f(x) int (t^2 - |x - y|^2)_+^{-1/2} g(y) dy dx over the developed plane around x
inline double pairing_geom(double t, const GaussianBump& f, const GaussianBump& g, const Cone& cone,
                           const PairingOptions& o)
{
    const BoxRule bx = box_rule(f, o.box_nodes);
    const Rule vr = composite_uniform(0.0, 0.5 * pi, o.v_panels, o.v_nodes);
    const Rule& arc = gauss_legendre(o.arc_nodes);
    const double reach = std::min(g.reach(), o.cutoff_sigmas * g.sigma);
    const int n_full = 4 * o.arc_nodes;

    CompensatedSum<double> total;
    for (std::size_t i = 0; i < bx.r.size(); ++i) {
        const double rx = bx.r.x[i];
        for (std::size_t j = 0; j < bx.th.size(); ++j) {
            const double thx = bx.th.x[j];
            const double fx = f(cone, rx, thx);
            if (fx == 0.0)
                continue;
            // images of g's centre in the plane developed around x = (rx, 0)
            const auto imgs = image_angles(g.theta0, thx, cone);
            double inner = 0.0;
            for (std::size_t q = 0; q < vr.size(); ++q) {
                const double rc = t * std::sin(vr.x[q]);
                double ring = 0.0;
                for (double dj : imgs) {
                    const cplx cj = std::polar(g.r0, dj);
                    const cplx rel = cj - rx;
                    const double dist = std::abs(rel);
                    if (std::abs(rc - dist) > reach)
                        continue;
                    // g restricted to the planar wedge of image j
                    auto gp = [&](double om) {
                        const cplx p = rx + std::polar(rc, om);
                        const double a = std::arg(p);
                        return g.at_offset(std::abs(p), a - dj);
                    };
                    double psi = pi;
                    if (rc > 0.0 && dist > 0.0) {
                        const double c = (rc * rc + dist * dist - reach * reach) / (2.0 * rc * dist);
                        if (c > -1.0)
                            psi = std::acos(std::min(1.0, c));
                    }
                    if (psi >= pi) {
                        double s = 0.0;
                        for (int k = 0; k < n_full; ++k)
                            s += gp(2.0 * pi * k / n_full);
                        ring += s * (2.0 * pi / n_full);
                    } else {
                        const Rule a = mapped(arc, std::arg(rel) - psi, std::arg(rel) + psi);
                        for (std::size_t k = 0; k < a.size(); ++k)
                            ring += a.w[k] * gp(a.x[k]);
                    }
                }
                inner += vr.w[q] * t * std::sin(vr.x[q]) * ring;
            }
            total.add(bx.r.w[i] * bx.th.w[j] * rx * fx * inner);
        }
    }
    return total.value() / (2.0 * pi);
}

inline double pairing_diff(double t, const GaussianBump& f, const GaussianBump& g, const Cone& cone,
                           const PairingOptions& o)
{
    const BoxRule bx = box_rule(f, o.box_nodes);
    const Rule& ref = gauss_legendre(o.box_nodes);
    const double ag = g.half_angle();
    const Rule thy = mapped(ref, g.theta0 - ag, g.theta0 + ag);

    // narrowest bracket peak over the box pairs
    double gap = INFINITY;
    const double dlo = (f.theta0 - f.half_angle()) - (g.theta0 + ag);
    const double dhi = (f.theta0 + f.half_angle()) - (g.theta0 - ag);
    for (double sgn : {1.0, -1.0}) {
        const double a = (pi + sgn * dlo) / cone.rho, b = (pi + sgn * dhi) / cone.rho;
        const double lo = std::min(a, b), hi = std::max(a, b);
        const double k = std::ceil(lo / (2.0 * pi));
        if (2.0 * pi * k <= hi)
            throw SingularConfiguration("propagator_pairing: bump boxes meet the diffracted-front singular set");
        gap = std::min({gap, phase_gap(lo), phase_gap(hi)});
    }
    const double focus = cone.rho * gap;

    CompensatedSum<double> total;
    for (std::size_t i = 0; i < bx.r.size(); ++i) {
        const double rx = bx.r.x[i];
        const double top = std::min(g.r_hi(), t - rx);
        if (!(top > g.r_lo()))
            continue;
        // the kernel jumps at r1 + r2 = t, so the radial rule stops there
        const Rule ry = mapped(ref, g.r_lo(), top);
        for (std::size_t k = 0; k < ry.size(); ++k) {
            const DiffQuadrature dq(t, rx, ry.x[k], cone.rho, o.diff_nodes, focus);
            if (dq.empty())
                continue;
            for (std::size_t j = 0; j < bx.th.size(); ++j) {
                const double fx = f(cone, rx, bx.th.x[j]);
                if (fx == 0.0)
                    continue;
                for (std::size_t l = 0; l < thy.size(); ++l) {
                    const double gy = g(cone, ry.x[k], thy.x[l]);
                    if (gy == 0.0)
                        continue;
                    const double d = bx.th.x[j] - thy.x[l];
                    const double kv = dq.value((pi + d) / cone.rho, (pi - d) / cone.rho);
                    total.add(bx.r.w[i] * bx.th.w[j] * rx * fx * ry.w[k] * thy.w[l] * ry.x[k] * gy * kv);
                }
            }
        }
    }
    return total.value();
}

// angular Fourier coefficients int b(r_i, theta) e^{-i k theta / rho} d theta on the bump's radial nodes
struct BumpTransform {
    Rule r;
    int n = 0;
    std::vector<cplx> a; // row-major (radial node, FFT bin)
    std::vector<double> kmax_abs;

    cplx at(std::size_t i, int k) const
    {
        const int col = ((k % n) + n) % n;
        return a[i * n + col];
    }
};

inline BumpTransform bump_transform(const GaussianBump& b, const Cone& cone, int radial_nodes, int kmax)
{
    BumpTransform bt;
    bt.r = mapped(gauss_legendre(radial_nodes), b.r_lo(), b.r_hi());
    const double need = std::max(4.0 * kmax + 16.0, 8.0 * cone.period() * b.r_hi() / b.sigma);
    bt.n = 1;
    while (bt.n < need)
        bt.n *= 2;
    const double dt = cone.period() / bt.n;
    const std::size_t nr = bt.r.size();
    bt.a.assign(nr * bt.n, 0.0);
    for (std::size_t i = 0; i < nr; ++i)
        for (int j = 0; j < bt.n; ++j)
            bt.a[i * bt.n + j] = b(cone, bt.r.x[i], -pi * cone.rho + dt * j);
    dft_rows(bt.a, static_cast<int>(nr), bt.n, -1);
    for (std::size_t i = 0; i < nr; ++i)
        for (int j = 0; j < bt.n; ++j) {
            // theta_j / rho = -pi + 2 pi j / n, so bin k carries a factor (-1)^k
            const int k = j <= bt.n / 2 ? j : j - bt.n;
            bt.a[i * bt.n + j] *= ((std::abs(k) % 2) ? -dt : dt);
        }
    return bt;
}

inline double pairing_spectral(double t, const GaussianBump& f, const GaussianBump& g, const TruncatedCone& tc,
                               const PairingOptions& o, double& tail, std::size_t& used)
{
    const auto basis = build_basis(tc, o.lambda_max, o.cache);
    int kmax = 0;
    for (const auto& e : basis)
        kmax = std::max(kmax, std::abs(e.k));
    const BumpTransform F = bump_transform(f, tc.cone, o.radial_nodes, kmax);
    const BumpTransform G = bump_transform(g, tc.cone, o.radial_nodes, kmax);

    auto kmag = [&](const BumpTransform& B, int k) {
        double m = 0.0;
        for (std::size_t i = 0; i < B.r.size(); ++i)
            m = std::max(m, std::abs(B.at(i, k)));
        return m;
    };
    std::vector<double> fk(kmax + 1), gk(kmax + 1);
    double top = 0.0;
    for (int k = 0; k <= kmax; ++k) {
        fk[k] = std::max(kmag(F, k), kmag(F, -k));
        gk[k] = std::max(kmag(G, k), kmag(G, -k));
        top = std::max(top, fk[k] * gk[k]);
    }

    auto coeff = [&](const BumpTransform& B, const EigenMode& e) {
        CompensatedSum<cplx> acc;
        for (std::size_t i = 0; i < B.r.size(); ++i) {
            const double x = B.r.x[i];
            acc.add(B.r.w[i] * x * bessel_j(e.nu, e.j * x / tc.R) * B.at(i, e.k));
        }
        return e.norm_const * acc.value();
    };

    CompensatedSum<double> sum;
    tail = 0.0;
    used = 0;
    for (const auto& e : basis) {
        const int ak = std::abs(e.k);
        if (fk[ak] * gk[ak] <= 1e-17 * top)
            continue;
        ++used;
        const cplx cf = coeff(F, e), cg = coeff(G, e);
        const double term = std::sin(t * e.lambda) / e.lambda * std::real(cf * std::conj(cg));
        sum.add(term);
        if (e.lambda > o.lambda_max - 10.0)
            tail += std::abs(term);
    }
    return sum.value();
}

} // namespace detail

// <E(t) f, g> for E(t) = sin(t sqrt(Delta))/sqrt(Delta), by the kernel and by the spectral sum
inline PairingResult propagator_pairing(double t, const GaussianBump& f, const GaussianBump& g,
                                        const TruncatedCone& tc, const PairingOptions& o = {})
{
    if (!(t > 0.0))
        throw std::domain_error("propagator_pairing: t must be positive");
    if (!(t + std::max(f.r_hi(), g.r_hi()) < tc.R))
        throw std::domain_error("propagator_pairing: t + support radius reaches the wall at R");
    for (const GaussianBump* b : {&f, &g})
        if (!(b->half_angle() < 0.5 * pi * tc.cone.rho))
            throw std::domain_error("propagator_pairing: bump box wraps around the cone");
    PairingResult p;
    p.geom_part = detail::pairing_geom(t, f, g, tc.cone, o);
    p.diff_part = detail::pairing_diff(t, f, g, tc.cone, o);
    p.kernel_route = p.geom_part + p.diff_part;
    p.spectral_route = detail::pairing_spectral(t, f, g, tc, o, p.spectral_tail, p.modes_used);
    p.abs_diff = std::abs(p.kernel_route - p.spectral_route);
    p.rel_diff = p.abs_diff / std::abs(p.kernel_route);
    return p;
}

// <f, g> on the cone, for the small-t slope
inline double bump_inner_product(const GaussianBump& f, const GaussianBump& g, const Cone& cone, int n = 64)
{
    const detail::BoxRule bx = detail::box_rule(f, n);
    CompensatedSum<double> s;
    for (std::size_t i = 0; i < bx.r.size(); ++i)
        for (std::size_t j = 0; j < bx.th.size(); ++j)
            s.add(bx.r.w[i] * bx.th.w[j] * bx.r.x[i] * f(cone, bx.r.x[i], bx.th.x[j])
                  * g(cone, bx.r.x[i], bx.th.x[j]));
    return s.value();
}

} // namespace conewave
