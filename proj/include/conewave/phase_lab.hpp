#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "cluster_kernel.hpp"
#include "cone_geom.hpp"
#include "errors.hpp"
#include "quadrature.hpp"

namespace conewave {

inline double dG(double r1, double r2, double theta) { return r1 * r2 * std::sin(theta) / chord(r1, r2, theta); }

inline double d2G(double r1, double r2, double theta)
{
    const double g = chord(r1, r2, theta), p = r1 * r2;
    return p * std::cos(theta) / g - p * p * std::sin(theta) * std::sin(theta) / (g * g * g);
}

struct DGReport {
    double d1 = 0.0, d1_lead = 0.0, d2 = 0.0, d2_lead = 0.0;
    double ratio1 = 0.0, ratio2 = 0.0;         // remainder / ((r1 r2)^2 |theta-pi|^k / (r1+r2)^3)
    double ratio1_raw = 0.0, ratio2_raw = 0.0; // remainder / ((r1 r2)^2 |theta-pi|^k)
};

inline DGReport dG_expansion_check(double r1, double r2, double theta)
{
    if (std::abs(theta - pi) > 0.5)
        throw std::domain_error("dG_expansion_check: need |theta - pi| <= 1/2");
    DGReport r;
    const double p = r1 * r2, a = r1 + r2, e = std::abs(theta - pi);
    r.d1 = dG(r1, r2, theta);
    r.d2 = d2G(r1, r2, theta);
    r.d1_lead = p / a * std::sin(theta);
    r.d2_lead = p / a * std::cos(theta);
    if (e > 0.0) {
        const double s1 = p * p * e * e * e, s2 = p * p * e * e;
        r.ratio1_raw = std::abs(r.d1 - r.d1_lead) / s1;
        r.ratio2_raw = std::abs(r.d2 - r.d2_lead) / s2;
        r.ratio1 = r.ratio1_raw * a * a * a;
        r.ratio2 = r.ratio2_raw * a * a * a;
    }
    return r;
}

struct PhaseConfig {
    double r1 = 0.0, r2 = 0.0, r2_tilde = 0.0;
    double theta1 = 0.0, theta2 = 0.0;
    double epsilon = 0.2;

    double window_lo() const { return std::max(theta1 - pi, theta2 - pi); }
    double window_hi() const { return std::min(theta1 - pi + 2.0 * epsilon, theta2 - pi + 2.0 * epsilon); }

    // G(r1, r2, theta2 - theta) - G(r1, r2~, theta1 - theta)
    double psi(double theta) const { return chord(r1, r2, theta2 - theta) - chord(r1, r2_tilde, theta1 - theta); }
    double dpsi(double theta) const { return -dG(r1, r2, theta2 - theta) + dG(r1, r2_tilde, theta1 - theta); }
    double d2psi(double theta) const { return d2G(r1, r2, theta2 - theta) - d2G(r1, r2_tilde, theta1 - theta); }
};

inline void check_epsilon(double epsilon, double rho)
{
    if (!(epsilon > 0.0) || !(epsilon < std::min(pi * (rho - 1.0) / 2.0, pi / 4.0)))
        throw ConfigError("phase config: need 0 < epsilon < min(pi(rho-1)/2, pi/4)");
}

struct PsiBoundReport {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    long samples = 0;
    long rejected = 0;
    double split_threshold = 0.0; // max eps r2~|theta1-theta2| / (r1|r2-r2~|) where the second derivative carries the bound
    unsigned long long seed = 0;
};

// (|Psi'| + |Psi''|) / (|r2 - r2~| r1^2) for theta on a grid over the window
inline double psi_ratio(const PhaseConfig& c, int grid = 9, bool* second_dominates = nullptr)
{
    const double lo = c.window_lo(), hi = c.window_hi();
    if (!(hi > lo))
        throw ConfigError("Psi_lower_bound_check: empty integration window");
    const double scale = std::abs(c.r2 - c.r2_tilde) * c.r1 * c.r1;
    double m = std::numeric_limits<double>::infinity();
    bool sec = false;
    for (int i = 0; i < grid; ++i) {
        const double th = lo + (hi - lo) * i / (grid - 1);
        const double d1 = std::abs(c.dpsi(th)), d2 = std::abs(c.d2psi(th));
        const double v = (d1 + d2) / scale;
        if (v < m) {
            m = v;
            sec = d2 >= d1;
        }
    }
    if (second_dominates)
        *second_dominates = sec;
    return m;
}

// random admissible configs: r's in (1/lambda, 4 delta), r1^2|r2-r2~| >= 1/lambda, r1+r2, r1+r2~ >= delta/4,
// |theta1 - theta2| < 2 eps so the window is nonempty
inline PsiBoundReport Psi_lower_bound_check(double rho, double epsilon, double delta, double lambda, long samples,
                                            unsigned long long seed = 0x5EED)
{
    check_epsilon(epsilon, rho);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> Ur(1.0 / lambda, 4.0 * delta), U(0.0, 1.0);
    PsiBoundReport rep;
    rep.seed = seed;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    while (rep.samples < samples) {
        PhaseConfig c;
        c.epsilon = epsilon;
        c.r1 = Ur(rng);
        c.r2 = Ur(rng);
        c.r2_tilde = Ur(rng);
        c.theta2 = pi * (2.0 * U(rng) - 1.0);
        c.theta1 = c.theta2 + 2.0 * epsilon * (2.0 * U(rng) - 1.0) * 0.999;
        if (c.r1 * c.r1 * std::abs(c.r2 - c.r2_tilde) < 1.0 / lambda || c.r1 + c.r2 < 0.25 * delta
            || c.r1 + c.r2_tilde < 0.25 * delta || !(c.window_hi() > c.window_lo())) {
            ++rep.rejected;
            continue;
        }
        bool sec = false;
        const double v = psi_ratio(c, 9, &sec);
        rep.min_ratio = std::min(rep.min_ratio, v);
        rep.max_ratio = std::max(rep.max_ratio, v);
        if (sec)
            rep.split_threshold = std::max(rep.split_threshold, epsilon * c.r2_tilde * std::abs(c.theta1 - c.theta2)
                                                                    / (c.r1 * std::abs(c.r2 - c.r2_tilde)));
        ++rep.samples;
    }
    return rep;
}

struct DerivativeCheck {
    double max_rel_error = 0.0;
    const char* worst = "";
};

// first derivatives against central differences of the function, second derivatives against central
// differences of the analytic first derivative; both with one Richardson step
inline DerivativeCheck derivative_fd_check(int samples = 200, unsigned long long seed = 0x5EED, double h = 1e-5)
{
    auto fd = [h](const std::function<double(double)>& f, double x) {
        const double c1 = (f(x + h) - f(x - h)) / (2.0 * h);
        const double c2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
        return (4.0 * c2 - c1) / 3.0;
    };
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> Ur(0.02, 0.4), Ut(pi - 0.5, pi + 0.5), Us(0.1, 3.0), U(0.0, 1.0);
    DerivativeCheck out;
    auto note = [&](double a, double b, const char* name) {
        const double e = std::abs(a - b) / std::abs(a);
        if (e > out.max_rel_error) {
            out.max_rel_error = e;
            out.worst = name;
        }
    };
    for (int i = 0; i < samples; ++i) {
        const double r1 = Ur(rng), r2 = Ur(rng), th = Ut(rng), s = Us(rng);
        if (std::abs(th - pi) < 1e-2)
            continue;
        note(dG(r1, r2, th), fd([&](double x) { return chord(r1, r2, x); }, th), "dG");
        note(d2G(r1, r2, th), fd([&](double x) { return dG(r1, r2, x); }, th), "d2G");
        note(dD_ds(r1, r2, s), fd([&](double x) { return D(r1, r2, x); }, s), "dD");
        PhaseConfig c;
        c.r1 = r1;
        c.r2 = r2;
        c.r2_tilde = Ur(rng);
        c.theta2 = 0.3;
        c.theta1 = 0.3 + 0.2 * (2.0 * U(rng) - 1.0);
        const double t = c.window_lo() + 0.5 * (c.window_hi() - c.window_lo()) * U(rng);
        if (std::abs(c.dpsi(t)) > 1e-6 * c.r1 * c.r1)
            note(c.dpsi(t), fd([&](double x) { return c.psi(x); }, t), "dPsi");
        if (std::abs(c.d2psi(t)) > 1e-6 * c.r1 * c.r1)
            note(c.d2psi(t), fd([&](double x) { return c.dpsi(x); }, t), "d2Psi");
    }
    return out;
}

enum class PhaseKind { Quadratic, DiffractedDistance, Chord };

struct PhaseDescriptor {
    PhaseKind kind = PhaseKind::Quadratic;
    double r1 = 0.1, r2 = 0.1;

    static PhaseDescriptor quadratic() { return {}; }
    static PhaseDescriptor diffracted(double r1, double r2) { return {PhaseKind::DiffractedDistance, r1, r2}; }
    static PhaseDescriptor chord_phase(double r1, double r2) { return {PhaseKind::Chord, r1, r2}; }

    // s^2; D(r1,r2,s) - (r1+r2); G(pi) - G(pi - s)
    double value(double s) const
    {
        switch (kind) {
        case PhaseKind::Quadratic:
            return s * s;
        case PhaseKind::DiffractedDistance: {
            const double sh = std::sinh(0.5 * s), a = r1 + r2;
            const double x = 4.0 * r1 * r2 * sh * sh; // D^2 - a^2
            return x / (D(r1, r2, s) + a);
        }
        case PhaseKind::Chord: {
            const double a = r1 + r2, c = std::cos(0.5 * s);
            const double x = 4.0 * r1 * r2 * (1.0 - c * c); // a^2 - G^2
            return x / (a + chord(r1, r2, pi - s));
        }
        }
        return 0.0;
    }
    double d1(double s) const
    {
        switch (kind) {
        case PhaseKind::Quadratic:
            return 2.0 * s;
        case PhaseKind::DiffractedDistance:
            return dD_ds(r1, r2, s);
        case PhaseKind::Chord:
            return dG(r1, r2, pi - s);
        }
        return 0.0;
    }
    double d2(double s) const
    {
        switch (kind) {
        case PhaseKind::Quadratic:
            return 2.0;
        case PhaseKind::DiffractedDistance: {
            const double d = D(r1, r2, s), p = r1 * r2;
            return p * std::cosh(s) / d - p * p * std::sinh(s) * std::sinh(s) / (d * d * d);
        }
        case PhaseKind::Chord:
            return -d2G(r1, r2, pi - s);
        }
        return 0.0;
    }
};

struct StationaryPhaseReport {
    std::vector<double> mu;
    std::vector<double> scaled;   // mu^{1/2} |I(mu)|
    std::vector<double> error;    // node-doubling difference, scaled
    double sup = 0.0;
    double last = 0.0;
    double stability = 0.0;       // sup / min over the sweep
};

// int_0^1 e^{i mu phi(s)} a(s) ds on panels sized by the local phase rate and curvature
inline cplx oscillatory_integral(const PhaseDescriptor& ph, const std::function<double(double)>& a, double mu,
                                 int nodes = 24, double* err = nullptr)
{
    const double budget = 2.0;
    std::vector<double> edges{0.0};
    double s = 0.0;
    while (s < 1.0) {
        double h = 0.02;
        const double g1 = mu * std::abs(ph.d1(s)), g2 = mu * std::abs(ph.d2(s));
        if (g1 > 0.0)
            h = std::min(h, budget / g1);
        if (g2 > 0.0)
            h = std::min(h, std::sqrt(2.0 * budget / g2));
        s = std::min(1.0, s + h);
        edges.push_back(s);
    }
    auto run = [&](int n) {
        const Rule r = composite(edges, n);
        CompensatedSum<cplx> acc;
        for (std::size_t i = 0; i < r.size(); ++i)
            acc.add(r.w[i] * a(r.x[i]) * std::polar(1.0, mu * ph.value(r.x[i])));
        return acc.value();
    };
    const cplx v = run(nodes);
    if (err)
        *err = std::abs(run(nodes + 8) - v);
    return v;
}

inline StationaryPhaseReport stationary_phase_probe(const PhaseDescriptor& ph, const std::function<double(double)>& a,
                                                    const std::vector<double>& mu_list)
{
    StationaryPhaseReport rep;
    double lo = std::numeric_limits<double>::infinity();
    for (double mu : mu_list) {
        if (!(mu > 0.0))
            throw std::domain_error("stationary_phase_probe: mu must be positive");
        double e = 0.0;
        const cplx I = oscillatory_integral(ph, a, mu, 24, &e);
        const double v = std::sqrt(mu) * std::abs(I);
        rep.mu.push_back(mu);
        rep.scaled.push_back(v);
        rep.error.push_back(std::sqrt(mu) * e);
        rep.sup = std::max(rep.sup, v);
        lo = std::min(lo, v);
    }
    rep.last = rep.scaled.empty() ? 0.0 : rep.scaled.back();
    rep.stability = lo > 0.0 ? rep.sup / lo : std::numeric_limits<double>::infinity();
    return rep;
}

struct TailDecayReport {
    double lambda = 0.0, r1 = 0.0, r2 = 0.0;
    double s0 = 0.0;            // D(r1, r2, s0) = delta
    double s0_scale = 0.0;      // (r1 r2)^{-1/2} scale for comparison
    double tail = 0.0;          // |int_{s0}^inf ...|
    double scaled_tail = 0.0;   // lambda (r1 r2)^{1/2} |tail|
    double head = 0.0;          // |int_0^{s0} ...|
    double head_amp_ratio = 0.0;// sup_{s<=s0} |a(D)| / sup |a| on (delta, 2 delta)
    bool inequality_holds = false; // 2 r1 r2 (cosh s0 - 1) >= delta^2 - (r1+r2)^2 >= 3 delta^2/4
    double tail_error = 0.0;
};

// small-radius regime r1 + r2 <= delta/2; `amp` evaluates a_lambda on [0, zeta_max]
template <class A>
TailDecayReport no_critical_point_decay(const A& amp, double lambda, double r1, double r2, double delta, double theta,
                                        const Cone& cone, double zeta_max, double amp_sup)
{
    if (!(r1 >= 1.0 / lambda) || !(r2 >= 1.0 / lambda) || !(r1 + r2 <= 0.5 * delta))
        throw RegimeError("no_critical_point_decay: need r1, r2 >= 1/lambda and r1 + r2 <= delta/2");
    TailDecayReport rep;
    rep.lambda = lambda;
    rep.r1 = r1;
    rep.r2 = r2;
    const double a = r1 + r2;
    rep.s0 = std::acosh(1.0 + (delta * delta - a * a) / (2.0 * r1 * r2));
    rep.s0_scale = 1.0 / std::sqrt(r1 * r2);
    rep.inequality_holds = 2.0 * r1 * r2 * (std::cosh(rep.s0) - 1.0) >= (delta * delta - a * a) * (1.0 - 1e-12)
                           && delta * delta - a * a >= 0.75 * delta * delta * (1.0 - 1e-15);
    const double s_end = std::acosh(1.0 + (zeta_max * zeta_max - a * a) / (2.0 * r1 * r2));
    const double rho = cone.rho;
    auto piece = [&](double lo, double hi, int n, double* err) {
        // phase rate lambda D'(s) grows like lambda r1 r2 sinh s / D
        std::vector<double> edges{lo};
        double s = lo;
        while (s < hi) {
            double h = 0.25;
            const double g = lambda * dD_ds(r1, r2, s);
            if (g > 0.0)
                h = std::min(h, pi / g);
            h = std::max(h, 1e-6);
            s = std::min(hi, s + h);
            edges.push_back(s);
        }
        auto run = [&](int m) {
            const Rule r = composite(edges, m);
            CompensatedSum<cplx> acc;
            for (std::size_t i = 0; i < r.size(); ++i) {
                const double Dv = D(r1, r2, r.x[i]);
                acc.add(r.w[i] * std::polar(1.0, lambda * Dv) * detail::diff_bracket(r.x[i], theta, rho) * amp(Dv));
            }
            return acc.value();
        };
        const cplx v = run(n);
        if (err)
            *err = std::abs(run(2 * n) - v);
        return v;
    };
    double e = 0.0;
    rep.tail = std::abs(piece(rep.s0, s_end, 16, &e));
    rep.tail_error = e;
    rep.head = std::abs(piece(0.0, rep.s0, 16, nullptr));
    rep.scaled_tail = lambda * std::sqrt(r1 * r2) * rep.tail;
    double hm = 0.0;
    for (int i = 0; i <= 200; ++i)
        hm = std::max(hm, std::abs(amp(D(r1, r2, rep.s0 * i / 200.0))));
    rep.head_amp_ratio = hm / amp_sup;
    return rep;
}

} // namespace conewave
