#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "special_fn.hpp"

namespace conewave {

struct Cone {
    double rho = 1.0;

    Cone() = default;
    explicit Cone(double r) : rho(r)
    {
        if (!(r > 0.0) || !std::isfinite(r))
            throw std::domain_error("Cone: rho must be positive");
    }
    double period() const { return 2.0 * pi * rho; }

    // reduce to (-pi rho, pi rho]
    double reduce(double theta) const
    {
        const double P = period();
        double t = std::fmod(theta, P);
        if (t > 0.5 * P)
            t -= P;
        else if (t <= -0.5 * P)
            t += P;
        return t;
    }
};

struct PolarPoint {
    double r = 0.0;
    double theta = 0.0;

    PolarPoint() = default;
    PolarPoint(double r_, double theta_) : r(r_), theta(theta_)
    {
        if (!(r_ >= 0.0))
            throw std::domain_error("PolarPoint: r must be nonnegative");
    }
    PolarPoint(double r_, double theta_, const Cone& c) : PolarPoint(r_, c.reduce(theta_)) {}
};

inline double chord(double r1, double r2, double theta)
{
    // (r1 - r2)^2 + 2 r1 r2 (1 - cos theta), stable near theta = 0
    const double s = std::sin(0.5 * theta);
    const double d = r1 - r2;
    return std::sqrt(d * d + 4.0 * r1 * r2 * s * s);
}

inline std::vector<double> image_angles(double theta1, double theta2, const Cone& cone)
{
    const double d = theta1 - theta2;
    const double P = cone.period();
    const double tol = 8.0 * std::numeric_limits<double>::epsilon() * std::max(pi, std::abs(d));
    const long jlo = static_cast<long>(std::ceil((-pi - tol - d) / P));
    const long jhi = static_cast<long>(std::floor((pi + tol - d) / P));
    std::vector<double> out;
    for (long j = jlo; j <= jhi; ++j) {
        const double v = d + j * P;
        if (v >= -pi - tol && v <= pi + tol)
            out.push_back(v);
    }
    return out;
}

struct DiffractionGeometry {
    double alpha = 1.0;
    double beta = 0.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
};

inline DiffractionGeometry diffraction_geometry(double t, double r1, double r2,
                                                double theta_diff, const Cone& cone)
{
    if (!(r1 > 0.0) || !(r2 > 0.0))
        throw std::domain_error("diffraction_geometry: radii must be positive");
    if (t < r1 + r2)
        throw RegimeError("diffraction_geometry: t < r1 + r2, diffracted kernel vanishes");
    DiffractionGeometry g;
    g.alpha = std::max(1.0, (t - r1 - r2) * (t + r1 + r2) / (2.0 * r1 * r2) + 1.0);
    g.beta = std::acosh(g.alpha);
    g.phi1 = (pi + theta_diff) / cone.rho;
    g.phi2 = (pi - theta_diff) / cone.rho;
    return g;
}

inline double D(double r1, double r2, double s)
{
    // (r1 + r2)^2 + 2 r1 r2 (cosh s - 1)
    const double sh = std::sinh(0.5 * s);
    const double a = r1 + r2;
    return std::sqrt(a * a + 4.0 * r1 * r2 * sh * sh);
}

inline double dD_ds(double r1, double r2, double s)
{
    return r1 * r2 * std::sinh(s) / D(r1, r2, s);
}

} // namespace conewave
