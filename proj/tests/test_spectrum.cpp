#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/tools/minima.hpp>

#include <conewave/spectrum.hpp>

using namespace conewave;
using Catch::Approx;

namespace {

// all modes of the basis as a single window
ClusterWindow whole(const std::vector<EigenMode>& basis, double lmax)
{
    return make_window(basis, 0.0, lmax);
}

GridFunction mode_samples(const EigenMode& e, const TruncatedCone& tc, const PolarGrid& g)
{
    return sample(g, [&](double r, double t) { return eigenfunction(e, tc, r, t); });
}

} // namespace

TEST_CASE("build_basis", "[spectrum]")
{
    SECTION("disk")
    {
        const TruncatedCone tc(1.0, 1.0);
        const auto b = build_basis(tc, 12.0);
        REQUIRE(b.front().k == 0);
        REQUIRE(b.front().lambda == Approx(2.4048255576957728).epsilon(1e-14));
        // j_{1,1} twice, then j_{2,1} twice
        REQUIRE(b[1].lambda == Approx(3.8317059702075123).epsilon(1e-14));
        REQUIRE(b[2].lambda == b[1].lambda);
        REQUIRE(b[1].k == -1);
        REQUIRE(b[2].k == 1);
        REQUIRE(b[3].lambda == Approx(5.1356223018406826).epsilon(1e-14));
        for (const auto& e : b) {
            REQUIRE(e.lambda <= 12.0);
            REQUIRE(e.lambda > 0.0);
            REQUIRE(e.nu == std::abs(e.k));
        }
        REQUIRE(std::is_sorted(b.begin(), b.end(), mode_less));
    }

    SECTION("rho = 1/2 doubles the orders")
    {
        const TruncatedCone tc(0.5, 1.0);
        const auto b = build_basis(tc, 25.0);
        for (const auto& e : b)
            REQUIRE(e.nu == 2.0 * std::abs(e.k));
        REQUIRE(b.front().lambda == Approx(2.4048255576957728).epsilon(1e-14));
        REQUIRE(b[1].lambda == Approx(5.1356223018406826).epsilon(1e-14));
        REQUIRE(b[1].nu == 2.0);
    }

    SECTION("multiplicity two for k != 0")
    {
        const TruncatedCone tc(1.7, 1.3);
        const auto b = build_basis(tc, 20.0);
        int plus = 0, minus = 0;
        for (const auto& e : b) {
            plus += e.k > 0;
            minus += e.k < 0;
        }
        REQUIRE(plus == minus);
        REQUIRE(b.back().lambda <= 20.0);
        for (const auto& e : b)
            REQUIRE(e.lambda == Approx(e.j / 1.3).epsilon(1e-15));
    }

    SECTION("normalisation against an independent radial integral")
    {
        const TruncatedCone tc(1.5, 1.0);
        const auto b = build_basis(tc, 30.0);
        const Rule fine = composite_uniform(0.0, 1.0, 64, 24);
        for (std::size_t i = 0; i < b.size(); i += 7) {
            const auto& e = b[i];
            const double I = fine.integrate([&](double r) {
                const double v = bessel_j(e.nu, e.j * r);
                return r * v * v;
            });
            REQUIRE(2.0 * pi * 1.5 * e.norm_const * e.norm_const * I == Approx(1.0).epsilon(1e-10));
        }
    }

    REQUIRE_THROWS_AS(build_basis(TruncatedCone(1.0, 1.0), 0.0), std::domain_error);
    REQUIRE_THROWS_AS(TruncatedCone(1.0, -1.0), std::domain_error);
}

TEST_CASE("Weyl count", "[spectrum]")
{
    const TruncatedCone tc(2.0, 1.0);
    const auto b = build_basis(tc, 100.0);
    const double N60 = static_cast<double>(mode_count(b, 60.0));
    REQUIRE(std::abs(N60 - weyl_main_term(tc, 60.0)) / weyl_main_term(tc, 60.0) <= 0.1);
    for (double l : {40.0, 55.0, 70.0, 85.0, 100.0}) {
        const double N = static_cast<double>(mode_count(b, l));
        REQUIRE(std::abs(N - weyl_main_term(tc, l)) / weyl_main_term(tc, l) <= 0.1);
    }
    // the boundary correction is negative for a Dirichlet wall
    REQUIRE(N60 < weyl_main_term(tc, 60.0));
}

TEST_CASE("orthonormality under grid quadrature", "[spectrum]")
{
    const TruncatedCone tc(1.5, 1.0);
    const auto b = build_basis(tc, 30.0);
    const auto w = whole(b, 30.0);
    const auto g = grid_for(tc, w);
    const WindowProjector P(w, g);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.modes.size(); ++i) {
        const auto c = P.project(mode_samples(w.modes[i], tc, g));
        for (std::size_t j = 0; j < c.size(); ++j)
            worst = std::max(worst, std::abs(c[j] - (i == j ? 1.0 : 0.0)));
    }
    INFO("modes " << w.modes.size() << ", max Gram error " << worst);
    REQUIRE(worst <= 1e-7);
}

TEST_CASE("project", "[spectrum]")
{
    const TruncatedCone tc(2.0, 1.0);
    const auto basis = build_basis(tc, 25.0);
    const auto w = make_window(basis, 20.0);
    REQUIRE(!w.modes.empty());
    for (const auto& e : w.modes) {
        REQUIRE(e.lambda >= 20.0);
        REQUIRE(e.lambda <= 21.0);
    }
    const auto g = grid_for(tc, w);
    const WindowProjector P(w, g);

    SECTION("in-window mode gives a unit vector")
    {
        for (std::size_t i = 0; i < w.modes.size(); ++i) {
            const auto c = P.project(mode_samples(w.modes[i], tc, g));
            for (std::size_t j = 0; j < c.size(); ++j)
                REQUIRE(std::abs(c[j] - (i == j ? 1.0 : 0.0)) <= 1e-8);
        }
    }

    SECTION("out-of-window mode gives zero")
    {
        for (const auto& e : basis) {
            if (e.lambda >= 20.0 && e.lambda <= 21.0)
                continue;
            if (std::abs(e.k) > w.max_abs_k() + 4)
                continue;
            const auto c = P.project(mode_samples(e, tc, g));
            REQUIRE(coefficient_norm(c) <= 1e-8);
        }
    }

    SECTION("two-mode combination")
    {
        const auto& a = w.modes.front();
        const auto& c2 = w.modes.back();
        auto f = sample(g, [&](double r, double t) {
            return 0.6 * eigenfunction(a, tc, r, t) + 0.8 * eigenfunction(c2, tc, r, t);
        });
        const auto c = P.project(f);
        REQUIRE(std::abs(c.front() - 0.6) <= 1e-8);
        REQUIRE(std::abs(c.back() - 0.8) <= 1e-8);
        REQUIRE(lq_norm(P.reconstruct(c), g, 2.0) == Approx(1.0).epsilon(1e-8));
    }

    SECTION("Parseval and idempotence")
    {
        auto f = sample(g, [](double r, double t) {
            const double x = r * std::cos(t / 2.0) - 0.4, y = r * std::sin(t / 2.0);
            return cplx(std::exp(-(x * x + y * y) / 0.02), 0.3 * r * std::sin(t));
        });
        const auto c = P.project(f);
        const auto pf = P.reconstruct(c);
        const double n2 = lq_norm(pf, g, 2.0);
        REQUIRE(n2 * n2 == Approx(std::pow(coefficient_norm(c), 2)).epsilon(1e-8));
        const auto c2 = P.project(pf);
        for (std::size_t i = 0; i < c.size(); ++i)
            REQUIRE(std::abs(c2[i] - c[i]) <= 1e-8 * std::max(1.0, coefficient_norm(c)));
    }

    SECTION("reconstruction agrees with pointwise evaluation")
    {
        std::vector<cplx> c(w.modes.size());
        for (std::size_t i = 0; i < c.size(); ++i)
            c[i] = cplx(std::cos(1.0 + i), std::sin(2.0 * i));
        const auto pf = P.reconstruct(c);
        for (int i = 0; i < g.n_r(); i += 5)
            for (int j = 0; j < g.n_theta; j += 7) {
                cplx direct = 0.0;
                for (std::size_t q = 0; q < c.size(); ++q)
                    direct += c[q] * eigenfunction(w.modes[q], tc, g.r[i], g.theta(j));
                REQUIRE(std::abs(pf(i, j) - direct) <= 1e-11);
            }
    }

    SECTION("resolution error")
    {
        const auto coarse_t = make_grid(tc, g.n_r(), 2 * w.max_abs_k());
        REQUIRE_THROWS_AS(WindowProjector(w, coarse_t), ResolutionError);
        const auto coarse_r = make_grid(tc, 3, g.n_theta);
        REQUIRE_THROWS_AS(WindowProjector(w, coarse_r), ResolutionError);
        REQUIRE_THROWS_AS(project(w, GridFunction{1, 1, {0.0}}, g), std::invalid_argument);
    }
}

TEST_CASE("lq_norm", "[spectrum]")
{
    const TruncatedCone disk(1.0, 1.0);
    const auto b = build_basis(disk, 3.0);
    const auto& e01 = b.front();
    REQUIRE(e01.k == 0);
    const auto w = make_window(b, 2.0);
    const auto g = grid_for(disk, w);

    const auto one = sample(g, [](double, double) { return cplx(1.0); });
    REQUIRE(lq_norm(one, g, 2.0) == Approx(std::sqrt(pi)).epsilon(1e-13));
    REQUIRE(lq_norm(one, g, 6.0) == Approx(std::pow(pi, 1.0 / 6.0)).epsilon(1e-13));

    const auto phi = mode_samples(e01, disk, g);
    REQUIRE(lq_norm(phi, g, 2.0) == Approx(1.0).epsilon(1e-12));

    const auto g4 = grid_for(disk, w, 4.0);
    const double n6 = lq_norm(mode_samples(e01, disk, grid_for(disk, w, 3.0)), grid_for(disk, w, 3.0), 6.0);
    const double n6_ref = lq_norm(mode_samples(e01, disk, g4), g4, 6.0);
    REQUIRE(n6 == Approx(n6_ref).epsilon(1e-5));
    // independent oracle: composite radial rule, exact angular factor
    const Rule fine = composite_uniform(0.0, 1.0, 40, 20);
    const double I6 = fine.integrate([&](double r) {
        return r * std::pow(std::abs(e01.norm_const * bessel_j(0.0, e01.j * r)), 6);
    });
    REQUIRE(n6_ref == Approx(std::pow(2.0 * pi * I6, 1.0 / 6.0)).epsilon(1e-10));

    SECTION("q = infinity with refinement")
    {
        // k = 1 mode on the disk: sup |phi| = c * max_x J_1(x) at interior x
        const EigenMode e11 = build_basis(disk, 4.0)[1];
        REQUIRE(std::abs(e11.k) == 1);
        const auto gg = grid_for(disk, 1, e11.j);
        std::uintmax_t it = 100;
        const auto mx = boost::math::tools::brent_find_minima(
            [&](double x) { return -bessel_j(1.0, x); }, 0.5, 3.0, 50, it);
        const double exact = e11.norm_const * (-mx.second);
        const double got = lq_norm(mode_samples(e11, disk, gg), gg, INFINITY);
        REQUIRE(got <= exact * (1 + 1e-12));
        REQUIRE(got == Approx(exact).epsilon(1e-4));
    }

    REQUIRE_THROWS_AS(lq_norm(phi, g, 3.0), std::invalid_argument);
}

TEST_CASE("cluster_sup_operator_norm", "[spectrum]")
{
    SECTION("single mode")
    {
        const TruncatedCone tc(1.3, 1.0);
        const auto b = build_basis(tc, 15.0);
        // a window holding exactly one k != 0 pair would have two modes; pick a lone k = 0 mode
        for (const auto& e : b) {
            if (e.k != 0)
                continue;
            const auto w = make_window(b, e.lambda - 1e-9, 1e-9);
            if (w.modes.size() != 1)
                continue;
            const auto g = grid_for(tc, w);
            REQUIRE(cluster_sup_operator_norm(w, g) == Approx(std::abs(e.norm_const)).epsilon(1e-13));
        }
        // k = 1 single mode: interior maximum of |J_1|
        const auto& e = b[1];
        ClusterWindow w{e.lambda, 0.0, {e}};
        std::uintmax_t it = 100;
        const auto mx = boost::math::tools::brent_find_minima(
            [&](double x) { return -std::abs(bessel_j(e.nu, x)); }, 0.1, e.j, 50, it);
        REQUIRE(cluster_sup_operator_norm(w, grid_for(tc, w))
                == Approx(e.norm_const * -mx.second).epsilon(1e-9));
    }

    SECTION("disk window containing only a k = 0 mode")
    {
        const TruncatedCone disk(1.0, 1.0);
        const auto b = build_basis(disk, 10.0);
        // j_{0,2} = 5.5201; the next zeros are j_{3,1} = 6.3802 and j_{1,2} = 7.0156
        const auto w = make_window(b, 5.3, 0.8);
        REQUIRE(w.modes.size() == 1);
        REQUIRE(w.modes[0].k == 0);
        REQUIRE(cluster_sup_operator_norm(w, grid_for(disk, w)) == Approx(w.modes[0].norm_const).epsilon(1e-14));
    }

    SECTION("rho = 2, lambda0 = 40 is grid-stable")
    {
        const TruncatedCone tc(2.0, 1.0);
        const auto w = make_window(tc, 40.0);
        const double a = cluster_sup_operator_norm(w, grid_for(tc, w));
        const double c = cluster_sup_operator_norm(w, grid_for(tc, w, 2.0));
        INFO("sup norm " << a << " refined " << c);
        REQUIRE(std::abs(a - c) <= 0.02 * c);
    }

    REQUIRE(cluster_sup_operator_norm(ClusterWindow{}, PolarGrid{}) == 0.0);
}

TEST_CASE("lower_bound_2_to_q", "[spectrum]")
{
    SECTION("single-mode window equals the mode norm")
    {
        const TruncatedCone disk(1.0, 1.0);
        const auto b = build_basis(disk, 10.0);
        const auto w = make_window(b, 5.3, 0.8);
        REQUIRE(w.modes.size() == 1);
        const auto rep = lower_bound_2_to_q(disk, w, 6.0, 5);
        const auto g = grid_for(disk, w, 4.0);
        const double n6 = lq_norm(mode_samples(w.modes[0], disk, g), g, 6.0);
        REQUIRE(rep.single_mode_max == Approx(n6).epsilon(1e-6));
        for (double r : rep.random_ratios)
            REQUIRE(r == Approx(n6).epsilon(1e-6));
        REQUIRE(rep.ratio == Approx(n6).epsilon(1e-6));
    }

    SECTION("rho = 1.5, lambda0 = 30")
    {
        const TruncatedCone tc(1.5, 1.0);
        const auto w = make_window(tc, 30.0);
        const auto rep = lower_bound_2_to_q(tc, w, 6.0, 12);
        REQUIRE(rep.random_ratios.size() == 12);
        for (double r : rep.random_ratios)
            REQUIRE(rep.ratio >= r);
        REQUIRE(rep.ratio >= rep.single_mode_max);
        REQUIRE(rep.ratio >= rep.tip_coherent);
        REQUIRE(rep.ratio >= rep.point_coherent_max);
        REQUIRE(!rep.best_kind.empty());
        // same seed, same report
        const auto again = lower_bound_2_to_q(tc, w, 6.0, 12);
        REQUIRE(again.random_ratios == rep.random_ratios);
    }

    SECTION("coherent input attains the pointwise maximum")
    {
        const TruncatedCone tc(1.5, 1.0);
        const auto w = make_window(tc, 12.0);
        const double r0 = 0.37, t0 = 0.9;
        std::vector<cplx> c(w.modes.size());
        for (std::size_t i = 0; i < c.size(); ++i)
            c[i] = std::conj(eigenfunction(w.modes[i], tc, r0, t0));
        auto value_at = [&](const std::vector<cplx>& a) {
            cplx v = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i)
                v += a[i] * eigenfunction(w.modes[i], tc, r0, t0);
            return std::abs(v) / coefficient_norm(a);
        };
        const double best = value_at(c);
        REQUIRE(best == Approx(std::sqrt(window_square_sum(w, 1.0, r0))).epsilon(1e-13));
        std::mt19937_64 rng(0x5EED);
        std::normal_distribution<double> N01;
        for (int t = 0; t < 200; ++t) {
            std::vector<cplx> a(c.size());
            for (auto& z : a)
                z = cplx(N01(rng), N01(rng));
            REQUIRE(value_at(a) <= best * (1 + 1e-13));
        }
    }

    REQUIRE_THROWS_AS(lower_bound_2_to_q(TruncatedCone(1.0, 1.0), ClusterWindow{}, 6.0, 0), std::invalid_argument);
}

TEST_CASE("fit_scaling_exponent", "[spectrum]")
{
    std::vector<std::pair<double, double>> pw, flat;
    for (double l : {10.0, 20.0, 40.0, 80.0, 160.0}) {
        pw.emplace_back(l, 3.0 * std::sqrt(l));
        flat.emplace_back(l, 2.5);
    }
    const auto f = fit_scaling_exponent(pw);
    REQUIRE(std::abs(f.slope - 0.5) <= 1e-10);
    REQUIRE(std::exp(f.intercept) == Approx(3.0).epsilon(1e-10));
    REQUIRE(f.residual <= 1e-12);
    REQUIRE(std::abs(fit_scaling_exponent(flat).slope) <= 1e-12);

    pw.resize(3);
    REQUIRE_THROWS_AS(fit_scaling_exponent(pw), InsufficientData);
    REQUIRE_THROWS_AS(fit_scaling_exponent({{2, 1}, {1, 1}, {3, 1}, {4, 1}}), std::invalid_argument);

    SECTION("sup-norm growth on the rho = 2 cone")
    {
        const TruncatedCone tc(2.0, 1.0);
        ZeroCache zc;
        std::vector<std::pair<double, double>> rows;
        for (double l : {20.0, 40.0, 80.0, 160.0}) {
            const auto w = make_window(tc, l, 1.0, &zc);
            rows.emplace_back(l, cluster_sup_operator_norm(w, grid_for(tc, w)));
        }
        const auto fit = fit_scaling_exponent(rows);
        INFO("slope " << fit.slope);
        REQUIRE(fit.slope <= 0.5 + 0.15);
    }
}

TEST_CASE("delta exponent", "[spectrum]")
{
    REQUIRE(delta_exponent(2.0) == 0.0);
    REQUIRE(delta_exponent(6.0) == Approx(1.0 / 6.0).epsilon(1e-15));
    REQUIRE(delta_exponent(INFINITY) == 0.5);
    REQUIRE(delta_exponent(4.0) == Approx(0.125).epsilon(1e-15));
    REQUIRE(delta_exponent(12.0) == Approx(1.0 / 3.0).epsilon(1e-15));
    // continuous at q = 6 and nondecreasing
    REQUIRE(delta_exponent(6.0 - 1e-9) == Approx(delta_exponent(6.0 + 1e-9)).margin(1e-8));
    double prev = 0.0;
    for (double q = 2.0; q < 40.0; q += 0.25) {
        REQUIRE(delta_exponent(q) >= prev);
        prev = delta_exponent(q);
    }
    REQUIRE_THROWS_AS(delta_exponent(1.5), std::domain_error);
}

TEST_CASE("sector correspondence", "[spectrum]")
{
    for (double a : {pi, pi / 2, 3 * pi / 4}) {
        const auto rep = sector_correspondence_check(a, 20.0);
        INFO("alpha " << a << " diff " << rep.max_abs_diff);
        REQUIRE(rep.matched);
        REQUIRE(!rep.sector.empty());
        REQUIRE(rep.sector.size() == rep.cone_odd.size());
    }
    // half-disk: orders n >= 1 of the disk
    const auto h = sector_correspondence_check(pi, 10.0);
    std::vector<double> disk;
    for (const auto& e : build_basis(TruncatedCone(1.0, 1.0), 10.0))
        if (e.k >= 1)
            disk.push_back(e.lambda);
    REQUIRE(h.sector.size() == disk.size());
    REQUIRE_THROWS_AS(sector_correspondence_check(0.0, 10.0), std::domain_error);
    REQUIRE_THROWS_AS(sector_correspondence_check(2 * pi, 10.0), std::domain_error);
}

TEST_CASE("zero cache reuse", "[spectrum]")
{
    const TruncatedCone tc(1.5, 1.0);
    ZeroCache zc;
    build_basis(tc, 20.0, &zc);
    const auto warm = build_basis(tc, 35.0, &zc);
    const auto cold = build_basis(tc, 35.0);
    REQUIRE(warm.size() == cold.size());
    for (std::size_t i = 0; i < warm.size(); ++i) {
        REQUIRE(warm[i].k == cold[i].k);
        REQUIRE(warm[i].m == cold[i].m);
        REQUIRE(warm[i].j == cold[i].j);
        REQUIRE(warm[i].norm_const == cold[i].norm_const);
    }
    const auto before = zc.misses();
    build_basis(tc, 35.0, &zc);
    REQUIRE(zc.hits() > 0);
    // rows ending above 35 need no extension; only the terminating order probes
    REQUIRE(zc.misses() - before <= 1);
}
