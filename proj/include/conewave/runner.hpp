#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "cluster_kernel.hpp"
#include "errors.hpp"
#include "phase_lab.hpp"
#include "spectrum.hpp"
#include "wave_kernel.hpp"
#include "zero_cache.hpp"

namespace conewave {

using json = nlohmann::json;

inline const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names{"spectrum-scaling", "wave-validate", "multiplier-envelope",
                                                "phase-certify", "sector-check"};
    return names;
}

struct RunConfig {
    std::string experiment;
    double rho = 2.0;
    std::optional<double> R;
    double delta = 0.1;
    std::vector<double> lambda_list;
    std::vector<double> q_list;
    unsigned long long seed = 0x5EED;
    std::string output_path = "out";
    int trials = 64;
    std::optional<int> samples;
    std::vector<double> mu_list{1.0, 25.0, 400.0};
    std::vector<double> alpha_list;
    double t = 0.9;
    double epsilon = 0.2;
};

inline double parse_q(const json& v)
{
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "infinity" || s == "Inf")
            return std::numeric_limits<double>::infinity();
        throw ConfigError("q_list: unknown entry \"" + s + "\"");
    }
    if (v.is_number())
        return v.get<double>();
    throw ConfigError("q_list: entries must be numbers or \"inf\"");
}

inline std::string q_label(double q) { return std::isinf(q) ? "inf" : std::to_string(static_cast<int>(q)); }

inline RunConfig parse_config(const json& j)
{
    if (!j.is_object())
        throw ConfigError("config: top level must be an object");
    static const std::vector<std::string> known{"experiment", "rho",     "R",          "delta",    "lambda_list",
                                                "q_list",     "seed",    "output_path", "trials",   "samples",
                                                "mu_list",    "alpha_list", "t",        "epsilon"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("config: unknown key \"" + it.key() + "\"");
    RunConfig c;
    try {
        if (j.contains("experiment"))
            c.experiment = j.at("experiment").get<std::string>();
        if (j.contains("rho"))
            c.rho = j.at("rho").get<double>();
        if (j.contains("R"))
            c.R = j.at("R").get<double>();
        if (j.contains("delta"))
            c.delta = j.at("delta").get<double>();
        if (j.contains("lambda_list"))
            c.lambda_list = j.at("lambda_list").get<std::vector<double>>();
        if (j.contains("q_list")) {
            c.q_list.clear();
            for (const auto& q : j.at("q_list"))
                c.q_list.push_back(parse_q(q));
        }
        if (j.contains("seed"))
            c.seed = j.at("seed").get<unsigned long long>();
        if (j.contains("output_path"))
            c.output_path = j.at("output_path").get<std::string>();
        if (j.contains("trials"))
            c.trials = j.at("trials").get<int>();
        if (j.contains("samples"))
            c.samples = j.at("samples").get<int>();
        if (j.contains("mu_list"))
            c.mu_list = j.at("mu_list").get<std::vector<double>>();
        if (j.contains("alpha_list"))
            c.alpha_list = j.at("alpha_list").get<std::vector<double>>();
        if (j.contains("t"))
            c.t = j.at("t").get<double>();
        if (j.contains("epsilon"))
            c.epsilon = j.at("epsilon").get<double>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
    return parse_config(j);
}

// fills experiment-specific defaults and checks every field
inline void finalize_config(RunConfig& c)
{
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end())
        throw ConfigError("config: unknown experiment \"" + c.experiment + "\"");
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("config: ") + what + " must be positive");
    };
    if (c.lambda_list.empty()) {
        if (c.experiment == "spectrum-scaling")
            c.lambda_list = {20.0, 40.0, 80.0, 160.0};
        else if (c.experiment == "wave-validate")
            c.lambda_list = {120.0};
        else if (c.experiment == "phase-certify")
            c.lambda_list = {200.0};
        else if (c.experiment == "sector-check")
            c.lambda_list = {20.0};
        else
            c.lambda_list = {100.0};
    }
    if (c.q_list.empty())
        c.q_list = {6.0, std::numeric_limits<double>::infinity()};
    if (!c.R)
        c.R = c.experiment == "wave-validate" ? 2.0 : 1.0;
    if (!c.samples)
        c.samples = c.experiment == "phase-certify" ? 10000 : 1000;
    positive(c.rho, "rho");
    positive(*c.R, "R");
    positive(c.delta, "delta");
    positive(c.t, "t");
    positive(c.epsilon, "epsilon");
    for (double l : c.lambda_list)
        positive(l, "lambda_list entries");
    for (std::size_t i = 1; i < c.lambda_list.size(); ++i)
        if (!(c.lambda_list[i] > c.lambda_list[i - 1]))
            throw ConfigError("config: lambda_list must be sorted ascending");
    for (double q : c.q_list)
        if (!(q == 2.0 || q == 6.0 || std::isinf(q)))
            throw ConfigError("config: q_list entries must be 2, 6 or \"inf\"");
    for (double m : c.mu_list)
        positive(m, "mu_list entries");
    for (double a : c.alpha_list)
        if (!(a > 0.0 && a < 2.0 * pi))
            throw ConfigError("config: alpha_list entries must lie in (0, 2 pi)");
    if (c.trials < 1 || *c.samples < 1)
        throw ConfigError("config: trials and samples must be positive");
    if (c.output_path.empty())
        throw ConfigError("config: output_path must not be empty");
}

inline json config_json(const RunConfig& c)
{
    json q = json::array();
    for (double v : c.q_list)
        q.push_back(std::isinf(v) ? json("inf") : json(v));
    return {{"experiment", c.experiment}, {"rho", c.rho},         {"R", c.R.value_or(1.0)}, {"delta", c.delta},
            {"lambda_list", c.lambda_list}, {"q_list", q},         {"seed", c.seed},         {"trials", c.trials},
            {"samples", c.samples.value_or(0)}, {"mu_list", c.mu_list}, {"alpha_list", c.alpha_list},
            {"t", c.t},                     {"epsilon", c.epsilon}};
}

inline constexpr double na = std::numeric_limits<double>::quiet_NaN();

struct ResultRow {
    std::string label;
    double rho = na;
    double lambda = na;
    double param = na;
    double measured = na;
    double reference = na;
    double ratio = na;
};

struct SweepResult {
    std::string experiment;
    std::vector<ResultRow> rows;
    json fits = json::object();
    json constants = json::object();
    json checks = json::array();
    bool pass = true;

    void check(const std::string& name, double value, double threshold, bool ok)
    {
        checks.push_back({{"name", name}, {"value", value}, {"threshold", threshold}, {"pass", ok}});
        pass = pass && ok;
    }
};

inline std::string fmt17(double v)
{
    if (std::isnan(v))
        return "";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string to_csv(const SweepResult& r)
{
    std::string s = "experiment,label,rho,lambda,param,measured,reference,ratio\n";
    for (const auto& row : r.rows) {
        s += r.experiment + "," + row.label + "," + fmt17(row.rho) + "," + fmt17(row.lambda) + "," + fmt17(row.param)
             + "," + fmt17(row.measured) + "," + fmt17(row.reference) + "," + fmt17(row.ratio) + "\n";
    }
    return s;
}

inline json summary_json(const SweepResult& r, const RunConfig& c)
{
    return {{"schema", 1},         {"experiment", r.experiment}, {"config", config_json(c)}, {"seed", c.seed},
            {"fits", r.fits},      {"constants", r.constants},   {"checks", r.checks},       {"pass", r.pass}};
}

namespace experiments {

inline SweepResult spectrum_scaling(const RunConfig& c)
{
    SweepResult out;
    const TruncatedCone tc(c.rho, *c.R);
    ZeroCache cache;
    std::vector<std::vector<std::pair<double, double>>> series(c.q_list.size());
    for (double lam : c.lambda_list) {
        const ClusterWindow w = make_window(tc, lam, 1.0, &cache);
        if (w.modes.empty())
            throw InsufficientData("spectrum-scaling: empty window at lambda " + fmt17(lam));
        for (std::size_t i = 0; i < c.q_list.size(); ++i) {
            const double q = c.q_list[i];
            double v;
            std::string label;
            if (std::isinf(q)) {
                v = cluster_sup_operator_norm(w, grid_for(tc, w));
                label = "sup-norm";
            } else {
                v = lower_bound_2_to_q(tc, w, q, c.trials, c.seed).ratio;
                label = "lower-bound-L" + q_label(q);
            }
            const double ref = std::pow(lam, delta_exponent(q));
            out.rows.push_back({label, c.rho, lam, std::isinf(q) ? na : q, v, ref, v / ref});
            series[i].emplace_back(lam, v);
        }
    }
    for (std::size_t i = 0; i < c.q_list.size(); ++i) {
        const std::string key = "q=" + q_label(c.q_list[i]);
        const double thr = delta_exponent(c.q_list[i]) + 0.15;
        if (series[i].size() < 4) {
            out.check("slope " + key, na, thr, false);
            continue;
        }
        const ScalingFit f = fit_scaling_exponent(series[i]);
        out.fits[key] = {{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual},
                         {"delta_q", delta_exponent(c.q_list[i])}};
        out.check("slope " + key, f.slope, thr, f.slope <= thr);
    }
    return out;
}

// r in (0.01, 1), t = r1 + r2 + (0, 1.5), both phases at least 0.05 away from 2 pi Z
inline std::vector<std::tuple<double, PolarPoint, PolarPoint>> admissible_samples(const Cone& cone, int n,
                                                                                  unsigned long long seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> Ur(0.01, 1.0), Ut(-pi, pi);
    std::vector<std::tuple<double, PolarPoint, PolarPoint>> out;
    while (static_cast<int>(out.size()) < n) {
        const PolarPoint a(Ur(rng), cone.reduce(Ut(rng) * cone.rho)), b(Ur(rng), cone.reduce(Ut(rng) * cone.rho));
        const double d = a.theta - b.theta;
        const double gap = std::min(detail::phase_gap((pi + d) / cone.rho), detail::phase_gap((pi - d) / cone.rho));
        const double t = a.r + b.r + 1.5 * Ur(rng);
        if (gap < 0.05)
            continue;
        out.emplace_back(t, a, b);
    }
    return out;
}

inline SweepResult wave_validate(const RunConfig& c)
{
    SweepResult out;
    const Cone cone(c.rho);
    double max_abs = 0.0, max_err = 0.0;
    int idx = 0;
    for (const auto& [t, a, b] : admissible_samples(cone, *c.samples, c.seed)) {
        const DiffValue v = diff_kernel(t, a, b, cone);
        max_abs = std::max(max_abs, std::abs(v.value));
        max_err = std::max(max_err, v.error_estimate / std::max(std::abs(v.value), 1e-300));
        out.rows.push_back({"diff-sample", c.rho, na, static_cast<double>(idx++), v.value, v.error_estimate, na});
    }
    out.constants["max_abs_diff_kernel"] = max_abs;
    out.constants["max_rel_error_estimate"] = max_err;
    if (c.rho == 1.0)
        out.check("rho=1 diffraction vanishing", max_abs, 1e-10, max_abs <= 1e-10);

    const GaussianBump f(0.3, 0.0, 0.04);
    PairingOptions o;
    o.lambda_max = c.lambda_list.back();
    const PairingResult p = propagator_pairing(c.t, f, f, TruncatedCone(c.rho, *c.R), o);
    out.rows.push_back({"pairing", c.rho, o.lambda_max, c.t, p.kernel_route, p.spectral_route, p.rel_diff});
    out.constants["pairing"] = {{"kernel_route", p.kernel_route}, {"spectral_route", p.spectral_route},
                                {"geom_part", p.geom_part},       {"diff_part", p.diff_part},
                                {"spectral_tail", p.spectral_tail}, {"modes_used", p.modes_used}};
    out.check("pairing relative difference", p.rel_diff, 1e-2, p.rel_diff <= 1e-2);
    return out;
}

inline SweepResult multiplier_envelope(const RunConfig& c)
{
    SweepResult out;
    const ChiProfile chi(c.delta);
    const double r = 0.9 * c.delta; // r1 = r2 = r puts r1 + r2 = 1.8 delta inside (delta/2, 2 delta)
    for (double mu : c.mu_list) {
        const EnvelopeReport e = conewave::multiplier_envelope(mu);
        const double lam = mu / (r * r);
        const cplx ch = h_prefactor(c.rho, r, r, a_lambda_point(chi, lam, 2.0 * r));
        const double raw = e.constant * 0.5 * pi * std::abs(ch);
        double series = 0.0;
        for (int i = 1; i <= 20; ++i) {
            const double xi = std::sqrt(mu) * i / 20.0;
            const cplx a = h_symbol(mu, xi), b = h_symbol_series(mu, xi);
            series = std::max(series, std::abs(a - b) / std::abs(a));
        }
        out.rows.push_back({"plateau", c.rho, lam, mu, e.plateau_const, 10.0, e.plateau_const / 10.0});
        out.rows.push_back({"crossover", c.rho, lam, mu, e.middle_const, 10.0, e.middle_const / 10.0});
        out.rows.push_back({"tail", c.rho, lam, mu, e.tail_const, 10.0, e.tail_const / 10.0});
        out.rows.push_back({"raw", c.rho, lam, mu, raw, 10.0, raw / 10.0});
        out.rows.push_back({"series-route", c.rho, lam, mu, series, 1e-8, series / 1e-8});
        const std::string key = "mu=" + fmt17(mu);
        out.constants[key] = {{"normalised", e.constant}, {"raw", raw}, {"lambda", lam}, {"r1", r}, {"r2", r}};
        out.check("envelope constant " + key, e.constant, 10.0, e.constant <= 10.0);
        out.check("raw envelope constant " + key, raw, 10.0, raw <= 10.0);
        out.check("series route " + key, series, 1e-8, series <= 1e-8);
    }
    return out;
}

inline SweepResult phase_certify(const RunConfig& c)
{
    SweepResult out;
    const double lam = c.lambda_list.back();
    const PsiBoundReport a = Psi_lower_bound_check(c.rho, c.epsilon, c.delta, lam, *c.samples, c.seed);
    const PsiBoundReport b = Psi_lower_bound_check(c.rho, c.epsilon, c.delta, lam, 2L * *c.samples, c.seed);
    const double stab = std::max(a.min_ratio, b.min_ratio) / std::min(a.min_ratio, b.min_ratio);
    out.rows.push_back({"psi-min-ratio", c.rho, lam, static_cast<double>(a.samples), a.min_ratio, na, na});
    out.rows.push_back({"psi-min-ratio", c.rho, lam, static_cast<double>(b.samples), b.min_ratio, na, na});
    out.constants["psi"] = {{"min_ratio", a.min_ratio},       {"min_ratio_doubled", b.min_ratio},
                            {"max_ratio", a.max_ratio},       {"rejected", a.rejected},
                            {"split_threshold", a.split_threshold}, {"samples", a.samples}, {"seed", a.seed}};
    out.check("psi min ratio positive", a.min_ratio, 0.0, a.min_ratio > 0.0 && b.min_ratio > 0.0);
    out.check("psi doubling stability", stab, 2.0, stab <= 2.0);

    const DerivativeCheck d = derivative_fd_check(400, c.seed);
    out.rows.push_back({"derivative-fd", c.rho, na, na, d.max_rel_error, 1e-6, d.max_rel_error / 1e-6});
    out.constants["derivative_worst"] = d.worst;
    out.check("analytic vs finite difference", d.max_rel_error, 1e-6, d.max_rel_error <= 1e-6);

    const std::vector<double> mus{10.0, 1e2, 1e3, 1e4, 1e5, 1e6};
    const StationaryPhaseReport sp = stationary_phase_probe(PhaseDescriptor::quadratic(), [](double) { return 1.0; }, mus);
    for (std::size_t i = 0; i < mus.size(); ++i)
        out.rows.push_back({"fresnel-probe", na, na, mus[i], sp.scaled[i], 0.5 * std::sqrt(pi), na});
    const double miss = std::abs(sp.last - 0.5 * std::sqrt(pi));
    out.constants["stationary_phase_sup"] = sp.sup;
    out.check("stationary phase sup finite", sp.sup, na, std::isfinite(sp.sup));
    out.check("Fresnel limit", miss, 1e-3, miss <= 1e-3);

    for (double e : {-0.3, 0.3}) {
        const DGReport g = dG_expansion_check(0.05, 0.07, pi + e);
        out.rows.push_back({"dG-remainder-1", na, na, e, g.ratio1, 10.0, g.ratio1 / 10.0});
        out.rows.push_back({"dG-remainder-2", na, na, e, g.ratio2, 10.0, g.ratio2 / 10.0});
        out.check("dG remainder ratios at pi" + std::string(e < 0 ? "-" : "+") + "0.3", std::max(g.ratio1, g.ratio2), 10.0,
                  g.ratio1 <= 10.0 && g.ratio2 <= 10.0);
    }
    return out;
}

inline SweepResult sector_check(const RunConfig& c)
{
    SweepResult out;
    const double lmax = c.lambda_list.back();
    std::vector<double> alphas = c.alpha_list;
    if (alphas.empty()) {
        if (c.rho < 2.0)
            alphas.push_back(pi * c.rho);
        else
            alphas = {0.5 * pi, 0.75 * pi, pi};
    }
    for (double al : alphas) {
        const SectorReport s = sector_correspondence_check(al, lmax, *c.R);
        out.rows.push_back({"sector", s.rho, lmax, al, s.max_abs_diff, 1e-9, s.max_abs_diff / 1e-9});
        out.constants["alpha=" + fmt17(al)] = {{"eigenvalues", s.sector.size()}, {"max_abs_diff", s.max_abs_diff}};
        out.check("sector spectrum alpha=" + fmt17(al), s.max_abs_diff, 1e-9, s.matched);
    }
    return out;
}

} // namespace experiments

inline SweepResult run(RunConfig& c)
{
    finalize_config(c);
    SweepResult r;
    try {
        if (c.experiment == "spectrum-scaling")
            r = experiments::spectrum_scaling(c);
        else if (c.experiment == "wave-validate")
            r = experiments::wave_validate(c);
        else if (c.experiment == "multiplier-envelope")
            r = experiments::multiplier_envelope(c);
        else if (c.experiment == "phase-certify")
            r = experiments::phase_certify(c);
        else
            r = experiments::sector_check(c);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error("experiment " + c.experiment + ": " + e.what());
    }
    r.experiment = c.experiment;
    return r;
}

inline void write_outputs(const SweepResult& r, const RunConfig& c)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(c.output_path, ec);
    if (ec)
        throw ConfigError("output: cannot create " + c.output_path + ": " + ec.message());
    const fs::path dir(c.output_path);
    {
        std::ofstream f(dir / "results.csv", std::ios::binary | std::ios::trunc);
        if (!f)
            throw ConfigError("output: cannot write " + (dir / "results.csv").string());
        f << to_csv(r);
    }
    {
        std::ofstream f(dir / "summary.json", std::ios::binary | std::ios::trunc);
        if (!f)
            throw ConfigError("output: cannot write " + (dir / "summary.json").string());
        f << summary_json(r, c).dump(2) << "\n";
    }
}

struct ZerosReport {
    std::size_t orders = 0;
    std::size_t entries = 0;
    std::size_t hits = 0;
    std::size_t misses = 0;
    bool rebuilt = false;
};

// orders nu = k/rho, k = 0..floor(nu_max rho), each to m_max zeros
inline ZerosReport build_zero_cache(double nu_max, int m_max, const std::string& path, double rho = 1.0)
{
    if (!(nu_max >= 0.0) || m_max < 1 || !(rho > 0.0))
        throw ConfigError("zeros: need nu_max >= 0, m_max >= 1, rho > 0");
    ZerosReport rep;
    bool missing = !std::filesystem::exists(path);
    ZeroCache cache = ZeroCache::load_or_empty(path, rep.rebuilt);
    if (missing)
        rep.rebuilt = false;
    const int kmax = static_cast<int>(std::floor(nu_max * rho + 1e-12));
    for (int k = 0; k <= kmax; ++k) {
        cache.zero(k / rho, m_max);
        ++rep.orders;
    }
    cache.store(path);
    rep.entries = cache.size();
    rep.hits = cache.hits();
    rep.misses = cache.misses();
    return rep;
}

} // namespace conewave
