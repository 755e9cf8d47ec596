#include <iostream>

#include <CLI11.hpp>

#include <conewave/runner.hpp>

using namespace conewave;

int main(int argc, char** argv)
{
    CLI::App app{"conewave: spectral cluster and wave kernel experiments on flat cones"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run one experiment from a JSON config");
    std::string config_path, experiment, out;
    std::optional<double> rho;
    std::vector<double> lambdas;
    std::optional<unsigned long long> seed;
    run_cmd->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--experiment", experiment, "override the experiment")
        ->check(CLI::IsMember(experiment_names()));
    run_cmd->add_option("--rho", rho, "override the cone parameter");
    run_cmd->add_option("--lambda", lambdas, "override lambda_list");
    run_cmd->add_option("--out", out, "override output_path");
    run_cmd->add_option("--seed", seed, "override the seed");

    auto* zeros_cmd = app.add_subcommand("zeros", "fill a Bessel zero cache file");
    double nu_max = 10.0, zrho = 1.0;
    int m_max = 20;
    std::string cache_path;
    zeros_cmd->add_option("--nu-max", nu_max, "largest order")->required();
    zeros_cmd->add_option("--m-max", m_max, "zeros per order")->required();
    zeros_cmd->add_option("--cache", cache_path, "cache file")->required();
    zeros_cmd->add_option("--rho", zrho, "orders are k/rho");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            RunConfig c = load_config(config_path);
            if (!experiment.empty())
                c.experiment = experiment;
            if (rho)
                c.rho = *rho;
            if (!lambdas.empty())
                c.lambda_list = lambdas;
            if (!out.empty())
                c.output_path = out;
            if (seed)
                c.seed = *seed;
            const SweepResult r = run(c);
            write_outputs(r, c);
            for (const auto& ch : r.checks)
                std::cout << (ch["pass"].get<bool>() ? "PASS " : "FAIL ") << ch["name"].get<std::string>() << "  "
                          << ch["value"].dump() << " (threshold " << ch["threshold"].dump() << ")\n";
            std::cout << c.experiment << ": " << (r.pass ? "pass" : "fail") << ", wrote " << c.output_path << "\n";
            return r.pass ? 0 : 3;
        }
        const ZerosReport z = build_zero_cache(nu_max, m_max, cache_path, zrho);
        std::cout << json{{"cache", cache_path}, {"orders", z.orders}, {"entries", z.entries},
                          {"hits", z.hits},      {"misses", z.misses}, {"rebuilt", z.rebuilt}}
                         .dump()
                  << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
