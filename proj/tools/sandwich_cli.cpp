#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sandwich/commands.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::string> out;
    std::optional<std::size_t> workers;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
    auto* opt = cmd->add_option("--config", f.config, "INI run configuration");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "master seed (overrides run.seed)");
    cmd->add_option("--paths", f.paths, "number of paths (overrides run.paths)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "output directory (overrides run.output)");
    cmd->add_option("--workers", f.workers, "worker threads (overrides run.workers)")
        ->check(CLI::PositiveNumber);
}

sandwich::RunConfig resolve(const CommonFlags& f) {
    auto cfg = sandwich::load_config(f.config);
    if (f.seed) cfg.run.seed = *f.seed;
    if (f.paths) cfg.run.paths = *f.paths;
    if (f.out) cfg.run.output = *f.out;
    if (f.workers) cfg.run.workers = *f.workers;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and certificates for sandwiched SDEs with singular drift"};
    app.require_subcommand(1);

    CommonFlags sim_flags;
    CommonFlags study_flags;
    CommonFlags val_flags;
    auto* simulate = app.add_subcommand("simulate", "simulate paths, write CSVs and a manifest");
    add_common(simulate, sim_flags, true);
    auto* study = app.add_subcommand("study", "run a convergence, tail or moment study");
    add_common(study, study_flags, true);
    auto* validate = app.add_subcommand("validate", "sampled check of the drift assumptions");
    add_common(validate, val_flags, true);

    auto* holder = app.add_subcommand("estimate-holder", "Hölder constants of a path CSV");
    std::string input;
    double lambda = 0.5;
    double p = 4.0;
    std::string holder_out;
    holder->add_option("--input", input, "path CSV (t,value)")->required()->check(CLI::ExistingFile);
    holder->add_option("--lambda", lambda, "Hölder order λ")->required();
    holder->add_option("--p", p, "GRR exponent p");
    holder->add_option("--out", holder_out, "write JSON here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*simulate) return sandwich::cmd_simulate(resolve(sim_flags), std::cout);
        if (*study) return sandwich::cmd_study(resolve(study_flags), std::cout);
        if (*validate) return sandwich::cmd_validate(resolve(val_flags), std::cout);
        if (*holder) return sandwich::cmd_estimate_holder(input, lambda, p, holder_out, std::cout);
    } catch (const sandwich::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const sandwich::AssumptionViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const sandwich::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
