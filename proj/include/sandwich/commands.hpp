#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "sandwich/analysis.hpp"
#include "sandwich/config.hpp"

namespace sandwich {

namespace detail {

inline void write_json(const nlohmann::json& j, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failure on " + file.string());
}

inline nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

inline nlohmann::json config_json(const RunConfig& cfg) {
    const auto& m = cfg.model;
    nlohmann::json model = {{"name", m.name},   {"kappa", m.kappa}, {"theta", m.theta},
                            {"alpha", m.alpha}, {"nu", m.nu},       {"a", m.a},
                            {"a1", m.a1},       {"a2", m.a2},       {"a3", m.a3},
                            {"gamma", m.gamma}, {"mean", m.mean},   {"lower", m.lower},
                            {"upper", m.upper}, {"lambda", cfg.holder_order()}};
    return {{"model", model},
            {"noise",
             {{"kind", to_string(cfg.noise.kind)},
              {"hurst", cfg.noise.hurst},
              {"scale", cfg.noise.scale},
              {"nu_brownian", cfg.noise.nu_brownian},
              {"nu_fractional", cfg.noise.nu_fractional},
              {"generator", to_string(cfg.noise.generator)}}},
            {"scheme",
             {{"n", cfg.scheme.n},
              {"steps", cfg.scheme.steps},
              {"horizon", cfg.scheme.horizon},
              {"y0", cfg.scheme.y0},
              {"allow_below_n0", cfg.scheme.allow_below_n0}}},
            {"seed", cfg.run.seed},
            {"paths", cfg.run.paths},
            {"workers", cfg.run.workers}};
}

inline EnsembleSpec ensemble_spec(const RunConfig& cfg, const DriftModel& model) {
    EnsembleSpec e{model, cfg.noise, cfg.scheme.n, cfg.scheme.steps, cfg.scheme.y0,
                   cfg.run.seed, cfg.run.paths, cfg.run.workers};
    e.allow_below_minimal = cfg.scheme.allow_below_n0;
    return e;
}

inline std::string path_file_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "path_%05zu.csv", index);
    return buf;
}

}  // namespace detail

/// One CSV per path plus manifest.json in `cfg.run.output`. Returns the exit code.
inline int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    const auto model = build_model(cfg);
    const auto spec = detail::ensemble_spec(cfg, model);
    const auto ensemble = simulate_ensemble(spec);
    const std::filesystem::path dir(cfg.run.output);
    std::filesystem::create_directories(dir);

    nlohmann::json paths = nlohmann::json::array();
    std::size_t crossings = 0;
    std::size_t clamps = 0;
    std::size_t fallbacks = 0;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        const auto& r = ensemble[i].result;
        const auto name = detail::path_file_name(i);
        write_path_csv(r.path, (dir / name).string());
        crossings += r.lower_crossings + r.upper_crossings;
        clamps += r.clamp_count;
        fallbacks += ensemble[i].used_fallback ? 1 : 0;
        paths.push_back({{"index", i},
                         {"file", name},
                         {"clamp_count", r.clamp_count},
                         {"min_lower_gap", detail::finite_or_null(r.min_lower_gap)},
                         {"min_upper_gap", detail::finite_or_null(r.min_upper_gap)},
                         {"lower_crossings", r.lower_crossings},
                         {"upper_crossings", r.upper_crossings},
                         {"confined", r.confined()},
                         {"noise_fallback", ensemble[i].used_fallback}});
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    nlohmann::json manifest = {{"command", "simulate"},
                               {"parameters", detail::config_json(cfg)},
                               {"model_constants",
                                {{"c", model.c},
                                 {"gamma", model.gamma},
                                 {"y_star", model.y_star},
                                 {"n0", minimal_level(model)}}},
                               {"paths", paths},
                               {"total_crossings", crossings},
                               {"total_clamps", clamps},
                               {"noise_fallbacks", fallbacks},
                               {"wall_time_seconds", wall}};
    detail::write_json(manifest, dir / "manifest.json");
    log << "wrote " << ensemble.size() << " paths to " << dir.string() << "; crossings "
        << crossings << "\n";
    return 0;
}

inline StudyReport run_study(const RunConfig& cfg) {
    const auto model = build_model(cfg);
    const auto& st = cfg.study;
    if (st.kind == "convergence") {
        ConvergenceSpec c;
        c.model = model;
        c.noise = cfg.noise;
        c.levels = st.levels;
        c.steps = st.steps;
        c.reference_steps = st.reference_steps;
        c.y0 = cfg.scheme.y0;
        c.seed = cfg.run.seed;
        c.paths = cfg.run.paths;
        c.workers = cfg.run.workers;
        c.lambda_p = cfg.lambda_p();
        c.min_slope = st.min_slope;
        c.allow_below_minimal = cfg.scheme.allow_below_n0;
        return convergence_study(c);
    }
    const auto spec = detail::ensemble_spec(cfg, model);
    if (st.kind == "tail") return tail_exponent_study(spec, st.epsilon, cfg.lambda_p());

    const auto ensemble = simulate_ensemble(spec);
    std::vector<SamplePath> paths;
    paths.reserve(ensemble.size());
    for (const auto& e : ensemble) paths.push_back(e.result.path);
    const auto mom = upper_moment_estimate(paths, st.r, model);
    StudyReport rep;
    rep.study = "moments";
    rep.parameters = detail::config_json(cfg);
    rep.parameters["r"] = st.r;
    rep.metrics["sup_moment"] = to_json(mom.sup_moment);
    rep.metrics["sup_moment_half"] = to_json(mom.sup_moment_half);
    rep.metrics["sup_stable"] = mom.sup_stable;
    if (model.constrained()) {
        rep.metrics["inverse_moment"] = to_json(mom.inverse_moment);
        rep.metrics["inverse_moment_half"] = to_json(mom.inverse_moment_half);
        rep.metrics["inverse_stable"] = mom.inverse_stable;
    }
    rep.pass = mom.sup_stable && (!model.constrained() || mom.inverse_stable);
    return rep;
}

inline int cmd_study(const RunConfig& cfg, std::ostream& log) {
    const auto rep = run_study(cfg);
    const std::filesystem::path dir(cfg.run.output);
    std::filesystem::create_directories(dir);
    detail::write_json(rep.to_json(), dir / "report.json");
    log << rep.study << ": slope " << rep.slope << " expected " << rep.expected << " -> "
        << (rep.inconclusive ? "inconclusive" : (rep.pass ? "pass" : "fail")) << "\n";
    return 0;
}

inline nlohmann::json to_json(const ValidationReport& rep) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : rep.checks) {
        checks.push_back({{"id", c.id},
                          {"description", c.description},
                          {"passed", c.passed},
                          {"samples", c.samples},
                          {"violations", c.violations},
                          {"worst_margin", detail::finite_or_null(c.worst_margin)},
                          {"witness_t", detail::finite_or_null(c.witness_t)},
                          {"witness_y", detail::finite_or_null(c.witness_y)},
                          {"note", c.note}});
    }
    return {{"model", rep.model}, {"all_passed", rep.all_passed()}, {"failed", rep.failed()},
            {"checks", checks}};
}

/// Sampled assumption checks on min(steps, 1024) cells; exit 0 iff everything passes.
inline ValidationReport run_validation(const RunConfig& cfg) {
    ValidationReport rep;
    try {
        const auto model = build_model(cfg);
        const TimeGrid grid(cfg.scheme.horizon, std::min<std::size_t>(cfg.scheme.steps, 1024));
        rep = validate_assumptions(model, grid, 8);
    } catch (const AssumptionViolation& e) {
        rep.model = cfg.model.name;
        AssumptionCheck chk;
        chk.id = e.assumption();
        chk.description = "rejected at model construction";
        chk.passed = false;
        chk.violations = 1;
        chk.note = e.what();
        rep.checks.push_back(chk);
    }
    return rep;
}

inline int cmd_validate(const RunConfig& cfg, std::ostream& log) {
    const auto rep = run_validation(cfg);
    const std::filesystem::path dir(cfg.run.output);
    std::filesystem::create_directories(dir);
    detail::write_json(to_json(rep), dir / "validation.json");
    for (const auto& c : rep.checks) {
        log << (c.passed ? "pass " : "FAIL ") << c.id << ": " << c.description;
        if (!c.note.empty()) log << " (" << c.note << ")";
        log << "\n";
    }
    return rep.all_passed() ? 0 : 1;
}

inline nlohmann::json holder_json(const HolderEstimate& e) {
    return {{"lambda", e.lambda},
            {"p", e.p},
            {"grr", detail::finite_or_null(e.grr)},
            {"max_ratio", e.max_ratio},
            {"argmax", {e.argmax_first, e.argmax_second}}};
}

inline int cmd_estimate_holder(const std::string& input, double lambda, double p,
                               const std::string& out_file, std::ostream& log) {
    const auto path = read_path_csv(input);
    const auto est = estimate_holder(path, lambda, p, path.size() <= 8193);
    const auto j = holder_json(est);
    if (out_file.empty()) {
        log << j.dump(2) << "\n";
    } else {
        detail::write_json(j, out_file);
    }
    return 0;
}

}  // namespace sandwich
