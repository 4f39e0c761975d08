#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sandwich/drift.hpp"
#include "sandwich/noise.hpp"

namespace sandwich {

/// Invalid configuration; the message starts with the offending `section.key`.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunSection {
    std::uint64_t seed = 0;
    std::size_t paths = 1;
    std::size_t workers = 1;
    std::string output = "out";
};

struct ModelSection {
    std::string name = "cir_cev";
    double kappa = 1.5;
    double theta = 0.5;
    double alpha = 0.5;
    double nu = 0.0;
    double a = 1.0;
    double a1 = 1.0;
    double a2 = 1.0;
    double a3 = 0.0;  // a₃(t, y) = a3 · y
    double gamma = 1.0;
    double mean = 0.0;
    std::string lower = "const(0)";
    std::string upper = "const(1)";
    std::optional<double> lambda;
    std::optional<double> dominance;
    std::optional<double> c;
    std::optional<double> y_star;
};

struct SchemeSection {
    long n = 20;
    std::size_t steps = 1024;
    double horizon = 1.0;
    double y0 = 1.0;
    bool allow_below_n0 = false;
};

struct StudySection {
    std::string kind = "convergence";
    std::vector<double> epsilon{0.02, 0.04, 0.08, 0.16};
    std::vector<long> levels{20};
    std::vector<std::size_t> steps{512, 1024, 2048};
    std::size_t reference_steps = 8192;
    std::optional<double> lambda_p;
    double r = 1.0;
    double min_slope = 0.5;
};

struct RunConfig {
    RunSection run;
    ModelSection model;
    NoiseSpec noise;
    SchemeSection scheme;
    StudySection study;

    /// λ for the drift assumptions: declared, else the noise regularity minus 0.05.
    double holder_order() const {
        return model.lambda.value_or(noise.effective_hurst() - 0.05);
    }
    /// λ_p for the error and tail exponents: declared, else the noise regularity minus 0.1.
    double lambda_p() const { return study.lambda_p.value_or(noise.effective_hurst() - 0.1); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& where, const std::string& text) {
    const auto t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw ConfigError(where + ": expected a finite number, got '" + text + "'");
    }
    return v;
}

template <class Int>
Int parse_integer(const std::string& where, const std::string& text) {
    const auto t = trim(text);
    Int v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ConfigError(where + ": expected an integer, got '" + text + "'");
    }
    return v;
}

inline bool parse_bool(const std::string& where, const std::string& text) {
    const auto t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError(where + ": expected true/false, got '" + text + "'");
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

}  // namespace detail

/// Parses `const(v)`, `cos(amp,freq,offset)` or `exp(amp,rate,offset)`.
inline BoundFunction parse_bound(const std::string& where, const std::string& text, double order,
                                 double horizon) {
    const auto t = detail::trim(text);
    const auto open = t.find('(');
    if (open == std::string::npos || t.back() != ')') {
        throw ConfigError(where + ": expected const(v), cos(a,w,o) or exp(a,r,o), got '" + text + "'");
    }
    const auto head = t.substr(0, open);
    const auto args = detail::split_list(t.substr(open + 1, t.size() - open - 2));
    std::vector<double> v;
    for (const auto& a : args) v.push_back(detail::parse_real(where, a));
    if (head == "const" && v.size() == 1) {
        auto b = BoundFunction::constant(v[0]);
        b.order = order;
        return b;
    }
    if (head == "cos" && v.size() == 3) return BoundFunction::cosine(v[0], v[1], v[2], order, horizon);
    if (head == "exp" && v.size() == 3) {
        return BoundFunction::exponential(v[0], v[1], v[2], order, horizon);
    }
    throw ConfigError(where + ": unknown bound form '" + text + "'");
}

/// INI text → RunConfig. Unknown sections or keys are rejected.
inline RunConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
    }
    static const std::map<std::string, std::set<std::string>> allowed{
        {"run", {"seed", "paths", "workers", "output"}},
        {"model",
         {"name", "kappa", "theta", "alpha", "nu", "a", "a1", "a2", "a3", "gamma", "mean", "lower",
          "upper", "lambda", "dominance", "c", "y_star"}},
        {"noise", {"kind", "hurst", "scale", "nu_brownian", "nu_fractional", "generator"}},
        {"scheme", {"n", "steps", "horizon", "y0", "allow_below_n0"}},
        {"study",
         {"kind", "epsilon", "levels", "steps", "reference_steps", "lambda_p", "r", "min_slope"}}};
    for (const auto& [section, body] : tree) {
        const auto it = allowed.find(section);
        if (it == allowed.end()) {
            throw ConfigError(section + ": unknown section or key outside a section");
        }
        for (const auto& [key, value] : body) {
            if (it->second.count(key) == 0) throw ConfigError(section + "." + key + ": unknown key");
        }
    }

    RunConfig cfg;
    auto each = [&](const std::string& section, auto&& fn) {
        const auto child = tree.get_child_optional(section);
        if (!child) return;
        for (const auto& [key, value] : *child) fn(section + "." + key, key, value.data());
    };

    each("run", [&](const std::string& w, const std::string& k, const std::string& v) {
        if (k == "seed") cfg.run.seed = detail::parse_integer<std::uint64_t>(w, v);
        if (k == "paths") cfg.run.paths = detail::parse_integer<std::size_t>(w, v);
        if (k == "workers") cfg.run.workers = detail::parse_integer<std::size_t>(w, v);
        if (k == "output") cfg.run.output = detail::trim(v);
    });
    if (cfg.run.paths == 0) throw ConfigError("run.paths: must be ≥ 1");
    if (cfg.run.workers == 0) throw ConfigError("run.workers: must be ≥ 1");

    each("model", [&](const std::string& w, const std::string& k, const std::string& v) {
        auto& m = cfg.model;
        if (k == "name") {
            m.name = detail::trim(v);
            return;
        }
        if (k == "lower") {
            m.lower = v;
            return;
        }
        if (k == "upper") {
            m.upper = v;
            return;
        }
        const double x = detail::parse_real(w, v);
        if (k == "kappa") m.kappa = x;
        if (k == "theta") m.theta = x;
        if (k == "alpha") m.alpha = x;
        if (k == "nu") m.nu = x;
        if (k == "a") m.a = x;
        if (k == "a1") m.a1 = x;
        if (k == "a2") m.a2 = x;
        if (k == "a3") m.a3 = x;
        if (k == "gamma") m.gamma = x;
        if (k == "mean") m.mean = x;
        if (k == "lambda") m.lambda = x;
        if (k == "dominance") m.dominance = x;
        if (k == "c") m.c = x;
        if (k == "y_star") m.y_star = x;
    });
    static const std::set<std::string> models{"cir_cev",         "mixed_cev", "two_sided_power",
                                              "one_sided_power", "linear",    "zero"};
    if (models.count(cfg.model.name) == 0) {
        throw ConfigError("model.name: unknown model '" + cfg.model.name + "'");
    }

    each("noise", [&](const std::string& w, const std::string& k, const std::string& v) {
        auto& n = cfg.noise;
        if (k == "kind") {
            const auto t = detail::trim(v);
            if (t == "zero") n.kind = NoiseKind::zero;
            else if (t == "brownian") n.kind = NoiseKind::brownian;
            else if (t == "fbm") n.kind = NoiseKind::fbm;
            else if (t == "mixed") n.kind = NoiseKind::mixed;
            else throw ConfigError(w + ": unknown noise kind '" + t + "'");
        } else if (k == "generator") {
            const auto t = detail::trim(v);
            if (t == "circulant") n.generator = FbmGenerator::circulant;
            else if (t == "hosking") n.generator = FbmGenerator::hosking;
            else throw ConfigError(w + ": unknown generator '" + t + "'");
        } else {
            const double x = detail::parse_real(w, v);
            if (k == "hurst") n.hurst = x;
            if (k == "scale") n.scale = x;
            if (k == "nu_brownian") n.nu_brownian = x;
            if (k == "nu_fractional") n.nu_fractional = x;
        }
    });
    try {
        cfg.noise.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("noise: ") + e.what());
    }

    each("scheme", [&](const std::string& w, const std::string& k, const std::string& v) {
        auto& s = cfg.scheme;
        if (k == "n") s.n = detail::parse_integer<long>(w, v);
        if (k == "steps") s.steps = detail::parse_integer<std::size_t>(w, v);
        if (k == "horizon") s.horizon = detail::parse_real(w, v);
        if (k == "y0") s.y0 = detail::parse_real(w, v);
        if (k == "allow_below_n0") s.allow_below_n0 = detail::parse_bool(w, v);
    });
    if (cfg.scheme.n < 1) throw ConfigError("scheme.n: must be ≥ 1");
    if (cfg.scheme.steps < 1) throw ConfigError("scheme.steps: must be ≥ 1");
    if (!(cfg.scheme.horizon > 0.0)) throw ConfigError("scheme.horizon: must be positive");

    each("study", [&](const std::string& w, const std::string& k, const std::string& v) {
        auto& s = cfg.study;
        if (k == "kind") {
            s.kind = detail::trim(v);
        } else if (k == "epsilon") {
            s.epsilon.clear();
            for (const auto& x : detail::split_list(v)) s.epsilon.push_back(detail::parse_real(w, x));
        } else if (k == "levels") {
            s.levels.clear();
            for (const auto& x : detail::split_list(v)) {
                s.levels.push_back(detail::parse_integer<long>(w, x));
            }
        } else if (k == "steps") {
            s.steps.clear();
            for (const auto& x : detail::split_list(v)) {
                s.steps.push_back(detail::parse_integer<std::size_t>(w, x));
            }
        } else if (k == "reference_steps") {
            s.reference_steps = detail::parse_integer<std::size_t>(w, v);
        } else if (k == "lambda_p") {
            s.lambda_p = detail::parse_real(w, v);
        } else if (k == "r") {
            s.r = detail::parse_real(w, v);
        } else if (k == "min_slope") {
            s.min_slope = detail::parse_real(w, v);
        }
    });
    static const std::set<std::string> kinds{"convergence", "tail", "moments"};
    if (kinds.count(cfg.study.kind) == 0) {
        throw ConfigError("study.kind: unknown study '" + cfg.study.kind + "'");
    }
    const double lam = cfg.holder_order();
    if (!(lam > 0.0 && lam < 1.0)) throw ConfigError("model.lambda: must lie in (0,1)");
    return cfg;
}

inline RunConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline RunConfig load_config(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw ConfigError(filename + ": cannot open config file");
    return parse_config(in);
}

/// DriftModel named by the [model] section on [0, scheme.horizon].
inline DriftModel build_model(const RunConfig& cfg) {
    const auto& m = cfg.model;
    const double lam = cfg.holder_order();
    const double T = cfg.scheme.horizon;
    DriftModel model;
    if (m.name == "cir_cev") {
        model = cir_cev_drift(m.kappa, m.theta, m.alpha, lam, T, m.y_star);
    } else if (m.name == "mixed_cev") {
        model = mixed_cev_drift(m.kappa, m.theta, m.nu, m.alpha, lam, T, m.dominance.value_or(0.5));
    } else if (m.name == "two_sided_power") {
        TwoSidedPowerParams p;
        const double a1 = m.a1;
        const double a2 = m.a2;
        const double a3 = m.a3;
        p.a1 = [a1](double) { return a1; };
        p.a2 = [a2](double) { return a2; };
        if (a3 != 0.0) p.a3 = [a3](double, double y) { return a3 * y; };
        p.a3_lipschitz = std::abs(a3);
        p.gamma = m.gamma;
        p.lower = parse_bound("model.lower", m.lower, lam, T);
        p.upper = parse_bound("model.upper", m.upper, lam, T);
        p.lambda = lam;
        p.horizon = T;
        if (m.dominance) p.dominance = *m.dominance;
        model = two_sided_power_drift(p);
    } else if (m.name == "one_sided_power") {
        model = one_sided_power_drift(m.a, m.gamma, m.theta, parse_bound("model.lower", m.lower, lam, T),
                                      lam, T, 1.0, m.dominance.value_or(0.5));
    } else if (m.name == "linear") {
        const double th = m.theta;
        const double mu = m.mean;
        model = regular_drift([th, mu](double, double y) { return -th * (y - mu); }, std::abs(th),
                              "linear", T);
    } else {
        model = regular_drift([](double, double) { return 0.0; }, 0.0, "zero", T);
    }
    if (model.constrained()) model = with_declared_constants(model, m.c, m.y_star);
    return model;
}

}  // namespace sandwich
