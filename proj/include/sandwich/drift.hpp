#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sandwich/core.hpp"

namespace sandwich {

/// A λ-Hölder curve on [0, T] with a declared Hölder constant.
struct BoundFunction {
    std::function<double(double)> fn;
    double order = 1.0;
    double holder_constant = 0.0;
    std::string description;

    double operator()(double t) const { return fn(t); }

    static BoundFunction constant(double value) {
        return {[value](double) { return value; }, 1.0, 0.0,
                "const(" + format_double(value) + ")"};
    }

    /// offset + amplitude * cos(frequency * t); Lipschitz |a| w, hence λ-Hölder with |a| w T^{1-λ}.
    static BoundFunction cosine(double amplitude, double frequency, double offset, double order,
                                double horizon) {
        const double k = std::abs(amplitude * frequency) * std::pow(horizon, 1.0 - order);
        return {[=](double t) { return offset + amplitude * std::cos(frequency * t); }, order, k,
                "cos(" + format_double(amplitude) + "," + format_double(frequency) + "," +
                    format_double(offset) + ")"};
    }

    /// offset + amplitude * exp(rate * t).
    static BoundFunction exponential(double amplitude, double rate, double offset, double order,
                                     double horizon) {
        const double lip =
            std::abs(amplitude * rate) * std::max(1.0, std::exp(rate * horizon));
        const double k = lip * std::pow(horizon, 1.0 - order);
        return {[=](double t) { return offset + amplitude * std::exp(rate * t); }, order, k,
                "exp(" + format_double(amplitude) + "," + format_double(rate) + "," +
                    format_double(offset) + ")"};
    }
};

enum class Sidedness { one_sided, two_sided, unconstrained };

inline std::string to_string(Sidedness s) {
    switch (s) {
        case Sidedness::one_sided: return "one-sided";
        case Sidedness::two_sided: return "two-sided";
        case Sidedness::unconstrained: return "unconstrained";
    }
    return "?";
}

/// Drift b(t, y) together with its confinement curves and singularity constants.
///
/// One-sided models live on D_0 = {y > φ(t)} and satisfy b ≥ c/(y-φ)^γ on the
/// collar φ < y ≤ φ + y*. Two-sided models live on φ < y < ψ and additionally
/// satisfy b ≤ -c/(ψ-y)^γ on ψ - y* ≤ y < ψ. Unconstrained models carry no bound;
/// they exist for convergence baselines and bypass assumption checks.
struct DriftModel {
    std::string name;
    Sidedness sidedness = Sidedness::one_sided;
    BoundFunction lower = BoundFunction::constant(0.0);
    std::optional<BoundFunction> upper;
    std::function<double(double, double)> raw_drift;
    double c = 0.0;
    double gamma = 0.0;
    double y_star = 0.0;
    double lambda = 0.5;
    double horizon = 1.0;
    /// (ε1, ε2) ↦ Lipschitz constant of b in y on D_{ε1,ε2}; one-sided ignores ε2.
    std::function<double(double, double)> lipschitz_modulus;
    /// (ε1, ε2) ↦ λ-Hölder constant of b in t on D_{ε1,ε2}.
    std::function<double(double, double)> time_holder_modulus;
    bool time_homogeneous = false;

    bool two_sided() const noexcept { return sidedness == Sidedness::two_sided; }
    bool constrained() const noexcept { return sidedness != Sidedness::unconstrained; }

    double lower_at(double t) const {
        return constrained() ? lower(t) : -std::numeric_limits<double>::infinity();
    }
    double upper_at(double t) const {
        return two_sided() ? (*upper)(t) : std::numeric_limits<double>::infinity();
    }

    bool in_domain(double t, double y) const { return y > lower_at(t) && y < upper_at(t); }

    /// b(t, y); evaluating on or beyond a bound is a domain error.
    double drift(double t, double y) const {
        if (!in_domain(t, y)) {
            throw DomainError(name + ": drift evaluated outside its domain at t=" +
                              format_double(t) + ", y=" + format_double(y));
        }
        return raw_drift(t, y);
    }

    /// K with |φ(t)-φ(s)| + |ψ(t)-ψ(s)| ≤ K|t-s|^λ.
    double joint_holder_constant() const {
        if (!constrained()) return 0.0;
        return lower.holder_constant + (two_sided() ? upper->holder_constant : 0.0);
    }

    double lipschitz(double eps) const { return lipschitz_modulus(eps, eps); }
};

namespace detail {

inline std::vector<double> scan_times(double horizon, std::size_t resolution) {
    std::vector<double> ts(resolution + 1);
    for (std::size_t i = 0; i <= resolution; ++i) {
        ts[i] = horizon * static_cast<double>(i) / static_cast<double>(resolution);
    }
    ts.back() = horizon;
    return ts;
}

/// Collar offsets used in the numerical scans: log-spaced near zero, linear up to `top`.
inline std::vector<double> collar_offsets(double top, std::size_t count = 96) {
    std::vector<double> out;
    out.reserve(2 * count + 1);
    for (std::size_t i = 1; i <= count; ++i) {
        out.push_back(top * std::pow(10.0, -6.0 * static_cast<double>(count - i) /
                                              static_cast<double>(count)));
        out.push_back(top * static_cast<double>(i) / static_cast<double>(count));
    }
    out.push_back(top);
    return out;
}

/// inf over scanned (t, η ≤ top) of b(t, φ+η) η^γ (and -b(t, ψ-η) η^γ for two-sided).
inline double collar_constant(const std::function<double(double, double)>& b,
                              const BoundFunction& lower, const BoundFunction* upper,
                              double gamma, double top, double horizon) {
    double worst = std::numeric_limits<double>::infinity();
    const auto etas = collar_offsets(top);
    for (double t : scan_times(horizon, 256)) {
        const double lo = lower(t);
        for (double eta : etas) {
            const double scale = std::pow(eta, gamma);
            worst = std::min(worst, b(t, lo + eta) * scale);
            if (upper != nullptr) {
                const double hi = (*upper)(t);
                worst = std::min(worst, -b(t, hi - eta) * scale);
            }
        }
    }
    return worst;
}

/// Largest collar y in (0, top] whose collar constant stays ≥ target, found by
/// bisection (the constant is nonincreasing in y). Errors when even
/// min_fraction * top fails.
inline double largest_dominant_collar(const std::function<double(double)>& constant_at,
                                      double top, double target, double min_fraction,
                                      const std::string& assumption, const std::string& who) {
    if (constant_at(top) >= target) return top;
    double lo = min_fraction * top;
    if (!(constant_at(lo) >= target)) {
        throw AssumptionViolation(assumption, who +
                                                  ": singular term does not dominate on any "
                                                  "collar of usable width");
    }
    double hi = top;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * top; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (constant_at(mid) >= target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

inline void check_exponent(double gamma, double lambda, const std::string& assumption,
                           const std::string& who) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw std::invalid_argument(who + ": Hölder order must lie in (0,1)");
    }
    if (!(gamma > (1.0 - lambda) / lambda)) {
        throw AssumptionViolation(assumption, who + ": need γ > (1-λ)/λ, got γ=" +
                                                  format_double(gamma) + ", (1-λ)/λ=" +
                                                  format_double((1.0 - lambda) / lambda));
    }
}

}  // namespace detail

/// b(y) = κ / y^{α/(1-α)} - θ y on y > 0, the CIR (α = 1/2) / CEV family.
///
/// γ = α/(1-α). Default y* = min(1, (κ/(2θ))^{1/(γ+1)}), c = κ - θ y*^{γ+1},
/// c_ε = κγ ε^{-γ-1} + θ.
inline DriftModel cir_cev_drift(double kappa, double theta, double alpha, double lambda,
                                double horizon = 1.0,
                                std::optional<double> y_star = std::nullopt) {
    if (!(kappa > 0.0) || !(theta > 0.0)) {
        throw std::invalid_argument("cir_cev_drift: κ and θ must be positive");
    }
    if (!(alpha >= 0.5 && alpha < 1.0)) {
        throw std::invalid_argument("cir_cev_drift: α must lie in [1/2, 1)");
    }
    if (!(alpha + lambda > 1.0)) {
        throw AssumptionViolation("A4", "cir_cev_drift: need α + λ > 1, got α=" +
                                            format_double(alpha) + ", λ=" +
                                            format_double(lambda));
    }
    const double gamma = alpha / (1.0 - alpha);
    detail::check_exponent(gamma, lambda, "A4", "cir_cev_drift");

    const double ys =
        y_star.value_or(std::min(1.0, std::pow(kappa / (2.0 * theta), 1.0 / (gamma + 1.0))));
    const double c = kappa - theta * std::pow(ys, gamma + 1.0);
    if (!(ys > 0.0) || !(c > 0.0)) {
        throw AssumptionViolation("A3", "cir_cev_drift: y* leaves no positive c");
    }

    DriftModel m;
    m.name = "cir_cev";
    m.sidedness = Sidedness::one_sided;
    m.lower = BoundFunction::constant(0.0);
    m.lower.order = lambda;
    if (gamma == 1.0) {
        m.raw_drift = [kappa, theta](double, double y) { return kappa / y - theta * y; };
    } else {
        m.raw_drift = [kappa, theta, gamma](double, double y) {
            return kappa / std::pow(y, gamma) - theta * y;
        };
    }
    m.c = c;
    m.gamma = gamma;
    m.y_star = ys;
    m.lambda = lambda;
    m.horizon = horizon;
    m.lipschitz_modulus = [kappa, theta, gamma](double eps, double) {
        return kappa * gamma * std::pow(eps, -gamma - 1.0) + theta;
    };
    m.time_holder_modulus = [](double, double) { return 0.0; };
    m.time_homogeneous = true;
    return m;
}

/// b(y) = κ / y^{α/(1-α)} - α ν₁² / (2(1-α) y) - θ y, the drift of the Y = X^{1-α}
/// representation of the mixed-fractional CEV process.
///
/// y* is the largest value not above the cir_cev default for which
/// κ - m y^{γ-1} - θ y^{γ+1} ≥ dominance·κ (m = αν₁²/(2(1-α))); c is that expression at y*.
inline DriftModel mixed_cev_drift(double kappa, double theta, double nu_brownian, double alpha,
                                  double lambda, double horizon = 1.0, double dominance = 0.5,
                                  double min_collar_fraction = 1e-4) {
    if (!(kappa > 0.0) || !(theta > 0.0) || nu_brownian < 0.0) {
        throw std::invalid_argument("mixed_cev_drift: κ, θ must be positive and ν₁ ≥ 0");
    }
    if (!(alpha > 0.5 && alpha < 1.0)) {
        throw std::invalid_argument("mixed_cev_drift: α must lie in (1/2, 1)");
    }
    if (!(alpha + lambda > 1.0)) {
        throw AssumptionViolation("A4", "mixed_cev_drift: need α + λ > 1");
    }
    const double gamma = alpha / (1.0 - alpha);
    detail::check_exponent(gamma, lambda, "A4", "mixed_cev_drift");
    const double m_coef = alpha * nu_brownian * nu_brownian / (2.0 * (1.0 - alpha));

    auto scaled = [=](double y) {
        return kappa - m_coef * std::pow(y, gamma - 1.0) - theta * std::pow(y, gamma + 1.0);
    };
    const double natural = std::min(1.0, std::pow(kappa / (2.0 * theta), 1.0 / (gamma + 1.0)));
    const double ys = detail::largest_dominant_collar(scaled, natural, dominance * kappa,
                                                      min_collar_fraction, "A3",
                                                      "mixed_cev_drift");
    const double c = scaled(ys);
    if (!(c > 0.0)) throw AssumptionViolation("A3", "mixed_cev_drift: no positive c");

    DriftModel m;
    m.name = "mixed_cev";
    m.sidedness = Sidedness::one_sided;
    m.lower = BoundFunction::constant(0.0);
    m.lower.order = lambda;
    m.raw_drift = [=](double, double y) {
        return kappa / std::pow(y, gamma) - m_coef / y - theta * y;
    };
    m.c = c;
    m.gamma = gamma;
    m.y_star = ys;
    m.lambda = lambda;
    m.horizon = horizon;
    m.lipschitz_modulus = [=](double eps, double) {
        return kappa * gamma * std::pow(eps, -gamma - 1.0) + m_coef / (eps * eps) + theta;
    };
    m.time_holder_modulus = [](double, double) { return 0.0; };
    m.time_homogeneous = true;
    return m;
}

/// Parameters of b(t,y) = a₁(t)/(y-φ)^γ - a₂(t)/(ψ-y)^γ - a₃(t,y).
struct TwoSidedPowerParams {
    std::function<double(double)> a1 = [](double) { return 1.0; };
    std::function<double(double)> a2 = [](double) { return 1.0; };
    std::function<double(double, double)> a3;  // empty means a₃ ≡ 0
    double a3_lipschitz = 0.0;                 // in y
    double a3_time_holder = 0.0;               // λ-Hölder constant in t
    double coefficient_holder = 0.0;           // λ-Hölder constant of a₁ and a₂
    double gamma = 4.0;
    BoundFunction lower = BoundFunction::constant(0.0);
    BoundFunction upper = BoundFunction::constant(1.0);
    double lambda = 0.5;
    double horizon = 1.0;
    /// y* is the largest collar on which the collar constant stays ≥ dominance·min(inf a₁, inf a₂).
    double dominance = 0.1;
    double min_collar_fraction = 1e-4;
};

inline DriftModel two_sided_power_drift(const TwoSidedPowerParams& p) {
    const std::string who = "two_sided_power_drift";
    detail::check_exponent(p.gamma, p.lambda, "B4", who);
    const auto ts = detail::scan_times(p.horizon, 1024);
    double inf_a1 = std::numeric_limits<double>::infinity();
    double inf_a2 = inf_a1;
    double sup_a1 = 0.0;
    double sup_a2 = 0.0;
    double min_width = std::numeric_limits<double>::infinity();
    for (double t : ts) {
        inf_a1 = std::min(inf_a1, p.a1(t));
        inf_a2 = std::min(inf_a2, p.a2(t));
        sup_a1 = std::max(sup_a1, p.a1(t));
        sup_a2 = std::max(sup_a2, p.a2(t));
        min_width = std::min(min_width, p.upper(t) - p.lower(t));
    }
    if (!(inf_a1 > 0.0) || !(inf_a2 > 0.0)) {
        throw std::invalid_argument(who + ": a₁ and a₂ must be bounded away from zero");
    }
    if (!(min_width > 0.0)) {
        throw AssumptionViolation("B-domain", who + ": need φ(t) < ψ(t) on [0,T]");
    }

    const double gamma = p.gamma;
    auto a1 = p.a1;
    auto a2 = p.a2;
    auto a3 = p.a3;
    auto lo = p.lower;
    auto hi = p.upper;
    std::function<double(double, double)> b = [=](double t, double y) {
        const double from_lower = y - lo(t);
        const double from_upper = hi(t) - y;
        double v = a1(t) / std::pow(from_lower, gamma) - a2(t) / std::pow(from_upper, gamma);
        if (a3) v -= a3(t, y);
        return v;
    };

    const double top = 0.5 * min_width * (1.0 - 1e-9);
    auto constant_at = [&](double y) {
        return detail::collar_constant(b, lo, &hi, gamma, y, p.horizon);
    };
    const double ys = detail::largest_dominant_collar(
        constant_at, top, p.dominance * std::min(inf_a1, inf_a2), p.min_collar_fraction, "B3",
        who);
    const double c = constant_at(ys) * (1.0 - 1e-9);
    if (!(c > 0.0)) throw AssumptionViolation("B3", who + ": no positive c");

    DriftModel m;
    m.name = "two_sided_power";
    m.sidedness = Sidedness::two_sided;
    m.lower = p.lower;
    m.upper = p.upper;
    m.raw_drift = b;
    m.c = c;
    m.gamma = gamma;
    m.y_star = ys;
    m.lambda = p.lambda;
    m.horizon = p.horizon;
    const double a3_lip = p.a3_lipschitz;
    m.lipschitz_modulus = [=](double e1, double e2) {
        return gamma * sup_a1 * std::pow(e1, -gamma - 1.0) +
               gamma * sup_a2 * std::pow(e2, -gamma - 1.0) + a3_lip;
    };
    const double k_lo = p.lower.holder_constant;
    const double k_hi = p.upper.holder_constant;
    const double coef_h = p.coefficient_holder;
    const double a3_th = p.a3_time_holder;
    m.time_holder_modulus = [=](double e1, double e2) {
        return gamma * sup_a1 * std::pow(e1, -gamma - 1.0) * k_lo +
               gamma * sup_a2 * std::pow(e2, -gamma - 1.0) * k_hi +
               coef_h * (std::pow(e1, -gamma) + std::pow(e2, -gamma)) + a3_th;
    };
    m.time_homogeneous = k_lo == 0.0 && k_hi == 0.0 && coef_h == 0.0 && a3_th == 0.0;
    return m;
}

/// b(t,y) = a/(y-φ(t))^γ - θ y, a one-sided family for user-declared models.
inline DriftModel one_sided_power_drift(double a, double gamma, double theta, BoundFunction lower,
                                        double lambda, double horizon = 1.0,
                                        double collar_top = 1.0, double dominance = 0.5,
                                        double min_collar_fraction = 1e-4) {
    const std::string who = "one_sided_power_drift";
    if (!(a > 0.0)) throw std::invalid_argument(who + ": a must be positive");
    detail::check_exponent(gamma, lambda, "A4", who);
    auto lo = lower;
    std::function<double(double, double)> b = [=](double t, double y) {
        return a / std::pow(y - lo(t), gamma) - theta * y;
    };
    auto constant_at = [&](double y) {
        return detail::collar_constant(b, lo, nullptr, gamma, y, horizon);
    };
    const double ys = detail::largest_dominant_collar(constant_at, collar_top, dominance * a,
                                                      min_collar_fraction, "A3", who);
    const double c = constant_at(ys) * (1.0 - 1e-9);

    DriftModel m;
    m.name = "one_sided_power";
    m.sidedness = Sidedness::one_sided;
    m.lower = lower;
    m.raw_drift = b;
    m.c = c;
    m.gamma = gamma;
    m.y_star = ys;
    m.lambda = lambda;
    m.horizon = horizon;
    m.lipschitz_modulus = [=](double eps, double) {
        return gamma * a * std::pow(eps, -gamma - 1.0) + std::abs(theta);
    };
    const double k = lower.holder_constant;
    m.time_holder_modulus = [=](double eps, double) {
        return gamma * a * std::pow(eps, -gamma - 1.0) * k;
    };
    m.time_homogeneous = k == 0.0;
    return m;
}

/// Globally Lipschitz drift with no confining bound; truncation is the identity and
/// assumption checks are bypassed. Used for baselines (b ≡ 0, b = -θ y + μ).
inline DriftModel regular_drift(std::function<double(double, double)> b, double lipschitz,
                                std::string name, double horizon = 1.0) {
    DriftModel m;
    m.name = std::move(name);
    m.sidedness = Sidedness::unconstrained;
    m.raw_drift = std::move(b);
    m.horizon = horizon;
    m.lambda = 0.5;
    m.lipschitz_modulus = [lipschitz](double, double) { return lipschitz; };
    m.time_holder_modulus = [](double, double) { return 0.0; };
    m.time_homogeneous = true;
    return m;
}

/// Replaces the derived singularity constants by user-declared ones.
inline DriftModel with_declared_constants(DriftModel m, std::optional<double> c,
                                          std::optional<double> y_star) {
    if (c) m.c = *c;
    if (y_star) m.y_star = *y_star;
    return m;
}

struct AssumptionCheck {
    std::string id;
    std::string description;
    bool passed = true;
    std::size_t samples = 0;
    std::size_t violations = 0;
    /// Smallest slack observed (negative when violated).
    double worst_margin = std::numeric_limits<double>::infinity();
    double witness_t = std::numeric_limits<double>::quiet_NaN();
    double witness_y = std::numeric_limits<double>::quiet_NaN();
    std::string note;

    void record(double margin, double t, double y) {
        ++samples;
        if (margin < worst_margin || std::isnan(margin)) {
            worst_margin = margin;
            witness_t = t;
            witness_y = y;
        }
        if (!(margin >= 0.0)) {
            ++violations;
            passed = false;
        }
    }
};

struct ValidationReport {
    std::string model;
    std::vector<AssumptionCheck> checks;

    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(),
                           [](const AssumptionCheck& c) { return c.passed; });
    }

    const AssumptionCheck* find(const std::string& id) const {
        for (const auto& c : checks) {
            if (c.id == id) return &c;
        }
        return nullptr;
    }

    std::vector<std::string> failed() const {
        std::vector<std::string> out;
        for (const auto& c : checks) {
            if (!c.passed) out.push_back(c.id);
        }
        return out;
    }
};

/// Sampled check of the drift assumptions on the nodes of `grid`. Never exhaustive:
/// each entry reports how many points were tried and the worst one found.
inline ValidationReport validate_assumptions(const DriftModel& model, const TimeGrid& grid,
                                             std::size_t samples_per_cell) {
    if (samples_per_cell == 0) {
        throw std::invalid_argument("validate_assumptions: samples_per_cell must be ≥ 1");
    }
    ValidationReport report;
    report.model = model.name;
    if (!model.constrained()) {
        AssumptionCheck bypass;
        bypass.id = "bypass";
        bypass.description = "unconstrained model; assumption checks bypassed";
        report.checks.push_back(bypass);
        return report;
    }

    const bool two = model.two_sided();
    const std::string p = two ? "B" : "A";
    const double lambda = model.lambda;
    const double tol = 1e-9;
    std::mt19937_64 rng(0x5EEDULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto nodes = grid.nodes();

    // Domain of the two-sided problem.
    bool band_ok = true;
    if (two) {
        AssumptionCheck dom;
        dom.id = "B-domain";
        dom.description = "φ(t) < ψ(t) at every node and y* < sup|φ-ψ|/2";
        double sup_width = 0.0;
        for (double t : nodes) {
            const double w = model.upper_at(t) - model.lower_at(t);
            dom.record(w, t, model.lower_at(t));
            sup_width = std::max(sup_width, w);
        }
        dom.record(0.5 * sup_width - model.y_star, 0.0, model.y_star);
        band_ok = dom.passed;
        report.checks.push_back(dom);
    }

    auto width_at = [&](double t) { return model.upper_at(t) - model.lower_at(t); };

    // A1/B1: finite values throughout the domain.
    {
        AssumptionCheck chk;
        chk.id = p + "1";
        chk.description = "b finite (continuous) on sampled domain points";
        for (double t : nodes) {
            const double lo = model.lower_at(t);
            const double span = two ? width_at(t) : std::max(1.0, 4.0 * model.y_star);
            if (!(span > 0.0)) continue;
            for (std::size_t s = 0; s < samples_per_cell; ++s) {
                const double y = lo + span * (1e-6 + (1.0 - 2e-6) * unit(rng));
                const double v = model.raw_drift(t, y);
                chk.record(std::isfinite(v) ? 0.0 : -1.0, t, y);
            }
        }
        report.checks.push_back(chk);
    }

    // A2/B2: Lipschitz in y on D_ε.
    {
        AssumptionCheck chk;
        chk.id = p + "2";
        chk.description = "|b(t,y1)-b(t,y2)| ≤ c_ε |y1-y2| on D_ε";
        for (double frac : {0.125, 0.5, 1.0}) {
            const double eps = frac * model.y_star;
            const double ceps = model.lipschitz(eps);
            for (double t : nodes) {
                const double lo = model.lower_at(t) + eps;
                const double span =
                    two ? width_at(t) - 2.0 * eps : std::max(1.0, 4.0 * model.y_star);
                if (!(span > 0.0)) continue;
                for (std::size_t s = 0; s < samples_per_cell; ++s) {
                    const double y1 = lo + span * unit(rng);
                    const double y2 = lo + span * unit(rng);
                    if (y1 == y2 || !model.in_domain(t, y1) || !model.in_domain(t, y2)) continue;
                    const double ratio = std::abs(model.raw_drift(t, y1) - model.raw_drift(t, y2)) /
                                         std::abs(y1 - y2);
                    chk.record(ceps * (1.0 + tol) - ratio, t, y1);
                }
            }
        }
        report.checks.push_back(chk);
    }

    // A3/B3: singular lower bound on the collars.
    {
        AssumptionCheck chk;
        chk.id = p + "3";
        chk.description = two ? "b ≥ c/(y-φ)^γ and b ≤ -c/(ψ-y)^γ on the y*-collars"
                              : "b ≥ c/(y-φ)^γ on φ < y ≤ φ + y*";
        if (!(model.c > 0.0) || !(model.y_star > 0.0) || !(model.gamma > 0.0)) {
            chk.record(-1.0, 0.0, 0.0);
            chk.note = "constants c, γ, y* must be positive";
        }
        for (double t : nodes) {
            if (two && !(width_at(t) > 0.0)) continue;
            for (std::size_t s = 0; s < samples_per_cell; ++s) {
                // log-uniform offsets cover both the deep collar and its outer edge
                const double eta = model.y_star * std::pow(10.0, -6.0 * unit(rng));
                const double need = model.c / std::pow(eta, model.gamma);
                const double y = model.lower_at(t) + eta;
                if (model.in_domain(t, y)) {
                    const double v = model.raw_drift(t, y);
                    chk.record((v - need) / need + tol, t, y);
                }
                if (two) {
                    const double yu = model.upper_at(t) - eta;
                    if (model.in_domain(t, yu)) {
                        const double v = model.raw_drift(t, yu);
                        chk.record((-v - need) / need + tol, t, yu);
                    }
                }
            }
        }
        report.checks.push_back(chk);
    }

    // A4/B4: exponent condition.
    {
        AssumptionCheck chk;
        chk.id = p + "4";
        chk.description = "γ > (1-λ)/λ";
        const double need = (1.0 - lambda) / lambda;
        const double margin = model.gamma - need;
        chk.record(margin > 0.0 ? margin : (margin == 0.0 ? -0.0 : margin), 0.0, model.gamma);
        if (margin <= 0.0) {
            chk.passed = false;
            chk.note = "γ=" + format_double(model.gamma) + " ≤ (1-λ)/λ=" + format_double(need);
        }
        report.checks.push_back(chk);
    }

    // A5/B5: Hölder continuity in t on D_ε.
    {
        AssumptionCheck chk;
        chk.id = p + "5";
        chk.description = "|b(t,y)-b(s,y)| ≤ c_ε |t-s|^λ on D_ε";
        std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
        for (double frac : {0.5, 1.0}) {
            const double eps = frac * model.y_star;
            const double ceps = model.time_holder_modulus(eps, eps);
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                for (std::size_t s = 0; s < samples_per_cell; ++s) {
                    const double t = nodes[k];
                    const double u = nodes[pick(rng)];
                    if (t == u) continue;
                    const double lo = std::max(model.lower_at(t), model.lower_at(u)) + eps;
                    const double hi = two ? std::min(model.upper_at(t), model.upper_at(u)) - eps
                                          : lo + std::max(1.0, 4.0 * model.y_star);
                    if (!(hi > lo)) continue;
                    const double y = lo + (hi - lo) * unit(rng);
                    const double diff = std::abs(model.raw_drift(t, y) - model.raw_drift(u, y));
                    const double allowed = ceps * std::pow(std::abs(t - u), lambda);
                    chk.record(allowed * (1.0 + tol) + 1e-12 - diff, t, y);
                }
            }
        }
        report.checks.push_back(chk);
    }

    // Hölder continuity of the bounds with the declared joint constant.
    {
        AssumptionCheck chk;
        chk.id = "bounds";
        chk.description = two ? "|φ(t)-φ(s)| + |ψ(t)-ψ(s)| ≤ K|t-s|^λ"
                              : "|φ(t)-φ(s)| ≤ K|t-s|^λ";
        const double k = model.joint_holder_constant();
        std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            for (std::size_t s = 0; s < samples_per_cell; ++s) {
                const double t = nodes[i];
                const double u = nodes[pick(rng)];
                if (t == u) continue;
                double diff = std::abs(model.lower_at(t) - model.lower_at(u));
                if (two) diff += std::abs(model.upper_at(t) - model.upper_at(u));
                const double allowed = k * std::pow(std::abs(t - u), lambda);
                chk.record(allowed * (1.0 + tol) + 1e-12 - diff, t, diff);
            }
        }
        report.checks.push_back(chk);
    }

    if (!band_ok) {
        for (auto& chk : report.checks) {
            if (chk.id != "B-domain" && chk.note.empty()) {
                chk.note = "sampled only where φ < ψ";
            }
        }
    }
    return report;
}

}  // namespace sandwich
