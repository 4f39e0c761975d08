#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sandwich/core.hpp"
#include "sandwich/drift.hpp"
#include "sandwich/noise.hpp"

namespace sandwich {

/// ε_n = (c/n)^{1/γ}, the collar radius below which the singular drift exceeds n.
inline double epsilon_n(double c, double gamma, double n) {
    if (!(n >= 1.0)) throw std::invalid_argument("epsilon_n: n must be ≥ 1");
    if (!(c > 0.0) || !(gamma > 0.0)) throw std::invalid_argument("epsilon_n: c, γ must be > 0");
    return std::pow(c / n, 1.0 / gamma);
}

inline double epsilon_n(const DriftModel& model, double n) {
    return epsilon_n(model.c, model.gamma, n);
}

/// Smallest admissible truncation level: ceil of max |b| on the y*-collar edges over
/// `resolution` scan nodes of [0, T].
inline long minimal_level(const DriftModel& model, std::size_t resolution = 1024) {
    if (!model.constrained()) return 1;
    double worst = 0.0;
    for (double t : detail::scan_times(model.horizon, resolution)) {
        worst = std::max(worst, std::abs(model.raw_drift(t, model.lower_at(t) + model.y_star)));
        if (model.two_sided()) {
            worst = std::max(worst,
                             std::abs(model.raw_drift(t, model.upper_at(t) - model.y_star)));
        }
    }
    return std::max(1L, static_cast<long>(std::ceil(worst)));
}

/// Globally Lipschitz surrogate b̃_n of a singular drift.
///
/// One-sided: b̃_n = b on {b < n} ∩ collar and above the collar; n on and below φ and
/// wherever the collar drift reaches n. Two-sided adds the mirror rule with -n at ψ.
/// Unconstrained models pass through unchanged.
class TruncatedDrift {
public:
    struct Value {
        double value;
        bool clamped;
    };

    /// `allow_below_minimal` admits n < n₀. In that mode the two-sided collars widen to
    /// the half band, so b̃_n stays continuous where a y*-collar would leave a jump.
    TruncatedDrift(DriftModel model, long level, bool allow_below_minimal = false,
                   std::size_t scan_resolution = 1024)
        : model_(std::move(model)), level_(level) {
        if (model_.constrained()) {
            minimal_level_ = sandwich::minimal_level(model_, scan_resolution);
            if (level_ < 1) throw std::invalid_argument("truncate_drift: level must be ≥ 1");
            if (level_ < minimal_level_) {
                if (!allow_below_minimal) {
                    throw std::invalid_argument("truncate_drift: level n=" +
                                                std::to_string(level_) + " below n0=" +
                                                std::to_string(minimal_level_));
                }
                half_band_collar_ = model_.two_sided();
            }
            epsilon_ = epsilon_n(model_, static_cast<double>(level_));
            lipschitz_ = model_.lipschitz_modulus(epsilon_, epsilon_);
        } else {
            if (level_ < 1) throw std::invalid_argument("truncate_drift: level must be ≥ 1");
            lipschitz_ = model_.lipschitz_modulus(1.0, 1.0);
        }
    }

    const DriftModel& model() const noexcept { return model_; }
    long level() const noexcept { return level_; }
    long minimal_level() const noexcept { return minimal_level_; }
    bool below_minimal() const noexcept { return level_ < minimal_level_; }
    double epsilon() const noexcept { return epsilon_; }
    /// c_n = c_{ε_n}.
    double lipschitz() const noexcept { return lipschitz_; }

    Value evaluate(double t, double y) const {
        if (!model_.constrained()) return {model_.raw_drift(t, y), false};
        const double n = static_cast<double>(level_);
        const double lo = model_.lower(t);
        if (y <= lo) return {n, true};
        if (model_.two_sided()) {
            const double hi = (*model_.upper)(t);
            if (y >= hi) return {-n, true};
            const double collar = half_band_collar_ ? 0.5 * (hi - lo) : model_.y_star;
            double v = model_.raw_drift(t, y);
            bool clamped = false;
            if (y - lo <= collar && !(v < n)) {
                v = n;
                clamped = true;
            }
            if (hi - y <= collar && !(v > -n)) {
                v = -n;
                clamped = true;
            }
            return {v, clamped};
        }
        const double v = model_.raw_drift(t, y);
        if (y - lo <= model_.y_star && !(v < n)) return {n, true};
        return {v, false};
    }

    double operator()(double t, double y) const { return evaluate(t, y).value; }

private:
    DriftModel model_;
    long level_;
    long minimal_level_ = 1;
    bool half_band_collar_ = false;
    double epsilon_ = 0.0;
    double lipschitz_ = 0.0;
};

inline TruncatedDrift truncate_drift(const DriftModel& model, long level,
                                     bool allow_below_minimal = false) {
    return TruncatedDrift(model, level, allow_below_minimal);
}

namespace detail {

/// Root η of b(t, bound ± η) = ±n on (0, y*], to absolute 1e-13.
inline double collar_root(const DriftModel& model, double t, double n, bool upper_side) {
    auto excess = [&](double eta) {
        return upper_side ? -model.raw_drift(t, model.upper_at(t) - eta) - n
                          : model.raw_drift(t, model.lower_at(t) + eta) - n;
    };
    double hi = model.y_star;
    if (excess(hi) > 0.0) {
        throw std::logic_error("gap_delta_n: drift at the collar edge exceeds n; "
                               "inconsistent with n ≥ n0");
    }
    double lo = 0.0;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (excess(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

inline double refined_infimum(const DriftModel& model, double n, bool upper_side,
                              std::size_t resolution) {
    if (model.time_homogeneous) return collar_root(model, 0.0, n, upper_side);
    const auto ts = scan_times(model.horizon, resolution);
    std::size_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double v = collar_root(model, ts[i], n, upper_side);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    // golden-section refinement on the bracketing cells
    double a = ts[best == 0 ? 0 : best - 1];
    double b = ts[std::min(best + 1, ts.size() - 1)];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a);
    double x2 = a + g * (b - a);
    double f1 = collar_root(model, x1, n, upper_side);
    double f2 = collar_root(model, x2, n, upper_side);
    for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = collar_root(model, x1, n, upper_side);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = collar_root(model, x2, n, upper_side);
        }
    }
    return std::min({best_val, f1, f2});
}

}  // namespace detail

/// Per-node gaps y_n(t) - φ(t) on a `resolution`-step scan of [0, T].
inline std::vector<double> gap_profile(const DriftModel& model, long n,
                                       std::size_t resolution = 1024) {
    std::vector<double> out;
    for (double t : detail::scan_times(model.horizon, resolution)) {
        out.push_back(detail::collar_root(model, t, static_cast<double>(n), false));
    }
    return out;
}

/// δ_n = inf_t (y_n(t) - φ(t)); two-sided returns the max of the φ- and ψ-side infima.
inline double gap_delta_n(const DriftModel& model, long n, std::size_t time_resolution = 1024) {
    if (!model.constrained()) throw std::invalid_argument("gap_delta_n: model has no bound");
    if (time_resolution < 1) throw std::invalid_argument("gap_delta_n: resolution must be ≥ 1");
    const long n0 = minimal_level(model);
    if (n < n0) {
        throw std::invalid_argument("gap_delta_n: n=" + std::to_string(n) +
                                    " below n0=" + std::to_string(n0));
    }
    const double nd = static_cast<double>(n);
    const double lower = detail::refined_infimum(model, nd, false, time_resolution);
    if (!model.two_sided()) return lower;
    const double upper = detail::refined_infimum(model, nd, true, time_resolution);
    return std::max(lower, upper);
}

/// Output of the drift-truncated Euler recursion on one noise path.
struct SchemeResult {
    explicit SchemeResult(SamplePath p) : path(std::move(p)) {}

    SamplePath path;
    long level = 0;
    /// Nodes t_0..t_{N-1} whose step used the clamp value ±n.
    std::size_t clamp_count = 0;
    double min_lower_gap = std::numeric_limits<double>::infinity();
    double min_upper_gap = std::numeric_limits<double>::infinity();
    std::size_t lower_crossings = 0;
    std::size_t upper_crossings = 0;
    /// b̃_n(t_k, Ŷ_k) used on [t_k, t_{k+1}).
    std::vector<double> step_drift;

    const TimeGrid& grid() const noexcept { return path.grid(); }
    bool confined() const noexcept { return lower_crossings == 0 && upper_crossings == 0; }

    /// Ŷ_t between nodes: Ŷ_{τ-(t)} + b̃_n(τ-(t), Ŷ_{τ-(t)}) (t - τ-(t)); the noise is
    /// frozen at Z_{τ-(t)}.
    double value_at(double t) const {
        const auto& g = grid();
        const std::size_t k = g.index_below(t);
        if (k == g.steps()) return path[k];
        return path[k] + step_drift[k] * (t - g.node(k));
    }
};

namespace detail {

inline SchemeResult euler_recursion(const TruncatedDrift& trunc, const SamplePath& noise,
                                    double y0, double shift) {
    const auto& model = trunc.model();
    const auto& grid = noise.grid();
    if (noise[0] != 0.0) throw std::invalid_argument("euler: noise path must start at 0");
    if (model.constrained()) {
        if (!(y0 > model.lower_at(0.0)) || !(y0 < model.upper_at(0.0))) {
            throw std::invalid_argument("euler: initial value " + format_double(y0) +
                                        " not strictly inside the bounds at t=0");
        }
    } else if (!std::isfinite(y0)) {
        throw std::invalid_argument("euler: initial value must be finite");
    }
    const double dt = grid.mesh();
    const std::size_t steps = grid.steps();
    std::vector<double> y(steps + 1);
    std::vector<double> drift(steps);
    y[0] = y0;
    SchemeResult res(SamplePath(TimeGrid(grid.horizon(), 1), {0.0, 0.0}));
    res.level = trunc.level();
    auto observe = [&](std::size_t k) {
        if (!model.constrained()) return;
        const double t = grid.node(k);
        const double lo_gap = y[k] - model.lower_at(t);
        res.min_lower_gap = std::min(res.min_lower_gap, lo_gap);
        if (lo_gap <= 0.0) ++res.lower_crossings;
        if (model.two_sided()) {
            const double up_gap = model.upper_at(t) - y[k];
            res.min_upper_gap = std::min(res.min_upper_gap, up_gap);
            if (up_gap <= 0.0) ++res.upper_crossings;
        }
    };
    observe(0);
    const auto& z = noise.values();
    for (std::size_t k = 0; k < steps; ++k) {
        const auto v = trunc.evaluate(grid.node(k), y[k]);
        if (v.clamped) ++res.clamp_count;
        drift[k] = v.value - shift;
        y[k + 1] = y[k] + drift[k] * dt + (z[k + 1] - z[k]);
        if (!std::isfinite(y[k + 1])) {
            throw NumericError(k + 1, "euler: non-finite iterate");
        }
        observe(k + 1);
    }
    res.path = SamplePath(grid, std::move(y));
    res.step_drift = std::move(drift);
    return res;
}

}  // namespace detail

/// Ŷ_{k+1} = Ŷ_k + b̃_n(t_k, Ŷ_k) Δ + (Z_{k+1} - Z_k). Exits from the band are counted,
/// never corrected.
inline SchemeResult euler_semiheuristic(const TruncatedDrift& trunc, const SamplePath& noise,
                                        double y0) {
    return detail::euler_recursion(trunc, noise, y0, 0.0);
}

/// The n-th member of the monotone approximating sequence: the same recursion with
/// drift b̃_n - 1/n.
inline SchemeResult approximating_path(const TruncatedDrift& trunc, const SamplePath& noise,
                                       double y0) {
    return detail::euler_recursion(trunc, noise, y0, 1.0 / static_cast<double>(trunc.level()));
}

inline SchemeResult approximating_path(const DriftModel& model, long n, const SamplePath& noise,
                                       double y0) {
    return approximating_path(TruncatedDrift(model, n), noise, y0);
}

/// sup over the nodes of `fine` of |Ŷ_fine(t) - Ŷ_coarse(t)|, the coarse scheme read off
/// between its nodes by its own interpolation rule.
inline double sup_distance(const SchemeResult& fine, const SchemeResult& coarse) {
    const auto& g = fine.grid();
    if (!g.refines(coarse.grid())) {
        throw std::invalid_argument("sup_distance: grids do not nest");
    }
    const std::size_t stride = g.steps() / coarse.grid().steps();
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t k = std::min(i / stride, coarse.grid().steps());
        double approx = coarse.path[k];
        if (k < coarse.grid().steps()) {
            approx += coarse.step_drift[k] * (g.node(i) - coarse.grid().node(k));
        }
        worst = std::max(worst, std::abs(fine.path[i] - approx));
    }
    return worst;
}

}  // namespace sandwich
