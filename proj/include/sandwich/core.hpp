#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace sandwich {

/// Raised when a model or parameter set violates one of the drift assumptions.
/// `assumption()` carries the label, e.g. "A4" or "B3".
class AssumptionViolation : public std::invalid_argument {
public:
    AssumptionViolation(std::string assumption, const std::string& what)
        : std::invalid_argument("assumption (" + assumption + ") violated: " + what),
          assumption_(std::move(assumption)) {}

    const std::string& assumption() const noexcept { return assumption_; }

private:
    std::string assumption_;
};

/// A point outside the domain of a function, e.g. evaluating the drift on the bound.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Non-finite arithmetic inside a recursion; `node()` is the grid index where it surfaced.
class NumericError : public std::runtime_error {
public:
    NumericError(std::size_t node, const std::string& what)
        : std::runtime_error(what + " at node " + std::to_string(node)), node_(node) {}

    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

/// Malformed input file.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Uniform partition t_k = kT/N of [0, T].
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) {
            throw std::invalid_argument("TimeGrid: horizon must be positive and finite");
        }
        if (steps == 0) {
            throw std::invalid_argument("TimeGrid: steps must be at least 1");
        }
    }

    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t size() const noexcept { return steps_ + 1; }
    double mesh() const noexcept { return horizon_ / static_cast<double>(steps_); }

    double node(std::size_t k) const noexcept {
        if (k == steps_) return horizon_;
        return horizon_ * static_cast<double>(k) / static_cast<double>(steps_);
    }

    std::vector<double> nodes() const {
        std::vector<double> out(size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = node(k);
        return out;
    }

    /// Index of the largest node <= t.
    std::size_t index_below(double t) const {
        check_inside(t);
        auto k = static_cast<std::size_t>(
            std::clamp(std::floor(t / horizon_ * static_cast<double>(steps_)), 0.0,
                       static_cast<double>(steps_)));
        while (k < steps_ && node(k + 1) <= t) ++k;
        while (k > 0 && node(k) > t) --k;
        return k;
    }

    /// Index of the smallest node >= t.
    std::size_t index_above(double t) const {
        std::size_t k = index_below(t);
        return node(k) == t ? k : k + 1;
    }

    double tau_minus(double t) const { return node(index_below(t)); }
    double tau_plus(double t) const { return node(index_above(t)); }

    /// True when every node of `coarse` is a node of this grid.
    bool refines(const TimeGrid& coarse) const noexcept {
        return coarse.horizon_ == horizon_ && steps_ % coarse.steps_ == 0;
    }

    bool operator==(const TimeGrid& other) const noexcept {
        return horizon_ == other.horizon_ && steps_ == other.steps_;
    }

private:
    void check_inside(double t) const {
        if (!(t >= 0.0 && t <= horizon_)) {
            throw std::invalid_argument("TimeGrid: t = " + std::to_string(t) +
                                        " outside [0, " + std::to_string(horizon_) + "]");
        }
    }

    double horizon_;
    std::size_t steps_;
};

inline TimeGrid make_grid(double horizon, std::size_t steps) { return TimeGrid(horizon, steps); }

/// Values of a process at the nodes of a TimeGrid.
class SamplePath {
public:
    SamplePath(TimeGrid grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw std::invalid_argument("SamplePath: expected " + std::to_string(grid_.size()) +
                                        " values, got " + std::to_string(values_.size()));
        }
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (!std::isfinite(values_[k])) {
                throw NumericError(k, "SamplePath: non-finite value");
            }
        }
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double operator[](std::size_t k) const { return values_[k]; }
    std::size_t size() const noexcept { return values_.size(); }

    /// Values at the nodes of a coarser grid nested in this one.
    SamplePath restrict_to(const TimeGrid& coarse) const {
        if (!grid_.refines(coarse)) {
            throw std::invalid_argument("SamplePath::restrict_to: grid does not nest");
        }
        const std::size_t stride = grid_.steps() / coarse.steps();
        std::vector<double> out(coarse.size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = values_[k * stride];
        return SamplePath(coarse, std::move(out));
    }

    bool operator==(const SamplePath& other) const noexcept {
        return grid_ == other.grid_ && values_ == other.values_;
    }

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
}

}  // namespace detail

/// A reproducible random stream identified by (master seed, stream index).
///
/// The engine key is a SplitMix64 hash of the pair, so stream i never depends on
/// how many other streams were drawn before it. Sub-streams hash the parent key
/// with the child index and are disjoint from sibling path streams.
class RngStream {
public:
    using engine_type = std::mt19937_64;

    RngStream(std::uint64_t master_seed, std::uint64_t stream_index) noexcept
        : master_seed_(master_seed), stream_index_(stream_index) {}

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t stream_index() const noexcept { return stream_index_; }

    std::uint64_t key() const noexcept {
        return detail::splitmix64(detail::splitmix64(master_seed_) ^
                                  detail::splitmix64(stream_index_ + 0x632BE59BD9B4E019ULL));
    }

    RngStream substream(std::uint64_t child) const noexcept { return {key(), child}; }

    engine_type engine() const {
        std::seed_seq seq{static_cast<std::uint32_t>(key()), static_cast<std::uint32_t>(key() >> 32U)};
        return engine_type(seq);
    }

    /// `count` standard normal draws.
    std::vector<double> normals(std::size_t count) const {
        auto eng = engine();
        std::normal_distribution<double> dist(0.0, 1.0);
        std::vector<double> out(count);
        for (auto& v : out) v = dist(eng);
        return out;
    }

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
};

/// Shortest decimal form with 17 significant digits (round-trips every finite double).
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline void write_path_csv(const SamplePath& path, std::ostream& out) {
    std::string text = "t,value\n";
    text.reserve(path.size() * 44);
    char buf[64];
    for (std::size_t k = 0; k < path.size(); ++k) {
        auto r = std::to_chars(buf, buf + sizeof(buf), path.grid().node(k),
                               std::chars_format::general, 17);
        text.append(buf, r.ptr);
        text.push_back(',');
        r = std::to_chars(buf, buf + sizeof(buf), path[k], std::chars_format::general, 17);
        text.append(buf, r.ptr);
        text.push_back('\n');
    }
    out << text;
    if (!out) throw std::runtime_error("write_path_csv: stream failure");
}

inline void write_path_csv(const SamplePath& path, const std::string& filename) {
    std::ofstream out(filename, std::ios::binary);
    if (!out) throw std::runtime_error("write_path_csv: cannot open " + filename);
    write_path_csv(path, out);
}

namespace detail {

inline double parse_number(std::string_view field, std::size_t line) {
    double v = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ParseError("read_path_csv: line " + std::to_string(line) +
                         ": malformed number '" + std::string(field) + "'");
    }
    if (!std::isfinite(v)) {
        throw ParseError("read_path_csv: line " + std::to_string(line) + ": non-finite value");
    }
    return v;
}

}  // namespace detail

/// Parses the `t,value` format. The time column must be the uniform grid kT/N.
inline SamplePath read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "t,value") {
        throw ParseError("read_path_csv: line 1: expected header 't,value'");
    }
    std::vector<double> times;
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw ParseError("read_path_csv: line " + std::to_string(lineno) +
                             ": expected two comma-separated fields");
        }
        std::string_view sv(line);
        const double t = detail::parse_number(sv.substr(0, comma), lineno);
        const double v = detail::parse_number(sv.substr(comma + 1), lineno);
        if (!times.empty() && !(t > times.back())) {
            throw ParseError("read_path_csv: line " + std::to_string(lineno) +
                             ": time column not strictly increasing");
        }
        times.push_back(t);
        values.push_back(v);
    }
    if (times.size() < 2) throw ParseError("read_path_csv: need at least two rows");
    if (times.front() != 0.0) throw ParseError("read_path_csv: first time must be 0");
    TimeGrid grid(times.back(), times.size() - 1);
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (std::abs(times[k] - grid.node(k)) > 1e-9 * grid.horizon()) {
            throw ParseError("read_path_csv: line " + std::to_string(k + 2) +
                             ": time column is not a uniform grid");
        }
    }
    return SamplePath(grid, std::move(values));
}

inline SamplePath read_path_csv(const std::string& filename) {
    std::ifstream in(filename, std::ios::binary);
    if (!in) throw std::runtime_error("read_path_csv: cannot open " + filename);
    return read_path_csv(in);
}

/// Neumaier-compensated running sum; order-independent to within rounding of the total.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Mean and standard error of a sample.
struct SampleMoments {
    double mean = 0.0;
    double stderr_ = 0.0;
    double variance = 0.0;
    std::size_t count = 0;
};

inline SampleMoments sample_moments(const std::vector<double>& xs) {
    SampleMoments m;
    m.count = xs.size();
    if (xs.empty()) return m;
    CompensatedSum s;
    for (double x : xs) s.add(x);
    m.mean = s.value() / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        CompensatedSum q;
        for (double x : xs) q.add((x - m.mean) * (x - m.mean));
        m.variance = q.value() / static_cast<double>(xs.size() - 1);
        m.stderr_ = std::sqrt(m.variance / static_cast<double>(xs.size()));
    }
    return m;
}

}  // namespace sandwich
