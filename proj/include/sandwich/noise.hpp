#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "sandwich/core.hpp"

namespace sandwich {

enum class NoiseKind { zero, brownian, fbm, mixed };
enum class FbmGenerator { circulant, hosking };

/// Admissible driver Z. `scale` multiplies brownian/fbm output; the mixed noise
/// nu_brownian * B + nu_fractional * B^H carries its own weights and ignores it.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::zero;
    double hurst = 0.5;
    double scale = 1.0;
    double nu_brownian = 0.0;
    double nu_fractional = 0.0;
    FbmGenerator generator = FbmGenerator::circulant;

    static NoiseSpec zero() { return {}; }
    static NoiseSpec brownian(double scale = 1.0) {
        NoiseSpec s;
        s.kind = NoiseKind::brownian;
        s.scale = scale;
        return s;
    }
    static NoiseSpec fbm(double hurst, double scale = 1.0,
                         FbmGenerator gen = FbmGenerator::circulant) {
        NoiseSpec s;
        s.kind = NoiseKind::fbm;
        s.hurst = hurst;
        s.scale = scale;
        s.generator = gen;
        return s;
    }
    static NoiseSpec mixed(double nu_brownian, double nu_fractional, double hurst,
                           FbmGenerator gen = FbmGenerator::circulant) {
        NoiseSpec s;
        s.kind = NoiseKind::mixed;
        s.nu_brownian = nu_brownian;
        s.nu_fractional = nu_fractional;
        s.hurst = hurst;
        s.generator = gen;
        return s;
    }

    void validate() const {
        if (kind == NoiseKind::fbm || kind == NoiseKind::mixed) {
            if (!(hurst > 0.0 && hurst < 1.0)) {
                throw std::invalid_argument("NoiseSpec: Hurst index must lie in (0,1)");
            }
        }
        if (kind == NoiseKind::mixed) {
            if (nu_brownian < 0.0 || nu_fractional < 0.0) {
                throw std::invalid_argument("NoiseSpec: mixed weights must be nonnegative");
            }
            if (nu_brownian * nu_brownian + nu_fractional * nu_fractional <= 0.0) {
                throw std::invalid_argument("NoiseSpec: mixed noise needs a nonzero weight");
            }
        }
        if (!std::isfinite(scale)) throw std::invalid_argument("NoiseSpec: scale must be finite");
    }

    /// Hurst index governing path regularity (1/2 for Brownian, H ∧ 1/2 for mixed).
    double effective_hurst() const {
        switch (kind) {
            case NoiseKind::zero: return 1.0;
            case NoiseKind::brownian: return 0.5;
            case NoiseKind::fbm: return hurst;
            case NoiseKind::mixed:
                if (nu_brownian == 0.0) return hurst;
                if (nu_fractional == 0.0) return 0.5;
                return std::min(hurst, 0.5);
        }
        return 0.5;
    }
};

inline std::string to_string(NoiseKind k) {
    switch (k) {
        case NoiseKind::zero: return "zero";
        case NoiseKind::brownian: return "brownian";
        case NoiseKind::fbm: return "fbm";
        case NoiseKind::mixed: return "mixed";
    }
    return "?";
}

inline std::string to_string(FbmGenerator g) {
    return g == FbmGenerator::circulant ? "circulant" : "hosking";
}

/// Cov(B^H_s, B^H_t) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
inline double fbm_covariance(double s, double t, double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) {
        throw std::invalid_argument("fbm_covariance: Hurst index must lie in (0,1)");
    }
    if (s < 0.0 || t < 0.0) throw std::invalid_argument("fbm_covariance: negative time");
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

/// Autocovariance of unit-step fractional Gaussian noise at integer lag k.
inline double fgn_autocovariance(std::size_t k, double hurst) {
    const double h2 = 2.0 * hurst;
    const double kd = static_cast<double>(k);
    if (k == 0) return 1.0;
    return 0.5 * (std::pow(kd + 1.0, h2) - 2.0 * std::pow(kd, h2) + std::pow(kd - 1.0, h2));
}

struct NoiseSample {
    SamplePath path;
    bool used_fallback = false;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwDeleter {
    void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};

/// In-place forward DFT of `data` (length n). Planning is serialized; execution is not.
inline void forward_dft(std::vector<std::complex<double>>& data) {
    const int n = static_cast<int>(data.size());
    std::unique_ptr<fftw_complex, FftwDeleter> buf(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * data.size())));
    if (!buf) throw std::bad_alloc();
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(n, buf.get(), buf.get(), FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        buf.get()[i][0] = data[i].real();
        buf.get()[i][1] = data[i].imag();
    }
    fftw_execute(plan);
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = {buf.get()[i][0], buf.get()[i][1]};
    }
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

/// Eigenvalues of the minimal circulant embedding (size 2m) of unit fGn.
inline std::vector<double> circulant_eigenvalues(std::size_t m, double hurst) {
    const std::size_t len = 2 * m;
    std::vector<std::complex<double>> row(len);
    for (std::size_t k = 0; k <= m; ++k) row[k] = fgn_autocovariance(k, hurst);
    for (std::size_t k = m + 1; k < len; ++k) row[k] = row[len - k];
    forward_dft(row);
    std::vector<double> eig(len);
    for (std::size_t j = 0; j < len; ++j) eig[j] = row[j].real();
    return eig;
}

/// Durbin-Levinson recursion for `count` unit-step fGn increments. O(count^2).
inline std::vector<double> hosking_fgn(std::size_t count, double hurst, const RngStream& stream) {
    const auto z = stream.normals(count);
    std::vector<double> gamma(count + 1);
    for (std::size_t k = 0; k <= count; ++k) gamma[k] = fgn_autocovariance(k, hurst);

    std::vector<double> x(count);
    std::vector<double> phi(count + 1, 0.0);
    std::vector<double> phi_next(count + 1, 0.0);
    double v = gamma[0];
    x[0] = std::sqrt(v) * z[0];
    for (std::size_t n = 1; n < count; ++n) {
        // phi_{n, 1..n} from phi_{n-1, 1..n-1}
        double num = gamma[n];
        for (std::size_t j = 1; j < n; ++j) num -= phi[j] * gamma[n - j];
        const double reflection = num / v;
        phi_next[n] = reflection;
        for (std::size_t j = 1; j < n; ++j) phi_next[j] = phi[j] - reflection * phi[n - j];
        std::swap(phi, phi_next);
        v *= (1.0 - reflection * reflection);

        double mean = 0.0;
        for (std::size_t j = 1; j <= n; ++j) mean += phi[j] * x[n - j];
        x[n] = mean + std::sqrt(std::max(v, 0.0)) * z[n];
    }
    return x;
}

/// Davies-Harte synthesis of `count` unit-step fGn increments; empty result when
/// the embedding has a significantly negative eigenvalue.
inline std::vector<double> circulant_fgn(std::size_t count, double hurst, const RngStream& stream) {
    const std::size_t m = count;
    const std::size_t len = 2 * m;
    auto eig = circulant_eigenvalues(m, hurst);
    double largest = 0.0;
    for (double e : eig) largest = std::max(largest, std::abs(e));
    for (double& e : eig) {
        if (e < -1e-10 * largest) return {};
        e = std::max(e, 0.0);
    }
    const auto z = stream.normals(2 * len);
    std::vector<std::complex<double>> w(len);
    const double norm = 1.0 / static_cast<double>(len);
    for (std::size_t j = 0; j < len; ++j) {
        const double amp = std::sqrt(eig[j] * norm);
        w[j] = {amp * z[2 * j], amp * z[2 * j + 1]};
    }
    forward_dft(w);
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = w[k].real();
    return out;
}

inline NoiseSample fbm_path(const TimeGrid& grid, double hurst, double scale, FbmGenerator gen,
                            const RngStream& stream) {
    const std::size_t n = grid.steps();
    std::vector<double> incr;
    bool fallback = false;
    if (gen == FbmGenerator::circulant) {
        incr = circulant_fgn(n, hurst, stream);
        if (incr.empty()) fallback = true;
    }
    if (incr.empty()) incr = hosking_fgn(n, hurst, stream);
    const double step_scale = scale * std::pow(grid.mesh(), hurst);
    std::vector<double> values(n + 1, 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        acc += incr[k];
        values[k + 1] = step_scale * acc;
    }
    return {SamplePath(grid, std::move(values)), fallback};
}

inline SamplePath brownian_path(const TimeGrid& grid, double scale, const RngStream& stream) {
    const auto z = stream.normals(grid.steps());
    const double step_scale = scale * std::sqrt(grid.mesh());
    std::vector<double> values(grid.size(), 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        acc += z[k];
        values[k + 1] = step_scale * acc;
    }
    return SamplePath(grid, std::move(values));
}

}  // namespace detail

/// One path of the driver on `grid`; Z_0 = 0, deterministic in (spec, grid, stream).
/// Mixed noise draws B from `stream.substream(0)` and B^H from `stream.substream(1)`.
inline NoiseSample sample_noise(const NoiseSpec& spec, const TimeGrid& grid,
                                const RngStream& stream) {
    spec.validate();
    switch (spec.kind) {
        case NoiseKind::zero:
            return {SamplePath(grid, std::vector<double>(grid.size(), 0.0)), false};
        case NoiseKind::brownian:
            return {detail::brownian_path(grid, spec.scale, stream), false};
        case NoiseKind::fbm:
            return detail::fbm_path(grid, spec.hurst, spec.scale, spec.generator, stream);
        case NoiseKind::mixed: {
            const auto b = detail::brownian_path(grid, 1.0, stream.substream(0));
            const auto bh =
                detail::fbm_path(grid, spec.hurst, 1.0, spec.generator, stream.substream(1));
            std::vector<double> values(grid.size());
            for (std::size_t k = 0; k < values.size(); ++k) {
                values[k] = spec.nu_brownian * b[k] + spec.nu_fractional * bh.path[k];
            }
            return {SamplePath(grid, std::move(values)), bh.used_fallback};
        }
    }
    throw std::logic_error("sample_noise: unknown kind");
}

}  // namespace sandwich
