// End-to-end acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Tolerances are fixed here and must not be loosened to make a line green.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sandwich/sandwich.hpp"

using namespace sandwich;

namespace {

constexpr double kHurst = 0.7;
constexpr std::size_t kFine = std::size_t{1} << 14;
constexpr std::uint64_t kSeed = 20240611;

int failures = 0;

void report(int id, bool pass, const std::string& detail, double seconds) {
    std::printf("criterion %2d %s  %s  [%.1fs]\n", id, pass ? "PASS" : "FAIL", detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
}

template <class F>
void run(int id, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail += std::string(" exception: ") + e.what();
        pass = false;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(id, pass, detail, secs);
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, a);
    return buf;
}

// Y = √X for dX = (3 - X)dt + dB^H: b(y) = 1.5/y - 0.5y, noise 0.5·B^H.
DriftModel fcir(double lambda = kHurst - 0.05) { return cir_cev_drift(1.5, 0.5, 0.5, lambda); }
NoiseSpec fcir_noise() { return NoiseSpec::fbm(kHurst, 0.5); }

DriftModel band_model(const BoundFunction& lower, const BoundFunction& upper) {
    TwoSidedPowerParams p;
    p.gamma = 4.0;
    p.lambda = kHurst - 0.05;
    p.lower = lower;
    p.upper = upper;
    return two_sided_power_drift(p);
}

DriftModel cos_band() {
    return band_model(BoundFunction::cosine(1.0, 5.0, 0.0, kHurst - 0.05, 1.0),
                      BoundFunction::cosine(1.0, 5.0, 3.0, kHurst - 0.05, 1.0));
}

DriftModel exp_band() {
    return band_model(BoundFunction::exponential(-1.0, -1.0, 0.0, kHurst - 0.05, 1.0),
                      BoundFunction::exponential(1.0, -1.0, 0.0, kHurst - 0.05, 1.0));
}

std::size_t confined_count(const std::vector<EnsemblePath>& ens) {
    std::size_t ok = 0;
    for (const auto& e : ens) ok += e.result.confined() ? 1 : 0;
    return ok;
}

EnsembleSpec criterion_one_spec(std::size_t workers) {
    EnsembleSpec s{fcir(), fcir_noise(), 20, kFine, 1.0, kSeed, 200, workers};
    return s;
}

bool sig_digits(double got, long double want, int digits, std::string& detail, const char* name) {
    const long double rel = std::fabs((static_cast<long double>(got) - want) / want);
    const bool ok = rel < std::pow(10.0L, -digits);
    if (!ok) {
        detail += std::string(" ") + name + " off by rel " + fmt("%.3g", static_cast<double>(rel));
    }
    return ok;
}

std::string csv_bytes(const SamplePath& p) {
    std::ostringstream out;
    write_path_csv(p, out);
    return out.str();
}

}  // namespace

int main() {
    const std::size_t workers = default_workers();
    std::printf("acceptance: workers=%zu seed=%llu\n", workers, static_cast<unsigned long long>(kSeed));

    std::vector<EnsemblePath> first_run;

    run(1, [&](std::string& d) {
        first_run = simulate_ensemble(criterion_one_spec(workers));
        const std::size_t ok = confined_count(first_run);
        double lowest = 1e300;
        for (const auto& e : first_run) lowest = std::min(lowest, e.result.min_lower_gap);
        d = "fCIR confined " + std::to_string(ok) + "/200, min Y " + fmt("%.4g", lowest) + " (need >= 99.5%)";
        return static_cast<double>(ok) >= 0.995 * 200.0;
    });

    run(2, [&](std::string& d) {
        EnsembleSpec s2{cos_band(), NoiseSpec::fbm(kHurst, 3.0), 20, kFine, 2.5, kSeed + 2, 200, workers};
        EnsembleSpec s3{exp_band(), NoiseSpec::fbm(kHurst), 20, kFine, 0.0, kSeed + 3, 200, workers};
        s3.allow_below_minimal = true;
        const std::size_t a = confined_count(simulate_ensemble(s2));
        const std::size_t b = confined_count(simulate_ensemble(s3));
        d = "cos band " + std::to_string(a) + "/200, exp band " + std::to_string(b) + "/200 (need >= 99.5% each)";
        return static_cast<double>(a) >= 199.0 && static_cast<double>(b) >= 199.0;
    });

    run(3, [&](std::string& d) {
        ConvergenceSpec c;
        c.model = fcir();
        c.noise = fcir_noise();
        c.levels = {20};
        c.steps = {512, 1024, 2048, 4096};
        c.reference_steps = kFine;
        c.y0 = 1.0;
        c.seed = kSeed + 4;
        c.paths = 50;
        c.workers = workers;
        c.lambda_p = 0.6;
        c.min_slope = 0.5;
        const auto rep = convergence_study(c);
        const bool decreasing = rep.metrics["strictly_decreasing"].get<bool>();
        d = "slope " + fmt("%.3f", rep.slope) + ", strictly decreasing " + (decreasing ? "yes" : "no") +
            " (need slope >= 0.5)";
        return decreasing && rep.slope >= 0.5;
    });

    run(4, [&](std::string& d) {
        EnsembleSpec s{fcir(), fcir_noise(), 160, std::size_t{1} << 13, 1.0, kSeed + 5, 2000, workers};
        const auto rep = tail_exponent_study(s, {0.02, 0.04, 0.08, 0.16}, 0.6);
        d = "counts " + rep.metrics["counts"].dump();
        if (rep.inconclusive) {
            d += ", inconclusive (no unsaturated rungs)";
        } else {
            d += ", slope " + fmt("%.3f", rep.slope) + " +- " + fmt("%.3f", rep.stderr_) + " vs expected " +
                 fmt("%.2f", rep.expected);
        }
        return rep.pass;
    });

    run(5, [&](std::string& d) {
        const double lambda = 0.65;
        EnsembleSpec s{fcir(lambda), fcir_noise(), 160, kFine, 1.0, kSeed + 6, 100, workers};
        const auto ens = simulate_ensemble(s);
        const TimeGrid grid(1.0, kFine);
        const auto checks = parallel_map<CertificateCheck>(ens.size(), workers, [&](std::size_t i) {
            auto est = estimate_holder(ens[i].noise, lambda, 10.0, false);
            const auto cert = lower_bound_certificate(s.model, est, s.y0, grid);
            return cert.check(ens[i].result.path);
        });
        std::size_t nodes = 0;
        std::size_t bad = 0;
        double worst = 0.0;
        for (const auto& c : checks) {
            nodes += c.nodes;
            bad += c.violations;
            worst = std::max(worst, c.worst_violation());
        }
        const double frac = static_cast<double>(bad) / static_cast<double>(nodes);
        d = "violated nodes " + fmt("%.4g", 100.0 * frac) + "%, worst violation " + fmt("%.3g", worst) +
            " (need <= 1% and <= 1e-3)";
        return frac <= 0.01 && worst <= 1e-3;
    });

    run(6, [&](std::string& d) {
        const TimeGrid grid(1.0, kFine);
        const double tol = 10.0 * grid.mesh();
        const auto model = fcir();
        double worst = -1e300;
        std::size_t hard = 0;
        for (std::size_t i = 0; i < 20; ++i) {
            const auto z = sample_noise(fcir_noise(), grid, RngStream(kSeed + 7, i)).path;
            for (long n : {20L, 40L, 80L}) {
                const auto lo = approximating_path(model, n, z, 1.0);
                const auto hi = approximating_path(model, 2 * n, z, 1.0);
                for (std::size_t k = 0; k < grid.size(); ++k) {
                    const double excess = lo.path[k] - hi.path[k];
                    worst = std::max(worst, excess);
                    if (excess > tol) ++hard;
                }
            }
        }
        d = "max(Y^(n) - Y^(2n)) " + fmt("%.3g", worst) + ", violations beyond " + fmt("%.3g", tol) + ": " +
            std::to_string(hard);
        return hard == 0;
    });

    run(7, [&](std::string& d) {
        const auto grid = make_grid(1.0, 16);
        const std::size_t m = grid.size();
        const std::size_t paths = 100000;
        bool ok = true;
        for (double h : {0.3, 0.5, 0.7}) {
            const auto spec = NoiseSpec::fbm(h);
            const std::size_t chunks = 100;
            const auto partial = parallel_map<std::vector<double>>(chunks, workers, [&](std::size_t c) {
                std::vector<double> acc(m * m, 0.0);
                for (std::size_t i = c * (paths / chunks); i < (c + 1) * (paths / chunks); ++i) {
                    const auto z = sample_noise(spec, grid, RngStream(kSeed + 8, i)).path;
                    for (std::size_t a = 0; a < m; ++a) {
                        for (std::size_t b = 0; b < m; ++b) acc[a * m + b] += z[a] * z[b];
                    }
                }
                return acc;
            });
            double worst = 0.0;
            for (std::size_t a = 0; a < m; ++a) {
                for (std::size_t b = 0; b < m; ++b) {
                    double s = 0.0;
                    for (const auto& p : partial) s += p[a * m + b];
                    const double want = static_cast<double>(oracle::fbm_cov(grid.node(a), grid.node(b), h));
                    worst = std::max(worst, std::abs(s / static_cast<double>(paths) - want));
                }
            }
            d += "H=" + fmt("%.1f", h) + " err " + fmt("%.4f", worst) + "; ";
            ok = ok && worst <= 0.02;
        }
        d += "(need <= 0.02)";
        return ok;
    });

    run(8, [&](std::string& d) {
        const auto trunc = truncate_drift(fcir(), 20);
        const std::vector<std::size_t> ladder{1024, 2048, 4096};
        std::vector<double> mean(ladder.size(), 0.0);
        for (std::size_t i = 0; i < 20; ++i) {
            const auto fine = sample_noise(fcir_noise(), make_grid(1.0, ladder.back()), RngStream(kSeed + 9, i)).path;
            for (std::size_t j = 0; j < ladder.size(); ++j) {
                const auto z = fine.restrict_to(make_grid(1.0, ladder[j]));
                const auto y = euler_semiheuristic(trunc, z, 1.0);
                mean[j] += young_residual(y.path, z, 1.5, 0.5, 0.5) / 20.0;
            }
        }
        const double r1 = mean[0] / mean[1];
        const double r2 = mean[1] / mean[2];
        d = "residual " + fmt("%.4g", mean[0]) + " -> " + fmt("%.4g", mean[1]) + " -> " + fmt("%.4g", mean[2]) +
            ", ratios " + fmt("%.3f", r1) + ", " + fmt("%.3f", r2) + " (need >= 1.5)";
        return r1 >= 1.5 && r2 >= 1.5;
    });

    run(9, [&](std::string& d) {
        bool ok = true;
        ok &= sig_digits(grr_constant(0.5, 4.0), oracle::grr_constant(0.5L, 4.0L), 10, d, "grr(0.5,4)");
        ok &= sig_digits(grr_constant(1.0, 2.0), 48.0L, 10, d, "grr(1,2)");
        ok &= sig_digits(beta_constant(0.5, 1.0, 1.0, Sidedness::one_sided), oracle::beta(0.5L, 1.0L, 1.0L, false),
                         10, d, "beta one-sided");
        ok &= sig_digits(beta_constant(0.5, 2.0, 1.0, Sidedness::two_sided), oracle::beta(0.5L, 2.0L, 1.0L, true),
                         10, d, "beta two-sided");
        ok &= sig_digits(beta_constant(0.5, 2.0, 1.0, Sidedness::two_sided), 0.0625L, 10, d, "beta 0.0625");
        ok &= sig_digits(m3_constant(1.0, 0.5, 3.0, 1.0, Sidedness::one_sided), oracle::m3(1.0L, 0.5L, 3.0L, 1.0L),
                         10, d, "M3 r=1");
        ok &= sig_digits(m3_constant(2.0, 0.5, 3.0, 1.0, Sidedness::one_sided), 2.0L, 10, d, "M3 r=2");
        ok &= sig_digits(epsilon_n(1.0, 1.0, 20.0), 0.05L, 10, d, "eps(1,1,20)");
        ok &= sig_digits(epsilon_n(1.0, 4.0, 16.0), 0.5L, 10, d, "eps(1,4,16)");
        ok &= sig_digits(epsilon_n(2.0, 1.0, 20.0), 0.1L, 10, d, "eps(2,1,20)");
        ok &= sig_digits(gap_delta_n(fcir(), 20), oracle::cir_root(1.5L, 0.5L, 20.0L), 10, d, "delta fCIR");
        const long double sim2 = oracle::newton(
            [](long double e) { return 1.0L / std::pow(e, 4.0L) - 1.0L / std::pow(3.0L - e, 4.0L) - 20.0L; }, 0.47L);
        ok &= sig_digits(gap_delta_n(cos_band(), 20), sim2, 10, d, "delta cos band");
        if (ok) d = "12 formula values within 1e-10 relative";
        return ok;
    });

    run(10, [&](std::string& d) {
        if (first_run.empty()) first_run = simulate_ensemble(criterion_one_spec(workers));
        const auto serial = simulate_ensemble(criterion_one_spec(1));
        const auto wide = simulate_ensemble(criterion_one_spec(4));
        std::size_t mismatched = 0;
        for (std::size_t i = 0; i < serial.size(); ++i) {
            const auto bytes = csv_bytes(serial[i].result.path);
            if (bytes != csv_bytes(wide[i].result.path) || bytes != csv_bytes(first_run[i].result.path)) {
                ++mismatched;
            }
        }
        d = "workers 1/4/" + std::to_string(workers) + ": " + std::to_string(mismatched) + " of 200 CSVs differ";
        return mismatched == 0;
    });

    std::printf("acceptance: %d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
