#ifndef QSPEC_HARNESS_HPP
#define QSPEC_HARNESS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qspec/cvm.hpp"
#include "qspec/errors.hpp"
#include "qspec/parallel.hpp"
#include "qspec/pointwise.hpp"
#include "qspec/simulate.hpp"
#include "qspec/spectral.hpp"

// Batch Monte Carlo drivers: pointwise-interval coverage, mean integrated
// squared error of the smoothed estimators over a bandwidth grid, and
// size/power of the flatness tests. Replications run concurrently with
// per-replication seeds derived from (seed, index) and index-keyed result
// storage, so results are identical for any worker count.

namespace qspec {

/// Large-sample reference for the median spectrum of the AR(2) process,
/// stored as a versioned fixture (fine frequency grid plus exact values at
/// the frequencies used by the coverage tables).
struct MedianReference {
    std::uint64_t seed = 0;
    std::size_t n = 0;
    double bandwidth_c = 13.0;
    double tau = 0.5;
    std::vector<double> freqs;   // ascending, spanning [0, pi]
    std::vector<double> values;  // smoothed median periodogram on freqs
    std::vector<std::pair<double, double>> targets;  // exact-frequency values

    double value_at(double lambda) const {
        for (const auto& [l, v] : targets) {
            if (std::fabs(l - lambda) < 1e-9) return v;
        }
        if (freqs.size() < 2 || lambda < freqs.front() - 1e-12 || lambda > freqs.back() + 1e-12)
            throw invalid_input("MedianReference: frequency outside the tabulated grid");
        const auto it = std::lower_bound(freqs.begin(), freqs.end(), lambda);
        std::size_t hi = static_cast<std::size_t>(it - freqs.begin());
        if (hi == 0) hi = 1;
        if (hi >= freqs.size()) hi = freqs.size() - 1;
        const std::size_t lo = hi - 1;
        const double t = (lambda - freqs[lo]) / (freqs[hi] - freqs[lo]);
        return values[lo] + t * (values[hi] - values[lo]);
    }
};

struct ExperimentConfig {
    std::string type = "coverage";  // coverage | mise | size_power
    std::string process = "ar2";
    double theta = 1.0;
    std::optional<ContaminationSpec> contamination;  // seed derived per replication
    std::vector<std::size_t> n_values;
    std::vector<double> taus;  // quantile levels (coverage/mise/size_power)
    bool classical = true;     // coverage/mise: include the classical estimator
    std::vector<int> k_values;
    std::vector<double> lambdas;
    std::vector<double> bandwidth_factors;  // mise grid of c in B_n = c n^{1/5}
    double bandwidth_c = 13.0;
    std::string kernel = "quadratic_spectral";
    double alpha = 0.05;
    std::size_t replications = 2000;
    std::uint64_t seed = 1;
    std::string test = "cvm-mc";  // size_power: cvm-mc | cvm-bootstrap | pointwise
    bool warp_speed = true;
    int test_replications = 999;
    std::size_t shared_null_draws = 100000;
    std::vector<int> block_sizes;  // parallel to n_values; empty -> round(sqrt(n)/2)
    std::string median_reference;  // fixture path (loaded by the caller/CLI)
    int threads = 0;
    std::size_t burn_in = 400;
};

struct Cell {
    std::string experiment;
    std::string process;
    std::string method;
    std::size_t n = 0;
    std::optional<double> tau;
    std::optional<int> k;
    std::optional<int> block_size;
    std::optional<double> lambda;
    std::optional<double> c;
    double estimate = 0.0;
    double mc_se = 0.0;
    std::size_t replications = 0;
    std::optional<double> target;
    bool not_applicable = false;
};

struct ExperimentResult {
    std::vector<Cell> cells;
    double wall_seconds = 0.0;
};

namespace detail {

inline std::string process_label(const ExperimentConfig& cfg) {
    std::string label = cfg.process;
    if (cfg.contamination) {
        const auto& c = *cfg.contamination;
        label += (c.noise == ContaminationSpec::Noise::cauchy)
                     ? "+cauchy(p=" + std::to_string(c.p) + ")"
                     : "+t(nu=" + std::to_string(c.nu) + ",p=" + std::to_string(c.p) + ")";
    }
    return label;
}

inline Series make_path(const ExperimentConfig& cfg, std::size_t n, std::uint64_t data_seed) {
    ProcessSpec spec = parse_process(cfg.process);
    spec.n = n;
    spec.seed = data_seed;
    spec.burn_in = cfg.burn_in;
    spec.theta = cfg.theta;
    Series series = generate(spec);
    if (cfg.contamination) {
        ContaminationSpec cs = *cfg.contamination;
        cs.seed = derive_seed(data_seed, 0xC0617ull);
        series = contaminate(series, cs);
    }
    return series;
}

inline double proportion_se(double p, std::size_t reps) {
    return std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
}

// Trapezoid integral over an ascending grid.
inline double trapezoid(std::span<const double> x, std::span<const double> y) {
    double sum = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        sum += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }
    return sum;
}

}  // namespace detail

/// Coverage of the chi-squared pointwise intervals. Classical intervals are
/// checked against the closed-form AR(2) spectrum (shifted for Student-t
/// contamination, undefined under Cauchy contamination); quantile intervals
/// are checked against the pinned large-sample median reference.
inline ExperimentResult run_coverage(const ExperimentConfig& cfg,
                                     const MedianReference* reference) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.n_values.empty() || cfg.k_values.empty() || cfg.lambdas.empty())
        throw invalid_input("run_coverage: need n_values, k_values and lambdas");
    const bool cauchy_contaminated =
        cfg.contamination && cfg.contamination->noise == ContaminationSpec::Noise::cauchy;
    if (cfg.process != "ar2")
        throw invalid_input("run_coverage: coverage targets are defined for the ar2 process");

    struct CellPlan {
        bool classical;
        double tau;       // quantile cells
        int k;
        double lambda;
        double target;
        double chi_lo, chi_hi;
        bool not_applicable;
    };

    ExperimentResult result;
    const std::string label = detail::process_label(cfg);

    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        const std::size_t n = cfg.n_values[ni];
        std::vector<CellPlan> plans;
        for (int k : cfg.k_values) {
            const int nu = 4 * k + 2;
            const double chi_hi = chi2_quantile_cached(nu, 1.0 - cfg.alpha / 2.0);
            const double chi_lo = chi2_quantile_cached(nu, cfg.alpha / 2.0);
            for (double lambda : cfg.lambdas) {
                if (cfg.classical) {
                    CellPlan p{true, 0.0, k, lambda, 0.0, chi_lo, chi_hi, false};
                    if (cauchy_contaminated) {
                        p.not_applicable = true;  // classical spectrum does not exist
                    } else if (cfg.contamination) {
                        p.target = contaminated_ar2_spectrum(lambda, cfg.contamination->p,
                                                             cfg.contamination->nu);
                    } else {
                        p.target = ar2_spectrum(lambda);
                    }
                    plans.push_back(p);
                }
                for (double tau : cfg.taus) {
                    if (!reference) throw invalid_input("run_coverage: median reference required");
                    if (std::fabs(tau - reference->tau) > 1e-12)
                        throw invalid_input("run_coverage: reference fixture covers tau=0.5 only");
                    plans.push_back(
                        CellPlan{false, tau, k, lambda, reference->value_at(lambda), chi_lo, chi_hi,
                                 false});
                }
            }
        }

        std::vector<std::vector<std::uint8_t>> covered(plans.size(),
                                                       std::vector<std::uint8_t>(cfg.replications));
        const std::uint64_t n_seed = derive_seed(cfg.seed, 0xA0000ull + ni);
        const bool need_classical = cfg.classical && !cauchy_contaminated;

        parallel_for_indexed(cfg.replications, cfg.threads, [&](std::size_t rep) {
            const Series series = detail::make_path(cfg, n, derive_seed(n_seed, rep));
            std::vector<double> centered;
            if (need_classical) {
                double mean = 0.0;
                for (double v : series.values()) mean += v;
                mean /= static_cast<double>(n);
                centered.resize(n);
                for (std::size_t t = 0; t < n; ++t) centered[t] = series[t] - mean;
            }
            std::vector<std::pair<double, std::vector<double>>> crossings;
            for (double tau : cfg.taus) {
                crossings.emplace_back(tau, estimated_crossings(series, Probability(tau)).values);
            }
            for (std::size_t ci = 0; ci < plans.size(); ++ci) {
                const auto& p = plans[ci];
                if (p.not_applicable) continue;
                const long j0 = snap_to_natural_index(n, p.lambda);
                const std::vector<double>* v = nullptr;
                if (p.classical) {
                    v = &centered;
                } else {
                    for (const auto& [tau, values] : crossings) {
                        if (tau == p.tau) v = &values;
                    }
                }
                const double qbar = detail::averaged_ordinate(*v, n, j0, p.k);
                const double nu = 4.0 * p.k + 2.0;
                const double lo = nu * qbar / p.chi_hi;
                const double hi = nu * qbar / p.chi_lo;
                covered[ci][rep] = (p.target > lo && p.target < hi) ? 1 : 0;
            }
        });

        for (std::size_t ci = 0; ci < plans.size(); ++ci) {
            const auto& p = plans[ci];
            Cell cell;
            cell.experiment = "coverage";
            cell.process = label;
            cell.method = p.classical ? "classical" : "quantile";
            cell.n = n;
            if (!p.classical) cell.tau = p.tau;
            cell.k = p.k;
            cell.lambda = p.lambda;
            cell.replications = cfg.replications;
            if (p.not_applicable) {
                cell.not_applicable = true;
            } else {
                std::size_t hits = 0;
                for (auto b : covered[ci]) hits += b;
                cell.estimate = static_cast<double>(hits) / static_cast<double>(cfg.replications);
                cell.mc_se = detail::proportion_se(cell.estimate, cfg.replications);
                cell.target = p.target;
            }
            result.cells.push_back(std::move(cell));
        }
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

/// Empirical MISE of the smoothed estimators over a grid of bandwidth
/// factors, integrated over (0, pi] by the trapezoid rule on the natural
/// grid.
inline ExperimentResult run_mise(const ExperimentConfig& cfg, const MedianReference* reference) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.n_values.empty() || cfg.bandwidth_factors.empty())
        throw invalid_input("run_mise: need n_values and bandwidth_factors");
    if (cfg.process != "ar2")
        throw invalid_input("run_mise: reference spectra are defined for the ar2 process");
    const bool quantile = !cfg.taus.empty();
    if (quantile && (cfg.taus.size() != 1 || std::fabs(cfg.taus[0] - 0.5) > 1e-12))
        throw invalid_input("run_mise: quantile MISE is tabulated for tau = 0.5 only");
    if (quantile && !reference) throw invalid_input("run_mise: median reference required");

    ExperimentResult result;
    const std::string label = detail::process_label(cfg);
    const Kernel kernel = kernel_from_name(cfg.kernel);

    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        const std::size_t n = cfg.n_values[ni];
        const auto grid = FrequencyGrid::natural_range(n, 1, static_cast<long>(n / 2));
        const auto freqs = grid.frequencies();
        std::vector<double> classical_ref(freqs.size()), median_ref(freqs.size());
        for (std::size_t i = 0; i < freqs.size(); ++i) {
            classical_ref[i] = ar2_spectrum(freqs[i]);
            if (quantile) median_ref[i] = reference->value_at(freqs[i]);
        }

        const std::size_t n_c = cfg.bandwidth_factors.size();
        const std::size_t methods = (cfg.classical ? 1 : 0) + (quantile ? 1 : 0);
        // ise[(ci * methods + mi)][rep]
        std::vector<std::vector<double>> ise(n_c * methods,
                                             std::vector<double>(cfg.replications));
        const std::uint64_t n_seed = derive_seed(cfg.seed, 0xB0000ull + ni);

        parallel_for_indexed(cfg.replications, cfg.threads, [&](std::size_t rep) {
            const Series series = detail::make_path(cfg, n, derive_seed(n_seed, rep));
            for (std::size_t ci = 0; ci < n_c; ++ci) {
                const double bn = default_bandwidth(n, cfg.bandwidth_factors[ci]);
                const LagWindowSpec spec(kernel, bn);
                std::size_t mi = 0;
                if (cfg.classical) {
                    const auto est = smoothed_classical_periodogram(series, spec, grid);
                    std::vector<double> sq(freqs.size());
                    for (std::size_t i = 0; i < freqs.size(); ++i) {
                        const double d = est.values[i] - classical_ref[i];
                        sq[i] = d * d;
                    }
                    ise[ci * methods + mi][rep] = detail::trapezoid(freqs, sq);
                    ++mi;
                }
                if (quantile) {
                    const auto est =
                        smoothed_quantile_periodogram(series, Probability(0.5), spec, grid);
                    std::vector<double> sq(freqs.size());
                    for (std::size_t i = 0; i < freqs.size(); ++i) {
                        const double d = est.values[i] - median_ref[i];
                        sq[i] = d * d;
                    }
                    ise[ci * methods + mi][rep] = detail::trapezoid(freqs, sq);
                }
            }
        });

        for (std::size_t ci = 0; ci < n_c; ++ci) {
            std::size_t mi = 0;
            auto emit = [&](const std::string& method, std::optional<double> tau) {
                const auto& samples = ise[ci * methods + mi];
                double mean = 0.0;
                for (double v : samples) mean += v;
                mean /= static_cast<double>(samples.size());
                double var = 0.0;
                for (double v : samples) var += (v - mean) * (v - mean);
                var /= static_cast<double>(samples.size() - 1);
                Cell cell;
                cell.experiment = "mise";
                cell.process = label;
                cell.method = method;
                cell.n = n;
                cell.tau = tau;
                cell.c = cfg.bandwidth_factors[ci];
                cell.estimate = mean;
                cell.mc_se = std::sqrt(var / static_cast<double>(samples.size()));
                cell.replications = cfg.replications;
                result.cells.push_back(std::move(cell));
                ++mi;
            };
            if (cfg.classical) emit("classical", std::nullopt);
            if (quantile) emit("quantile", 0.5);
        }
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

/// Rejection frequencies of the flatness tests (Monte Carlo CvM, block-wise
/// wild bootstrap CvM with optional warp-speed evaluation, or the pointwise
/// fixed-frequency test).
inline ExperimentResult run_size_power(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.n_values.empty() || cfg.taus.empty())
        throw invalid_input("run_size_power: need n_values and taus");
    if (cfg.test == "pointwise" && (cfg.lambdas.size() != 1 || cfg.k_values.size() != 1))
        throw invalid_input("run_size_power: pointwise test needs exactly one lambda and one k");

    ExperimentResult result;
    const std::string label = detail::process_label(cfg);

    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        const std::size_t n = cfg.n_values[ni];
        int block = 0;
        if (cfg.test == "cvm-bootstrap") {
            block = (ni < cfg.block_sizes.size()) ? cfg.block_sizes[ni] : default_block_size(n);
        }
        for (std::size_t ti = 0; ti < cfg.taus.size(); ++ti) {
            const double tau = cfg.taus[ti];
            const std::uint64_t cell_seed =
                derive_seed(cfg.seed, 0xC0000ull + ni * 97ull + ti);
            double estimate = 0.0;

            if (cfg.test == "cvm-mc" && cfg.shared_null_draws > 0) {
                // The Monte Carlo null distribution depends only on (n, tau),
                // so one large set of draws provides the critical value for
                // every replication of the cell.
                std::vector<double> draws(cfg.shared_null_draws);
                const std::uint64_t null_seed = derive_seed(cell_seed, 0x11ull);
                parallel_for_indexed(cfg.shared_null_draws, cfg.threads, [&](std::size_t i) {
                    CounterRng rng = CounterRng::substream(null_seed, i);
                    draws[i] = detail::cm_null_replicate(n, tau, rng);
                });
                const double crit = detail::empirical_critical_value(std::move(draws), cfg.alpha);
                std::vector<std::uint8_t> rejects(cfg.replications);
                parallel_for_indexed(cfg.replications, cfg.threads, [&](std::size_t rep) {
                    const Series series = detail::make_path(cfg, n, derive_seed(cell_seed, rep));
                    rejects[rep] = cm_statistic(series, Probability(tau)) > crit ? 1 : 0;
                });
                std::size_t count = 0;
                for (auto b : rejects) count += b;
                estimate = static_cast<double>(count) / static_cast<double>(cfg.replications);
            } else if (cfg.test == "cvm-bootstrap" && cfg.warp_speed) {
                // Warp speed: one bootstrap draw per replication; the pooled
                // draws provide the critical value.
                std::vector<double> stats(cfg.replications), stars(cfg.replications);
                parallel_for_indexed(cfg.replications, cfg.threads, [&](std::size_t rep) {
                    const std::uint64_t path_seed = derive_seed(cell_seed, rep);
                    const Series series = detail::make_path(cfg, n, path_seed);
                    const auto crossings = estimated_crossings(series, Probability(tau));
                    const detail::BootstrapWorkspace ws(crossings);
                    stats[rep] = detail::cm_from_autocov(ws.r, n);
                    CounterRng rng = CounterRng::substream(path_seed, 0x77ull);
                    const auto omega = detail::block_multipliers(
                        n, block, rng, [](CounterRng& r) { return draw_rademacher(r); });
                    stars[rep] = ws.replicate(omega);
                });
                const double crit = detail::empirical_critical_value(stars, cfg.alpha);
                std::size_t count = 0;
                for (double s : stats) count += (s > crit) ? 1 : 0;
                estimate = static_cast<double>(count) / static_cast<double>(cfg.replications);
            } else {
                std::vector<std::uint8_t> rejects(cfg.replications);
                parallel_for_indexed(cfg.replications, cfg.threads, [&](std::size_t rep) {
                    const std::uint64_t path_seed = derive_seed(cell_seed, rep);
                    const Series series = detail::make_path(cfg, n, path_seed);
                    const std::uint64_t test_seed = derive_seed(path_seed, 0x7357ull);
                    bool reject;
                    if (cfg.test == "cvm-mc") {
                        reject = mc_flatness_test(series, Probability(tau), cfg.alpha,
                                                  cfg.test_replications, test_seed)
                                     .reject;
                    } else if (cfg.test == "cvm-bootstrap") {
                        reject = bootstrap_flatness_test(series, Probability(tau), cfg.alpha,
                                                         cfg.test_replications, block, test_seed)
                                     .reject;
                    } else if (cfg.test == "pointwise") {
                        reject = flatness_test_at_frequency(series, Probability(tau),
                                                            cfg.lambdas[0], cfg.k_values[0],
                                                            cfg.alpha)
                                     .reject;
                    } else {
                        throw invalid_input("run_size_power: unknown test '" + cfg.test + "'");
                    }
                    rejects[rep] = reject ? 1 : 0;
                });
                std::size_t count = 0;
                for (auto b : rejects) count += b;
                estimate = static_cast<double>(count) / static_cast<double>(cfg.replications);
            }

            Cell cell;
            cell.experiment = "size_power";
            cell.process = label;
            cell.method = cfg.test;
            cell.n = n;
            cell.tau = tau;
            if (cfg.test == "cvm-bootstrap") cell.block_size = block;
            if (cfg.test == "pointwise") {
                cell.lambda = cfg.lambdas[0];
                cell.k = cfg.k_values[0];
            }
            cell.estimate = estimate;
            cell.mc_se = detail::proportion_se(estimate, cfg.replications);
            cell.replications = cfg.replications;
            result.cells.push_back(std::move(cell));
        }
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace qspec

#endif  // QSPEC_HARNESS_HPP
