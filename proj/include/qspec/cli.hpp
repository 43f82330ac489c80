#ifndef QSPEC_CLI_HPP
#define QSPEC_CLI_HPP

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qspec/io.hpp"
#include "qspec/qspec.hpp"

// Command-line surface: estimate (periodograms, smoothed estimates,
// confidence bands), test (pointwise and CvM flatness tests), simulate
// (seeded process generators) and experiment (Monte Carlo batch driver).

namespace qspec::cli {

namespace detail {

inline FrequencyGrid make_grid(const std::string& text, std::size_t n) {
    if (text == "natural") return FrequencyGrid::natural(n);
    if (text.rfind("count:", 0) == 0) {
        std::size_t count = 0;
        try {
            count = std::stoul(text.substr(6));
        } catch (...) {
            throw invalid_input("--grid count: bad point count in '" + text + "'");
        }
        if (count < 2) throw invalid_input("--grid count: need at least 2 points");
        std::vector<double> freqs(count);
        for (std::size_t i = 0; i < count; ++i) {
            freqs[i] = std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1);
        }
        return FrequencyGrid::explicit_grid(std::move(freqs));
    }
    throw invalid_input("--grid must be 'natural' or 'count:N', got '" + text + "'");
}

inline ContaminationSpec parse_contamination(const std::string& text, std::uint64_t seed) {
    // "<p>:cauchy" or "<p>:t:<nu>"
    const auto first = text.find(':');
    if (first == std::string::npos)
        throw invalid_input("--contaminate expects p:dist, got '" + text + "'");
    ContaminationSpec spec;
    try {
        spec.p = std::stod(text.substr(0, first));
    } catch (...) {
        throw invalid_input("--contaminate: bad probability in '" + text + "'");
    }
    const std::string rest = text.substr(first + 1);
    if (rest == "cauchy") {
        spec.noise = ContaminationSpec::Noise::cauchy;
    } else if (rest.rfind("t:", 0) == 0) {
        spec.noise = ContaminationSpec::Noise::student_t;
        try {
            spec.nu = std::stod(rest.substr(2));
        } catch (...) {
            throw invalid_input("--contaminate: bad degrees of freedom in '" + text + "'");
        }
    } else {
        throw invalid_input("--contaminate: noise must be 'cauchy' or 't:<nu>'");
    }
    spec.seed = seed;
    return spec;
}

struct EstimateArgs {
    std::string input, column = "1", grid = "natural", normalize = "none";
    std::string kernel, output, format = "csv";
    bool has_header = false;
    std::vector<double> taus;
    double bandwidth_c = 13.0;
    int band_k = -1;
    double alpha = 0.05;
};

inline int run_estimate(const EstimateArgs& a) {
    if (a.band_k >= 0 && !a.kernel.empty())
        throw invalid_input("--band-k uses raw averaged ordinates; it conflicts with --kernel");
    if (a.band_k >= 0 && a.grid != "natural")
        throw invalid_input("--band-k requires the natural grid");
    if (a.normalize != "none" && a.normalize != "null-value")
        throw invalid_input("--normalize must be 'none' or 'null-value'");

    const Series series = read_series_csv(a.input, a.column, a.has_header);
    const std::size_t n = series.size();
    std::vector<SpectrumRecord> records;

    // one block per tau; an empty tau list means the classical estimator
    std::vector<std::optional<double>> levels;
    if (a.taus.empty()) {
        levels.push_back(std::nullopt);
    } else {
        for (double t : a.taus) levels.emplace_back(t);
    }

    for (const auto& tau : levels) {
        double null_value;
        if (tau) {
            null_value = *tau * (1.0 - *tau) / two_pi;
        } else {
            const auto gamma0 = fft::autocovariance(series.span(), 0, /*subtract_mean=*/true);
            null_value = gamma0[0] / two_pi;
        }
        const double scale = (a.normalize == "null-value") ? 1.0 / null_value : 1.0;
        const double null_out = (a.normalize == "null-value") ? 1.0 : null_value;

        if (a.band_k >= 0) {
            const BandResult band = [&]() {
                if (tau) {
                    const auto crossings = estimated_crossings(series, Probability(*tau));
                    return confidence_band_from_values(crossings.values, n, a.band_k, a.alpha);
                }
                double mean = 0.0;
                for (double v : series.values()) mean += v;
                mean /= static_cast<double>(n);
                std::vector<double> centered(n);
                for (std::size_t t = 0; t < n; ++t) centered[t] = series[t] - mean;
                return confidence_band_from_values(centered, n, a.band_k, a.alpha);
            }();
            for (std::size_t i = 0; i < band.band.grid.size(); ++i) {
                SpectrumRecord rec;
                rec.lambda = band.band.grid.freq(i);
                rec.tau = tau;
                rec.estimate = band.qbar[i] * scale;
                rec.lower = band.band.lower[i] * scale;
                rec.upper = band.band.upper[i] * scale;
                rec.null_value = null_out;
                records.push_back(rec);
            }
            continue;
        }

        const FrequencyGrid grid = make_grid(a.grid, n);
        SpectralEstimate est = [&]() {
            if (!a.kernel.empty()) {
                const LagWindowSpec spec(kernel_from_name(a.kernel),
                                         default_bandwidth(n, a.bandwidth_c));
                return tau ? smoothed_quantile_periodogram(series, Probability(*tau), spec, grid)
                           : smoothed_classical_periodogram(series, spec, grid);
            }
            return tau ? quantile_periodogram(series, Probability(*tau), grid)
                       : classical_periodogram(series, grid);
        }();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            SpectrumRecord rec;
            rec.lambda = grid.freq(i);
            rec.tau = tau;
            rec.estimate = est.values[i] * scale;
            rec.null_value = null_out;
            records.push_back(rec);
        }
    }

    if (a.format == "csv") {
        write_spectrum_csv(a.output, records);
    } else if (a.format == "json") {
        write_spectrum_json(a.output, records);
    } else {
        throw invalid_input("--format must be 'csv' or 'json'");
    }
    return 0;
}

struct TestArgs {
    std::string input, column = "1", method, output;
    bool has_header = false;
    double tau = 0.5;
    std::optional<double> lambda;
    int k = 4;
    double alpha = 0.05;
    int replications = 999;
    int block_size = 0;
    std::uint64_t seed = 12345;
    std::optional<double> known_quantile;
    int threads = 1;
};

inline int run_test(const TestArgs& a) {
    const Series series = read_series_csv(a.input, a.column, a.has_header);
    json report;
    if (a.method == "pointwise") {
        if (!a.lambda) throw invalid_input("--method pointwise requires --lambda");
        if (a.known_quantile)
            throw invalid_input("--known-quantile applies to the cvm methods only");
        report = pointwise_to_json(
            flatness_test_at_frequency(series, Probability(a.tau), *a.lambda, a.k, a.alpha));
    } else if (a.method == "cvm-mc" || a.method == "cvm-bootstrap") {
        if (a.lambda) throw invalid_input("--lambda applies to the pointwise method only");
        if (a.method == "cvm-mc") {
            report = cvm_to_json(mc_flatness_test(series, Probability(a.tau), a.alpha,
                                                  a.replications, a.seed, a.known_quantile,
                                                  a.threads));
        } else {
            const int block = a.block_size > 0 ? a.block_size : default_block_size(series.size());
            report = cvm_to_json(bootstrap_flatness_test(series, Probability(a.tau), a.alpha,
                                                         a.replications, block, a.seed, {},
                                                         a.threads, a.known_quantile));
        }
    } else {
        throw invalid_input("--method must be pointwise, cvm-mc or cvm-bootstrap");
    }
    const std::string text = report.dump(2);
    std::cout << text << "\n";
    if (!a.output.empty()) {
        std::ofstream out(a.output);
        if (!out) throw parse_error("cannot open '" + a.output + "' for writing");
        out << text << "\n";
    }
    return 0;
}

struct SimulateArgs {
    std::string process, contaminate, output;
    std::size_t n = 0;
    std::uint64_t seed = 1;
    double theta = 1.0;
    std::size_t burn_in = 400;
    int max_attempts = 100;
};

inline int run_simulate(const SimulateArgs& a) {
    ProcessSpec spec = parse_process(a.process);
    spec.n = a.n;
    spec.seed = a.seed;
    spec.burn_in = a.burn_in;
    spec.theta = a.theta;
    spec.max_attempts = a.max_attempts;
    Series series = generate(spec);
    if (!a.contaminate.empty()) {
        series = contaminate(series, parse_contamination(a.contaminate,
                                                         derive_seed(a.seed, 0xC0ull)));
    }
    write_series_csv(a.output, series);
    return 0;
}

struct ExperimentArgs {
    std::string config, output;
    int threads = -1;  // <0: keep the config's value
};

inline int run_experiment(const ExperimentArgs& a) {
    ExperimentConfig cfg = read_experiment_config(a.config);
    if (a.threads >= 0) cfg.threads = a.threads;
    std::optional<MedianReference> reference;
    const bool needs_reference =
        (cfg.type == "coverage" && !cfg.taus.empty()) || (cfg.type == "mise" && !cfg.taus.empty());
    if (needs_reference) {
        if (cfg.median_reference.empty())
            throw schema_error("config: quantile cells need 'median_reference'");
        reference = load_median_reference(cfg.median_reference);
    }
    ExperimentResult result;
    if (cfg.type == "coverage") {
        result = run_coverage(cfg, reference ? &*reference : nullptr);
    } else if (cfg.type == "mise") {
        result = run_mise(cfg, reference ? &*reference : nullptr);
    } else if (cfg.type == "size_power") {
        result = run_size_power(cfg);
    } else {
        throw schema_error("config: type must be coverage, mise or size_power");
    }
    write_experiment_csv(a.output + ".csv", result);
    write_experiment_json(a.output + ".json", result);
    std::cout << "wrote " << result.cells.size() << " cells to " << a.output << ".{csv,json} in "
              << result.wall_seconds << "s\n";
    return 0;
}

}  // namespace detail

/// Entry point shared by the qspec binary and the in-process CLI tests.
inline int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"quantile spectral analysis toolkit"};
    app.require_subcommand(1);

    detail::EstimateArgs est;
    auto* cmd_est = app.add_subcommand("estimate", "periodograms and smoothed spectra");
    cmd_est->add_option("--input", est.input, "input CSV")->required();
    cmd_est->add_option("--column", est.column, "column name or 1-based index");
    cmd_est->add_flag("--has-header", est.has_header, "first row is a header");
    cmd_est->add_option("--tau", est.taus, "quantile level(s); omit for the classical estimator");
    cmd_est->add_option("--kernel", est.kernel,
                        "lag window (bartlett|parzen|tukey_hanning|daniell|qs)");
    cmd_est->add_option("--bandwidth-c", est.bandwidth_c, "bandwidth factor c in B_n = c n^{1/5}");
    cmd_est->add_option("--grid", est.grid, "natural or count:N");
    cmd_est->add_option("--band-k", est.band_k, "chi-squared bands from 2k+1 averaged ordinates");
    cmd_est->add_option("--alpha", est.alpha, "band level alpha");
    cmd_est->add_option("--normalize", est.normalize, "none or null-value");
    cmd_est->add_option("--output", est.output, "output path")->required();
    cmd_est->add_option("--format", est.format, "csv or json");

    detail::TestArgs tst;
    auto* cmd_tst = app.add_subcommand("test", "flatness tests");
    cmd_tst->add_option("--input", tst.input, "input CSV")->required();
    cmd_tst->add_option("--column", tst.column, "column name or 1-based index");
    cmd_tst->add_flag("--has-header", tst.has_header, "first row is a header");
    cmd_tst->add_option("--tau", tst.tau, "quantile level")->required();
    cmd_tst->add_option("--method", tst.method, "pointwise|cvm-mc|cvm-bootstrap")->required();
    double lambda_opt = 0.0;
    auto* lambda_flag = cmd_tst->add_option("--lambda", lambda_opt, "frequency (pointwise only)");
    cmd_tst->add_option("--k", tst.k, "ordinate averaging half-width");
    cmd_tst->add_option("--alpha", tst.alpha, "test level");
    cmd_tst->add_option("--replications", tst.replications, "Monte Carlo / bootstrap draws");
    cmd_tst->add_option("--block-size", tst.block_size, "bootstrap block size (0 = round(sqrt(n)/2))");
    cmd_tst->add_option("--seed", tst.seed, "RNG seed");
    double known_q = 0.0;
    auto* known_flag = cmd_tst->add_option("--known-quantile", known_q,
                                           "treat this quantile value as known");
    cmd_tst->add_option("--threads", tst.threads, "worker threads");
    cmd_tst->add_option("--output", tst.output, "also write the JSON report here");

    detail::SimulateArgs sim;
    auto* cmd_sim = app.add_subcommand("simulate", "generate a process realization");
    cmd_sim->add_option("--process", sim.process, "ar2|sv|qar|iid:<dist>")->required();
    cmd_sim->add_option("--n", sim.n, "series length")->required();
    cmd_sim->add_option("--seed", sim.seed, "RNG seed");
    cmd_sim->add_option("--theta", sim.theta, "innovation scale (sv)");
    cmd_sim->add_option("--burn-in", sim.burn_in, "discarded initial observations");
    cmd_sim->add_option("--max-attempts", sim.max_attempts, "positivity redraw budget (qar)");
    cmd_sim->add_option("--contaminate", sim.contaminate, "p:cauchy or p:t:<nu>");
    cmd_sim->add_option("--output", sim.output, "output CSV")->required();

    detail::ExperimentArgs exp;
    auto* cmd_exp = app.add_subcommand("experiment", "Monte Carlo batch driver");
    cmd_exp->add_option("--config", exp.config, "JSON config")->required();
    cmd_exp->add_option("--output", exp.output, "output prefix (.csv and .json)")->required();
    cmd_exp->add_option("--threads", exp.threads, "override the config's worker count");

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.push_back("qspec");
    for (const auto& a : args) argv_storage.push_back(a);
    std::vector<const char*> argv;
    for (const auto& s : argv_storage) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*cmd_est) return detail::run_estimate(est);
        if (*cmd_tst) {
            if (*lambda_flag) tst.lambda = lambda_opt;
            if (*known_flag) tst.known_quantile = known_q;
            return detail::run_test(tst);
        }
        if (*cmd_sim) return detail::run_simulate(sim);
        if (*cmd_exp) return detail::run_experiment(exp);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace qspec::cli

#endif  // QSPEC_CLI_HPP
