// Regenerates the pinned large-sample reference for the AR(2) median
// spectrum (data/ar2_median_ref.json): a QS-smoothed median periodogram of a
// single seeded realization with n = 10^6 and c = 13, tabulated on a fine
// grid over [0, pi] plus exact values at the frequencies used by the
// coverage tables.

#include <cstdint>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "qspec/io.hpp"
#include "qspec/qspec.hpp"

int main(int argc, char** argv) {
    const std::string out_path = argc > 1 ? argv[1] : "data/ar2_median_ref.json";
    const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 987654321ull;
    const std::size_t n = 1000000;
    const double c = 13.0;
    const std::size_t grid_points = 2049;

    std::cerr << "generating ar2 realization, n=" << n << ", seed=" << seed << "\n";
    const qspec::Series series = qspec::gen_ar2(n, seed);

    std::vector<double> freqs(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        freqs[i] = std::numbers::pi * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    }
    std::vector<double> targets = {std::numbers::pi * 0.22, 2.0 * std::numbers::pi * 0.22,
                                   3.0 * std::numbers::pi * 0.22};
    std::vector<double> eval = freqs;
    eval.insert(eval.end(), targets.begin(), targets.end());
    std::sort(eval.begin(), eval.end());

    const qspec::LagWindowSpec spec(qspec::Kernel::quadratic_spectral,
                                    qspec::default_bandwidth(n, c));
    std::cerr << "smoothing (B_n=" << spec.bandwidth() << ")\n";
    const auto grid = qspec::FrequencyGrid::explicit_grid(eval);
    const auto est = qspec::smoothed_quantile_periodogram(series, qspec::Probability(0.5), spec, grid);

    qspec::MedianReference ref;
    ref.seed = seed;
    ref.n = n;
    ref.bandwidth_c = c;
    ref.tau = 0.5;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double lambda = grid.freq(i);
        bool is_target = false;
        for (double t : targets) {
            if (lambda == t) is_target = true;
        }
        if (is_target) {
            ref.targets.emplace_back(lambda, est.values[i]);
        } else {
            ref.freqs.push_back(lambda);
            ref.values.push_back(est.values[i]);
        }
    }
    qspec::save_median_reference(out_path, ref);
    std::cerr << "wrote " << out_path << "\n";
    return 0;
}
