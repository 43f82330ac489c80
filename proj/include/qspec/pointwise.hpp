#ifndef QSPEC_POINTWISE_HPP
#define QSPEC_POINTWISE_HPP

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qspec/errors.hpp"
#include "qspec/special.hpp"
#include "qspec/spectral.hpp"

// Pointwise inference from averaged periodogram ordinates: chi-squared
// confidence intervals and the fixed-frequency flatness test. The averaged
// ordinate over 2k+1 neighboring natural frequencies is asymptotically a
// scaled chi-squared with 4k+2 degrees of freedom.

namespace qspec {

struct ConfidenceBand {
    FrequencyGrid grid;
    std::vector<double> lower;
    std::vector<double> upper;
    double level = 0.95;
    int k = 0;
};

namespace detail {

// Natural index window [j0 - k, j0 + k]; every ordinate must sit strictly
// inside (0, pi).
inline void require_interior_window(std::size_t n, long j0, int k) {
    const long lo = j0 - k;
    const long hi = j0 + k;
    if (lo < 1 || 2 * hi >= static_cast<long>(n)) {
        throw boundary_error("ordinate window [" + std::to_string(lo) + "," + std::to_string(hi) +
                             "]*2pi/" + std::to_string(n) + " must lie strictly inside (0, pi)");
    }
}

inline double averaged_ordinate(std::span<const double> v, std::size_t n, long j0, int k) {
    require_interior_window(n, j0, k);
    const auto grid = FrequencyGrid::natural_range(n, j0 - k, j0 + k);
    const auto q = raw_periodogram(v, grid);
    double sum = 0.0;
    for (double x : q) sum += x;
    return sum / static_cast<double>(2 * k + 1);
}

}  // namespace detail

/// Mean of the 2k+1 quantile-periodogram ordinates centered at the natural
/// frequency nearest to lambda.
inline double averaged_ordinates(const Series& series, Probability tau, double lambda, int k) {
    if (k < 0) throw invalid_input("averaged_ordinates: k must be >= 0");
    const long j0 = snap_to_natural_index(series.size(), lambda);
    const auto crossings = estimated_crossings(series, tau);
    return detail::averaged_ordinate(crossings.values, series.size(), j0, k);
}

/// Classical counterpart (ordinates of the mean-centered periodogram).
inline double averaged_ordinates_classical(const Series& series, double lambda, int k) {
    if (k < 0) throw invalid_input("averaged_ordinates: k must be >= 0");
    const std::size_t n = series.size();
    const long j0 = snap_to_natural_index(n, lambda);
    double mean = 0.0;
    for (double v : series.values()) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> centered(n);
    for (std::size_t t = 0; t < n; ++t) centered[t] = series[t] - mean;
    return detail::averaged_ordinate(centered, n, j0, k);
}

/// Chi-squared interval for the spectrum from an averaged ordinate:
/// ( nu*qbar / chi2_{nu,1-a/2}, nu*qbar / chi2_{nu,a/2} ) with nu = 4k+2.
inline std::pair<double, double> chi2_interval(double qbar, int k, double alpha) {
    if (qbar < 0.0) throw invalid_input("chi2_interval: qbar must be nonnegative");
    if (k < 0) throw invalid_input("chi2_interval: k must be >= 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_input("chi2_interval: alpha must lie in (0,1)");
    const int nu = 4 * k + 2;
    const double hi_q = chi2_quantile_cached(nu, 1.0 - alpha / 2.0);
    const double lo_q = chi2_quantile_cached(nu, alpha / 2.0);
    return {nu * qbar / hi_q, nu * qbar / lo_q};
}

struct PointwiseTestReport {
    double lambda;          // requested frequency
    double lambda_snapped;  // natural frequency actually used
    double qbar;            // averaged ordinate (the test statistic)
    double lower, upper;    // confidence interval for the spectrum
    double null_value;      // flat-spectrum value tau(1-tau)/(2pi)
    double p_value;         // equal-tailed chi-squared p-value
    double alpha;
    int k;
    double tau;
    bool reject;
};

namespace detail {

inline PointwiseTestReport flatness_report(double qbar, double null_value, double lambda,
                                           double lambda_snapped, double tau, int k, double alpha) {
    const auto [lo, hi] = chi2_interval(qbar, k, alpha);
    const bool reject = !(null_value > lo && null_value < hi);
    const int nu = 4 * k + 2;
    // equal-tailed p-value of nu*qbar/null against chi2_nu; consistent with
    // the interval decision rule
    double p = 1.0;
    if (null_value > 0.0) {
        const double f = chi2_cdf(nu * qbar / null_value, nu);
        p = 2.0 * std::fmin(f, 1.0 - f);
    }
    return PointwiseTestReport{lambda, lambda_snapped, qbar, lo, hi, null_value, p,
                               alpha, k, tau, reject};
}

}  // namespace detail

/// Tests g_tau(lambda) = tau(1-tau)/(2pi) by checking whether the chi-squared
/// interval around the averaged ordinate excludes the flat value.
inline PointwiseTestReport flatness_test_at_frequency(const Series& series, Probability tau,
                                                      double lambda, int k, double alpha) {
    const std::size_t n = series.size();
    const long j0 = snap_to_natural_index(n, lambda);
    const double qbar = averaged_ordinates(series, tau, lambda, k);
    const double null_value = tau.value() * (1.0 - tau.value()) / two_pi;
    const double snapped = two_pi * static_cast<double>(j0) / static_cast<double>(n);
    return detail::flatness_report(qbar, null_value, lambda, snapped, tau.value(), k, alpha);
}

/// Pointwise band over all natural frequencies whose ordinate window fits
/// inside (0, pi). Returns the band together with the averaged ordinates.
struct BandResult {
    ConfidenceBand band;
    std::vector<double> qbar;
};

inline BandResult confidence_band_from_values(std::span<const double> v, std::size_t n, int k,
                                              double alpha) {
    const long j_min = 1 + k;
    const long j_max = (static_cast<long>(n) - 1) / 2 - k;
    if (j_max < j_min) throw boundary_error("confidence band: no interior window fits");
    const auto grid = FrequencyGrid::natural_range(n, j_min, j_max);
    std::vector<double> lower(grid.size()), upper(grid.size()), qbar(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double q = detail::averaged_ordinate(v, n, grid.j_index(i), k);
        const auto [lo, hi] = chi2_interval(q, k, alpha);
        qbar[i] = q;
        lower[i] = lo;
        upper[i] = hi;
    }
    return BandResult{ConfidenceBand{grid, std::move(lower), std::move(upper), 1.0 - alpha, k},
                      std::move(qbar)};
}

}  // namespace qspec

#endif  // QSPEC_POINTWISE_HPP
