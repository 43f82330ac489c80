#ifndef QSPEC_CVM_HPP
#define QSPEC_CVM_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qspec/errors.hpp"
#include "qspec/parallel.hpp"
#include "qspec/rng.hpp"
#include "qspec/series.hpp"
#include "qspec/spectral.hpp"

// Cramer-von Mises tests for a flat quantile spectrum. The statistic is
// CM = (n / 2pi) * sum_{j=1}^{n-1} (r(j)/j)^2 over crossing autocovariances.
// Critical values come either from Monte Carlo draws of the statistic under
// independent Bernoulli crossings, or from a block-wise wild bootstrap that
// perturbs centered crossing products block by block.

namespace qspec {

/// Squared L2([0,pi]) norm of sin(j*lambda)/(pi*j): 1/(2*pi*j^2).
inline double psi_norm_sq(long j) {
    if (j < 1) throw invalid_input("psi_norm_sq: j must be >= 1");
    return 1.0 / (two_pi * static_cast<double>(j) * static_cast<double>(j));
}

namespace detail {

inline double cm_from_autocov(std::span<const double> r, std::size_t n) {
    double sum = 0.0;
    for (std::size_t j = 1; j < r.size(); ++j) {
        const double term = r[j] / static_cast<double>(j);
        sum += term * term;
    }
    return static_cast<double>(n) * sum / two_pi;
}

}  // namespace detail

/// CM statistic of an explicit crossing sequence, all lags 1..n-1.
inline double cm_from_crossings(const CrossingSequence& crossings) {
    const auto acov = crossing_autocov(crossings, crossings.size() - 1);
    return detail::cm_from_autocov(acov.r, crossings.size());
}

/// CM statistic with the quantile estimated from the sample.
inline double cm_statistic(const Series& series, Probability tau) {
    return cm_from_crossings(estimated_crossings(series, tau));
}

/// CM statistic with a known quantile xi0 (exact finite-sample null).
inline double cm_statistic_known_quantile(const Series& series, Probability tau, double xi0) {
    return cm_from_crossings(crossing_indicators(series, tau, xi0));
}

namespace detail {

/// One Monte Carlo null draw: CM of tau - J with J ~ iid Bernoulli(tau).
inline double cm_null_replicate(std::size_t n, double tau, CounterRng& rng) {
    std::vector<double> v(n);
    for (std::size_t t = 0; t < n; ++t) v[t] = tau - (draw_bernoulli(rng, tau) ? 1.0 : 0.0);
    const auto r = fft::autocovariance(v, n - 1, /*subtract_mean=*/false);
    return cm_from_autocov(r, n);
}

/// Block multipliers: one eta per complete block; a partial final block draws
/// its own multiplier.
inline std::vector<double> block_multipliers(std::size_t n, int block_size, CounterRng& rng,
                                             const std::function<double(CounterRng&)>& draw) {
    const std::size_t b = static_cast<std::size_t>(block_size);
    const std::size_t blocks = (n + b - 1) / b;
    std::vector<double> omega(n);
    for (std::size_t s = 0; s < blocks; ++s) {
        const double eta = draw(rng);
        const std::size_t lo = s * b;
        const std::size_t hi = std::min(n, lo + b);
        for (std::size_t t = lo; t < hi; ++t) omega[t] = eta;
    }
    return omega;
}

/// Shared per-sample state for bootstrap replicates: crossings, their
/// autocovariances, and the padded spectrum used by the FFT cross-correlation.
struct BootstrapWorkspace {
    std::vector<double> v;            // crossing values
    std::vector<double> r;            // autocovariances, divisor n
    std::size_t n = 0;
    bool use_fft = false;
    std::size_t m = 0;                // FFT length
    std::vector<std::complex<double>> v_spectrum_conj;

    explicit BootstrapWorkspace(const CrossingSequence& crossings)
        : v(crossings.values), n(crossings.size()) {
        r = fft::autocovariance(v, n - 1, /*subtract_mean=*/false);
        use_fft = n >= 256;
        if (use_fft) {
            m = fft::next_pow2(2 * n);
            std::vector<std::complex<double>> z(m);
            for (std::size_t t = 0; t < n; ++t) z[t] = v[t];
            fft::transform_pow2(z);
            for (auto& c : z) c = std::conj(c);
            v_spectrum_conj = std::move(z);
        }
    }

    /// CM* for one multiplier sequence omega.
    double replicate(std::span<const double> omega) const {
        // suffix sums of omega give sum_{t=j+1}^{n} omega_t
        std::vector<double> suffix(n + 1, 0.0);
        for (std::size_t t = n; t-- > 0;) suffix[t] = suffix[t + 1] + omega[t];
        std::vector<double> cross(n);  // sum_t omega_t v_t v_{t-j}
        if (use_fft) {
            std::vector<std::complex<double>> a(m);
            for (std::size_t t = 0; t < n; ++t) a[t] = omega[t] * v[t];
            fft::transform_pow2(a);
            for (std::size_t i = 0; i < m; ++i) a[i] *= v_spectrum_conj[i];
            fft::inverse_pow2(a);
            for (std::size_t j = 0; j < n; ++j) cross[j] = a[j].real();
        } else {
            for (std::size_t j = 0; j < n; ++j) {
                double sum = 0.0;
                for (std::size_t t = j; t < n; ++t) sum += omega[t] * v[t] * v[t - j];
                cross[j] = sum;
            }
        }
        double cm = 0.0;
        for (std::size_t j = 1; j < n; ++j) {
            const double rstar = (cross[j] - r[j] * suffix[j]) / static_cast<double>(n);
            const double term = rstar / static_cast<double>(j);
            cm += term * term;
        }
        return static_cast<double>(n) * cm / two_pi;
    }
};

/// Empirical 1-alpha critical value: the (R - floor(alpha R))-th order
/// statistic, the smallest x with at most floor(alpha R) draws above it.
inline double empirical_critical_value(std::vector<double> draws, double alpha) {
    const std::size_t R = draws.size();
    std::size_t above = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(R)));
    if (above >= R) above = R - 1;
    const std::size_t rank = R - above;  // 1-based
    std::nth_element(draws.begin(), draws.begin() + (rank - 1), draws.end());
    return draws[rank - 1];
}

inline double mc_p_value(std::span<const double> draws, double statistic) {
    std::size_t count = 0;
    for (double d : draws) {
        if (d >= statistic) ++count;
    }
    return static_cast<double>(count + 1) / static_cast<double>(draws.size() + 1);
}

}  // namespace detail

struct CvmResult {
    double statistic = 0.0;
    double critical_value = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool reject = false;
    enum class Procedure { monte_carlo, bootstrap } procedure = Procedure::monte_carlo;
    int replications = 0;
    std::optional<int> block_size;
    std::uint64_t seed = 0;
    double tau = 0.5;
    std::optional<double> known_quantile;
};

/// Monte Carlo flatness test: the observed CM statistic is compared with the
/// empirical 1-alpha quantile of R draws of the statistic computed from iid
/// Bernoulli(tau) crossings. When known_xi0 is supplied the statistic uses
/// those crossings directly, which makes the test exact in finite samples.
inline CvmResult mc_flatness_test(const Series& series, Probability tau, double alpha, int R,
                                  std::uint64_t seed, std::optional<double> known_xi0 = {},
                                  int threads = 1) {
    if (R < 99) throw invalid_input("mc_flatness_test: need at least 99 replications");
    if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_input("mc_flatness_test: alpha in (0,1)");
    const std::size_t n = series.size();
    const double statistic = known_xi0 ? cm_statistic_known_quantile(series, tau, *known_xi0)
                                       : cm_statistic(series, tau);
    std::vector<double> draws(R);
    parallel_for_indexed(static_cast<std::size_t>(R), threads, [&](std::size_t i) {
        CounterRng rng = CounterRng::substream(seed, i);
        draws[i] = detail::cm_null_replicate(n, tau.value(), rng);
    });
    const double crit = detail::empirical_critical_value(draws, alpha);
    CvmResult out;
    out.statistic = statistic;
    out.critical_value = crit;
    out.p_value = detail::mc_p_value(draws, statistic);
    out.alpha = alpha;
    out.reject = statistic > crit;
    out.procedure = CvmResult::Procedure::monte_carlo;
    out.replications = R;
    out.seed = seed;
    out.tau = tau.value();
    out.known_quantile = known_xi0;
    return out;
}

/// Block-wise wild bootstrap flatness test. Crossing products centered at the
/// sample autocovariances are perturbed with one multiplier per block of
/// block_size observations; when block_size does not divide n, the final
/// partial block receives its own multiplier.
inline CvmResult bootstrap_flatness_test(
    const Series& series, Probability tau, double alpha, int R, int block_size,
    std::uint64_t seed, std::function<double(CounterRng&)> multiplier = {},
    int threads = 1, std::optional<double> known_xi0 = {}) {
    const std::size_t n = series.size();
    if (R < 1) throw invalid_input("bootstrap_flatness_test: need at least 1 replication");
    if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_input("bootstrap_flatness_test: alpha in (0,1)");
    if (block_size < 1 || static_cast<std::size_t>(block_size) > n)
        throw invalid_input("bootstrap_flatness_test: block size must lie in [1, n]");
    if (!multiplier) multiplier = [](CounterRng& r) { return draw_rademacher(r); };

    const CrossingSequence crossings = known_xi0 ? crossing_indicators(series, tau, *known_xi0)
                                                 : estimated_crossings(series, tau);
    const detail::BootstrapWorkspace ws(crossings);
    const double statistic = detail::cm_from_autocov(ws.r, n);

    std::vector<double> draws(R);
    parallel_for_indexed(static_cast<std::size_t>(R), threads, [&](std::size_t i) {
        CounterRng rng = CounterRng::substream(seed, i);
        const auto omega = detail::block_multipliers(n, block_size, rng, multiplier);
        draws[i] = ws.replicate(omega);
    });
    const double crit = detail::empirical_critical_value(draws, alpha);
    CvmResult out;
    out.statistic = statistic;
    out.critical_value = crit;
    out.p_value = detail::mc_p_value(draws, statistic);
    out.alpha = alpha;
    out.reject = statistic > crit;
    out.procedure = CvmResult::Procedure::bootstrap;
    out.replications = R;
    out.block_size = block_size;
    out.seed = seed;
    out.tau = tau.value();
    out.known_quantile = known_xi0;
    return out;
}

/// Default bootstrap block size: blocks near sqrt(n)/2, with the tabulated
/// choices 5/8/10 at n = 100/200/300 and round(sqrt(n)/2) elsewhere.
inline int default_block_size(std::size_t n) {
    if (n == 200) return 8;
    if (n == 300) return 10;
    const double b = std::round(std::sqrt(static_cast<double>(n)) / 2.0);
    return std::max(1, static_cast<int>(b));
}

}  // namespace qspec

#endif  // QSPEC_CVM_HPP
