#ifndef QSPEC_SERIES_HPP
#define QSPEC_SERIES_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qspec/errors.hpp"
#include "qspec/fft.hpp"

// Core data types of the toolkit: observed series, probability levels,
// quantile-crossing sequences and their autocovariances. Everything here is
// immutable after construction and safe to share across threads.

namespace qspec {

/// A probability level in the open interval (0,1).
class Probability {
  public:
    explicit Probability(double tau) : tau_(tau) {
        if (!(tau > 0.0 && tau < 1.0)) throw invalid_input("Probability: tau must lie strictly in (0,1)");
    }
    double value() const { return tau_; }

  private:
    double tau_;
};

/// An ordered sequence of finite real observations, length >= 2.
class Series {
  public:
    explicit Series(std::vector<double> values, std::string label = {})
        : values_(std::move(values)), label_(std::move(label)) {
        if (values_.size() < 2) throw invalid_input("Series: need at least 2 observations");
        for (double v : values_) {
            if (!std::isfinite(v)) throw invalid_input("Series: all values must be finite");
        }
    }

    const std::vector<double>& values() const { return values_; }
    std::span<const double> span() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::string& label() const { return label_; }

  private:
    std::vector<double> values_;
    std::string label_;
};

/// Quantile-crossing sequence: element t is tau - 1 when the observation lies
/// strictly below the threshold xi_hat, and tau otherwise.
struct CrossingSequence {
    Probability tau;
    double xi_hat;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

/// Crossing autocovariances r(j), j = 0..max_lag, divisor n.
struct AutoCovSequence {
    Probability tau;
    std::vector<double> r;  // indexed by lag

    std::size_t max_lag() const { return r.size() - 1; }
};

/// Sample quantile over a raw range: the smallest minimizer of the check-loss
/// sum x -> sum_t rho_tau(X_t - x), which is the order statistic of rank
/// ceil(n * tau). The smallest-minimizer convention matches the left-continuous
/// population quantile inf{x : F(x) >= tau}.
inline double sample_quantile(std::span<const double> values, Probability tau) {
    const std::size_t n = values.size();
    if (n == 0) throw invalid_input("sample_quantile: empty input");
    // ceil in extended precision so ranks are exact even when n*tau is integral.
    const long double prod = static_cast<long double>(n) * static_cast<long double>(tau.value());
    std::size_t rank = static_cast<std::size_t>(std::ceil(prod));
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    std::vector<double> work(values.begin(), values.end());
    std::nth_element(work.begin(), work.begin() + (rank - 1), work.end());
    return work[rank - 1];
}

inline double sample_quantile(const Series& series, Probability tau) {
    return sample_quantile(series.span(), tau);
}

/// Crossing indicators against an explicit threshold xi. The inequality is
/// strict: a value tied with xi does not count as a crossing.
inline CrossingSequence crossing_indicators(const Series& series, Probability tau, double xi) {
    std::vector<double> v(series.size());
    const double t = tau.value();
    for (std::size_t i = 0; i < series.size(); ++i) {
        v[i] = (series[i] < xi) ? t - 1.0 : t;
    }
    return CrossingSequence{tau, xi, std::move(v)};
}

/// Crossing indicators at the estimated sample quantile.
inline CrossingSequence estimated_crossings(const Series& series, Probability tau) {
    const double xi = sample_quantile(series, tau);
    return crossing_indicators(series, tau, xi);
}

/// Autocovariances of a crossing sequence with divisor n. Uses direct
/// summation for short sequences and an FFT pass otherwise; both paths agree
/// to well below 1e-10.
inline AutoCovSequence crossing_autocov(const CrossingSequence& crossings, std::size_t max_lag) {
    if (max_lag >= crossings.size()) throw invalid_input("crossing_autocov: max_lag must be < n");
    auto r = fft::autocovariance(crossings.values, max_lag, /*subtract_mean=*/false);
    return AutoCovSequence{crossings.tau, std::move(r)};
}

}  // namespace qspec

#endif  // QSPEC_SERIES_HPP
