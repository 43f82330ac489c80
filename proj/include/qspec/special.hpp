#ifndef QSPEC_SPECIAL_HPP
#define QSPEC_SPECIAL_HPP

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <utility>

#include "qspec/errors.hpp"

// Special functions used across the toolkit: normal quantile/CDF, the
// regularized incomplete gamma function, chi-squared CDF and quantile, and
// the Kolmogorov tail probability.

namespace qspec {

/// Standard normal CDF.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// Standard normal quantile, Wichura's PPND16 rational approximation.
/// Absolute accuracy is near machine precision over (0, 1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw invalid_input("normal_quantile: p must lie in (0,1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
        const double den =
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
              4.2313330701600911252e+1) * r + 1.0);
        return q * num / den;
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        val = num / den;
    }
    return (q < 0.0) ? -val : val;
}

namespace detail {

// Regularized lower incomplete gamma P(a, x); series for x < a+1, Lentz
// continued fraction otherwise.
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw invalid_input("gamma_p: require x >= 0, a > 0");
    if (x == 0.0) return 0.0;
    const double lga = std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int i = 0; i < 1000; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lga);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lga) * h;
    return 1.0 - q;
}

}  // namespace detail

/// Chi-squared CDF with df degrees of freedom.
inline double chi2_cdf(double x, int df) {
    if (df <= 0) throw invalid_input("chi2_cdf: df must be positive");
    if (x <= 0.0) return 0.0;
    return detail::gamma_p(0.5 * df, 0.5 * x);
}

/// Chi-squared quantile. Newton iteration from the Wilson-Hilferty start,
/// with a bisection safeguard; absolute accuracy well below 1e-8.
inline double chi2_quantile(int df, double p) {
    if (df <= 0) throw invalid_input("chi2_quantile: df must be positive");
    if (!(p > 0.0 && p < 1.0)) throw invalid_input("chi2_quantile: p must lie in (0,1)");
    const double k = static_cast<double>(df);
    const double z = normal_quantile(p);
    double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    double x = (t > 0.0) ? k * t * t * t : 1e-8;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        const double f = chi2_cdf(x, df) - p;
        if (f > 0.0) hi = x; else lo = x;
        const double logpdf = -0.5 * x + (0.5 * k - 1.0) * std::log(x) -
                              0.5 * k * std::log(2.0) - std::lgamma(0.5 * k);
        const double pdf = std::exp(logpdf);
        double step = (pdf > 0.0) ? f / pdf : 0.0;
        double next = x - step;
        if (!(next > lo && (next < hi))) {
            next = std::isinf(hi) ? x * 2.0 : 0.5 * (lo + hi);
        }
        if (std::fabs(next - x) < 1e-12 * (1.0 + std::fabs(x))) { x = next; break; }
        x = next;
    }
    return x;
}

/// chi2_quantile with a process-wide cache keyed on (df, p). Thread-safe.
inline double chi2_quantile_cached(int df, double p) {
    static std::mutex mu;
    static std::map<std::pair<int, double>, double> cache;
    const std::pair<int, double> key{df, p};
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    const double v = chi2_quantile(df, p);
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, v);
    return v;
}

/// P(sup |B(t)| > x) for the Brownian bridge: the Kolmogorov tail
/// 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
inline double kolmogorov_tail(double x) {
    if (x <= 0.0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::fmin(1.0, std::fmax(0.0, sum));
}

}  // namespace qspec

#endif  // QSPEC_SPECIAL_HPP
