#ifndef QSPEC_WINDOWS_HPP
#define QSPEC_WINDOWS_HPP

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "qspec/errors.hpp"

// Lag windows for kernel-smoothed spectral estimates. All built-in kernels
// are even with w(0) = 1. Bartlett, Parzen and Tukey-Hanning vanish outside
// [-1,1]; Daniell and the quadratic-spectral (QS) window have unbounded
// support and are truncated at lag 50 * bandwidth, where their envelopes make
// the discarded tail negligible for stochastic inputs.

namespace qspec {

enum class Kernel { bartlett, parzen, tukey_hanning, daniell, quadratic_spectral, custom };

/// User-supplied lag window. support_radius = 0 means unbounded support.
struct CustomWindow {
    std::function<double(double)> fn;
    double support_radius = 1.0;
    bool lipschitz = true;
    std::string name = "custom";
};

namespace detail {

inline double bartlett_w(double x) {
    const double a = std::fabs(x);
    return a >= 1.0 ? 0.0 : 1.0 - a;
}

inline double parzen_w(double x) {
    const double a = std::fabs(x);
    if (a <= 0.5) return 1.0 - 6.0 * a * a + 6.0 * a * a * a;
    if (a <= 1.0) {
        const double b = 1.0 - a;
        return 2.0 * b * b * b;
    }
    return 0.0;
}

inline double tukey_hanning_w(double x) {
    const double a = std::fabs(x);
    return a > 1.0 ? 0.0 : 0.5 * (1.0 + std::cos(std::numbers::pi * a));
}

inline double daniell_w(double x) {
    const double y = std::numbers::pi * x;
    if (std::fabs(y) < 1e-4) {
        const double y2 = y * y;
        return 1.0 - y2 / 6.0 + y2 * y2 / 120.0;
    }
    return std::sin(y) / y;
}

inline double quadratic_spectral_w(double x) {
    const double y = 1.2 * std::numbers::pi * x;  // 6*pi*x/5
    if (std::fabs(y) < 1e-3) {
        // series around the removable singularity at x = 0
        const double y2 = y * y;
        return 1.0 - y2 / 10.0 + y2 * y2 / 280.0;
    }
    return (25.0 / (12.0 * std::numbers::pi * std::numbers::pi * x * x)) *
           (std::sin(y) / y - std::cos(y));
}

}  // namespace detail

/// A lag window w together with its bandwidth B_n.
class LagWindowSpec {
  public:
    LagWindowSpec(Kernel kernel, double bandwidth) : kernel_(kernel), bandwidth_(bandwidth) {
        if (kernel == Kernel::custom) throw invalid_input("LagWindowSpec: use the custom() factory");
        validate();
    }

    static LagWindowSpec custom(CustomWindow window, double bandwidth) {
        LagWindowSpec spec(bandwidth);
        spec.kernel_ = Kernel::custom;
        spec.custom_ = std::move(window);
        spec.validate();
        return spec;
    }

    Kernel kernel() const { return kernel_; }
    double bandwidth() const { return bandwidth_; }

    /// w(x).
    double value(double x) const {
        switch (kernel_) {
            case Kernel::bartlett: return detail::bartlett_w(x);
            case Kernel::parzen: return detail::parzen_w(x);
            case Kernel::tukey_hanning: return detail::tukey_hanning_w(x);
            case Kernel::daniell: return detail::daniell_w(x);
            case Kernel::quadratic_spectral: return detail::quadratic_spectral_w(x);
            case Kernel::custom: return custom_->fn(x);
        }
        return 0.0;
    }

    /// Radius of the support region; 0 means unbounded.
    double support_radius() const {
        switch (kernel_) {
            case Kernel::bartlett:
            case Kernel::parzen:
            case Kernel::tukey_hanning: return 1.0;
            case Kernel::daniell:
            case Kernel::quadratic_spectral: return 0.0;
            case Kernel::custom: return custom_->support_radius;
        }
        return 0.0;
    }

    /// True when the window is Lipschitz with support exactly [-1,1], the
    /// admissibility condition for the split-sample estimator.
    bool lipschitz_unit_support() const {
        switch (kernel_) {
            case Kernel::bartlett:
            case Kernel::parzen:
            case Kernel::tukey_hanning: return true;
            case Kernel::daniell:
            case Kernel::quadratic_spectral: return false;
            case Kernel::custom: return custom_->lipschitz && custom_->support_radius == 1.0;
        }
        return false;
    }

    /// Largest lag with a potentially nonzero weight, capped at n - 1.
    std::size_t lag_limit(std::size_t n) const {
        const double radius = support_radius();
        const double span = (radius > 0.0) ? bandwidth_ * radius : bandwidth_ * 50.0;
        const double capped = std::fmin(span, static_cast<double>(n - 1));
        return static_cast<std::size_t>(std::ceil(capped));
    }

    /// Integral of w(x)^2 over [-1,1] (adaptive Simpson). For the unit-support
    /// kernels this is the full squared norm that enters the split-sample
    /// asymptotic variance.
    double l2_norm_sq_unit() const {
        return simpson(-1.0, 0.0) + simpson(0.0, 1.0);
    }

    std::string name() const {
        switch (kernel_) {
            case Kernel::bartlett: return "bartlett";
            case Kernel::parzen: return "parzen";
            case Kernel::tukey_hanning: return "tukey_hanning";
            case Kernel::daniell: return "daniell";
            case Kernel::quadratic_spectral: return "quadratic_spectral";
            case Kernel::custom: return custom_->name;
        }
        return "?";
    }

  private:
    explicit LagWindowSpec(double bandwidth) : kernel_(Kernel::custom), bandwidth_(bandwidth) {}

    void validate() const {
        if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_))
            throw invalid_input("LagWindowSpec: bandwidth must be positive and finite");
        if (kernel_ == Kernel::custom && !custom_->fn)
            throw invalid_input("LagWindowSpec: custom window needs a callable");
    }

    double simpson(double a, double b, int depth = 0) const {
        const double m = 0.5 * (a + b);
        const double fa = sq(value(a)), fb = sq(value(b)), fm = sq(value(m));
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = sq(value(lm)), frm = sq(value(rm));
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if (depth > 24 || std::fabs(left + right - whole) < 1e-13) return left + right;
        return simpson(a, m, depth + 1) + simpson(m, b, depth + 1);
    }

    static double sq(double v) { return v * v; }

    Kernel kernel_;
    double bandwidth_;
    std::optional<CustomWindow> custom_;
};

inline double window_value(const LagWindowSpec& spec, double x) { return spec.value(x); }

inline Kernel kernel_from_name(const std::string& name) {
    if (name == "bartlett") return Kernel::bartlett;
    if (name == "parzen") return Kernel::parzen;
    if (name == "tukey_hanning" || name == "tukey-hanning") return Kernel::tukey_hanning;
    if (name == "daniell") return Kernel::daniell;
    if (name == "quadratic_spectral" || name == "qs") return Kernel::quadratic_spectral;
    throw invalid_input("unknown kernel '" + name + "'");
}

/// Default bandwidth rule B_n = c * n^{1/5}.
inline double default_bandwidth(std::size_t n, double c = 13.0) {
    return c * std::pow(static_cast<double>(n), 0.2);
}

}  // namespace qspec

#endif  // QSPEC_WINDOWS_HPP
