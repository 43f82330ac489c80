#ifndef QSPEC_SIMULATE_HPP
#define QSPEC_SIMULATE_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qspec/errors.hpp"
#include "qspec/rng.hpp"
#include "qspec/series.hpp"
#include "qspec/spectral.hpp"

// Seeded data-generating processes for the Monte Carlo studies: an AR(2) with
// a pronounced spectral peak, a stochastic-volatility model whose classical
// spectrum is flat, a quantile-autoregressive model, iid samples from several
// laws, and additive outlier contamination. Every generator is a pure
// function of its arguments, so identical inputs give bit-identical series.

namespace qspec {

inline double ar2_beta1() { return 2.0 * 0.95 * std::cos(two_pi * 0.22); }
inline double ar2_beta2() { return -0.95 * 0.95; }

/// Spectral density of the AR(2) with unit innovation variance:
/// (1/2pi) |1 - b1 e^{-i lambda} - b2 e^{-2 i lambda}|^{-2}.
inline double ar2_spectrum(double lambda) {
    const double b1 = ar2_beta1();
    const double b2 = ar2_beta2();
    const double re = 1.0 - b1 * std::cos(lambda) - b2 * std::cos(2.0 * lambda);
    const double im = b1 * std::sin(lambda) + b2 * std::sin(2.0 * lambda);
    return 1.0 / (two_pi * (re * re + im * im));
}

/// AR(2) with standard normal innovations, initialized by independent
/// standard normal values; the first burn_in observations are discarded.
inline Series gen_ar2(std::size_t n, std::uint64_t seed, std::size_t burn_in = 400) {
    if (n < 2) throw invalid_input("gen_ar2: n must be >= 2");
    CounterRng rng(seed);
    const double b1 = ar2_beta1();
    const double b2 = ar2_beta2();
    double prev2 = draw_normal(rng);
    double prev1 = draw_normal(rng);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t t = 0; t < burn_in + n; ++t) {
        const double x = b1 * prev1 + b2 * prev2 + draw_normal(rng);
        prev2 = prev1;
        prev1 = x;
        if (t >= burn_in) out.push_back(x);
    }
    return Series(std::move(out), "ar2");
}

/// Stochastic volatility: X_t = eps_t * exp(u_t) with
/// u_t = b1 u_{t-1} + b2 u_{t-2} + eps_{t-1} and eps ~ N(0, theta^2). The
/// volatility recursion is driven by the lagged innovation, so eps_t is
/// independent of u_t and the series has median zero.
inline Series gen_stochastic_volatility(std::size_t n, double theta, std::uint64_t seed,
                                        std::size_t burn_in = 400) {
    if (n < 2) throw invalid_input("gen_stochastic_volatility: n must be >= 2");
    if (!(theta > 0.0)) throw invalid_input("gen_stochastic_volatility: theta must be positive");
    CounterRng rng(seed);
    const double b1 = ar2_beta1();
    const double b2 = ar2_beta2();
    double u_prev2 = 0.0;
    double u_prev1 = 0.0;
    double eps_prev = theta * draw_normal(rng);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t t = 0; t < burn_in + n; ++t) {
        const double u = b1 * u_prev1 + b2 * u_prev2 + eps_prev;
        const double eps = theta * draw_normal(rng);
        if (t >= burn_in) out.push_back(eps * std::exp(u));
        u_prev2 = u_prev1;
        u_prev1 = u;
        eps_prev = eps;
    }
    return Series(std::move(out), "sv");
}

namespace detail {

/// QAR(2) recursion X_t = [4 + Phi^{-1}(e_t)] + 0.8*1{e_t > 0.2} X_{t-1}
///                       + 0.6*1{e_t > 0.6} X_{t-2}, e_t iid Uniform(0,1).
/// Returns the n post-burn-in values for a caller-supplied uniform source.
template <typename UniformSource>
std::vector<double> qar2_path(UniformSource&& next_uniform, std::size_t n, std::size_t burn_in) {
    double prev2 = 4.0;
    double prev1 = 4.0;
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t t = 0; t < burn_in + n; ++t) {
        const double e = next_uniform();
        const double x = (4.0 + normal_quantile(e)) + (e > 0.2 ? 0.8 * prev1 : 0.0) +
                         (e > 0.6 ? 0.6 * prev2 : 0.0);
        prev2 = prev1;
        prev1 = x;
        if (t >= burn_in) out.push_back(x);
    }
    return out;
}

}  // namespace detail

/// QAR(2) generator restricted to positive sample paths: a path with any
/// nonpositive post-burn-in value is discarded and redrawn, up to
/// max_attempts whole-path attempts.
inline Series gen_qar2(std::size_t n, std::uint64_t seed, int max_attempts = 100,
                       std::size_t burn_in = 400) {
    if (n < 2) throw invalid_input("gen_qar2: n must be >= 2");
    if (max_attempts < 1) throw invalid_input("gen_qar2: max_attempts must be >= 1");
    CounterRng rng(seed);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        auto path = detail::qar2_path([&rng]() { return draw_uniform(rng); }, n, burn_in);
        bool positive = true;
        for (double x : path) {
            if (!(x > 0.0)) { positive = false; break; }
        }
        if (positive) return Series(std::move(path), "qar2");
    }
    throw simulation_error("gen_qar2: no positive path in " + std::to_string(max_attempts) +
                           " attempts");
}

enum class IidDist { normal, chi2_3, uniform, student_t, cauchy };

/// iid draws; student_t takes its degrees of freedom from nu.
inline Series gen_iid(std::size_t n, IidDist dist, std::uint64_t seed, double nu = 3.0) {
    if (n < 2) throw invalid_input("gen_iid: n must be >= 2");
    CounterRng rng(seed);
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        switch (dist) {
            case IidDist::normal: out[t] = draw_normal(rng); break;
            case IidDist::chi2_3: out[t] = draw_chi2_3(rng); break;
            case IidDist::uniform: out[t] = draw_uniform(rng); break;
            case IidDist::student_t: out[t] = draw_student_t(rng, nu); break;
            case IidDist::cauchy: out[t] = draw_cauchy(rng); break;
        }
    }
    return Series(std::move(out), "iid");
}

struct ContaminationSpec {
    double p = 0.0;
    enum class Noise { student_t, cauchy } noise = Noise::student_t;
    double nu = 2.001;  // student_t only
    std::uint64_t seed = 0;
};

/// Additive outlier contamination: X_t + J_t Z_t with J_t ~ Bernoulli(p) and
/// Z_t from the configured noise law, independent of everything else.
inline Series contaminate(const Series& series, const ContaminationSpec& spec) {
    if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw invalid_input("contaminate: p must lie in [0,1]");
    CounterRng rng(spec.seed);
    std::vector<double> out(series.values());
    for (std::size_t t = 0; t < out.size(); ++t) {
        if (draw_bernoulli(rng, spec.p)) {
            const double z = (spec.noise == ContaminationSpec::Noise::cauchy)
                                 ? draw_cauchy(rng)
                                 : draw_student_t(rng, spec.nu);
            out[t] += z;
        }
    }
    return Series(std::move(out), series.label());
}

/// Classical spectrum of the t-contaminated AR(2): the base spectrum plus the
/// white shift (p / 2pi) * nu / (nu - 2).
inline double contaminated_ar2_spectrum(double lambda, double p, double nu) {
    if (!(nu > 2.0)) throw invalid_input("contaminated_ar2_spectrum: needs nu > 2");
    return ar2_spectrum(lambda) + p / two_pi * nu / (nu - 2.0);
}

struct ProcessSpec {
    enum class Kind { ar2, stochastic_volatility, qar2, iid } kind = Kind::ar2;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::size_t burn_in = 400;
    double theta = 1.0;                  // stochastic volatility
    IidDist dist = IidDist::normal;      // iid
    double nu = 3.0;                     // iid student_t
    int max_attempts = 100;              // qar2
};

inline Series generate(const ProcessSpec& spec) {
    switch (spec.kind) {
        case ProcessSpec::Kind::ar2: return gen_ar2(spec.n, spec.seed, spec.burn_in);
        case ProcessSpec::Kind::stochastic_volatility:
            return gen_stochastic_volatility(spec.n, spec.theta, spec.seed, spec.burn_in);
        case ProcessSpec::Kind::qar2:
            return gen_qar2(spec.n, spec.seed, spec.max_attempts, spec.burn_in);
        case ProcessSpec::Kind::iid: return gen_iid(spec.n, spec.dist, spec.seed, spec.nu);
    }
    throw invalid_input("generate: unknown process kind");
}

/// Process selector string: ar2 | sv | qar | iid:normal | iid:chi2_3 |
/// iid:uniform | iid:cauchy | iid:t:<nu>.
inline ProcessSpec parse_process(const std::string& text) {
    ProcessSpec spec;
    if (text == "ar2") {
        spec.kind = ProcessSpec::Kind::ar2;
    } else if (text == "sv") {
        spec.kind = ProcessSpec::Kind::stochastic_volatility;
    } else if (text == "qar") {
        spec.kind = ProcessSpec::Kind::qar2;
    } else if (text.rfind("iid:", 0) == 0) {
        spec.kind = ProcessSpec::Kind::iid;
        const std::string dist = text.substr(4);
        if (dist == "normal") spec.dist = IidDist::normal;
        else if (dist == "chi2_3") spec.dist = IidDist::chi2_3;
        else if (dist == "uniform") spec.dist = IidDist::uniform;
        else if (dist == "cauchy") spec.dist = IidDist::cauchy;
        else if (dist.rfind("t:", 0) == 0) {
            spec.dist = IidDist::student_t;
            try {
                spec.nu = std::stod(dist.substr(2));
            } catch (...) {
                throw invalid_input("parse_process: bad degrees of freedom in '" + text + "'");
            }
        } else {
            throw invalid_input("parse_process: unknown iid distribution '" + dist + "'");
        }
    } else {
        throw invalid_input("parse_process: unknown process '" + text + "'");
    }
    return spec;
}

}  // namespace qspec

#endif  // QSPEC_SIMULATE_HPP
