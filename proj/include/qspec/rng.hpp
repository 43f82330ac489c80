#ifndef QSPEC_RNG_HPP
#define QSPEC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

#include "qspec/errors.hpp"
#include "qspec/special.hpp"

// Counter-based pseudo-random generation. Every draw is a pure function of
// (key, counter), so streams can be split by index and evaluated in parallel
// with bit-identical results on any platform. Variates are produced by
// inverse-CDF (or exact polar) transforms of the uniform stream; nothing here
// depends on implementation-defined std:: distributions.

namespace qspec {

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace detail

class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed)
        : key_(detail::mix64(seed + detail::kGolden)) {}

    /// Independent substream derived from (seed, index); used to give each
    /// replicate or sample path its own deterministic stream.
    static CounterRng substream(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next_u64() {
        counter_ += 1;
        return detail::mix64(key_ + counter_ * detail::kGolden);
    }

    /// Uniform on the open interval (0,1); safe to feed into inverse CDFs.
    double next_open01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Deterministic per-index seed derivation for splitting work across
/// replicates or sample paths.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return seed ^ detail::mix64(index + 0x632BE59BD9B4E019ull);
}

inline CounterRng CounterRng::substream(std::uint64_t seed, std::uint64_t index) {
    return CounterRng(derive_seed(seed, index));
}

inline double draw_normal(CounterRng& rng) { return normal_quantile(rng.next_open01()); }

inline double draw_uniform(CounterRng& rng) { return rng.next_open01(); }

inline double draw_cauchy(CounterRng& rng) {
    return std::tan(std::numbers::pi * (rng.next_open01() - 0.5));
}

/// Student t via Bailey's polar method: exact for any nu > 0 and a fixed
/// two-uniform cost per draw.
inline double draw_student_t(CounterRng& rng, double nu) {
    if (!(nu > 0.0)) throw invalid_input("draw_student_t: nu must be positive");
    const double u = rng.next_open01();
    const double v = rng.next_open01();
    const double radius = std::sqrt(nu * (std::pow(u, -2.0 / nu) - 1.0));
    return radius * std::cos(2.0 * std::numbers::pi * v);
}

inline double draw_chi2_3(CounterRng& rng) {
    const double a = draw_normal(rng);
    const double b = draw_normal(rng);
    const double c = draw_normal(rng);
    return a * a + b * b + c * c;
}

inline bool draw_bernoulli(CounterRng& rng, double p) { return rng.next_open01() < p; }

/// Rademacher multiplier (+1 or -1 with equal probability).
inline double draw_rademacher(CounterRng& rng) {
    return (rng.next_u64() & 1ull) ? 1.0 : -1.0;
}

}  // namespace qspec

#endif  // QSPEC_RNG_HPP
