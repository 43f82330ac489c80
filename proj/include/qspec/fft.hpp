#ifndef QSPEC_FFT_HPP
#define QSPEC_FFT_HPP

#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <vector>

#include "qspec/errors.hpp"

// Self-contained FFT machinery: an iterative radix-2 transform plus
// Bluestein's chirp-z algorithm for arbitrary lengths, and FFT-backed
// autocovariance with divisor n. Transforms are deterministic and accurate
// to ~1e-13 relative for the sizes used here.

namespace qspec::fft {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

namespace detail {

inline const std::vector<std::complex<double>>& twiddle_table(std::size_t m) {
    thread_local std::map<std::size_t, std::vector<std::complex<double>>> cache;
    auto& table = cache[m];
    if (table.empty() && m >= 2) {
        table.resize(m / 2);
        for (std::size_t k = 0; k < m / 2; ++k) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) /
                                 static_cast<double>(m);
            table[k] = std::complex<double>(std::cos(angle), std::sin(angle));
        }
    }
    return table;
}

}  // namespace detail

/// In-place forward radix-2 transform; size must be a power of two.
inline void transform_pow2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw invalid_input("transform_pow2: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const auto& tw = detail::twiddle_table(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> w = tw[k * stride];
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

/// In-place inverse radix-2 transform (includes the 1/n factor).
inline void inverse_pow2(std::vector<std::complex<double>>& a) {
    for (auto& z : a) z = std::conj(z);
    transform_pow2(a);
    const double scale = 1.0 / static_cast<double>(a.size());
    for (auto& z : a) z = std::conj(z) * scale;
}

/// Forward DFT of arbitrary length: X_k = sum_t x_t exp(-2*pi*i*t*k/n).
/// Radix-2 when the length is a power of two, Bluestein otherwise.
inline std::vector<std::complex<double>> dft(std::vector<std::complex<double>> x) {
    const std::size_t n = x.size();
    if (n == 0) throw invalid_input("dft: empty input");
    if ((n & (n - 1)) == 0) {
        transform_pow2(x);
        return x;
    }
    // Bluestein: chirp exponents are reduced mod 2n in integer arithmetic so
    // the trig arguments stay small for large t.
    const std::uint64_t two_n = 2ull * n;
    std::vector<std::complex<double>> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::uint64_t t = (static_cast<std::uint64_t>(k) * k) % two_n;
        const double angle = -std::numbers::pi * static_cast<double>(t) / static_cast<double>(n);
        chirp[k] = std::complex<double>(std::cos(angle), std::sin(angle));
    }
    const std::size_t m = next_pow2(2 * n + 1);
    std::vector<std::complex<double>> a(m), b(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
    transform_pow2(a);
    transform_pow2(b);
    for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
    inverse_pow2(a);
    std::vector<std::complex<double>> y(n);
    for (std::size_t k = 0; k < n; ++k) y[k] = a[k] * chirp[k];
    return y;
}

inline std::vector<std::complex<double>> real_dft(std::span<const double> x) {
    std::vector<std::complex<double>> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i];
    return dft(std::move(z));
}

/// Autocovariance r(j) = n^{-1} sum_{t=j+1}^{n} y_t y_{t-j} for j = 0..max_lag,
/// where y is x optionally centered at its sample mean. Note the divisor is n,
/// not n - j. Direct summation.
inline std::vector<double> autocovariance_direct(std::span<const double> x, std::size_t max_lag,
                                                 bool subtract_mean) {
    const std::size_t n = x.size();
    if (n == 0) throw invalid_input("autocovariance: empty input");
    if (max_lag >= n) throw invalid_input("autocovariance: max_lag must be < n");
    double mean = 0.0;
    if (subtract_mean) {
        for (double v : x) mean += v;
        mean /= static_cast<double>(n);
    }
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[t] = x[t] - mean;
    std::vector<double> r(max_lag + 1, 0.0);
    for (std::size_t j = 0; j <= max_lag; ++j) {
        double sum = 0.0;
        for (std::size_t t = j; t < n; ++t) sum += y[t] * y[t - j];
        r[j] = sum / static_cast<double>(n);
    }
    return r;
}

/// Same contract as autocovariance_direct, via one padded power-of-two FFT.
inline std::vector<double> autocovariance_fft(std::span<const double> x, std::size_t max_lag,
                                              bool subtract_mean) {
    const std::size_t n = x.size();
    if (n == 0) throw invalid_input("autocovariance: empty input");
    if (max_lag >= n) throw invalid_input("autocovariance: max_lag must be < n");
    double mean = 0.0;
    if (subtract_mean) {
        for (double v : x) mean += v;
        mean /= static_cast<double>(n);
    }
    const std::size_t m = next_pow2(n + max_lag + 1);
    std::vector<std::complex<double>> z(m);
    for (std::size_t t = 0; t < n; ++t) z[t] = x[t] - mean;
    transform_pow2(z);
    for (auto& c : z) c = std::complex<double>(std::norm(c), 0.0);
    inverse_pow2(z);
    std::vector<double> r(max_lag + 1);
    for (std::size_t j = 0; j <= max_lag; ++j) r[j] = z[j].real() / static_cast<double>(n);
    return r;
}

/// Dispatches between the direct and FFT paths on input size.
inline std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag,
                                          bool subtract_mean) {
    if (x.size() < 256) return autocovariance_direct(x, max_lag, subtract_mean);
    return autocovariance_fft(x, max_lag, subtract_mean);
}

}  // namespace qspec::fft

#endif  // QSPEC_FFT_HPP
