#include <catch_amalgamated.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <vector>

#include "qspec/cvm.hpp"
#include "qspec/simulate.hpp"

using namespace qspec;
using Catch::Approx;

namespace {

// fully independent CM oracle: sort-based quantile, explicit crossing loop,
// quadratic-time product sums
double cm_brute_force(const std::vector<double>& x, double tau, std::optional<double> xi0 = {}) {
    const std::size_t n = x.size();
    double xi;
    if (xi0) {
        xi = *xi0;
    } else {
        std::vector<double> sorted = x;
        std::sort(sorted.begin(), sorted.end());
        std::size_t rank = static_cast<std::size_t>(
            std::ceil(static_cast<long double>(n) * static_cast<long double>(tau)));
        rank = std::clamp<std::size_t>(rank, 1, n);
        xi = sorted[rank - 1];
    }
    std::vector<double> v(n);
    for (std::size_t t = 0; t < n; ++t) v[t] = (x[t] < xi) ? tau - 1.0 : tau;
    double total = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        double s = 0.0;
        for (std::size_t t = j; t < n; ++t) s += v[t] * v[t - j];
        total += s * s / (static_cast<double>(j) * static_cast<double>(j));
    }
    return total / (two_pi * static_cast<double>(n));
}

}  // namespace

TEST_CASE("psi norms", "[cvm]") {
    CHECK(psi_norm_sq(1) == Approx(1.0 / two_pi).epsilon(1e-14));
    CHECK(psi_norm_sq(2) == Approx(1.0 / (8.0 * std::numbers::pi)).epsilon(1e-14));
    CHECK_THROWS_AS(psi_norm_sq(0), invalid_input);

    double sum = 0.0;
    for (long j = 1000000; j >= 1; --j) sum += psi_norm_sq(j);
    CHECK(sum == Approx(std::numbers::pi / 12.0).margin(1e-6));
}

TEST_CASE("cm statistic on the three-point example", "[cvm]") {
    const Series s({1, 2, 3});
    const double expected = (3.0 / two_pi) * (1.0 / 24.0) * (1.0 / 24.0);
    CHECK(cm_statistic(s, Probability(0.5)) == Approx(expected).epsilon(1e-12));
    // xi0 equal to the sample quantile gives the identical crossing sequence
    CHECK(cm_statistic_known_quantile(s, Probability(0.5), 2.0) ==
          Approx(expected).epsilon(1e-12));
}

TEST_CASE("cm statistic vanishes when all autocovariances past lag zero do", "[cvm]") {
    CHECK(detail::cm_from_autocov(std::vector<double>{0.25, 0.0, 0.0, 0.0}, 4) == 0.0);
}

TEST_CASE("known-quantile statistic for a constant crossing sequence", "[cvm]") {
    const double tau = 0.3;
    const std::size_t n = 10;
    const Series s = gen_iid(n, IidDist::uniform, 8);
    // threshold below the minimum: every indicator equals tau
    const double got = cm_statistic_known_quantile(s, Probability(tau), -100.0);
    double expected = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        const double sum_products = tau * tau * static_cast<double>(n - j);
        expected += sum_products * sum_products / static_cast<double>(j * j);
    }
    expected /= two_pi * static_cast<double>(n);
    CHECK(got == Approx(expected).epsilon(1e-12));
}

TEST_CASE("cm statistic matches the brute-force oracle", "[cvm]") {
    CounterRng rng(606);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 4 + rng.next_u64() % 61;
        std::vector<double> x(n);
        for (auto& v : x) v = 10.0 * (rng.next_open01() - 0.5);
        const double tau = 0.1 + 0.8 * rng.next_open01();
        const double got = cm_statistic(Series(x), Probability(tau));
        CHECK(got == Approx(cm_brute_force(x, tau)).margin(1e-12));
        const double xi0 = x[rep % n];
        CHECK(cm_statistic_known_quantile(Series(x), Probability(tau), xi0) ==
              Approx(cm_brute_force(x, tau, xi0)).margin(1e-12));
    }
}

TEST_CASE("cm statistic is invariant under monotone transforms", "[cvm]") {
    const Series s = gen_iid(200, IidDist::normal, 9);
    std::vector<double> ex(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) ex[i] = std::exp(s[i]);
    CHECK(cm_statistic(s, Probability(0.5)) == cm_statistic(Series(ex), Probability(0.5)));
}

TEST_CASE("cm diverges under a peaked alternative", "[cvm]") {
    std::vector<double> cm100, cm400;
    for (int rep = 0; rep < 200; ++rep) {
        cm100.push_back(cm_statistic(gen_ar2(100, derive_seed(1000, rep)), Probability(0.5)));
        cm400.push_back(cm_statistic(gen_ar2(400, derive_seed(2000, rep)), Probability(0.5)));
    }
    std::nth_element(cm100.begin(), cm100.begin() + 100, cm100.end());
    std::nth_element(cm400.begin(), cm400.begin() + 100, cm400.end());
    CHECK(cm400[100] >= 4.0 * cm100[100]);
}

TEST_CASE("monte carlo test determinism and thread independence", "[cvm]") {
    const Series s = gen_iid(150, IidDist::chi2_3, 10);
    const auto a = mc_flatness_test(s, Probability(0.5), 0.05, 499, 42);
    const auto b = mc_flatness_test(s, Probability(0.5), 0.05, 499, 42);
    const auto c = mc_flatness_test(s, Probability(0.5), 0.05, 499, 42, {}, 4);
    CHECK(a.statistic == b.statistic);
    CHECK(a.critical_value == b.critical_value);
    CHECK(a.p_value == b.p_value);
    CHECK(a.critical_value == c.critical_value);
    CHECK(a.p_value == c.p_value);
    CHECK(a.reject == (a.statistic > a.critical_value));
    CHECK(a.p_value >= 1.0 / 500.0);
    CHECK(a.p_value <= 1.0);
    CHECK_THROWS_AS(mc_flatness_test(s, Probability(0.5), 0.05, 50, 1), invalid_input);
}

TEST_CASE("p-value is monotone in the statistic for fixed draws", "[cvm]") {
    std::vector<double> draws = {0.5, 1.0, 1.5, 2.0, 2.5};
    double prev = 2.0;
    for (double stat : {0.1, 0.7, 1.2, 1.7, 3.0}) {
        const double p = detail::mc_p_value(draws, stat);
        CHECK(p <= prev);
        prev = p;
    }
    CHECK(detail::mc_p_value(draws, 3.0) == Approx(1.0 / 6.0));
    CHECK(detail::mc_p_value(draws, 0.0) == Approx(1.0));
}

TEST_CASE("monte carlo test with a known quantile holds its level", "[cvm]") {
    // iid data with the true quantile supplied: the test is exact, so the
    // rejection rate matches alpha up to binomial noise even at tiny n
    const double alpha = 0.05;
    const int reps = 2000;
    int rejections = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const Series s = gen_iid(20, IidDist::uniform, derive_seed(33, rep));
        const auto r =
            mc_flatness_test(s, Probability(0.5), alpha, 999, derive_seed(34, rep), 0.5);
        rejections += r.reject ? 1 : 0;
    }
    const double rate = rejections / static_cast<double>(reps);
    const double se = std::sqrt(alpha * (1.0 - alpha) / reps);
    CHECK(std::fabs(rate - alpha) < 3.0 * se);
}

TEST_CASE("block multipliers", "[cvm]") {
    CounterRng rng(1);
    int counter = 0;
    auto sequential = [&counter](CounterRng&) { return static_cast<double>(++counter); };
    const auto omega6 = detail::block_multipliers(6, 3, rng, sequential);
    CHECK(omega6 == std::vector<double>{1, 1, 1, 2, 2, 2});
    counter = 0;
    const auto omega7 = detail::block_multipliers(7, 3, rng, sequential);
    CHECK(omega7 == std::vector<double>{1, 1, 1, 2, 2, 2, 3});  // partial block, own draw
}

TEST_CASE("bootstrap replicate matches a brute-force evaluation", "[cvm]") {
    for (std::size_t n : {60u, 300u}) {  // direct and FFT paths
        const Series s = gen_iid(n, IidDist::normal, 21);
        const auto crossings = estimated_crossings(s, Probability(0.3));
        const detail::BootstrapWorkspace ws(crossings);
        CounterRng rng(77);
        const auto omega = detail::block_multipliers(
            n, 7, rng, [](CounterRng& r) { return draw_rademacher(r); });

        double brute = 0.0;
        for (std::size_t j = 1; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t t = j; t < n; ++t) {
                sum += (ws.v[t] * ws.v[t - j] - ws.r[j]) * omega[t];
            }
            const double rstar = sum / static_cast<double>(n);
            brute += (rstar / static_cast<double>(j)) * (rstar / static_cast<double>(j));
        }
        brute *= static_cast<double>(n) / two_pi;
        CHECK(ws.replicate(omega) == Approx(brute).margin(1e-12));
    }
}

TEST_CASE("bootstrap autocovariance perturbations are conditionally centered", "[cvm]") {
    const std::size_t n = 100;
    const Series s = gen_iid(n, IidDist::uniform, 22);
    const auto crossings = estimated_crossings(s, Probability(0.3));
    const detail::BootstrapWorkspace ws(crossings);
    const int draws = 10000;
    for (std::size_t j : {1u, 2u, 5u}) {
        double sum = 0.0, sumsq = 0.0;
        for (int d = 0; d < draws; ++d) {
            CounterRng rng = CounterRng::substream(91, d);
            const auto omega = detail::block_multipliers(
                n, 10, rng, [](CounterRng& r) { return draw_rademacher(r); });
            double acc = 0.0;
            for (std::size_t t = j; t < n; ++t) {
                acc += (ws.v[t] * ws.v[t - j] - ws.r[j]) * omega[t];
            }
            const double rstar = acc / static_cast<double>(n);
            sum += rstar;
            sumsq += rstar * rstar;
        }
        const double mean = sum / draws;
        const double sd = std::sqrt(sumsq / draws - mean * mean);
        CHECK(std::fabs(mean) < 3.0 * sd / std::sqrt(static_cast<double>(draws)));
    }
}

TEST_CASE("bootstrap test determinism, validation and field contracts", "[cvm]") {
    const Series s = gen_iid(128, IidDist::chi2_3, 23);
    const auto a = bootstrap_flatness_test(s, Probability(0.5), 0.05, 399, 6, 7);
    const auto b = bootstrap_flatness_test(s, Probability(0.5), 0.05, 399, 6, 7);
    const auto c = bootstrap_flatness_test(s, Probability(0.5), 0.05, 399, 6, 7, {}, 4);
    CHECK(a.statistic == b.statistic);
    CHECK(a.critical_value == b.critical_value);
    CHECK(a.critical_value == c.critical_value);
    CHECK(a.p_value == c.p_value);
    CHECK(a.reject == (a.statistic > a.critical_value));
    CHECK(a.block_size.value() == 6);
    CHECK(a.procedure == CvmResult::Procedure::bootstrap);
    CHECK_THROWS_AS(bootstrap_flatness_test(s, Probability(0.5), 0.05, 99, 200, 7), invalid_input);
    CHECK_THROWS_AS(bootstrap_flatness_test(s, Probability(0.5), 0.05, 99, 0, 7), invalid_input);
    CHECK_NOTHROW(bootstrap_flatness_test(s, Probability(0.5), 0.05, 99, 128, 7));
}

TEST_CASE("empirical critical value convention", "[cvm]") {
    // with alpha (R+1) integral, reject <=> p <= alpha exactly
    std::vector<double> draws(999);
    for (std::size_t i = 0; i < draws.size(); ++i) draws[i] = static_cast<double>(i);
    const double crit = detail::empirical_critical_value(draws, 0.05);
    CHECK(crit == 949.0);  // 49 draws above
    CHECK(detail::mc_p_value(draws, 950.0) == Approx(0.05));
    CHECK(detail::mc_p_value(draws, 949.5) == Approx(0.05));
}

TEST_CASE("full-lag statistic is fast at n = 10^4", "[cvm]") {
    const Series s = gen_iid(10000, IidDist::normal, 55);
    const auto t0 = std::chrono::steady_clock::now();
    const double cm = cm_statistic(s, Probability(0.5));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(std::isfinite(cm));
    CHECK(cm >= 0.0);
    CHECK(seconds < 5.0);  // FFT-accelerated autocovariance pass
}

TEST_CASE("default block size rule", "[cvm]") {
    CHECK(default_block_size(100) == 5);   // round(sqrt(100)/2)
    CHECK(default_block_size(200) == 8);   // tabulated choice
    CHECK(default_block_size(300) == 10);  // tabulated choice
    CHECK(default_block_size(400) == 10);  // round(sqrt(400)/2)
    CHECK(default_block_size(4) == 1);
}
