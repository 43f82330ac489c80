#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qspec/pointwise.hpp"
#include "qspec/rng.hpp"
#include "qspec/simulate.hpp"

using namespace qspec;
using Catch::Approx;

TEST_CASE("chi-squared interval values", "[pointwise]") {
    const auto [lo, hi] = chi2_interval(1.0, 0, 0.05);
    CHECK(lo == Approx(2.0 / 7.377758908227871).epsilon(1e-9));
    CHECK(hi == Approx(2.0 / 0.05063561596857975).epsilon(1e-9));

    const auto degenerate = chi2_interval(0.0, 3, 0.1);
    CHECK(degenerate.first == 0.0);
    CHECK(degenerate.second == 0.0);

    CHECK_THROWS_AS(chi2_interval(-1.0, 0, 0.05), invalid_input);
    CHECK_THROWS_AS(chi2_interval(1.0, -1, 0.05), invalid_input);
    CHECK_THROWS_AS(chi2_interval(1.0, 0, 0.0), invalid_input);
}

TEST_CASE("interval contains the averaged ordinate and scales linearly", "[pointwise]") {
    CounterRng rng(3);
    for (int i = 0; i < 50; ++i) {
        const double qbar = 10.0 * rng.next_open01();
        const int k = static_cast<int>(rng.next_u64() % 7);
        const double alpha = 0.01 + 0.3 * rng.next_open01();
        const auto [lo, hi] = chi2_interval(qbar, k, alpha);
        CHECK(lo < qbar);
        CHECK(qbar < hi);
        const double c = 0.1 + 5.0 * rng.next_open01();
        const auto [clo, chi] = chi2_interval(c * qbar, k, alpha);
        CHECK(clo == Approx(c * lo).epsilon(1e-12));
        CHECK(chi == Approx(c * hi).epsilon(1e-12));
    }
}

TEST_CASE("frequency snapping", "[pointwise]") {
    for (std::size_t n : {100u, 600u, 601u}) {
        for (long j = 1; j < static_cast<long>(n) / 2; j += 13) {
            const double lambda = two_pi * static_cast<double>(j) / static_cast<double>(n);
            CHECK(snap_to_natural_index(n, lambda) == j);  // identity on the grid
        }
    }
    // round-half-up at midpoints
    CHECK(snap_to_natural_index(100, two_pi * 4.5 / 100.0) == 5);
    CHECK(snap_to_natural_index(100, two_pi * 4.4999 / 100.0) == 4);
}

TEST_CASE("averaged ordinate with k = 0 equals the periodogram ordinate", "[pointwise]") {
    const Series s = gen_iid(128, IidDist::uniform, 10);
    const double lambda = two_pi * 20.0 / 128.0;
    const double qbar = averaged_ordinates(s, Probability(0.5), lambda, 0);
    const auto grid = FrequencyGrid::natural_range(128, 20, 20);
    const auto est = quantile_periodogram(s, Probability(0.5), grid);
    CHECK(qbar == est.values[0]);
}

TEST_CASE("averaged ordinate over a window of exact zeros", "[pointwise]") {
    // repeating (1,2) pattern: the sample median is 1 and no value lies below
    // it, so all crossings equal +1/2 and every interior ordinate vanishes
    std::vector<double> x(16);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i % 2 == 0) ? 1.0 : 2.0;
    const Series s(x);
    const double lambda = two_pi * 4.0 / 16.0;
    const double qbar = averaged_ordinates(s, Probability(0.5), lambda, 2);
    CHECK(qbar == Approx(0.0).margin(1e-14));
}

TEST_CASE("boundary windows are rejected", "[pointwise]") {
    const Series s = gen_iid(64, IidDist::uniform, 11);
    const Probability tau(0.5);
    CHECK_THROWS_AS(averaged_ordinates(s, tau, 0.0, 0), boundary_error);
    CHECK_THROWS_AS(averaged_ordinates(s, tau, two_pi * 1.0 / 64.0, 1), boundary_error);
    CHECK_THROWS_AS(averaged_ordinates(s, tau, std::numbers::pi, 0), boundary_error);
    CHECK_THROWS_AS(averaged_ordinates(s, tau, std::numbers::pi * 31.8 / 32.0, 1), boundary_error);
    CHECK_NOTHROW(averaged_ordinates(s, tau, two_pi * 2.0 / 64.0, 1));
    CHECK_THROWS_AS(flatness_test_at_frequency(s, tau, 0.0, 0, 0.05), boundary_error);
}

TEST_CASE("flatness decision logic", "[pointwise]") {
    // statistic exactly at the flat value -> interval contains it -> accept
    const double null_value = 0.5 * 0.5 / two_pi;
    const auto accept = detail::flatness_report(null_value, null_value, 1.0, 1.0, 0.5, 4, 0.05);
    CHECK_FALSE(accept.reject);
    CHECK(accept.p_value > 0.05);

    // interval far away from the null -> reject
    const auto reject = detail::flatness_report(100.0 * null_value, null_value, 1.0, 1.0, 0.5, 4,
                                                0.05);
    CHECK(reject.reject);
    CHECK(reject.p_value <= 0.05);
}

TEST_CASE("p-value is consistent with the interval decision", "[pointwise]") {
    CounterRng rng(12);
    for (int i = 0; i < 200; ++i) {
        const double qbar = 5.0 * rng.next_open01();
        const double null_value = 5.0 * rng.next_open01();
        const int k = static_cast<int>(rng.next_u64() % 7);
        const double alpha = 0.01 + 0.4 * rng.next_open01();
        const auto rep = detail::flatness_report(qbar, null_value, 1.0, 1.0, 0.5, k, alpha);
        CHECK(rep.reject == (rep.p_value <= alpha));
        CHECK(rep.reject == !(null_value > rep.lower && null_value < rep.upper));
    }
}

TEST_CASE("fixed-frequency test finds the AR(2) peak", "[pointwise]") {
    const double lambda = two_pi * 0.22;
    int rejections = 0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
        const Series s = gen_ar2(600, derive_seed(5150, rep));
        const auto r = flatness_test_at_frequency(s, Probability(0.5), lambda, 4, 0.05);
        rejections += r.reject ? 1 : 0;
    }
    CHECK(rejections >= static_cast<int>(0.9 * reps));
}

TEST_CASE("confidence bands cover interior frequencies only", "[pointwise]") {
    const Series s = gen_ar2(100, 77);
    const auto crossings = estimated_crossings(s, Probability(0.5));
    const auto band = confidence_band_from_values(crossings.values, 100, 4, 0.05);
    CHECK(band.band.grid.j_index(0) == 5);
    CHECK(band.band.grid.j_index(band.band.grid.size() - 1) == 45);
    for (std::size_t i = 0; i < band.qbar.size(); ++i) {
        CHECK(band.band.lower[i] < band.qbar[i]);
        CHECK(band.qbar[i] < band.band.upper[i]);
    }
}
