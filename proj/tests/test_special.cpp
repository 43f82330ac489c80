#include <catch_amalgamated.hpp>

#include <cmath>

#include "qspec/special.hpp"

using namespace qspec;
using Catch::Approx;

TEST_CASE("normal quantile matches reference values", "[special]") {
    // reference values from an independent high-precision implementation
    CHECK(normal_quantile(0.975) == Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.0001) == Approx(-3.7190164854556804).epsilon(1e-12));
    CHECK(normal_quantile(1e-9) == Approx(-5.9978070150076865).epsilon(1e-12));
    CHECK(normal_quantile(0.31) == Approx(-0.4958503473474533).epsilon(1e-12));
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(0.2) == Approx(-normal_quantile(0.8)).margin(1e-15));
}

TEST_CASE("normal quantile inverts the normal CDF", "[special]") {
    for (double p : {1e-8, 1e-4, 0.01, 0.2, 0.5, 0.7, 0.99, 1.0 - 1e-6}) {
        CHECK(normal_cdf(normal_quantile(p)) == Approx(p).epsilon(1e-10));
    }
    CHECK_THROWS_AS(normal_quantile(0.0), invalid_input);
    CHECK_THROWS_AS(normal_quantile(1.0), invalid_input);
}

TEST_CASE("gamma_p agrees with erf at a = 1/2", "[special]") {
    for (double x : {0.1, 0.5, 1.0, 2.5, 7.0}) {
        CHECK(detail::gamma_p(0.5, x) == Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
    }
}

TEST_CASE("chi-squared quantiles match reference values", "[special]") {
    CHECK(chi2_quantile(2, 0.975) == Approx(7.377758908227871).margin(1e-8));
    CHECK(chi2_quantile(2, 0.025) == Approx(0.05063561596857975).margin(1e-8));
    CHECK(chi2_quantile(10, 0.95) == Approx(18.307038053275146).margin(1e-8));
    CHECK(chi2_quantile(18, 0.975) == Approx(31.526378440386626).margin(1e-8));
    CHECK(chi2_quantile(18, 0.025) == Approx(8.230746194756668).margin(1e-8));
}

TEST_CASE("chi-squared quantile inverts the CDF", "[special]") {
    for (int df : {1, 2, 5, 18, 50}) {
        for (double p : {0.001, 0.025, 0.5, 0.95, 0.999}) {
            const double x = chi2_quantile(df, p);
            CHECK(chi2_cdf(x, df) == Approx(p).margin(1e-10));
        }
    }
    CHECK_THROWS_AS(chi2_quantile(0, 0.5), invalid_input);
    CHECK_THROWS_AS(chi2_quantile(2, 0.0), invalid_input);
    CHECK_THROWS_AS(chi2_quantile(2, 1.0), invalid_input);
}

TEST_CASE("cached chi-squared quantiles equal direct evaluation", "[special]") {
    CHECK(chi2_quantile_cached(18, 0.975) == chi2_quantile(18, 0.975));
    CHECK(chi2_quantile_cached(18, 0.975) == chi2_quantile_cached(18, 0.975));
}

TEST_CASE("kolmogorov tail", "[special]") {
    CHECK(kolmogorov_tail(1.9494746035204051) == Approx(0.001).margin(1e-6));
    CHECK(kolmogorov_tail(0.0) == 1.0);
    CHECK(kolmogorov_tail(5.0) < 1e-12);
}
