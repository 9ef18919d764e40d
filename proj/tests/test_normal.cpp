#include <doctest.h>

#include "lgc/errors.hpp"
#include "lgc/normal.hpp"

#include <cmath>

#include "oracles.hpp"

using namespace lgc;

TEST_CASE("norm_cdf matches table values") {
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
    CHECK(norm_cdf(-1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-12));
}

TEST_CASE("norm_ppf inverts norm_cdf across the range") {
    for (double p : {1e-300, 1e-12, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-12}) {
        const double z = norm_ppf(p);
        CHECK(norm_cdf(z) == doctest::Approx(p).epsilon(1e-9));
    }
    CHECK(norm_ppf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(norm_ppf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK_THROWS_AS(norm_ppf(0.0), domain_error);
    CHECK_THROWS_AS(norm_ppf(1.0), domain_error);
}

TEST_CASE("log_norm_sf agrees with direct evaluation and goes deep") {
    for (double x : {-3.0, 0.0, 2.0, 7.0}) {
        CHECK(log_norm_sf(x) == doctest::Approx(std::log(norm_sf(x))).epsilon(1e-12));
    }
    // Mills-ratio check at x = 40 (linear space underflows)
    const double l = log_norm_sf(40.0);
    const double mills = log_norm_pdf(40.0) - std::log(40.0);
    CHECK(l == doctest::Approx(mills).epsilon(1e-3));
    CHECK(norm_isf_log(l) == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(norm_isf_log(-1234.5) > 0.0);
    CHECK(log_norm_sf(norm_isf_log(-1234.5)) == doctest::Approx(-1234.5).epsilon(1e-10));
}

TEST_CASE("erfcx_pos branches agree where both apply") {
    for (double x : {10.5, 14.0, 20.0}) {
        CHECK(erfcx_pos(x) == doctest::Approx(std::exp(x * x) * std::erfc(x)).epsilon(1e-12));
    }
}

TEST_CASE("norm_cdf_diff avoids cancellation") {
    CHECK(norm_cdf_diff(-1.0, 1.0) == doctest::Approx(0.6826894921370859).epsilon(1e-12));
    // deep upper tail: compare against the oracle quadrature of the density
    const double direct = norm_cdf_diff(8.0, 9.0);
    const double quad = oracle::integrate([](double z) { return norm_pdf(z); }, 8.0, 9.0, 1e-22);
    CHECK(direct == doctest::Approx(quad).epsilon(1e-10));
    CHECK(log_norm_cdf_diff(8.0, 9.0) == doctest::Approx(std::log(quad)).epsilon(1e-10));
    // far beyond linear-space resolution: only the log form survives
    const double l = log_norm_cdf_diff(40.0, 41.0);
    CHECK(std::isfinite(l));
    CHECK(l < -700.0);
    CHECK(log_norm_cdf_diff(-41.0, -40.0) == doctest::Approx(l).epsilon(1e-12));
}

TEST_CASE("trunc_norm_draw basics") {
    const double inf = std::numeric_limits<double>::infinity();
    // untruncated case collapses to the plain quantile
    CHECK(trunc_norm_draw(-inf, inf, 0.3) == doctest::Approx(norm_ppf(0.3)).epsilon(1e-14));
    // half-normal median
    CHECK(trunc_norm_draw(0.0, inf, 0.5) == doctest::Approx(0.6744897501960817).epsilon(1e-10));
    // symmetric interval: u and 1-u give opposite draws
    const double a = trunc_norm_draw(-2.0, 2.0, 0.25);
    const double b = trunc_norm_draw(-2.0, 2.0, 0.75);
    CHECK(a == doctest::Approx(-b).epsilon(1e-12));
    // draws stay strictly inside
    for (double u : {0.001, 0.5, 0.999}) {
        const double z = trunc_norm_draw(1.5, 1.6, u);
        CHECK(z > 1.5);
        CHECK(z < 1.6);
    }
}

TEST_CASE("trunc_norm_draw deep in the tail stays ordered and inside") {
    double last = 12.0;
    for (double u : {0.05, 0.35, 0.65, 0.95}) {
        const double z = trunc_norm_draw(12.0, 13.0, u);
        CHECK(z > last);
        CHECK(z < 13.0);
        last = z;
    }
    // mirrored lower tail
    const double zu = trunc_norm_draw(12.0, 13.0, 0.3);
    const double zl = trunc_norm_draw(-13.0, -12.0, 0.7);
    CHECK(zl == doctest::Approx(-zu).epsilon(1e-12));
    // mass underflow raises
    CHECK_THROWS_AS(trunc_norm_draw(1e160, 2e160, 0.5), numerical_error);
}

TEST_CASE("trunc_norm_draw respects the conditional CDF") {
    // P(Z <= z | a < Z < b) = u  =>  Phi(z) = Phi(a) + u (Phi(b) - Phi(a))
    const double a = 0.7, b = 2.2, u = 0.42;
    const double z = trunc_norm_draw(a, b, u);
    const double implied = (norm_cdf(z) - norm_cdf(a)) / (norm_cdf(b) - norm_cdf(a));
    CHECK(implied == doctest::Approx(u).epsilon(1e-10));
}
