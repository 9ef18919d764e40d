#include <doctest.h>

#include "lgc/diagnostics.hpp"
#include "lgc/errors.hpp"
#include "lgc/marginals.hpp"
#include "lgc/normal.hpp"
#include "lgc/rng.hpp"
#include "lgc/sampler.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace lgc;

namespace {
const MarginalSpec kPois2(Family::poisson, {2.0});
const LatentModel kAr1{{0.75}, {}};
}

TEST_CASE("pit histogram structure") {
    const auto x = simulate_counts(kPois2, kAr1, 300, 1);
    PitOptions opts;
    opts.particles = 200;
    const PitHistogram pit = pit_histogram(x, kPois2, kAr1, opts);
    REQUIRE(pit.heights.size() == 10);
    double s = 0.0;
    for (double h : pit.heights) {
        CHECK(h >= 0.0);
        s += h;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(pit.mean_pit_curve.front() == doctest::Approx(0.0));
    CHECK(pit.mean_pit_curve.back() == doctest::Approx(1.0).epsilon(1e-10));
    for (std::size_t i = 1; i < pit.mean_pit_curve.size(); ++i) {
        CHECK(pit.mean_pit_curve[i] >= pit.mean_pit_curve[i - 1] - 1e-14);
    }

    PitOptions one;
    one.bins = 1;
    one.particles = 50;
    const PitHistogram p1 = pit_histogram(x, kPois2, kAr1, one);
    REQUIRE(p1.heights.size() == 1);
    CHECK(p1.heights[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("white-noise pit depends only on the marginal cdf") {
    // two-valued data under a Bernoulli marginal: closed-form mean PIT
    const MarginalSpec bern(Family::binomial, {1, 0.5});
    const LatentModel wn{{}, {}};
    std::vector<std::int64_t> data;
    for (int i = 0; i < 40; ++i) data.push_back(i % 4 == 0 ? 1 : 0); // 10 ones, 30 zeros
    PitOptions opts;
    opts.bins = 10;
    opts.particles = 64;
    const PitHistogram pit = pit_histogram(data, bern, wn, opts);
    // F_t(u | 0) = min(2u, 1); F_t(u | 1) = max(0, 2u - 1); mean with weights 3/4, 1/4
    for (int h = 0; h <= 10; ++h) {
        const double u = h / 10.0;
        const double want = 0.75 * std::min(2.0 * u, 1.0) + 0.25 * std::max(0.0, 2.0 * u - 1.0);
        CHECK(pit.mean_pit_curve[static_cast<std::size_t>(h)] == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("pit flags a misspecified marginal") {
    // overdispersed data fit by a plain Poisson: U-shaped histogram
    const MarginalSpec nb(Family::negbinomial, {2.0, 0.6});
    const auto x = simulate_counts(nb, kAr1, 3000, 9);
    double mean = 0.0;
    for (auto v : x) mean += static_cast<double>(v);
    mean /= static_cast<double>(x.size());
    PitOptions opts;
    opts.particles = 300;
    const PitHistogram bad = pit_histogram(x, MarginalSpec(Family::poisson, {mean}), kAr1, opts);
    const double ends = bad.heights.front() + bad.heights.back();
    double mid = 0.0;
    for (std::size_t h = 4; h <= 5; ++h) mid += bad.heights[h];
    CHECK(ends > 1.6 * mid); // tails pile up when dispersion is understated
}

TEST_CASE("pit approaches uniformity under the true model") {
    PitOptions opts;
    opts.particles = 300;
    opts.seed = 3;
    double worst_small = 0.0, worst_big = 0.0;
    {
        const auto x = simulate_counts(kPois2, kAr1, 400, 21);
        const PitHistogram pit = pit_histogram(x, kPois2, kAr1, opts);
        for (double h : pit.heights) worst_small = std::max(worst_small, std::fabs(h - 0.1));
    }
    {
        const auto x = simulate_counts(kPois2, kAr1, 6000, 22);
        const PitHistogram pit = pit_histogram(x, kPois2, kAr1, opts);
        for (double h : pit.heights) worst_big = std::max(worst_big, std::fabs(h - 0.1));
    }
    CHECK(worst_big < worst_small);
    CHECK(worst_big < 0.03);
}

TEST_CASE("conditional latent mean closed forms") {
    const PreparedMarginal bern = prepare(MarginalSpec(Family::binomial, {1, 0.5}), 1);
    const double half_normal_mean = std::sqrt(2.0 / std::numbers::pi);
    CHECK(conditional_latent_mean(bern, 1) == doctest::Approx(half_normal_mean).epsilon(1e-12));
    CHECK(conditional_latent_mean(bern, 0) == doctest::Approx(-half_normal_mean).epsilon(1e-12));
}

TEST_CASE("conditional latent mean against constrained simulation") {
    // rejection-style oracle: draw (Z, X = G(Z)) forward, average Z within
    // each X cell, compare at 3 standard errors
    const PreparedMarginal pm = prepare(kPois2, 12);
    const CounterRng rng(246);
    const int n = 1000000;
    std::vector<double> sum(9, 0.0), sum2(9, 0.0);
    std::vector<int> cnt(9, 0);
    for (int i = 0; i < n; ++i) {
        const double z = norm_ppf(rng.uniform(streams::mc_generic, static_cast<std::uint64_t>(i)));
        const std::int64_t x = quantile(pm.table, std::clamp(norm_cdf(z), 1e-300, 1.0 - 1e-16));
        if (x < 9) {
            sum[static_cast<std::size_t>(x)] += z;
            sum2[static_cast<std::size_t>(x)] += z * z;
            ++cnt[static_cast<std::size_t>(x)];
        }
    }
    for (std::int64_t k = 0; k <= 3; ++k) {
        const double m = sum[static_cast<std::size_t>(k)] / cnt[static_cast<std::size_t>(k)];
        const double v = sum2[static_cast<std::size_t>(k)] / cnt[static_cast<std::size_t>(k)] - m * m;
        const double se = std::sqrt(v / cnt[static_cast<std::size_t>(k)]);
        CHECK(std::fabs(conditional_latent_mean(pm, k) - m) <= 3.0 * se);
    }
}

TEST_CASE("latent residuals") {
    const auto x = simulate_counts(kPois2, kAr1, 500, 77);
    const LatentResiduals res = latent_residuals(x, kPois2, kAr1);
    REQUIRE(res.zhat.size() == x.size());
    REQUIRE(res.eps.size() == x.size());
    // residuals of a white-noise fit depend on x_t alone
    const LatentModel wn{{}, {}};
    const LatentResiduals rw = latent_residuals(x, kPois2, wn);
    for (std::size_t t = 0; t < x.size(); ++t) {
        for (std::size_t s = t + 1; s < x.size(); ++s) {
            if (x[t] == x[s]) {
                CHECK(rw.zhat[t] == rw.zhat[s]);
                CHECK(rw.eps[t] == doctest::Approx(rw.eps[s]).epsilon(1e-12));
                break;
            }
        }
    }
    // under the fitted AR(1), prediction errors lose the lag-1 correlation
    const std::vector<double> acf_eps = sample_acf(std::span<const double>(res.eps), 1);
    CHECK(std::fabs(acf_eps[1]) < 0.1);
}

TEST_CASE("residual summaries") {
    const CounterRng rng(88);
    const int n = 2000;
    std::vector<double> iid(n);
    for (int i = 0; i < n; ++i) iid[static_cast<std::size_t>(i)] = norm_ppf(rng.uniform(1, static_cast<std::uint64_t>(i)));
    const ResidualSummary s = residual_summaries(iid);
    REQUIRE(s.acf.size() == 20);
    int outside = 0;
    for (double a : s.acf) {
        if (std::fabs(a) > s.band) ++outside;
    }
    CHECK(outside <= 3); // ~1 expected at the 5% level
    CHECK(std::fabs(s.skewness) < 0.2);
    CHECK(std::fabs(s.excess_kurtosis) < 0.4);

    // AR(1) input without whitening is flagged at lag one
    const LatentModel ar{{0.75}, {}};
    const std::vector<double> z = simulate_latent(ar, 400, 3);
    const ResidualSummary sz = residual_summaries(z);
    CHECK(sz.acf[0] > sz.band);
    // PACF of an AR(2) cuts off after lag 2
    const LatentModel ar2{{0.5, 0.3}, {}};
    const std::vector<double> z2 = simulate_latent(ar2, 5000, 4);
    const ResidualSummary s2 = residual_summaries(z2);
    CHECK(std::fabs(s2.pacf[0]) > 5.0 / std::sqrt(5000.0));
    CHECK(std::fabs(s2.pacf[1]) > 5.0 / std::sqrt(5000.0));
    double deep = 0.0;
    for (std::size_t h = 2; h < 6; ++h) deep = std::max(deep, std::fabs(s2.pacf[h]));
    CHECK(deep < 4.0 / std::sqrt(5000.0));

    std::vector<double> tiny(5, 0.0);
    CHECK_THROWS_AS(residual_summaries(tiny), data_error);
}
