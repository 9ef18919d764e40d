#include <doctest.h>

#include "lgc/errors.hpp"
#include "lgc/estimation.hpp"
#include "lgc/link.hpp"
#include "lgc/rng.hpp"
#include "lgc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace lgc;

namespace {
const MarginalSpec kPois2(Family::poisson, {2.0});
}

TEST_CASE("sample_acf basics") {
    std::vector<double> alt{0, 1, 0, 1, 0, 1, 0, 1};
    const std::vector<double> r = sample_acf(std::span<const double>(alt), 2);
    CHECK(r[0] == 1.0);
    CHECK(r[1] < 0.0);

    // hand-computed 5-point example: x = (1, 3, 2, 5, 4), mean 3
    // num(1) = (1-3)(3-3)+(3-3)(2-3)+(2-3)(5-3)+(5-3)(4-3) = 0+0-2+2 = 0
    // denom  = 4+0+1+4+1 = 10
    std::vector<double> x{1, 3, 2, 5, 4};
    const std::vector<double> rx = sample_acf(std::span<const double>(x), 2);
    CHECK(rx[1] == doctest::Approx(0.0).epsilon(1e-14));
    // num(2) = (1-3)(2-3)+(3-3)(5-3)+(2-3)(4-3) = 2+0-1 = 1
    CHECK(rx[2] == doctest::Approx(0.1).epsilon(1e-12));

    std::vector<double> flat{2, 2, 2, 2};
    CHECK_THROWS_AS(sample_acf(std::span<const double>(flat), 1), data_error);
}

TEST_CASE("information criteria formulas") {
    const InfoCriteria c = information_criteria(-370.0, 4, 104);
    CHECK(c.aic == doctest::Approx(748.0));
    CHECK(c.bic == doctest::Approx(748.0 + 4.0 * std::log(104.0) - 8.0).epsilon(1e-12));
    CHECK(c.aicc == doctest::Approx(748.0 + 2.0 * 4.0 * 5.0 / (104.0 - 1.0 - 4.0)).epsilon(1e-12));
    // nested-model BIC difference identity
    const InfoCriteria big = information_criteria(-360.0, 6, 104);
    CHECK(big.bic - c.bic == doctest::Approx(-2.0 * 10.0 + 2.0 * std::log(104.0)).epsilon(1e-12));
}

TEST_CASE("marginal MLE recovers parameters") {
    const LatentModel wn{{}, {}};
    const auto x = simulate_counts(kPois2, wn, 5000, 77);
    const MarginalSpec pois_hat = fit_marginal_mle(Family::poisson, x);
    double mean = 0.0;
    for (auto v : x) mean += static_cast<double>(v);
    mean /= static_cast<double>(x.size());
    CHECK(pois_hat.params[0] == doctest::Approx(mean).epsilon(1e-12));

    const MarginalSpec nb(Family::negbinomial, {3.0, 0.4});
    const auto xnb = simulate_counts(nb, wn, 8000, 78);
    const MarginalSpec nb_hat = fit_marginal_mle(Family::negbinomial, xnb);
    CHECK(nb_hat.params[0] == doctest::Approx(3.0).epsilon(0.25));
    CHECK(nb_hat.params[1] == doctest::Approx(0.4).epsilon(0.15));

    // iid loglik at the MLE beats nearby parameter values
    const double at_hat = iid_loglik(nb_hat, xnb);
    CHECK(at_hat >= iid_loglik(MarginalSpec(Family::negbinomial, {nb_hat.params[0] * 1.1, nb_hat.params[1]}), xnb));
    CHECK(at_hat >= iid_loglik(MarginalSpec(Family::negbinomial, {nb_hat.params[0], std::min(0.99, nb_hat.params[1] * 1.1)}), xnb));
}

TEST_CASE("gl on iid poisson recovers the sample mean and is start-stable") {
    const LatentModel wn{{}, {}};
    const auto x = simulate_counts(kPois2, wn, 600, 5150);
    double mean = 0.0;
    for (auto v : x) mean += static_cast<double>(v);
    mean /= static_cast<double>(x.size());

    ModelSpec model;
    model.family = Family::poisson;
    EstimOptions opts;
    opts.std_errors = false;
    opts.nm.tol = 1e-10;
    const FitResult base = fit_gl(x, model, opts);
    CHECK(base.converged);
    CHECK(base.value_of("lambda") == doctest::Approx(mean).epsilon(0.02));

    // argmax stability: five dispersed starts land on the same optimum
    const CounterRng rng(9);
    for (int s = 0; s < 5; ++s) {
        EstimOptions o2 = opts;
        o2.start = std::vector<double>{mean * (0.4 + 1.6 * rng.uniform(1, s))};
        const FitResult r = fit_gl(x, model, o2);
        CHECK(r.value_of("lambda") == doctest::Approx(base.value_of("lambda")).epsilon(1e-6));
    }
}

TEST_CASE("gl loglik value matches a direct covariance evaluation") {
    // spot-check the objective assembly: white-noise Poisson, direct formula
    const LatentModel wn{{}, {}};
    const std::vector<std::int64_t> x{1, 3, 2, 0, 2, 4, 1, 2, 3, 2, 1, 0, 2, 5, 2, 1, 3, 2, 2, 1};
    ModelSpec model;
    model.family = Family::poisson;
    EstimOptions opts;
    opts.std_errors = false;
    const FitResult fr = fit_gl(x, model, opts);
    REQUIRE(fr.loglik.has_value());
    const double lam = fr.value_of("lambda");
    const LinkTable lt = link_table_fast(MarginalSpec(Family::poisson, {lam}));
    double want = 0.0;
    for (auto v : x) {
        const double d = static_cast<double>(v) - lt.mean;
        want += -0.5 * (d * d / lt.var0 + std::log(2.0 * std::numbers::pi * lt.var0));
    }
    CHECK(*fr.loglik == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("iyw on an AR(1) latent model") {
    const LatentModel ar1{{0.75}, {}};
    const auto x = simulate_counts(kPois2, ar1, 2000, 31);
    EstimOptions opts;
    opts.link_mc_paths = 200000;
    const FitResult fr = fit_iyw(x, Family::poisson, 1, opts);
    CHECK(fr.method == "iyw");
    CHECK_FALSE(fr.loglik.has_value());
    CHECK(fr.std_errors.empty());

    // phi_hat must equal the inverse link of the lag-1 sample ACF
    const std::vector<double> rho = sample_acf(x, 1);
    const MarginalSpec spec_hat = fit_marginal_mle(Family::poisson, x);
    const LinkTable lt = link_table(spec_hat, 25, 200000);
    const double want = link_inverse(lt, std::clamp(rho[1], *lt.l_minus1 + 1e-4, 1.0 - 1e-4));
    CHECK(fr.value_of("phi1") == doctest::Approx(want).epsilon(1e-9));
    CHECK(fr.value_of("phi1") == doctest::Approx(0.75).epsilon(0.12));
}

TEST_CASE("iyw bernoulli arcsine closed form") {
    const MarginalSpec bern(Family::binomial, {1, 0.5});
    const LatentModel ar1{{0.6}, {}};
    const auto x = simulate_counts(bern, ar1, 3000, 99);
    EstimOptions opts;
    opts.link_mc_paths = 200000;
    const FitResult fr = fit_iyw(x, Family::binomial, 1, opts);
    const std::vector<double> rho = sample_acf(x, 1);
    // arcsine link inverse: sin(pi rho / 2)
    CHECK(fr.value_of("phi1") ==
          doctest::Approx(std::sin(std::numbers::pi * rho[1] / 2.0)).epsilon(2e-3));
}

TEST_CASE("iyw is invariant to time reversal") {
    const LatentModel ar2{{0.5, 0.2}, {}};
    const auto x = simulate_counts(kPois2, ar2, 500, 17);
    std::vector<std::int64_t> rev(x.rbegin(), x.rend());
    EstimOptions opts;
    opts.link_mc_paths = 100000;
    const FitResult a = fit_iyw(x, Family::poisson, 2, opts);
    const FitResult b = fit_iyw(rev, Family::poisson, 2, opts);
    for (std::size_t i = 0; i < a.estimates.size(); ++i) {
        CHECK(a.estimates[i] == doctest::Approx(b.estimates[i]).epsilon(1e-12));
    }
}

TEST_CASE("iyw rejects non-AR requests") {
    const auto x = simulate_counts(kPois2, LatentModel{{0.5}, {}}, 100, 3);
    CHECK_THROWS_AS(fit_iyw(x, Family::poisson, 0, EstimOptions{}), config_error);
}

TEST_CASE("pf on iid data matches the exact iid mle") {
    const LatentModel wn{{}, {}};
    const auto x = simulate_counts(kPois2, wn, 300, 41);
    const MarginalSpec exact = fit_marginal_mle(Family::poisson, x);

    ModelSpec model;
    model.family = Family::poisson;
    EstimOptions opts;
    opts.particles = 64; // weights are deterministic for white noise
    opts.std_errors = false;
    const FitResult fr = fit_pf(x, model, opts);
    CHECK(fr.converged);
    CHECK(fr.value_of("lambda") == doctest::Approx(exact.params[0]).epsilon(1e-4));
    REQUIRE(fr.loglik.has_value());
    CHECK(*fr.loglik == doctest::Approx(iid_loglik(exact, x)).epsilon(1e-6));
}

TEST_CASE("pf recovers an AR(1) dependence parameter") {
    const LatentModel ar1{{0.75}, {}};
    const auto x = simulate_counts(kPois2, ar1, 400, 2025);
    ModelSpec model;
    model.family = Family::poisson;
    model.p = 1;
    EstimOptions opts;
    opts.particles = 300;
    opts.seed = 4;
    opts.std_errors = false;
    const FitResult fr = fit_pf(x, model, opts);
    CHECK(fr.converged);
    CHECK(fr.value_of("lambda") == doctest::Approx(2.0).epsilon(0.2));
    CHECK(fr.value_of("phi1") == doctest::Approx(0.75).epsilon(0.2));
    CHECK(fr.filter == "sisr");
    CHECK(fr.particles == 300);
}

TEST_CASE("pf objective is deterministic under common random numbers") {
    const LatentModel ar1{{0.6}, {}};
    const auto x = simulate_counts(kPois2, ar1, 120, 8);
    ModelSpec model;
    model.family = Family::poisson;
    model.p = 1;
    EstimOptions opts;
    opts.particles = 150;
    opts.seed = 99;
    opts.std_errors = false;
    opts.nm.max_iterations = 60;
    const FitResult a = fit_pf(x, model, opts);
    const FitResult b = fit_pf(x, model, opts);
    REQUIRE(a.estimates.size() == b.estimates.size());
    for (std::size_t i = 0; i < a.estimates.size(); ++i) {
        CHECK(a.estimates[i] == b.estimates[i]);
    }
    CHECK(*a.loglik == *b.loglik);
}

TEST_CASE("standard errors: quadratic objective has SE 1/sqrt(n)") {
    // loglik(mu) = -0.5 * n * (mu - m)^2  =>  -H = n, SE = 1/sqrt(n)
    const double n = 250.0, m = 1.3;
    const ParamMap map({ParamKind::identity}, 0, 0);
    Objective ll = [&](const std::vector<double>& x) {
        return -0.5 * n * (x[0] - m) * (x[0] - m);
    };
    std::vector<std::string> warn;
    const auto se = hessian_std_errors(ll, {m}, map, {"mu"}, 1e-4, warn);
    REQUIRE(se.count("mu") == 1);
    CHECK(se.at("mu") == doctest::Approx(1.0 / std::sqrt(n)).epsilon(1e-6));
    CHECK(warn.empty());
}

TEST_CASE("standard errors: iid poisson matches fisher information") {
    const LatentModel wn{{}, {}};
    const auto x = simulate_counts(MarginalSpec(Family::poisson, {4.0}), wn, 800, 123);
    ModelSpec model;
    model.family = Family::poisson;
    EstimOptions opts;
    const FitResult fr = fit_gl(x, model, opts);
    REQUIRE(fr.std_errors.count("lambda") == 1);
    const double want = std::sqrt(fr.value_of("lambda") / static_cast<double>(x.size()));
    CHECK(fr.std_errors.at("lambda") == doctest::Approx(want).epsilon(0.35));
}

TEST_CASE("non-concave surface yields no standard errors") {
    const ParamMap map({ParamKind::identity}, 0, 0);
    Objective ll = [](const std::vector<double>& x) { return x[0] * x[0]; }; // convex: wrong sign
    std::vector<std::string> warn;
    const auto se = hessian_std_errors(ll, {0.0}, map, {"a"}, 1e-4, warn);
    CHECK(se.empty());
    CHECK(!warn.empty());
}

TEST_CASE("regression gl and pf recover a binary covariate effect") {
    RegressionSpec truth;
    truth.family = Family::poisson;
    truth.beta = {std::log(2.0), 0.8};
    const int T = 300;
    truth.covariates.assign(static_cast<std::size_t>(T) + 1, {0.0});
    for (std::size_t t = 0; t < truth.covariates.size(); t += 2) truth.covariates[t][0] = 1.0;
    const LatentModel ar1{{0.5}, {}};
    const auto x = simulate_counts(truth, ar1, 4242);

    ModelSpec model;
    model.family = Family::poisson;
    model.p = 1;
    model.covariates = truth.covariates;
    EstimOptions opts;
    opts.particles = 200;
    opts.std_errors = false;
    const FitResult gl = fit_gl(x, model, opts);
    const FitResult pf = fit_pf(x, model, opts);
    for (const FitResult* fr : {&gl, &pf}) {
        CHECK(fr->converged);
        CHECK(fr->value_of("beta0") == doctest::Approx(std::log(2.0)).epsilon(0.25));
        CHECK(fr->value_of("beta1") == doctest::Approx(0.8).epsilon(0.3));
    }
    // reconstruction round trip through the result
    const RegressionSpec back = pf.regression_spec(truth.covariates);
    CHECK(back.beta.size() == 2);
    CHECK(back.family == Family::poisson);
}

TEST_CASE("fit result reconstruction") {
    const LatentModel ar1{{0.6}, {}};
    const auto x = simulate_counts(kPois2, ar1, 150, 5);
    ModelSpec model;
    model.family = Family::poisson;
    model.p = 1;
    EstimOptions opts;
    opts.particles = 100;
    opts.std_errors = false;
    opts.nm.max_iterations = 40;
    const FitResult fr = fit_pf(x, model, opts);
    const MarginalSpec spec = fr.marginal();
    CHECK(spec.family == Family::poisson);
    CHECK(spec.params[0] == doctest::Approx(fr.value_of("lambda")));
    const LatentModel lm = fr.latent();
    REQUIRE(lm.ar.size() == 1);
    CHECK(lm.ar[0] == doctest::Approx(fr.value_of("phi1")));
    CHECK_THROWS_AS(fr.value_of("nonexistent"), config_error);
}

TEST_CASE("global search settles near the crn optimum") {
    const LatentModel ar1{{0.6}, {}};
    const auto x = simulate_counts(kPois2, ar1, 120, 6);
    ModelSpec model;
    model.family = Family::poisson;
    model.p = 1;
    EstimOptions crn;
    crn.particles = 120;
    crn.std_errors = false;
    EstimOptions glob = crn;
    glob.global_search = true;
    glob.de.generations = 25;
    glob.de.population = 12;
    const FitResult a = fit_pf(x, model, crn);
    const FitResult b = fit_pf(x, model, glob);
    CHECK(a.value_of("lambda") == doctest::Approx(b.value_of("lambda")).epsilon(0.05));
    CHECK(a.value_of("phi1") == doctest::Approx(b.value_of("phi1")).epsilon(0.1));
}
