#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lgc/arma.hpp"
#include "lgc/marginals.hpp"

// Count series generation: latent Gaussian path pushed through the marginal
// quantile, stationary or with covariate-driven time-varying parameters.

namespace lgc {

/// Log-link regression on one marginal parameter.  The driven parameter is
/// exp(beta_0 + sum_j beta_j M_{j,t}); the remaining family parameters stay
/// fixed.  link_param selects what the regression drives:
///   "mean"        GLM mean (poisson lambda, negbinomial mu, genpoisson mu,
///                 cmp lambda)
///   "dispersion"  the second GLM parameter (negbinomial k, genpoisson alpha,
///                 cmp nu), with the mean held in statics[0]
struct RegressionSpec {
    Family family = Family::poisson;
    std::vector<double> beta;                     // beta_0..beta_J
    std::vector<std::vector<double>> covariates;  // (T+1) rows x J columns
    std::vector<double> statics;                  // non-driven GLM parameters
    std::string link_param = "mean";

    std::size_t covariate_count() const { return beta.empty() ? 0 : beta.size() - 1; }
    void validate() const;
};

/// Marginal spec at each time; throws lgc::domain_error naming the first
/// offending t on overflow or out-of-domain parameters.
std::vector<MarginalSpec> theta_path(const RegressionSpec& reg);

/// Stationary draw x_0..x_T with marginal `spec` and latent `model`.
std::vector<std::int64_t> simulate_counts(const MarginalSpec& spec, const LatentModel& model,
                                          int T, std::uint64_t seed);

/// Covariate-driven draw; covariate rows must number T+1.
std::vector<std::int64_t> simulate_counts(const RegressionSpec& reg, const LatentModel& model,
                                          std::uint64_t seed);

/// Both counts and the latent path (debug output).
struct SimulatedSeries {
    std::vector<std::int64_t> x;
    std::vector<double> z;
};

SimulatedSeries simulate_series(const MarginalSpec& spec, const LatentModel& model, int T,
                                std::uint64_t seed);
SimulatedSeries simulate_series(const RegressionSpec& reg, const LatentModel& model,
                                std::uint64_t seed);

} // namespace lgc
