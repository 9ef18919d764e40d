#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lgc/arma.hpp"
#include "lgc/marginals.hpp"
#include "lgc/optim.hpp"
#include "lgc/particle.hpp"
#include "lgc/sampler.hpp"

// The three estimators: Gaussian pseudo-likelihood over the linked count
// covariance, implied Yule-Walker for latent autoregressions, and the
// particle-filter likelihood under common random numbers.  All share the
// unconstrained parametrization from optim.hpp, finite-difference standard
// errors, and the information criteria.

namespace lgc {

/// Sample autocorrelations rho_hat(0..max_lag), biased-divisor convention.
std::vector<double> sample_acf(std::span<const double> data, int max_lag);
std::vector<double> sample_acf(std::span<const std::int64_t> data, int max_lag);

/// Partial autocorrelations from an ACF (Durbin-Levinson diagonal).
std::vector<double> sample_pacf(std::span<const double> acf, int max_lag);

/// What gets fitted: marginal family, latent ARMA order, optional regression.
struct ModelSpec {
    Family family = Family::poisson;
    int p = 0;
    int q = 0;

    // Regression block (empty covariates = stationary fit).
    std::vector<std::vector<double>> covariates; // (T+1) rows x J columns
    std::string link_param = "mean";

    double binomial_n = 1;   // fixed, not estimated
    int mixture_m = 2;       // estimation supports the two-component mixture

    bool has_regression() const { return !covariates.empty(); }
};

struct FitResult {
    std::string method;  // "gl" | "iyw" | "pf"
    std::string family;
    int p = 0;
    int q = 0;
    bool regression = false;
    std::string link_param;

    std::vector<std::string> names;  // parameter names, estimation order
    std::vector<double> estimates;
    std::map<std::string, double> std_errors;  // empty when unavailable

    std::optional<double> loglik;
    std::optional<double> aic, aicc, bic;

    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
    std::vector<std::string> warnings;

    std::uint64_t seed = 0;
    int particles = 0;
    std::string filter;
    double binomial_n = 1;

    double value_of(const std::string& name) const;
    MarginalSpec marginal() const;           // stationary fits
    RegressionSpec regression_spec(std::vector<std::vector<double>> covariates) const;
    LatentModel latent() const;
};

struct EstimOptions {
    int link_order = 25;
    std::int64_t link_mc_paths = 1000000;  // Monte-Carlo size for L(-1)
    std::optional<std::vector<double>> start;  // natural-scale starting point
    NelderMeadOptions nm;
    // particle filter settings
    int particles = 1000;
    FilterKind filter = FilterKind::sisr;
    double ess_fraction = 0.5;
    std::uint64_t seed = 1;
    bool global_search = false;  // differential evolution on the noisy objective
    DifferentialEvolutionOptions de;
    bool std_errors = true;
    double fd_step = 1e-4;       // relative finite-difference step (GL); PF uses 10x
    Exec exec = Exec::parallel;
};

/// Maximum likelihood on the IID marginal, ignoring dependence.
MarginalSpec fit_marginal_mle(Family family, std::span<const std::int64_t> data,
                              double binomial_n = 1, int mixture_m = 2);

/// IID log-likelihood of the marginal.
double iid_loglik(const MarginalSpec& spec, std::span<const std::int64_t> data);

FitResult fit_gl(std::span<const std::int64_t> data, const ModelSpec& model,
                 const EstimOptions& opts = {});

/// Implied Yule-Walker; latent model restricted to AR(p), stationary only.
FitResult fit_iyw(std::span<const std::int64_t> data, Family family, int p,
                  const EstimOptions& opts = {});

FitResult fit_pf(std::span<const std::int64_t> data, const ModelSpec& model,
                 const EstimOptions& opts = {});

struct InfoCriteria {
    double aic = 0.0;
    double aicc = 0.0;
    double bic = 0.0;
};

/// n_obs = series length T+1, m = number of free parameters.
InfoCriteria information_criteria(double loglik, int m, int n_obs);

/// Finite-difference Hessian standard errors for a smooth log-likelihood
/// surface over the unconstrained space; returns an empty map (with a reason
/// appended to warnings) when the Hessian is not negative definite.
std::map<std::string, double> hessian_std_errors(const Objective& loglik_unconstrained,
                                                 const std::vector<double>& x_hat,
                                                 const ParamMap& map,
                                                 const std::vector<std::string>& names,
                                                 double rel_step,
                                                 std::vector<std::string>& warnings);

} // namespace lgc
