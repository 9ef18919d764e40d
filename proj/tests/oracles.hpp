#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lgc/marginals.hpp"

// Independent test oracles: adaptive quadrature, dense-matrix Gaussian
// log-density, truncated-MVN rectangle probabilities for short series, and
// power-series reversion.  Deliberately share no code with the library paths
// they check (dense conditioning instead of Durbin-Levinson, Cholesky instead
// of innovations, series reversion instead of Newton).

namespace oracle {

/// Adaptive Simpson quadrature on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-10,
                 int max_depth = 40);

/// Dense multivariate normal log-density via Cholesky.
double dense_mvn_loglik(const std::vector<std::vector<double>>& cov, std::span<const double> mean,
                        std::span<const double> x);

/// P(X_0 = x_0, ..., X_T = x_T) for a stationary count model with latent
/// autocorrelation acvf, computed by nested adaptive quadrature over the
/// latent rectangle with dense conditional-normal factors.  Supports up to
/// three observations.
double rectangle_probability(const std::vector<std::int64_t>& data, const lgc::PreparedMarginal& pm,
                             const std::vector<double>& acvf, double tol = 1e-9);

/// Conditional expectation E[V(zhat_{t+1}) | X_0=x_0,...,X_t=x_t] for t <= 1
/// by quadrature over the constrained latent rectangle (AR(1) latent model).
double filtering_expectation_ar1(const std::vector<std::int64_t>& data,
                                 const lgc::PreparedMarginal& pm, double phi,
                                 const std::function<double(double)>& v);

/// First `order` coefficients of the inverse series of sum_k c_k u^k
/// (c_0 = 0 implied, c_1 != 0), by Lagrange-style recursive composition.
std::vector<double> revert_series(const std::vector<double>& c, int order);

} // namespace oracle
