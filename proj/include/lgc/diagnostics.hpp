#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lgc/arma.hpp"
#include "lgc/marginals.hpp"
#include "lgc/particle.hpp"

// Model diagnostics: non-randomized PIT histograms from the filter's
// predictive distributions, conditional-mean latent residuals, and residual
// whiteness summaries.

namespace lgc {

struct PitHistogram {
    int bins = 10;
    std::vector<double> heights;         // bins entries, sum to 1
    std::vector<double> mean_pit_curve;  // Fbar(h/H) for h = 0..H
};

struct PitOptions {
    int bins = 10;
    FilterKind kind = FilterKind::sisr;
    int particles = 1000;
    double ess_fraction = 0.5;
    std::uint64_t seed = 7;
    Exec exec = Exec::parallel;
};

/// Mean PIT histogram of `data` under the fitted model.  The predictive CDF
/// at t = 0 is the marginal CDF (empty conditioning set).
PitHistogram pit_histogram(std::span<const std::int64_t> data,
                           const std::vector<PreparedMarginal>& marginals, const DlCoeffs& dl,
                           const PitOptions& opts);

PitHistogram pit_histogram(std::span<const std::int64_t> data, const MarginalSpec& spec,
                           const LatentModel& model, const PitOptions& opts);

struct LatentResiduals {
    std::vector<double> zhat;  // E[Z_t | X_t = x_t]
    std::vector<double> eps;   // zhat centered and whitened by the fitted model's prediction
};

/// Conditional-mean residuals and their one-step prediction errors under the
/// fitted latent model.
LatentResiduals latent_residuals(std::span<const std::int64_t> data, const MarginalSpec& spec,
                                 const LatentModel& model);

/// E[Z | X = x] for a single count (the residual formula).
double conditional_latent_mean(const PreparedMarginal& pm, std::int64_t x);

struct ResidualSummary {
    std::vector<double> acf;    // lags 1..max_lag
    std::vector<double> pacf;   // lags 1..max_lag
    double band = 0.0;          // +-1.96/sqrt(n)
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double jarque_bera = 0.0;   // n(skew^2/6 + kurt^2/24)
};

ResidualSummary residual_summaries(std::span<const double> residuals, int max_lag = 20);

} // namespace lgc
