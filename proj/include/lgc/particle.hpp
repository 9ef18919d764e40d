#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lgc/arma.hpp"
#include "lgc/marginals.hpp"
#include "lgc/parallel.hpp"
#include "lgc/rng.hpp"

// Particle filters for the latent path conditional on the observed counts.
// Every particle trajectory satisfies the hard constraint that its transform
// reproduces the data: propagation draws are truncated normals on the latent
// interval of the observed count, so importance weights are the interval
// masses under the one-step predictive law.
//
// All randomness is drawn from a counter RNG keyed by (seed, stream, t, i);
// fixing the seed across objective evaluations gives common random numbers.

namespace lgc {

enum class FilterKind { sis, sisr, apf };

FilterKind filter_kind_from_name(const std::string& name);
std::string filter_kind_name(FilterKind kind);

struct FilterOptions {
    FilterKind kind = FilterKind::sisr;
    int particles = 1000;
    double ess_fraction = 0.5;  // resample when ESS < fraction * N (sisr only)
    std::uint64_t seed = 1;
    Exec exec = Exec::parallel;
    bool throw_on_impossible = true;  // otherwise loglik just becomes -inf
};

struct FilterResult {
    double loglik = 0.0;
    std::vector<double> ess;          // ESS after each assimilation, t = 0..T
    std::vector<double> step_loglik;  // incremental log-likelihood terms
    int resamples = 0;
};

/// Step-access filter.  Lifecycle:
///   ParticleFilter pf(data, marginals, dl, opts);
///   pf.init();                         // consumes x_0
///   while (!pf.done()) {
///     pf.predictions();                // optional: one-step state predictions
///     pf.predictive_cdf(y);            // optional: P(X_t <= y | history)
///     pf.assimilate();                 // consumes x_t
///   }
/// `marginals` holds either one entry (stationary) or T+1 entries.
class ParticleFilter {
public:
    ParticleFilter(std::span<const std::int64_t> data, const std::vector<PreparedMarginal>& marginals,
                   const DlCoeffs& dl, const FilterOptions& opts);

    void init();
    bool done() const { return t_next_ > t_end_; }
    int t_next() const { return t_next_; }

    /// One-step predictions zhat_{t_next}^i given each particle's history.
    std::span<const double> predictions();
    double prediction_sd() const;

    std::span<const double> log_weights() const { return logw_; }

    /// P(X_{t_next} <= y | history), the weighted mixture of interval masses.
    double predictive_cdf(std::int64_t y);

    /// Weighted mean of V(zhat_{t_next}^i): the filtering functional.
    double expectation(const std::function<double(double)>& v);

    void assimilate();

    double loglik() const { return loglik_; }
    double ess() const;
    FilterResult take_result();

private:
    const PreparedMarginal& marg(int t) const {
        return marginals_.size() == 1 ? marginals_[0] : marginals_[static_cast<std::size_t>(t)];
    }
    void compute_predictions();
    void resample(std::span<const double> probs_logw, std::uint64_t stream);

    std::span<const std::int64_t> data_;
    const std::vector<PreparedMarginal>& marginals_;
    const DlCoeffs& dl_;
    FilterOptions opts_;
    CounterRng rng_;

    int t_end_ = 0;
    int t_next_ = 0;
    int hist_len_ = 0;
    std::vector<double> hist_;      // N x hist_len ring buffer of past states
    std::vector<double> hist_alt_;  // resampling scratch
    std::vector<double> logw_;
    std::vector<double> zhat_;
    std::vector<double> lw_scratch_;
    std::vector<double> lwtot_scratch_;
    std::vector<double> cumw_scratch_;
    bool zhat_valid_ = false;
    double loglik_ = 0.0;
    FilterResult diag_;
};

/// Runs the filter over the whole series and returns the likelihood record.
FilterResult run_filter(std::span<const std::int64_t> data,
                        const std::vector<PreparedMarginal>& marginals, const DlCoeffs& dl,
                        const FilterOptions& opts);

/// Convenience: stationary marginal + latent model.
FilterResult run_filter(std::span<const std::int64_t> data, const MarginalSpec& spec,
                        const LatentModel& model, const FilterOptions& opts);

} // namespace lgc
