#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Count marginal distribution families and their probability machinery.
// A MarginalSpec is the family tag plus the canonical parameter vector;
// CumTable caches mass and cumulative probabilities up to the index where
// the cumulative value is numerically one.

namespace lgc {

enum class Family {
    binomial,
    poisson,
    mixpoisson,
    negbinomial,
    genpoisson,
    cmp,
};

/// Lowercase serialized name ("poisson", "negbinomial", ...).
std::string family_name(Family f);
Family family_from_name(const std::string& name);

/// Canonical parameter layouts:
///   binomial     (N, p)                       N >= 1 integer, p in (0,1)
///   poisson      (lambda)                     lambda > 0
///   mixpoisson   (lambda_1..lambda_M, p_1..p_{M-1})
///   negbinomial  (r, p)                       r > 0, p in (0,1)
///   genpoisson   (lambda, eta)                lambda > 0, eta in [0,1)
///   cmp          (lambda, nu)                 lambda > 0, nu > 0
struct MarginalSpec {
    Family family = Family::poisson;
    std::vector<double> params;

    MarginalSpec() = default;
    MarginalSpec(Family f, std::vector<double> p) : family(f), params(std::move(p)) {}

    /// Throws lgc::domain_error when parameters leave the family's domain.
    void validate() const;

    std::size_t mixture_components() const;
};

/// Cumulative probability table.  cutoff is the smallest n whose cumulative
/// probability equals 1 in double rounding; probs/cums hold indices
/// 0..cutoff-1.  tails[n] = 1 - C_n kept to full relative accuracy, since
/// Phi^{-1}(C_n) near 1 is much better computed from the tail.
struct CumTable {
    std::vector<double> probs;
    std::vector<double> cums;
    std::vector<double> tails;
    std::int64_t cutoff = 0;

    double cdf_at(std::int64_t k) const {
        if (k < 0) return 0.0;
        if (k >= cutoff) return 1.0;
        return cums[static_cast<std::size_t>(k)];
    }
};

/// Phi^{-1}(C_n) for each table row, computed from the high-accuracy tails
/// when C_n > 1/2.  lower(x)/upper(x) bound the latent interval mapping to
/// count x.
struct CountThresholds {
    std::vector<double> q;
    std::int64_t cutoff = 0;

    double lower(std::int64_t x) const;
    double upper(std::int64_t x) const;
};

CountThresholds thresholds(const CumTable& table);

/// Spec with its table and thresholds built once; what samplers and filters
/// carry around.
struct PreparedMarginal {
    MarginalSpec spec;
    CumTable table;
    CountThresholds thr;
};

PreparedMarginal prepare(const MarginalSpec& spec);

/// prepare() plus threshold extension through x_max.  Table rows stop where
/// the cumulative probability reaches 1 in doubles, but observed counts can
/// sit beyond that point (misspecified parameters during optimization); the
/// extension keeps the latent intervals meaningful by tracking the tail mass
/// in log space.
PreparedMarginal prepare(const MarginalSpec& spec, std::int64_t x_max);

/// Appends thresholds for counts cutoff..x_max.
void extend_thresholds(PreparedMarginal& pm, std::int64_t x_max);

double log_pmf(const MarginalSpec& spec, std::int64_t k);
double pmf(const MarginalSpec& spec, std::int64_t k);
double cdf(const MarginalSpec& spec, std::int64_t k);

/// Builds the table; hard_cap bounds the scan (heavier tails raise
/// lgc::numerical_error).
CumTable cum_table(const MarginalSpec& spec, std::int64_t hard_cap = 1000000);

/// Smallest k with C_k >= u, u in (0,1).
std::int64_t quantile(const CumTable& table, double u);
std::int64_t quantile(const MarginalSpec& spec, double u);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Closed forms everywhere except CMP, which sums its table.
Moments moments(const MarginalSpec& spec);

/// GLM-style parametrizations used for regression fits:
///   negbinomial: (mu, k) with mu = p r/(1-p), k = 1/r
///   genpoisson:  (mu, alpha) with lambda = mu/(1+alpha mu), eta = alpha mu/(1+alpha mu)
/// Other families reparametrize onto themselves (mean-parametrized where that
/// is meaningful: poisson/cmp take mu as lambda directly).
MarginalSpec from_glm(Family family, double mu, const std::vector<double>& extra);

/// Inverse of from_glm for the two overdispersed families; returns
/// (mu, k) or (mu, alpha).
std::vector<double> to_glm(const MarginalSpec& spec);

} // namespace lgc
