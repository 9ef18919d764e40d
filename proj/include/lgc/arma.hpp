#pragma once

#include <cstdint>
#include <span>
#include <vector>

// Unit-variance causal Gaussian ARMA models: autocovariances, Durbin-Levinson
// one-step prediction, the innovations-form Gaussian log-likelihood, and
// exact stationary simulation.

namespace lgc {

/// Z_t = sum_i ar[i] Z_{t-1-i} + eps_t + sum_j ma[j] eps_{t-1-j}, with the
/// innovation variance implied by the unit-marginal-variance normalization.
struct LatentModel {
    std::vector<double> ar;
    std::vector<double> ma;

    int p() const { return static_cast<int>(ar.size()); }
    int q() const { return static_cast<int>(ma.size()); }

    /// Throws lgc::domain_error unless the AR part is causal and the MA part
    /// invertible (checked through the partial-autocorrelation map).
    void validate() const;
};

/// AR coefficients -> partial autocorrelations (Levinson down-recursion).
/// Throws lgc::domain_error when any partial autocorrelation reaches 1 in
/// magnitude (non-causal polynomial).
std::vector<double> ar_to_pacf(std::span<const double> ar);

/// Partial autocorrelations in (-1,1) -> AR coefficients; always causal.
std::vector<double> pacf_to_ar(std::span<const double> pacf);

/// gamma_Z(0..max_lag) normalized to gamma_Z(0) = 1.
std::vector<double> arma_acvf(const LatentModel& model, int max_lag);

/// Innovation variance giving the unit marginal variance.
double innovation_variance(const LatentModel& model);

/// Durbin-Levinson prediction coefficients precomputed from an ACVF.  Row t
/// holds the weights of z_{t-1}, z_{t-2}, ... in the one-step prediction of
/// z_t; rows stop being stored once they converge (pure AR(p) freezes at p,
/// invertible MA freezes geometrically), after which the last stored row is
/// reused.
class DlCoeffs {
public:
    DlCoeffs() = default;
    DlCoeffs(std::span<const double> acvf, int t_max);

    std::span<const double> row(int t) const;
    double mse(int t) const;       // r_t^2 (r_0^2 = gamma(0))
    double sd(int t) const;        // r_t
    int max_row_length() const { return max_len_; }
    int t_max() const { return t_max_; }

private:
    std::vector<std::vector<double>> rows_; // rows_[t-1] for t = 1..stored
    std::vector<double> r2_;                // r2_[t] for t = 0..stored
    int stored_ = 0;
    int t_max_ = 0;
    int max_len_ = 0;
};

/// One-step predictions and error variances of a data vector under an ACVF.
struct DLState {
    std::vector<double> pred;       // zhat_0..zhat_T (zhat_0 = 0)
    std::vector<double> mse;        // r_0^2..r_T^2
    double next_pred = 0.0;         // zhat_{T+1}
    double next_mse = 0.0;          // r_{T+1}^2
};

DLState durbin_levinson(std::span<const double> acvf, std::span<const double> data);

/// Gaussian log-density of `data` with mean vector `mean` and the Toeplitz
/// covariance given by `acvf`, computed in O(T^2) through the innovations
/// decomposition.  Throws lgc::numerical_error on loss of definiteness.
double gaussian_loglik(std::span<const double> acvf, std::span<const double> mean,
                       std::span<const double> data);

/// Exact stationary draw z_0..z_T through the innovations recursion.
std::vector<double> simulate_latent(const LatentModel& model, int T, std::uint64_t seed);

} // namespace lgc
