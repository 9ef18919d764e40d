#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lgc/marginals.hpp"
#include "lgc/parallel.hpp"

// Correlation link machinery: Hermite coefficients of the count transform
// G(z) = F^{-1}(Phi(z)), the power-series link L mapping latent correlation to
// count correlation, both derivative forms, the numerical inverse, and the
// Monte-Carlo estimate of the most negative achievable correlation L(-1).
//
// The truncated series misses tail mass 1 - sum_{k<=K} ell_k.  That mass is
// restored by pseudo coefficients spread over k in (K, tail_order] with the
// k^{-3/2} profile the coefficients provably decay at; the even/odd split is
// chosen so the corrected link passes through (1,1) exactly and, once the
// Monte-Carlo value is attached, through (-1, L(-1)) exactly.  A single
// lumped coefficient at K+1 would distort the link at moderate |u|; the
// profiled spread tracks the true tail within a few percent.

namespace lgc {

struct LinkTable {
    int K = 25;
    std::vector<double> scaled;  // b_k = g_k sqrt(k!), k = 1..K
    std::vector<double> g;       // Hermite coefficients g_k
    std::vector<double> ell;     // link coefficients k! g_k^2 / var0
    double var0 = 0.0;           // gamma_X(0), the analytic marginal variance
    double mean = 0.0;

    double pseudo_pos = 0.0;     // correction mass added at u = +1 (1 - sum ell)
    double pseudo_neg = 0.0;     // signed correction value at u = -1
    double tail_even = 0.0;      // tail profile scales: ell_k ~ scale * k^{-3/2}
    double tail_odd = 0.0;
    int tail_order = 0;          // last modeled tail index

    std::optional<double> l_minus1; // Monte-Carlo estimate of L(-1), when attached

    std::uint64_t spec_hash = 0;
};

/// Probabilists' Hermite polynomial H_k(z).
double hermite_eval(int k, double z);

/// g_1..g_K from a cumulative table (telescoped threshold-sum form).
std::vector<double> hermite_coeffs(const CumTable& table, int K);

/// Asymptotic approximation of g_k (k!)^{1/2} for large k; test cross-check.
double hermite_coeff_asymptotic(const CumTable& table, int k);

/// Smallest k at which the coefficient envelope (2 pi^3 k^3)^{-1/4} *
/// sum_n exp(-Phi^{-1}(C_n)^2 / 4) drops below eps.
int truncation_order(const CumTable& table, double eps);

/// Link table without the negative-side anchor (no Monte-Carlo work); the
/// pseudo mass is split neutrally between parities.  This is what iterated
/// objective evaluations use.
LinkTable link_table_fast(const MarginalSpec& spec, int K = 25);

/// Full link table with the (-1, L(-1)) anchor attached.  L(-1) estimates are
/// memoized per (family, rounded params, K, paths) across threads.
LinkTable link_table(const MarginalSpec& spec, int K = 25,
                     std::int64_t mc_paths = 1000000, std::uint64_t seed = 0x6c67634c696e6bull);

/// L(u) including pseudo corrections.  u in [-1, 1].
double link_eval(const LinkTable& table, double u);

/// Series derivative sum k ell_k u^{k-1} (including tail terms); u in (-1,1).
double link_derivative(const LinkTable& table, double u);

/// Bivariate-density double-sum form of the derivative over the threshold
/// grid; independent of the series coefficients.  u in (-1,1).
double link_derivative_density(const CumTable& table, double var0, double u,
                               Exec exec = Exec::parallel);

/// Unique u with link_eval(u) = rho, rho inside (L(-1), 1).  Safeguarded
/// Newton inside a bisection bracket; |residual| driven below 1e-10.
double link_inverse(const LinkTable& table, double rho);

/// Covariance between counts with marginals A and B at latent correlation u:
/// sum_k k! g_{A,k} g_{B,k} u^k.  Tables must share K.
double cross_link(const LinkTable& a, const LinkTable& b, double u);

/// Achievable correlation range (rho_minus, rho_plus = 1).  rho_minus is the
/// Monte-Carlo correlation of (F^{-1}(U), F^{-1}(1-U)).
std::pair<double, double> correlation_bounds(const MarginalSpec& spec,
                                             std::int64_t mc_paths = 1000000,
                                             std::uint64_t seed = 0x636f72724d43ull,
                                             Exec exec = Exec::parallel);

/// CSV rows "k,g_k,ell_k" for plotting.
std::string link_csv(const LinkTable& table);

std::uint64_t spec_key_hash(const MarginalSpec& spec, int K);

} // namespace lgc
