#pragma once

#include <cmath>

// Standard normal CDF, quantile and tail helpers.
//
// The cumulative table machinery pushes arguments of Phi^{-1} extremely close
// to 1, and particle weights regularly involve Phi differences over intervals
// located ten or more standard deviations out.  Everything here is therefore
// written to stay meaningful in log space far beyond the point where the
// linear-space quantities underflow.

namespace lgc {

/// Phi(x), double precision over the full range.
double norm_cdf(double x) noexcept;

/// Upper tail 1 - Phi(x), accurate (relative sense) for large positive x.
double norm_sf(double x) noexcept;

/// Scaled complementary error function exp(x^2) erfc(x), valid for x >= 0.
double erfcx_pos(double x) noexcept;

/// log(1 - Phi(x)) for any x; never overflows, underflows around x ~ 1e154.
double log_norm_sf(double x) noexcept;

/// log Phi(x) = log_norm_sf(-x).
inline double log_norm_cdf(double x) noexcept { return log_norm_sf(-x); }

/// Phi^{-1}(p), p in (0,1).  Wichura's AS 241 rational approximations with a
/// single Newton polish in the central region.
double norm_ppf(double p);

/// Inverse upper tail: x with 1 - Phi(x) = p.
inline double norm_isf(double p) { return -norm_ppf(p); }

/// Inverse upper tail from log probability: x with log(1 - Phi(x)) = logp.
/// Works for logp far below log(DBL_MIN).
double norm_isf_log(double logp);

/// Phi(b) - Phi(a) for a <= b, computed without cancellation in either tail.
double norm_cdf_diff(double a, double b) noexcept;

/// log(Phi(b) - Phi(a)) for a <= b; -inf when the interval mass underflows
/// even in log space (empty region for all practical purposes).
double log_norm_cdf_diff(double a, double b) noexcept;

/// Inverse-CDF draw of a standard normal conditioned on (a, b): the value
/// z with Phi(z) = Phi(a) + u (Phi(b) - Phi(a)), evaluated tail-stably.
/// Endpoints may be +-inf.  Throws lgc::numerical_error when the region mass
/// is zero even in log space.
double trunc_norm_draw(double a, double b, double u);

/// Standard normal density.
inline double norm_pdf(double x) noexcept {
    return 0.3989422804014326779399461 * std::exp(-0.5 * x * x);
}

/// log of the standard normal density.
inline double log_norm_pdf(double x) noexcept {
    return -0.9189385332046727417803297 - 0.5 * x * x;
}

} // namespace lgc
