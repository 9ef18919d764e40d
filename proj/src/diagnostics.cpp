#include "lgc/diagnostics.hpp"

#include "lgc/errors.hpp"
#include "lgc/estimation.hpp"
#include "lgc/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lgc {

namespace {

/// F_t(u | y) for the piecewise-linear PIT contribution.
double pit_cell(double u, double p_lo, double p_hi) {
    if (u <= p_lo) return 0.0;
    if (u >= p_hi) return 1.0;
    const double w = p_hi - p_lo;
    return w > 0.0 ? (u - p_lo) / w : 1.0;
}

} // namespace

PitHistogram pit_histogram(std::span<const std::int64_t> data,
                           const std::vector<PreparedMarginal>& marginals, const DlCoeffs& dl,
                           const PitOptions& opts) {
    if (opts.bins < 1) throw config_error("pit_histogram: need at least one bin");
    const int H = opts.bins;
    const std::size_t n = data.size();
    if (n == 0) throw data_error("pit_histogram: empty data");

    std::vector<double> fbar(static_cast<std::size_t>(H) + 1, 0.0); // Fbar(h/H)

    auto accumulate = [&](double p_lo, double p_hi) {
        for (int h = 0; h <= H; ++h) {
            fbar[static_cast<std::size_t>(h)] +=
                pit_cell(static_cast<double>(h) / static_cast<double>(H), p_lo, p_hi);
        }
    };

    // t = 0: marginal CDF, empty conditioning set
    {
        const PreparedMarginal& m0 = marginals.size() == 1 ? marginals[0] : marginals[0];
        const std::int64_t x0 = data[0];
        accumulate(m0.table.cdf_at(x0 - 1), m0.table.cdf_at(x0));
    }

    if (n > 1) {
        FilterOptions fo;
        fo.kind = opts.kind;
        fo.particles = opts.particles;
        fo.ess_fraction = opts.ess_fraction;
        fo.seed = opts.seed;
        fo.exec = opts.exec;
        fo.throw_on_impossible = true;
        ParticleFilter pf(data, marginals, dl, fo);
        pf.init();
        while (!pf.done()) {
            const std::int64_t xt = data[static_cast<std::size_t>(pf.t_next())];
            const double p_hi = pf.predictive_cdf(xt);
            const double p_lo = xt > 0 ? pf.predictive_cdf(xt - 1) : 0.0;
            accumulate(p_lo, p_hi);
            pf.assimilate();
        }
    }

    PitHistogram out;
    out.bins = H;
    out.mean_pit_curve.resize(fbar.size());
    for (std::size_t h = 0; h < fbar.size(); ++h) {
        out.mean_pit_curve[h] = fbar[h] / static_cast<double>(n);
    }
    out.heights.resize(static_cast<std::size_t>(H));
    for (int h = 1; h <= H; ++h) {
        out.heights[static_cast<std::size_t>(h - 1)] =
            out.mean_pit_curve[static_cast<std::size_t>(h)] - out.mean_pit_curve[static_cast<std::size_t>(h - 1)];
    }
    return out;
}

PitHistogram pit_histogram(std::span<const std::int64_t> data, const MarginalSpec& spec,
                           const LatentModel& model, const PitOptions& opts) {
    std::int64_t x_max = 0;
    for (std::int64_t x : data) x_max = std::max(x_max, x);
    std::vector<PreparedMarginal> margs;
    margs.push_back(prepare(spec, x_max));
    const int T = static_cast<int>(data.size()) - 1;
    const std::vector<double> acvf = arma_acvf(model, T + 1);
    const DlCoeffs dl(acvf, T + 1);
    return pit_histogram(data, margs, dl, opts);
}

double conditional_latent_mean(const PreparedMarginal& pm, std::int64_t x) {
    if (x < 0) throw domain_error("conditional_latent_mean: negative count");
    const double a = pm.thr.lower(x);
    const double b = pm.thr.upper(x);
    if (std::isinf(a) && std::isinf(b) && a > 0.0) {
        throw numerical_error("conditional_latent_mean: count beyond the extended table");
    }
    // E[Z | a <= Z < b] = (phi(a) - phi(b)) / (Phi(b) - Phi(a))
    if (std::isinf(a) && a < 0.0) {
        if (std::isinf(b)) return 0.0;
        return -norm_pdf(b) / norm_cdf(b);
    }
    if (std::isinf(b)) {
        // Mills ratio, stable deep in the tail
        return std::exp(log_norm_pdf(a) - log_norm_sf(a));
    }
    const double lmass = log_norm_cdf_diff(a, b);
    if (lmass == -std::numeric_limits<double>::infinity()) {
        throw numerical_error("conditional_latent_mean: interval mass underflows");
    }
    // phi(a) - phi(b) = phi(a)(1 - exp(-(b^2-a^2)/2)); sign follows the
    // larger density endpoint
    const double la = log_norm_pdf(a), lb = log_norm_pdf(b);
    if (la >= lb) {
        return std::exp(la - lmass) * (1.0 - std::exp(lb - la));
    }
    return -std::exp(lb - lmass) * (1.0 - std::exp(la - lb));
}

LatentResiduals latent_residuals(std::span<const std::int64_t> data, const MarginalSpec& spec,
                                 const LatentModel& model) {
    if (data.empty()) throw data_error("latent_residuals: empty data");
    std::int64_t x_max = 0;
    for (std::int64_t x : data) x_max = std::max(x_max, x);
    const PreparedMarginal pm = prepare(spec, x_max);

    LatentResiduals out;
    out.zhat.resize(data.size());
    for (std::size_t t = 0; t < data.size(); ++t) {
        out.zhat[t] = conditional_latent_mean(pm, data[t]);
    }

    double mean = 0.0;
    for (double v : out.zhat) mean += v;
    mean /= static_cast<double>(out.zhat.size());
    std::vector<double> centered(out.zhat.size());
    for (std::size_t t = 0; t < out.zhat.size(); ++t) centered[t] = out.zhat[t] - mean;

    const int T = static_cast<int>(data.size()) - 1;
    const std::vector<double> acvf = arma_acvf(model, T);
    const DLState st = durbin_levinson(acvf, centered);
    out.eps.resize(data.size());
    for (std::size_t t = 0; t < data.size(); ++t) out.eps[t] = centered[t] - st.pred[t];
    return out;
}

ResidualSummary residual_summaries(std::span<const double> residuals, int max_lag) {
    const std::size_t n = residuals.size();
    if (n < 20) throw data_error("residual_summaries: need at least 20 residuals");
    max_lag = std::min<int>(max_lag, static_cast<int>(n) - 1);
    ResidualSummary s;
    const std::vector<double> acf = sample_acf(residuals, max_lag);
    s.acf.assign(acf.begin() + 1, acf.end());
    const std::vector<double> pacf = sample_pacf(acf, max_lag);
    s.pacf = pacf;
    s.band = 1.96 / std::sqrt(static_cast<double>(n));

    double mean = 0.0;
    for (double v : residuals) mean += v;
    mean /= static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : residuals) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    if (m2 > 0.0) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    s.jarque_bera = static_cast<double>(n) *
                    (s.skewness * s.skewness / 6.0 + s.excess_kurtosis * s.excess_kurtosis / 24.0);
    return s;
}

} // namespace lgc
