#include "lgc/particle.hpp"

#include "lgc/errors.hpp"
#include "lgc/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lgc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

FilterKind filter_kind_from_name(const std::string& name) {
    if (name == "sis") return FilterKind::sis;
    if (name == "sisr") return FilterKind::sisr;
    if (name == "apf") return FilterKind::apf;
    throw config_error("unknown filter '" + name + "' (expected sis|sisr|apf)");
}

std::string filter_kind_name(FilterKind kind) {
    switch (kind) {
        case FilterKind::sis: return "sis";
        case FilterKind::sisr: return "sisr";
        case FilterKind::apf: return "apf";
    }
    return "?";
}

ParticleFilter::ParticleFilter(std::span<const std::int64_t> data,
                               const std::vector<PreparedMarginal>& marginals, const DlCoeffs& dl,
                               const FilterOptions& opts)
    : data_(data), marginals_(marginals), dl_(dl), opts_(opts), rng_(opts.seed) {
    if (data.empty()) throw data_error("particle filter: empty data");
    if (opts.particles < 1) throw config_error("particle filter: need at least one particle");
    if (marginals_.size() != 1 && marginals_.size() != data.size()) {
        throw config_error("particle filter: marginals must number 1 or T+1");
    }
    for (std::int64_t x : data) {
        if (x < 0) throw data_error("particle filter: negative count in data");
    }
    t_end_ = static_cast<int>(data.size()) - 1;
    hist_len_ = std::max(dl_.max_row_length(), 1);
    const std::size_t n = static_cast<std::size_t>(opts_.particles);
    hist_.assign(n * static_cast<std::size_t>(hist_len_), 0.0);
    hist_alt_.assign(hist_.size(), 0.0);
    logw_.assign(n, 0.0);
    zhat_.assign(n, 0.0);
    lw_scratch_.assign(n, 0.0);
    lwtot_scratch_.assign(n, 0.0);
    cumw_scratch_.assign(n, 0.0);
}

void ParticleFilter::init() {
    const std::int64_t x0 = data_[0];
    const PreparedMarginal& m = marg(0);
    const double lp0 = log_pmf(m.spec, x0);
    if (lp0 == kNegInf) {
        if (opts_.throw_on_impossible) {
            throw data_error("particle filter: observation at t = 0 has zero probability");
        }
        loglik_ = kNegInf;
        t_next_ = t_end_ + 1;
        return;
    }
    loglik_ = lp0;
    diag_.step_loglik.push_back(lp0);
    const double lo = m.thr.lower(x0);
    const double hi = m.thr.upper(x0);
    if (log_norm_cdf_diff(lo, hi) == kNegInf) {
        if (opts_.throw_on_impossible) {
            throw data_error("particle filter: latent interval for x_0 underflows");
        }
        loglik_ = kNegInf;
        t_next_ = t_end_ + 1;
        return;
    }
    const std::size_t n = static_cast<std::size_t>(opts_.particles);
    parallel_for(n, [&](std::size_t i) {
        const double u = rng_.uniform(streams::init, i);
        hist_[i * static_cast<std::size_t>(hist_len_)] = trunc_norm_draw(lo, hi, u);
    }, opts_.exec);
    std::fill(logw_.begin(), logw_.end(), 0.0);
    diag_.ess.push_back(static_cast<double>(opts_.particles));
    t_next_ = 1;
    zhat_valid_ = false;
}

void ParticleFilter::compute_predictions() {
    if (zhat_valid_) return;
    const int t = t_next_;
    const auto row = dl_.row(t);
    const std::size_t len = std::min<std::size_t>(row.size(), static_cast<std::size_t>(t));
    const std::size_t n = static_cast<std::size_t>(opts_.particles);
    const std::size_t hl = static_cast<std::size_t>(hist_len_);
    parallel_for(n, [&](std::size_t i) {
        const double* h = &hist_[i * hl];
        double s = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
            // history slot for z_{t-1-j}
            s += row[j] * h[static_cast<std::size_t>((t - 1 - static_cast<int>(j)) % hist_len_)];
        }
        zhat_[i] = s;
    }, opts_.exec);
    zhat_valid_ = true;
}

std::span<const double> ParticleFilter::predictions() {
    if (done()) throw data_error("particle filter: no further time step to predict");
    compute_predictions();
    return zhat_;
}

double ParticleFilter::prediction_sd() const { return dl_.sd(t_next_); }

double ParticleFilter::predictive_cdf(std::int64_t y) {
    if (y < 0) return 0.0;
    compute_predictions();
    const double qy = marg(t_next_).thr.upper(y);
    if (std::isinf(qy) && qy > 0.0) return 1.0;
    const double r = dl_.sd(t_next_);
    const double lse = blocked_logsumexp(logw_, opts_.exec);
    const double s = blocked_sum(logw_.size(), [&](std::size_t i) {
        return std::exp(logw_[i] - lse) * norm_cdf((qy - zhat_[i]) / r);
    }, opts_.exec);
    return std::min(s, 1.0);
}

double ParticleFilter::expectation(const std::function<double(double)>& v) {
    compute_predictions();
    const double lse = blocked_logsumexp(logw_, opts_.exec);
    return blocked_sum(logw_.size(), [&](std::size_t i) {
        return std::exp(logw_[i] - lse) * v(zhat_[i]);
    }, opts_.exec);
}

double ParticleFilter::ess() const {
    const double lse = blocked_logsumexp(logw_, opts_.exec);
    if (!std::isfinite(lse)) return 0.0;
    const double s2 = blocked_sum(logw_.size(), [&](std::size_t i) {
        const double w = std::exp(logw_[i] - lse);
        return w * w;
    }, opts_.exec);
    return 1.0 / s2;
}

void ParticleFilter::resample(std::span<const double> probs_logw, std::uint64_t stream) {
    const std::size_t n = static_cast<std::size_t>(opts_.particles);
    const std::size_t hl = static_cast<std::size_t>(hist_len_);
    const double m = blocked_max(n, [&](std::size_t i) { return probs_logw[i]; }, opts_.exec);
    std::vector<double>& cumw = cumw_scratch_;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) { // sequential scan keeps determinism
        acc += std::exp(probs_logw[i] - m);
        cumw[i] = acc;
    }
    const double total = cumw.back();
    const int t = t_next_;
    parallel_for(n, [&](std::size_t i) {
        const double u = rng_.uniform(stream, static_cast<std::uint64_t>(t), i) * total;
        const std::size_t k = static_cast<std::size_t>(
            std::lower_bound(cumw.begin(), cumw.end(), u) - cumw.begin());
        const std::size_t src = std::min(k, n - 1);
        std::copy_n(&hist_[src * hl], hl, &hist_alt_[i * hl]);
    }, opts_.exec);
    hist_.swap(hist_alt_);
    ++diag_.resamples;
}

void ParticleFilter::assimilate() {
    if (done()) throw data_error("particle filter: past the end of the data");
    const int t = t_next_;
    const std::int64_t xt = data_[static_cast<std::size_t>(t)];
    const PreparedMarginal& m = marg(t);
    const double lo = m.thr.lower(xt);
    const double hi = m.thr.upper(xt);
    const double r = dl_.sd(t);
    const std::size_t n = static_cast<std::size_t>(opts_.particles);
    const std::size_t hl = static_cast<std::size_t>(hist_len_);
    const std::size_t slot = static_cast<std::size_t>(t % hist_len_);

    compute_predictions();

    // incremental weights: interval mass under the one-step predictive law
    std::vector<double>& lw = lw_scratch_;
    parallel_for(n, [&](std::size_t i) {
        lw[i] = log_norm_cdf_diff((lo - zhat_[i]) / r, (hi - zhat_[i]) / r);
    }, opts_.exec);

    if (opts_.kind == FilterKind::apf) {
        // ancestors by incremental weight, then conditional propagation
        const double inc = blocked_logsumexp(lw, opts_.exec) - std::log(static_cast<double>(n));
        if (!std::isfinite(inc)) {
            if (opts_.throw_on_impossible) {
                throw data_error("particle filter: zero total weight at t = " + std::to_string(t));
            }
            loglik_ = kNegInf;
            t_next_ = t_end_ + 1;
            return;
        }
        loglik_ += inc;
        diag_.step_loglik.push_back(inc);
        resample(lw, streams::ancestor);
        // recompute predictions for the resampled histories, then propagate
        zhat_valid_ = false;
        compute_predictions();
        parallel_for(n, [&](std::size_t i) {
            const double a = (lo - zhat_[i]) / r, b = (hi - zhat_[i]) / r;
            if (log_norm_cdf_diff(a, b) == kNegInf) {
                hist_[i * hl + slot] = zhat_[i]; // dead particle; never selected again
                return;
            }
            const double u = rng_.uniform(streams::propagate, static_cast<std::uint64_t>(t), i);
            hist_[i * hl + slot] = zhat_[i] + r * trunc_norm_draw(a, b, u);
        }, opts_.exec);
        std::fill(logw_.begin(), logw_.end(), 0.0);
        diag_.ess.push_back(static_cast<double>(opts_.particles));
    } else {
        // likelihood term: weighted mean of incremental weights
        std::vector<double>& lw_tot = lwtot_scratch_;
        parallel_for(n, [&](std::size_t i) { lw_tot[i] = logw_[i] + lw[i]; }, opts_.exec);
        const double lse_prev = blocked_logsumexp(logw_, opts_.exec);
        const double lse_new = blocked_logsumexp(lw_tot, opts_.exec);
        const double inc = lse_new - lse_prev;
        if (!std::isfinite(inc)) {
            if (opts_.throw_on_impossible) {
                throw data_error("particle filter: zero total weight at t = " + std::to_string(t));
            }
            loglik_ = kNegInf;
            t_next_ = t_end_ + 1;
            return;
        }
        loglik_ += inc;
        diag_.step_loglik.push_back(inc);
        logw_.swap(lw_tot);

        // conditional propagation keeps every trajectory on the observed count
        parallel_for(n, [&](std::size_t i) {
            if (lw[i] == kNegInf) {
                hist_[i * hl + slot] = zhat_[i]; // zero-weight particle, state is moot
                return;
            }
            const double u = rng_.uniform(streams::propagate, static_cast<std::uint64_t>(t), i);
            const double eps = trunc_norm_draw((lo - zhat_[i]) / r, (hi - zhat_[i]) / r, u);
            hist_[i * hl + slot] = zhat_[i] + r * eps;
        }, opts_.exec);

        const double e = ess();
        diag_.ess.push_back(e);
        if (opts_.kind == FilterKind::sisr && e < opts_.ess_fraction * static_cast<double>(n)) {
            resample(logw_, streams::resample);
            std::fill(logw_.begin(), logw_.end(), 0.0);
        }
    }
    t_next_ = t + 1;
    zhat_valid_ = false;
}

FilterResult ParticleFilter::take_result() {
    diag_.loglik = loglik_;
    return std::move(diag_);
}

FilterResult run_filter(std::span<const std::int64_t> data,
                        const std::vector<PreparedMarginal>& marginals, const DlCoeffs& dl,
                        const FilterOptions& opts) {
    ParticleFilter pf(data, marginals, dl, opts);
    pf.init();
    while (!pf.done()) pf.assimilate();
    return pf.take_result();
}

FilterResult run_filter(std::span<const std::int64_t> data, const MarginalSpec& spec,
                        const LatentModel& model, const FilterOptions& opts) {
    std::int64_t x_max = 0;
    for (std::int64_t x : data) x_max = std::max(x_max, x);
    std::vector<PreparedMarginal> margs;
    margs.push_back(prepare(spec, x_max));
    const int T = static_cast<int>(data.size()) - 1;
    const std::vector<double> acvf = arma_acvf(model, T + 1);
    const DlCoeffs dl(acvf, T + 1);
    return run_filter(data, margs, dl, opts);
}

} // namespace lgc
