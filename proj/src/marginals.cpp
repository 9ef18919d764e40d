#include "lgc/marginals.hpp"

#include "lgc/detail/dd.hpp"
#include "lgc/errors.hpp"
#include "lgc/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lgc {

namespace {

constexpr double kTieEps = 5.551115123125783e-17; // eps/4: 1 - C below this rounds to 1

double lchoose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void check(bool ok, const char* msg) {
    if (!ok) throw domain_error(msg);
}

/// log normalizing constant of CMP: log sum_k lambda^k / (k!)^nu.
/// Terms are summed until they stop mattering at relative 1e-16.
double cmp_log_norm(double lambda, double nu) {
    const double llam = std::log(lambda);
    double lterm = 0.0; // k = 0
    double lsum = 0.0;
    for (std::int64_t k = 1; k <= 1000000; ++k) {
        lterm += llam - nu * std::log(static_cast<double>(k));
        const double d = lterm - lsum;
        lsum = (d > 0.0) ? lterm + std::log1p(std::exp(-d)) : lsum + std::log1p(std::exp(d));
        if (d < -36.8 && k > lambda) return lsum; // term < 1e-16 * sum past the mode
    }
    throw numerical_error("cmp normalizing constant: series cap exceeded");
}

} // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::binomial: return "binomial";
        case Family::poisson: return "poisson";
        case Family::mixpoisson: return "mixpoisson";
        case Family::negbinomial: return "negbinomial";
        case Family::genpoisson: return "genpoisson";
        case Family::cmp: return "cmp";
    }
    throw config_error("unknown family enum");
}

Family family_from_name(const std::string& name) {
    if (name == "binomial") return Family::binomial;
    if (name == "poisson") return Family::poisson;
    if (name == "mixpoisson") return Family::mixpoisson;
    if (name == "negbinomial") return Family::negbinomial;
    if (name == "genpoisson") return Family::genpoisson;
    if (name == "cmp") return Family::cmp;
    throw config_error("unknown marginal family '" + name + "'");
}

std::size_t MarginalSpec::mixture_components() const {
    if (family != Family::mixpoisson) return 1;
    if (params.empty() || params.size() % 2 != 1) {
        throw domain_error("mixpoisson: parameter vector must have odd length 2M-1");
    }
    return (params.size() + 1) / 2;
}

void MarginalSpec::validate() const {
    for (double v : params) {
        if (!std::isfinite(v)) throw domain_error("marginal parameters must be finite");
    }
    switch (family) {
        case Family::binomial: {
            check(params.size() == 2, "binomial expects (N, p)");
            check(params[0] >= 1.0 && params[0] == std::floor(params[0]), "binomial: N must be an integer >= 1");
            check(params[1] > 0.0 && params[1] < 1.0, "binomial: p must lie in (0,1)");
            break;
        }
        case Family::poisson: {
            check(params.size() == 1, "poisson expects (lambda)");
            check(params[0] > 0.0, "poisson: lambda must be positive");
            break;
        }
        case Family::mixpoisson: {
            const std::size_t m = mixture_components();
            double psum = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                check(params[j] > 0.0, "mixpoisson: each lambda must be positive");
            }
            for (std::size_t j = m; j < params.size(); ++j) {
                check(params[j] > 0.0, "mixpoisson: mixture weights must be positive");
                psum += params[j];
            }
            check(psum < 1.0 || m == 1, "mixpoisson: weights p_1..p_{M-1} must sum below 1");
            break;
        }
        case Family::negbinomial: {
            check(params.size() == 2, "negbinomial expects (r, p)");
            check(params[0] > 0.0, "negbinomial: r must be positive");
            check(params[1] > 0.0 && params[1] < 1.0, "negbinomial: p must lie in (0,1)");
            break;
        }
        case Family::genpoisson: {
            check(params.size() == 2, "genpoisson expects (lambda, eta)");
            check(params[0] > 0.0, "genpoisson: lambda must be positive");
            check(params[1] >= 0.0 && params[1] < 1.0, "genpoisson: eta must lie in [0,1)");
            break;
        }
        case Family::cmp: {
            check(params.size() == 2, "cmp expects (lambda, nu)");
            check(params[0] > 0.0, "cmp: lambda must be positive");
            check(params[1] > 0.0, "cmp: nu must be positive");
            break;
        }
    }
}

double log_pmf(const MarginalSpec& spec, std::int64_t k) {
    spec.validate();
    if (k < 0) return -std::numeric_limits<double>::infinity();
    const double kd = static_cast<double>(k);
    switch (spec.family) {
        case Family::binomial: {
            const double n = spec.params[0], p = spec.params[1];
            if (kd > n) return -std::numeric_limits<double>::infinity();
            return lchoose(n, kd) + kd * std::log(p) + (n - kd) * std::log1p(-p);
        }
        case Family::poisson: {
            const double lam = spec.params[0];
            return kd * std::log(lam) - lam - std::lgamma(kd + 1.0);
        }
        case Family::mixpoisson: {
            const std::size_t m = spec.mixture_components();
            double best = -std::numeric_limits<double>::infinity();
            std::vector<double> terms(m);
            double plast = 1.0;
            for (std::size_t j = 0; j < m; ++j) {
                const double lam = spec.params[j];
                double w;
                if (j + 1 < m) {
                    w = spec.params[m + j];
                    plast -= w;
                } else {
                    w = (m == 1) ? 1.0 : plast;
                }
                terms[j] = std::log(w) + kd * std::log(lam) - lam - std::lgamma(kd + 1.0);
                best = std::max(best, terms[j]);
            }
            double s = 0.0;
            for (double t : terms) s += std::exp(t - best);
            return best + std::log(s);
        }
        case Family::negbinomial: {
            const double r = spec.params[0], p = spec.params[1];
            return std::lgamma(r + kd) - std::lgamma(kd + 1.0) - std::lgamma(r) + r * std::log1p(-p) +
                   kd * std::log(p);
        }
        case Family::genpoisson: {
            const double lam = spec.params[0], eta = spec.params[1];
            const double a = lam + eta * kd;
            return -a + std::log(lam) + (kd - 1.0) * std::log(a) - std::lgamma(kd + 1.0);
        }
        case Family::cmp: {
            const double lam = spec.params[0], nu = spec.params[1];
            return kd * std::log(lam) - nu * std::lgamma(kd + 1.0) - cmp_log_norm(lam, nu);
        }
    }
    throw config_error("unknown family enum");
}

double pmf(const MarginalSpec& spec, std::int64_t k) { return std::exp(log_pmf(spec, k)); }

double cdf(const MarginalSpec& spec, std::int64_t k) {
    spec.validate();
    if (k < 0) return 0.0;
    double c = 0.0;
    for (std::int64_t j = 0; j <= k; ++j) {
        c += pmf(spec, j);
        if (c >= 1.0) return 1.0;
    }
    return std::min(c, 1.0);
}

namespace {

using detail::dd;

// pmf recurrences in double-double for the families whose consecutive-mass
// ratio is rational in k.  Every per-step factor is either an exact double or
// a dd quantity, so the only model error is the initial term's rounding: a
// constant scale on the whole sequence that the relative cutoff rule cancels.
// genpoisson/cmp fall back to exp(log_pmf), which only blurs their cutoff
// index, nothing else.
class PmfScan {
public:
    explicit PmfScan(const MarginalSpec& spec) : spec_(spec) {
        switch (spec.family) {
            case Family::poisson:
                cur_ = detail::dd_from(std::exp(-spec.params[0]));
                exact_ = true;
                break;
            case Family::binomial: {
                const double n = spec.params[0], p = spec.params[1];
                cur_ = detail::dd_from(std::exp(n * std::log1p(-p)));
                odds_ = detail::dd_div(detail::dd_from(p), detail::two_sum(1.0, -p));
                exact_ = true;
                break;
            }
            case Family::negbinomial: {
                const double r = spec.params[0], p = spec.params[1];
                cur_ = detail::dd_from(std::exp(r * std::log1p(-p)));
                exact_ = true;
                break;
            }
            case Family::mixpoisson: {
                const std::size_t m = spec.mixture_components();
                comps_.resize(m);
                weights_.resize(m);
                double plast = 1.0;
                for (std::size_t j = 0; j < m; ++j) {
                    comps_[j] = detail::dd_from(std::exp(-spec.params[j]));
                    if (j + 1 < m) {
                        weights_[j] = spec.params[m + j];
                        plast -= weights_[j];
                    } else {
                        weights_[j] = (m == 1) ? 1.0 : plast;
                    }
                }
                exact_ = true;
                mixture_ = true;
                break;
            }
            default:
                exact_ = false;
                break;
        }
    }

    /// pmf at the current index (starts at 0); hi part is the double value.
    dd value(std::int64_t k) const {
        if (!exact_) return detail::dd_from(std::exp(log_pmf(spec_, k)));
        if (mixture_) {
            dd s = detail::dd_from(0.0);
            for (std::size_t j = 0; j < comps_.size(); ++j) {
                s = detail::dd_add(s, detail::dd_mul(comps_[j], weights_[j]));
            }
            return s;
        }
        return cur_;
    }

    void advance(std::int64_t k) { // move from index k to k+1
        if (!exact_) return;
        const double kd = static_cast<double>(k);
        switch (spec_.family) {
            case Family::poisson:
                cur_ = detail::dd_div(detail::dd_mul(cur_, spec_.params[0]), detail::dd_from(kd + 1.0));
                break;
            case Family::binomial: {
                const double n = spec_.params[0];
                if (kd + 1.0 > n) {
                    cur_ = detail::dd_from(0.0);
                } else {
                    // (n - k) and (k + 1) are exact small integers
                    cur_ = detail::dd_mul(detail::dd_mul(cur_, odds_), n - kd);
                    cur_ = detail::dd_div(cur_, detail::dd_from(kd + 1.0));
                }
                break;
            }
            case Family::negbinomial: {
                const double r = spec_.params[0], p = spec_.params[1];
                cur_ = detail::dd_mul(detail::dd_mul(cur_, detail::two_sum(r, kd)), p);
                cur_ = detail::dd_div(cur_, detail::dd_from(kd + 1.0));
                break;
            }
            case Family::mixpoisson: {
                for (std::size_t j = 0; j < comps_.size(); ++j) {
                    comps_[j] = detail::dd_div(detail::dd_mul(comps_[j], spec_.params[j]),
                                               detail::dd_from(kd + 1.0));
                }
                break;
            }
            default:
                break;
        }
    }

private:
    const MarginalSpec& spec_;
    dd cur_{};
    dd odds_{};
    std::vector<dd> comps_;
    std::vector<double> weights_;
    bool exact_ = false;
    bool mixture_ = false;
};

} // namespace

namespace {

/// log tail masses: lt[i] = log sum_{j >= from + i} pmf(j), built backward so
/// each value keeps full relative accuracy however deep the tail is.
std::vector<double> log_tails_from(const MarginalSpec& spec, std::int64_t from, std::int64_t cap) {
    const double ninf = -std::numeric_limits<double>::infinity();
    std::vector<double> lp;
    double best = ninf;
    for (std::int64_t j = from; j < from + cap; ++j) {
        const double v = log_pmf(spec, j);
        if (v == ninf) break;
        lp.push_back(v);
        best = std::max(best, v);
        if (v < best - 745.0) break;
    }
    std::vector<double> lt(lp.size() + 1);
    lt[lp.size()] = ninf;
    for (std::size_t i = lp.size(); i-- > 0;) {
        const double a = lp[i], b = lt[i + 1];
        if (b == ninf) {
            lt[i] = a;
        } else {
            const double m = std::max(a, b);
            lt[i] = m + std::log(std::exp(a - m) + std::exp(b - m));
        }
    }
    return lt;
}

} // namespace

CumTable cum_table(const MarginalSpec& spec, std::int64_t hard_cap) {
    spec.validate();
    CumTable table;
    PmfScan scan(spec);
    dd c{0.0, 0.0};
    // Phase 1: double-double forward sum.  Its single weak point is the
    // rounding of the very first mass (exp(-lambda) and friends), which
    // shifts the computed tail by up to ~1e-16: decisive at the rounds-to-one
    // threshold but irrelevant at 1e-10.
    std::int64_t n0 = hard_cap;
    for (std::int64_t n = 0; n < hard_cap; ++n) {
        const dd p = scan.value(n);
        c = detail::dd_add(c, p);
        const double tail = (1.0 - c.hi) - c.lo;
        if (tail <= 1e-10) {
            n0 = n;
            break;
        }
        table.probs.push_back(p.hi);
        table.cums.push_back(std::min(c.hi, std::nextafter(1.0, 0.0)));
        table.tails.push_back(std::max(tail, 0.0));
        scan.advance(n);
    }
    if (n0 == hard_cap) {
        throw numerical_error("cum_table: cumulative scan exceeded the hard cap (heavy tail?)");
    }
    // Phase 2: exact log-space tails decide where C_n rounds to 1.
    const std::vector<double> lt = log_tails_from(spec, n0 + 1, hard_cap - n0);
    const double log_tie = std::log(kTieEps);
    for (std::int64_t n = n0;; ++n) {
        const std::size_t i = static_cast<std::size_t>(n - n0);
        if (i >= lt.size()) {
            table.cutoff = n;
            return table;
        }
        const double ltail = lt[i]; // log of the mass beyond n
        if (ltail <= log_tie) {
            table.cutoff = n;
            return table;
        }
        const double tail = std::exp(ltail);
        table.probs.push_back(std::exp(log_pmf(spec, n)));
        table.cums.push_back(std::min(1.0 - tail, std::nextafter(1.0, 0.0)));
        table.tails.push_back(tail);
    }
}

double CountThresholds::lower(std::int64_t x) const {
    if (x <= 0) return -std::numeric_limits<double>::infinity();
    if (x - 1 >= static_cast<std::int64_t>(q.size())) return std::numeric_limits<double>::infinity();
    return q[static_cast<std::size_t>(x - 1)];
}

double CountThresholds::upper(std::int64_t x) const {
    if (x < 0) return -std::numeric_limits<double>::infinity();
    if (x >= static_cast<std::int64_t>(q.size())) return std::numeric_limits<double>::infinity();
    return q[static_cast<std::size_t>(x)];
}

CountThresholds thresholds(const CumTable& table) {
    CountThresholds t;
    t.cutoff = table.cutoff;
    t.q.resize(table.cums.size());
    for (std::size_t n = 0; n < table.cums.size(); ++n) {
        t.q[n] = (table.cums[n] <= 0.5) ? norm_ppf(table.cums[n]) : norm_isf(table.tails[n]);
    }
    return t;
}

PreparedMarginal prepare(const MarginalSpec& spec) {
    PreparedMarginal pm;
    pm.spec = spec;
    pm.table = cum_table(spec);
    pm.thr = thresholds(pm.table);
    return pm;
}

void extend_thresholds(PreparedMarginal& pm, std::int64_t x_max) {
    const std::int64_t have = static_cast<std::int64_t>(pm.thr.q.size());
    if (x_max < have) return;
    // q[n] = Phi^{-1}(C_n) = isf(tail_n); tail_n = sum_{j>n} p_j is summed
    // backward in log space so it stays accurate arbitrarily deep.
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> lp;
    for (std::int64_t j = have + 1; j <= x_max + 100000; ++j) {
        const double v = log_pmf(pm.spec, j);
        lp.push_back(v);
        best = std::max(best, v);
        if (j > x_max && (v == -std::numeric_limits<double>::infinity() || v < best - 745.0)) break;
    }
    std::vector<double> lt(lp.size() + 1);
    lt[lp.size()] = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = lp.size(); idx-- > 0;) {
        const double a = lp[idx], b = lt[idx + 1];
        if (a == -std::numeric_limits<double>::infinity()) {
            lt[idx] = b;
        } else if (b == -std::numeric_limits<double>::infinity()) {
            lt[idx] = a;
        } else {
            const double m = std::max(a, b);
            lt[idx] = m + std::log(std::exp(a - m) + std::exp(b - m));
        }
    }
    for (std::int64_t n = have; n <= x_max; ++n) {
        const double log_tail = lt[static_cast<std::size_t>(n - have)]; // = log sum_{j > n} p_j
        pm.thr.q.push_back(std::isfinite(log_tail) ? norm_isf_log(log_tail)
                                                   : std::numeric_limits<double>::infinity());
    }
}

PreparedMarginal prepare(const MarginalSpec& spec, std::int64_t x_max) {
    PreparedMarginal pm = prepare(spec);
    extend_thresholds(pm, x_max);
    return pm;
}

std::int64_t quantile(const CumTable& table, double u) {
    if (!(u > 0.0 && u < 1.0)) throw domain_error("quantile: u must lie in (0,1)");
    const auto n = static_cast<std::int64_t>(table.cums.size());
    if (n == 0 || u > table.cums.back()) return table.cutoff;
    if (n > 1024) {
        auto it = std::lower_bound(table.cums.begin(), table.cums.end(), u);
        return static_cast<std::int64_t>(it - table.cums.begin());
    }
    for (std::int64_t k = 0; k < n; ++k) {
        if (table.cums[static_cast<std::size_t>(k)] >= u) return k;
    }
    return table.cutoff;
}

std::int64_t quantile(const MarginalSpec& spec, double u) {
    return quantile(cum_table(spec), u);
}

Moments moments(const MarginalSpec& spec) {
    spec.validate();
    switch (spec.family) {
        case Family::binomial: {
            const double n = spec.params[0], p = spec.params[1];
            return {n * p, n * p * (1.0 - p)};
        }
        case Family::poisson: {
            const double lam = spec.params[0];
            return {lam, lam};
        }
        case Family::mixpoisson: {
            const std::size_t m = spec.mixture_components();
            double mean = 0.0, second = 0.0, plast = 1.0;
            for (std::size_t j = 0; j < m; ++j) {
                const double lam = spec.params[j];
                double w;
                if (j + 1 < m) {
                    w = spec.params[m + j];
                    plast -= w;
                } else {
                    w = (m == 1) ? 1.0 : plast;
                }
                mean += w * lam;
                second += w * (lam + lam * lam);
            }
            return {mean, second - mean * mean};
        }
        case Family::negbinomial: {
            const double r = spec.params[0], p = spec.params[1];
            const double mean = p * r / (1.0 - p);
            return {mean, mean / (1.0 - p)};
        }
        case Family::genpoisson: {
            const double lam = spec.params[0], eta = spec.params[1];
            const double d = 1.0 - eta;
            return {lam / d, lam / (d * d * d)};
        }
        case Family::cmp: {
            const CumTable table = cum_table(spec);
            double mean = 0.0, second = 0.0;
            for (std::size_t n = 0; n < table.probs.size(); ++n) {
                const double nd = static_cast<double>(n);
                mean += nd * table.probs[n];
                second += nd * nd * table.probs[n];
            }
            return {mean, second - mean * mean};
        }
    }
    throw config_error("unknown family enum");
}

MarginalSpec from_glm(Family family, double mu, const std::vector<double>& extra) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw domain_error("from_glm: mu must be positive and finite");
    switch (family) {
        case Family::poisson:
            return MarginalSpec(Family::poisson, {mu});
        case Family::negbinomial: {
            if (extra.size() != 1 || !(extra[0] > 0.0)) throw domain_error("from_glm: negbinomial needs k > 0");
            const double k = extra[0];
            const double r = 1.0 / k;
            const double p = mu * k / (1.0 + mu * k); // from mu = p r/(1-p)
            return MarginalSpec(Family::negbinomial, {r, p});
        }
        case Family::genpoisson: {
            if (extra.size() != 1 || extra[0] < 0.0) throw domain_error("from_glm: genpoisson needs alpha >= 0");
            const double alpha = extra[0];
            const double denom = 1.0 + alpha * mu;
            return MarginalSpec(Family::genpoisson, {mu / denom, alpha * mu / denom});
        }
        case Family::cmp: {
            if (extra.size() != 1 || !(extra[0] > 0.0)) throw domain_error("from_glm: cmp needs nu > 0");
            return MarginalSpec(Family::cmp, {mu, extra[0]});
        }
        default:
            throw domain_error("from_glm: family has no GLM mean parametrization");
    }
}

std::vector<double> to_glm(const MarginalSpec& spec) {
    spec.validate();
    switch (spec.family) {
        case Family::poisson:
            return {spec.params[0]};
        case Family::negbinomial: {
            const double r = spec.params[0], p = spec.params[1];
            return {p * r / (1.0 - p), 1.0 / r};
        }
        case Family::genpoisson: {
            const double lam = spec.params[0], eta = spec.params[1];
            return {lam / (1.0 - eta), eta / lam};
        }
        case Family::cmp:
            return {spec.params[0], spec.params[1]};
        default:
            throw domain_error("to_glm: family has no GLM mean parametrization");
    }
}

} // namespace lgc
