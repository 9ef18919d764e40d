#include "lgc/estimation.hpp"

#include "lgc/detail/linalg.hpp"
#include "lgc/errors.hpp"
#include "lgc/link.hpp"
#include "lgc/normal.hpp"
#include "lgc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstring>
#include <unordered_map>

namespace lgc {

namespace {
constexpr double kBad = 1e300;
}

std::vector<double> sample_acf(std::span<const double> data, int max_lag) {
    const std::size_t n = data.size();
    if (n < 2) throw data_error("sample_acf: need at least two observations");
    if (max_lag >= static_cast<int>(n)) throw data_error("sample_acf: max_lag must be below the series length");
    double mean = 0.0;
    for (double v : data) mean += v;
    mean /= static_cast<double>(n);
    double denom = 0.0;
    for (double v : data) denom += (v - mean) * (v - mean);
    if (!(denom > 0.0)) throw data_error("sample_acf: series is constant");
    std::vector<double> rho(static_cast<std::size_t>(max_lag) + 1, 0.0);
    rho[0] = 1.0;
    for (int h = 1; h <= max_lag; ++h) {
        double s = 0.0;
        for (std::size_t t = 0; t + static_cast<std::size_t>(h) < n; ++t) {
            s += (data[t] - mean) * (data[t + static_cast<std::size_t>(h)] - mean);
        }
        rho[static_cast<std::size_t>(h)] = s / denom;
    }
    return rho;
}

std::vector<double> sample_acf(std::span<const std::int64_t> data, int max_lag) {
    std::vector<double> d(data.begin(), data.end());
    return sample_acf(std::span<const double>(d), max_lag);
}

std::vector<double> sample_pacf(std::span<const double> acf, int max_lag) {
    if (acf.empty()) throw data_error("sample_pacf: empty ACF");
    std::vector<double> pacf;
    pacf.reserve(static_cast<std::size_t>(max_lag));
    std::vector<double> phi;
    double v = acf[0];
    auto rho = [&](int h) { return h < static_cast<int>(acf.size()) ? acf[static_cast<std::size_t>(h)] : 0.0; };
    for (int m = 1; m <= max_lag; ++m) {
        double num = rho(m);
        for (int j = 1; j <= m - 1; ++j) num -= phi[static_cast<std::size_t>(j - 1)] * rho(m - j);
        const double a = (v > 0.0) ? num / v : 0.0;
        std::vector<double> next(static_cast<std::size_t>(m));
        for (int j = 1; j <= m - 1; ++j) {
            next[static_cast<std::size_t>(j - 1)] =
                phi[static_cast<std::size_t>(j - 1)] - a * phi[static_cast<std::size_t>(m - 1 - j)];
        }
        next[static_cast<std::size_t>(m - 1)] = a;
        phi = std::move(next);
        v *= (1.0 - a * a);
        pacf.push_back(a);
    }
    return pacf;
}

InfoCriteria information_criteria(double loglik, int m, int n_obs) {
    InfoCriteria c;
    const double md = static_cast<double>(m);
    c.aic = -2.0 * loglik + 2.0 * md;
    const double denom = static_cast<double>(n_obs) - 1.0 - md;
    c.aicc = c.aic + (denom > 0.0 ? 2.0 * md * (md + 1.0) / denom
                                  : std::numeric_limits<double>::infinity());
    c.bic = -2.0 * loglik + md * std::log(static_cast<double>(n_obs));
    return c;
}

double iid_loglik(const MarginalSpec& spec, std::span<const std::int64_t> data) {
    const CumTable table = cum_table(spec);
    double ll = 0.0;
    for (std::int64_t x : data) {
        double lp;
        if (x >= 0 && x < static_cast<std::int64_t>(table.probs.size()) &&
            table.probs[static_cast<std::size_t>(x)] > 0.0) {
            lp = std::log(table.probs[static_cast<std::size_t>(x)]);
        } else {
            lp = log_pmf(spec, x);
        }
        if (lp == -std::numeric_limits<double>::infinity()) return lp;
        ll += lp;
    }
    return ll;
}

// ---------------------------------------------------------------------------
// parameter packing
// ---------------------------------------------------------------------------

namespace {

struct Packing {
    ModelSpec model;
    std::vector<std::string> names;  // free parameters, estimation order
    std::vector<ParamKind> kinds;    // scalar block only

    ParamMap map() const { return ParamMap(kinds, model.p, model.q); }

    MarginalSpec to_marginal(const std::vector<double>& nat) const {
        switch (model.family) {
            case Family::poisson: return {Family::poisson, {nat[0]}};
            case Family::binomial: return {Family::binomial, {model.binomial_n, nat[0]}};
            case Family::mixpoisson: return {Family::mixpoisson, {nat[0], nat[1], nat[2]}};
            case Family::negbinomial: return {Family::negbinomial, {nat[0], nat[1]}};
            case Family::genpoisson: return {Family::genpoisson, {nat[0], nat[1]}};
            case Family::cmp: return {Family::cmp, {nat[0], nat[1]}};
        }
        throw config_error("unknown family");
    }

    RegressionSpec to_regression(const std::vector<double>& nat) const {
        RegressionSpec reg;
        reg.family = model.family;
        reg.covariates = model.covariates;
        reg.link_param = model.link_param;
        const std::size_t nbeta = model.covariates.empty() ? 1 : model.covariates[0].size() + 1;
        reg.beta.assign(nat.begin(), nat.begin() + nbeta);
        reg.statics.assign(nat.begin() + nbeta, nat.begin() + static_cast<std::ptrdiff_t>(kinds.size()));
        return reg;
    }

    LatentModel to_latent(const std::vector<double>& nat) const {
        LatentModel m;
        const std::size_t s = kinds.size();
        m.ar.assign(nat.begin() + s, nat.begin() + s + model.p);
        m.ma.assign(nat.begin() + s + model.p, nat.end());
        return m;
    }
};

Packing make_packing(const ModelSpec& model) {
    Packing pk;
    pk.model = model;
    if (model.has_regression()) {
        RegressionSpec probe;
        probe.family = model.family;
        probe.link_param = model.link_param;
        probe.beta = {0.0};
        probe.covariates = {};
        probe.validate(); // family/link sanity
        const std::size_t j = model.covariates[0].size();
        for (std::size_t b = 0; b <= j; ++b) {
            pk.names.push_back("beta" + std::to_string(b));
            pk.kinds.push_back(ParamKind::identity);
        }
        if (model.link_param == "mean") {
            switch (model.family) {
                case Family::negbinomial:
                    pk.names.push_back("k");
                    pk.kinds.push_back(ParamKind::positive);
                    break;
                case Family::genpoisson:
                    pk.names.push_back("alpha");
                    pk.kinds.push_back(ParamKind::positive);
                    break;
                case Family::cmp:
                    pk.names.push_back("nu");
                    pk.kinds.push_back(ParamKind::positive);
                    break;
                case Family::poisson:
                    break;
                default:
                    throw config_error("regression: unsupported family");
            }
        } else {
            pk.names.push_back("mu");
            pk.kinds.push_back(ParamKind::positive);
        }
    } else {
        switch (model.family) {
            case Family::poisson:
                pk.names = {"lambda"};
                pk.kinds = {ParamKind::positive};
                break;
            case Family::binomial:
                pk.names = {"p"};
                pk.kinds = {ParamKind::unit};
                break;
            case Family::mixpoisson:
                if (model.mixture_m != 2) {
                    throw config_error("estimation supports the two-component Poisson mixture");
                }
                pk.names = {"lambda1", "lambda2", "p"};
                pk.kinds = {ParamKind::positive, ParamKind::positive, ParamKind::half_unit};
                break;
            case Family::negbinomial:
                pk.names = {"r", "p"};
                pk.kinds = {ParamKind::positive, ParamKind::unit};
                break;
            case Family::genpoisson:
                pk.names = {"lambda", "eta"};
                pk.kinds = {ParamKind::positive, ParamKind::unit_closed0};
                break;
            case Family::cmp:
                pk.names = {"lambda", "nu"};
                pk.kinds = {ParamKind::positive, ParamKind::positive};
                break;
        }
    }
    for (int i = 1; i <= model.p; ++i) pk.names.push_back("phi" + std::to_string(i));
    for (int i = 1; i <= model.q; ++i) pk.names.push_back("theta" + std::to_string(i));
    return pk;
}

std::pair<double, double> sample_moments(std::span<const std::int64_t> data) {
    double m = 0.0;
    for (std::int64_t x : data) m += static_cast<double>(x);
    m /= static_cast<double>(data.size());
    double v = 0.0;
    for (std::int64_t x : data) {
        const double d = static_cast<double>(x) - m;
        v += d * d;
    }
    v /= static_cast<double>(data.size());
    return {m, v};
}

/// Latent AR starting values through the inverse link on the sample ACF.
std::vector<double> latent_start(std::span<const std::int64_t> data, const MarginalSpec& spec,
                                 int p, int link_order) {
    if (p == 0) return {};
    std::vector<double> phi(static_cast<std::size_t>(p), 0.0);
    try {
        const LinkTable ltab = link_table_fast(spec, link_order);
        const double lm1 = link_eval(ltab, -1.0);
        std::vector<double> rho = sample_acf(data, p);
        std::vector<double> gz(static_cast<std::size_t>(p) + 1, 1.0);
        for (int h = 1; h <= p; ++h) {
            const double r = std::clamp(rho[static_cast<std::size_t>(h)], lm1 + 1e-4, 1.0 - 1e-4);
            gz[static_cast<std::size_t>(h)] = link_inverse(ltab, r);
        }
        for (int attempt = 0; attempt < 200; ++attempt) {
            detail::Mat g(static_cast<std::size_t>(p));
            std::vector<double> rhs(static_cast<std::size_t>(p));
            for (int i = 0; i < p; ++i) {
                rhs[static_cast<std::size_t>(i)] = gz[static_cast<std::size_t>(i) + 1];
                for (int j = 0; j < p; ++j) {
                    g(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                        gz[static_cast<std::size_t>(std::abs(i - j))];
                }
            }
            phi = detail::gauss_solve(std::move(g), rhs);
            try {
                (void)ar_to_pacf(phi);
                return phi;
            } catch (const domain_error&) {
                for (int h = 1; h <= p; ++h) gz[static_cast<std::size_t>(h)] *= 0.98;
            }
        }
    } catch (const error&) {
        // fall through to zeros
    }
    return std::vector<double>(static_cast<std::size_t>(p), 0.0);
}

std::vector<double> initial_natural(const Packing& pk, std::span<const std::int64_t> data,
                                    const EstimOptions& opts) {
    const auto [m, v] = sample_moments(data);
    std::vector<double> nat;
    MarginalSpec start_spec;
    if (pk.model.has_regression()) {
        const double mu0 = std::max(m, 0.1);
        double disp = 0.1;
        switch (pk.model.family) {
            case Family::negbinomial: disp = std::max((v - m) / (m * m), 0.02); break;
            case Family::genpoisson: disp = std::max((std::sqrt(std::max(v, 1e-6) / mu0) - 1.0) / mu0, 1e-3); break;
            case Family::cmp: disp = 1.0; break;
            default: break;
        }
        const std::size_t nbeta = pk.model.covariates[0].size() + 1;
        if (pk.model.link_param == "mean") {
            nat.push_back(std::log(mu0));
            for (std::size_t b = 1; b < nbeta; ++b) nat.push_back(0.0);
            if (pk.model.family != Family::poisson) nat.push_back(disp);
            start_spec = from_glm(pk.model.family, mu0,
                                  pk.model.family == Family::poisson ? std::vector<double>{}
                                                                     : std::vector<double>{disp});
        } else {
            nat.push_back(std::log(std::max(disp, 1e-3)));
            for (std::size_t b = 1; b < nbeta; ++b) nat.push_back(0.0);
            nat.push_back(mu0);
            start_spec = from_glm(pk.model.family, mu0, {disp});
        }
    } else {
        start_spec = fit_marginal_mle(pk.model.family, data, pk.model.binomial_n, pk.model.mixture_m);
        switch (pk.model.family) {
            case Family::poisson: nat = {start_spec.params[0]}; break;
            case Family::binomial: nat = {start_spec.params[1]}; break;
            case Family::mixpoisson:
                nat = {start_spec.params[0], start_spec.params[1], start_spec.params[2]};
                break;
            default: nat = {start_spec.params[0], start_spec.params[1]}; break;
        }
    }
    const std::vector<double> phi0 = latent_start(data, start_spec, pk.model.p, opts.link_order);
    nat.insert(nat.end(), phi0.begin(), phi0.end());
    for (int i = 0; i < pk.model.q; ++i) nat.push_back(0.0);
    return nat;
}

/// Builds per-time prepared marginals for a regression path, sharing distinct
/// parameter rows.
std::vector<PreparedMarginal> prepare_path(const std::vector<MarginalSpec>& path, std::int64_t x_max) {
    std::unordered_map<std::uint64_t, std::size_t> seen;
    std::vector<PreparedMarginal> uniq;
    std::vector<std::size_t> idx(path.size());
    for (std::size_t t = 0; t < path.size(); ++t) {
        const std::uint64_t key = spec_key_hash(path[t], 0);
        auto it = seen.find(key);
        if (it == seen.end()) {
            it = seen.emplace(key, uniq.size()).first;
            uniq.push_back(prepare(path[t], x_max));
        }
        idx[t] = it->second;
    }
    std::vector<PreparedMarginal> out;
    out.reserve(path.size());
    for (std::size_t t = 0; t < path.size(); ++t) out.push_back(uniq[idx[t]]);
    return out;
}

double dense_gaussian_loglik(detail::Mat cov, const std::vector<double>& mean,
                             std::span<const std::int64_t> data) {
    const std::size_t n = data.size();
    detail::cholesky(cov);
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = static_cast<double>(data[i]) - mean[i];
    const std::vector<double> y = detail::forward_solve(cov, resid);
    double quad = 0.0, logdet = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        quad += y[i] * y[i];
        logdet += std::log(cov(i, i));
    }
    constexpr double kLog2Pi = 1.8378770664093454835606594;
    return -0.5 * (quad + static_cast<double>(n) * kLog2Pi) - logdet;
}

FitResult base_result(const Packing& pk, std::string method) {
    FitResult fr;
    fr.method = std::move(method);
    fr.family = family_name(pk.model.family);
    fr.p = pk.model.p;
    fr.q = pk.model.q;
    fr.regression = pk.model.has_regression();
    fr.link_param = pk.model.link_param;
    fr.names = pk.names;
    fr.binomial_n = pk.model.binomial_n;
    return fr;
}

} // namespace

MarginalSpec fit_marginal_mle(Family family, std::span<const std::int64_t> data, double binomial_n,
                              int mixture_m) {
    if (data.empty()) throw data_error("fit_marginal_mle: empty data");
    const auto [m, v] = sample_moments(data);
    if (family == Family::poisson) {
        return {Family::poisson, {std::max(m, 1e-10)}};
    }
    if (family == Family::binomial) {
        const double p = std::clamp(m / binomial_n, 1e-10, 1.0 - 1e-10);
        return {Family::binomial, {binomial_n, p}};
    }

    ModelSpec ms;
    ms.family = family;
    ms.binomial_n = binomial_n;
    ms.mixture_m = mixture_m;
    const Packing pk = make_packing(ms);
    const ParamMap map = pk.map();

    std::vector<std::vector<double>> starts;
    switch (family) {
        case Family::negbinomial: {
            const double p0 = std::clamp(1.0 - m / std::max(v, m + 0.05), 0.02, 0.98);
            const double r0 = std::max(m * (1.0 - p0) / p0, 0.05);
            starts.push_back({r0, p0});
            starts.push_back({1.0, 0.5});
            break;
        }
        case Family::genpoisson: {
            const double eta0 = std::clamp(1.0 - std::sqrt(m / std::max(v, m + 1e-3)), 1e-4, 0.9);
            starts.push_back({std::max(m * (1.0 - eta0), 1e-3), eta0});
            starts.push_back({std::max(m, 0.1), 0.01});
            break;
        }
        case Family::mixpoisson: {
            starts.push_back({std::max(0.5 * m, 0.05), std::max(1.5 * m, 0.1), 0.3});
            starts.push_back({std::max(0.25 * m, 0.05), std::max(1.8 * m, 0.1), 0.4});
            starts.push_back({std::max(0.75 * m, 0.05), std::max(1.25 * m, 0.1), 0.15});
            break;
        }
        case Family::cmp: {
            starts.push_back({std::max(m, 0.1), 1.0});
            break;
        }
        default:
            throw config_error("fit_marginal_mle: unsupported family");
    }

    auto obj = [&](const std::vector<double>& x) {
        try {
            const std::vector<double> nat = map.to_natural(x);
            return -iid_loglik(pk.to_marginal(nat), data);
        } catch (const error&) {
            return kBad;
        }
    };
    double best = kBad;
    std::vector<double> best_nat;
    for (const auto& s : starts) {
        NelderMeadOptions nm;
        nm.tol = 1e-8;
        const OptimResult r = nelder_mead(obj, map.to_unconstrained(s), nm);
        if (r.value < best) {
            best = r.value;
            best_nat = map.to_natural(r.x);
        }
    }
    if (best_nat.empty()) throw numerical_error("fit_marginal_mle: optimization failed");
    return pk.to_marginal(best_nat);
}

FitResult fit_gl(std::span<const std::int64_t> data, const ModelSpec& model, const EstimOptions& opts) {
    const Packing pk = make_packing(model);
    const ParamMap map = pk.map();
    const int T = static_cast<int>(data.size()) - 1;
    FitResult fr = base_result(pk, "gl");
    if (data.size() < 10 * map.dim()) fr.warnings.push_back("short series for the parameter count");

    std::vector<double> data_d(data.begin(), data.end());

    Objective neg_ll = [&](const std::vector<double>& x) -> double {
        try {
            const std::vector<double> nat = map.to_natural(x);
            const LatentModel latent = pk.to_latent(nat);
            const std::vector<double> rho = arma_acvf(latent, T);
            if (!pk.model.has_regression()) {
                const MarginalSpec spec = pk.to_marginal(nat);
                const LinkTable ltab = link_table_fast(spec, opts.link_order);
                const double mu = ltab.mean;
                std::vector<double> gamma(static_cast<std::size_t>(T) + 1);
                for (int h = 0; h <= T; ++h) {
                    gamma[static_cast<std::size_t>(h)] =
                        ltab.var0 * link_eval(ltab, rho[static_cast<std::size_t>(h)]);
                }
                std::vector<double> mean(data.size(), mu);
                return -gaussian_loglik(gamma, mean, data_d);
            }
            const RegressionSpec reg = pk.to_regression(nat);
            const std::vector<MarginalSpec> path = theta_path(reg);
            std::unordered_map<std::uint64_t, std::size_t> seen;
            std::vector<LinkTable> tabs;
            std::vector<std::size_t> idx(path.size());
            std::vector<double> mean(path.size());
            for (std::size_t t = 0; t < path.size(); ++t) {
                const std::uint64_t key = spec_key_hash(path[t], opts.link_order);
                auto it = seen.find(key);
                if (it == seen.end()) {
                    it = seen.emplace(key, tabs.size()).first;
                    tabs.push_back(link_table_fast(path[t], opts.link_order));
                }
                idx[t] = it->second;
                mean[t] = tabs[idx[t]].mean;
            }
            detail::Mat cov(path.size());
            for (std::size_t s = 0; s < path.size(); ++s) {
                for (std::size_t t = s; t < path.size(); ++t) {
                    const double c = cross_link(tabs[idx[s]], tabs[idx[t]], rho[t - s]);
                    cov(s, t) = c;
                    cov(t, s) = c;
                }
            }
            return -dense_gaussian_loglik(std::move(cov), mean, data);
        } catch (const error&) {
            return kBad;
        }
    };

    const std::vector<double> x0 =
        map.to_unconstrained(opts.start ? *opts.start : initial_natural(pk, data, opts));
    const OptimResult r = nelder_mead(neg_ll, x0, opts.nm);
    fr.estimates = map.to_natural(r.x);
    fr.converged = r.converged && r.value < kBad;
    fr.iterations = r.iterations;
    fr.evaluations = r.evaluations;
    fr.loglik = -r.value;
    const InfoCriteria ic = information_criteria(*fr.loglik, static_cast<int>(map.dim()),
                                                 static_cast<int>(data.size()));
    fr.aic = ic.aic;
    fr.aicc = ic.aicc;
    fr.bic = ic.bic;
    if (opts.std_errors && fr.converged) {
        Objective ll = [&](const std::vector<double>& x) { return -neg_ll(x); };
        fr.std_errors = hessian_std_errors(ll, r.x, map, fr.names, opts.fd_step, fr.warnings);
    }
    return fr;
}

FitResult fit_iyw(std::span<const std::int64_t> data, Family family, int p, const EstimOptions& opts) {
    if (p < 1) throw config_error("fit_iyw: latent model must be AR(p) with p >= 1");
    ModelSpec model;
    model.family = family;
    model.p = p;
    const Packing pk = make_packing(model);
    FitResult fr = base_result(pk, "iyw");

    const MarginalSpec spec = fit_marginal_mle(family, data);
    const LinkTable ltab = link_table(spec, opts.link_order, opts.link_mc_paths);
    const double lm1 = *ltab.l_minus1;

    const std::vector<double> rho = sample_acf(data, p);
    std::vector<double> gz(static_cast<std::size_t>(p) + 1, 1.0);
    bool clamped = false;
    for (int h = 1; h <= p; ++h) {
        double r = rho[static_cast<std::size_t>(h)];
        const double r2 = std::clamp(r, lm1 + 1e-4, 1.0 - 1e-4);
        if (r2 != r) clamped = true;
        gz[static_cast<std::size_t>(h)] = link_inverse(ltab, r2);
    }
    if (clamped) fr.warnings.push_back("sample ACF clamped into the achievable correlation range");

    std::vector<double> phi;
    bool shrunk = false;
    for (int attempt = 0; attempt < 200; ++attempt) {
        detail::Mat g(static_cast<std::size_t>(p));
        std::vector<double> rhs(static_cast<std::size_t>(p));
        for (int i = 0; i < p; ++i) {
            rhs[static_cast<std::size_t>(i)] = gz[static_cast<std::size_t>(i) + 1];
            for (int j = 0; j < p; ++j) {
                g(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                    gz[static_cast<std::size_t>(std::abs(i - j))];
            }
        }
        phi = detail::gauss_solve(std::move(g), rhs);
        try {
            (void)ar_to_pacf(phi);
            break;
        } catch (const domain_error&) {
            if (attempt == 199) throw numerical_error("fit_iyw: could not reach a causal solution");
            for (int h = 1; h <= p; ++h) gz[static_cast<std::size_t>(h)] *= 0.98;
            shrunk = true;
        }
    }
    if (shrunk) fr.warnings.push_back("implied latent ACVF shrunk toward zero for causality");

    switch (family) {
        case Family::poisson: fr.estimates = {spec.params[0]}; break;
        case Family::binomial: fr.estimates = {spec.params[1]}; break;
        default: fr.estimates.assign(spec.params.begin(), spec.params.end()); break;
    }
    fr.estimates.insert(fr.estimates.end(), phi.begin(), phi.end());
    fr.converged = true;
    return fr;
}

FitResult fit_pf(std::span<const std::int64_t> data, const ModelSpec& model, const EstimOptions& opts) {
    const Packing pk = make_packing(model);
    const ParamMap map = pk.map();
    const int T = static_cast<int>(data.size()) - 1;
    FitResult fr = base_result(pk, "pf");
    fr.seed = opts.seed;
    fr.particles = opts.particles;
    fr.filter = filter_kind_name(opts.filter);
    if (data.size() < 10 * map.dim()) fr.warnings.push_back("short series for the parameter count");

    std::int64_t x_max = 0;
    for (std::int64_t x : data) x_max = std::max(x_max, x);

    auto loglik_with_seed = [&](const std::vector<double>& x, std::uint64_t seed) -> double {
        try {
            const std::vector<double> nat = map.to_natural(x);
            const LatentModel latent = pk.to_latent(nat);
            const std::vector<double> acvf = arma_acvf(latent, T + 1);
            const DlCoeffs dl(acvf, T + 1);
            FilterOptions fo;
            fo.kind = opts.filter;
            fo.particles = opts.particles;
            fo.ess_fraction = opts.ess_fraction;
            fo.seed = seed;
            fo.exec = opts.exec;
            fo.throw_on_impossible = false;
            std::vector<PreparedMarginal> margs;
            if (!pk.model.has_regression()) {
                margs.push_back(prepare(pk.to_marginal(nat), x_max));
            } else {
                margs = prepare_path(theta_path(pk.to_regression(nat)), x_max);
            }
            const FilterResult res = run_filter(data, margs, dl, fo);
            return res.loglik;
        } catch (const error&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    Objective neg_crn = [&](const std::vector<double>& x) {
        const double ll = loglik_with_seed(x, opts.seed);
        return std::isfinite(ll) ? -ll : kBad;
    };

    const std::vector<double> x0 =
        map.to_unconstrained(opts.start ? *opts.start : initial_natural(pk, data, opts));
    OptimResult r;
    if (opts.global_search) {
        // fresh filter noise per point: seed from the parameter bits
        Objective noisy = [&](const std::vector<double>& x) {
            std::uint64_t h = opts.seed;
            for (double v : x) {
                std::uint64_t bits;
                std::memcpy(&bits, &v, sizeof bits);
                h = detail::mix64(h ^ bits);
            }
            const double ll = loglik_with_seed(x, h);
            return std::isfinite(ll) ? -ll : kBad;
        };
        DifferentialEvolutionOptions de = opts.de;
        de.seed = detail::mix64(opts.seed ^ 0xde0ull);
        r = differential_evolution(noisy, x0, de);
        // settle on the CRN surface for a comparable likelihood value
        const OptimResult polish = nelder_mead(neg_crn, r.x, opts.nm);
        r = polish;
    } else {
        r = nelder_mead(neg_crn, x0, opts.nm);
    }

    fr.estimates = map.to_natural(r.x);
    fr.converged = r.converged && r.value < kBad;
    fr.iterations = r.iterations;
    fr.evaluations = r.evaluations;
    fr.loglik = -r.value;
    const InfoCriteria ic = information_criteria(*fr.loglik, static_cast<int>(map.dim()),
                                                 static_cast<int>(data.size()));
    fr.aic = ic.aic;
    fr.aicc = ic.aicc;
    fr.bic = ic.bic;
    if (opts.std_errors && fr.converged) {
        Objective ll = [&](const std::vector<double>& x) {
            const double v = loglik_with_seed(x, opts.seed);
            return std::isfinite(v) ? v : -kBad;
        };
        fr.std_errors = hessian_std_errors(ll, r.x, map, fr.names, 10.0 * opts.fd_step, fr.warnings);
    }
    return fr;
}

std::map<std::string, double> hessian_std_errors(const Objective& loglik,
                                                 const std::vector<double>& x_hat, const ParamMap& map,
                                                 const std::vector<std::string>& names, double rel_step,
                                                 std::vector<std::string>& warnings) {
    const std::size_t n = x_hat.size();
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = rel_step * (1.0 + std::fabs(x_hat[i]));

    auto at = [&](std::vector<double> x, std::size_t i, double di, std::size_t j, double dj) {
        x[i] += di;
        x[j] += dj;
        return loglik(x);
    };
    const double f0 = loglik(x_hat);
    detail::Mat neg_h(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double hij;
            if (i == j) {
                const double fp = at(x_hat, i, h[i], i, 0.0);
                const double fm = at(x_hat, i, -h[i], i, 0.0);
                hij = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
            } else {
                const double fpp = at(x_hat, i, h[i], j, h[j]);
                const double fpm = at(x_hat, i, h[i], j, -h[j]);
                const double fmp = at(x_hat, i, -h[i], j, h[j]);
                const double fmm = at(x_hat, i, -h[i], j, -h[j]);
                hij = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            }
            neg_h(i, j) = -hij;
            neg_h(j, i) = -hij;
        }
    }
    detail::Mat cov_x(n);
    try {
        cov_x = detail::spd_inverse(neg_h);
    } catch (const numerical_error&) {
        warnings.push_back("standard errors unavailable: Hessian not negative definite");
        return {};
    }
    // delta method through the transform jacobian
    detail::Mat jac(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> xp = x_hat, xm = x_hat;
        xp[j] += h[j];
        xm[j] -= h[j];
        const std::vector<double> np = map.to_natural(xp);
        const std::vector<double> nm = map.to_natural(xm);
        for (std::size_t i = 0; i < n; ++i) jac(i, j) = (np[i] - nm[i]) / (2.0 * h[j]);
    }
    std::map<std::string, double> se;
    for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) v += jac(i, a) * cov_x(a, b) * jac(i, b);
        }
        if (v >= 0.0) se[names[i]] = std::sqrt(v);
    }
    return se;
}

// ---------------------------------------------------------------------------
// FitResult reconstruction
// ---------------------------------------------------------------------------

double FitResult::value_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return estimates[i];
    }
    throw config_error("FitResult: no parameter named '" + name + "'");
}

MarginalSpec FitResult::marginal() const {
    if (regression) throw config_error("FitResult::marginal: fit has a regression component");
    const Family fam = family_from_name(family);
    switch (fam) {
        case Family::poisson: return {fam, {value_of("lambda")}};
        case Family::binomial: return {fam, {binomial_n, value_of("p")}};
        case Family::mixpoisson:
            return {fam, {value_of("lambda1"), value_of("lambda2"), value_of("p")}};
        case Family::negbinomial: return {fam, {value_of("r"), value_of("p")}};
        case Family::genpoisson: return {fam, {value_of("lambda"), value_of("eta")}};
        case Family::cmp: return {fam, {value_of("lambda"), value_of("nu")}};
    }
    throw config_error("unknown family");
}

RegressionSpec FitResult::regression_spec(std::vector<std::vector<double>> covariates) const {
    if (!regression) throw config_error("FitResult::regression_spec: stationary fit");
    RegressionSpec reg;
    reg.family = family_from_name(family);
    reg.link_param = link_param;
    reg.covariates = std::move(covariates);
    for (std::size_t b = 0;; ++b) {
        const std::string nm = "beta" + std::to_string(b);
        bool found = false;
        for (const auto& n : names) {
            if (n == nm) {
                found = true;
                break;
            }
        }
        if (!found) break;
        reg.beta.push_back(value_of(nm));
    }
    if (link_param == "mean") {
        if (reg.family == Family::negbinomial) reg.statics = {value_of("k")};
        if (reg.family == Family::genpoisson) reg.statics = {value_of("alpha")};
        if (reg.family == Family::cmp) reg.statics = {value_of("nu")};
    } else {
        reg.statics = {value_of("mu")};
    }
    return reg;
}

LatentModel FitResult::latent() const {
    LatentModel m;
    for (int i = 1; i <= p; ++i) m.ar.push_back(value_of("phi" + std::to_string(i)));
    for (int i = 1; i <= q; ++i) m.ma.push_back(value_of("theta" + std::to_string(i)));
    return m;
}

} // namespace lgc
