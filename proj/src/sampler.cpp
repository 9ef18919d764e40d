#include "lgc/sampler.hpp"

#include "lgc/errors.hpp"
#include "lgc/link.hpp"
#include "lgc/normal.hpp"

#include <cmath>
#include <map>
#include <string>

namespace lgc {

void RegressionSpec::validate() const {
    if (beta.empty()) throw config_error("regression: beta must contain at least the intercept");
    const std::size_t j = covariate_count();
    for (const auto& row : covariates) {
        if (row.size() != j) throw config_error("regression: covariate row width does not match beta");
    }
    if (link_param != "mean" && link_param != "dispersion") {
        throw config_error("regression: link_param must be 'mean' or 'dispersion'");
    }
    if (family == Family::binomial || family == Family::mixpoisson) {
        throw config_error("regression: family '" + family_name(family) + "' has no log-link parametrization");
    }
    if (link_param == "dispersion") {
        if (family == Family::poisson) throw config_error("regression: poisson has no dispersion parameter");
        if (statics.empty()) throw config_error("regression: dispersion link needs the mean in statics[0]");
    }
}

std::vector<MarginalSpec> theta_path(const RegressionSpec& reg) {
    reg.validate();
    const std::size_t t_count = reg.covariates.empty() ? 1 : reg.covariates.size();
    std::vector<MarginalSpec> out;
    out.reserve(t_count);
    for (std::size_t t = 0; t < t_count; ++t) {
        double lin = reg.beta[0];
        for (std::size_t j = 0; j + 1 < reg.beta.size(); ++j) {
            lin += reg.beta[j + 1] * reg.covariates[t][j];
        }
        const double driven = std::exp(lin);
        if (!std::isfinite(driven)) {
            throw domain_error("theta_path: exp overflow at t = " + std::to_string(t));
        }
        try {
            if (reg.link_param == "mean") {
                out.push_back(from_glm(reg.family, driven, reg.statics));
            } else {
                out.push_back(from_glm(reg.family, reg.statics[0], {driven}));
            }
        } catch (const domain_error& e) {
            throw domain_error("theta_path: invalid parameters at t = " + std::to_string(t) + ": " + e.what());
        }
    }
    return out;
}

namespace {

std::vector<std::int64_t> transform_counts(const std::vector<double>& z,
                                           const std::vector<const CumTable*>& tables) {
    std::vector<std::int64_t> x(z.size());
    const double u_hi = std::nextafter(1.0, 0.0);
    const double u_lo = std::nextafter(0.0, 1.0);
    for (std::size_t t = 0; t < z.size(); ++t) {
        double u = norm_cdf(z[t]);
        if (u <= 0.0) u = u_lo;
        if (u >= 1.0) u = u_hi;
        const CumTable* tab = tables.size() == 1 ? tables[0] : tables[t];
        x[t] = quantile(*tab, u);
    }
    return x;
}

} // namespace

SimulatedSeries simulate_series(const MarginalSpec& spec, const LatentModel& model, int T,
                                std::uint64_t seed) {
    spec.validate();
    SimulatedSeries s;
    s.z = simulate_latent(model, T, seed);
    const CumTable table = cum_table(spec);
    s.x = transform_counts(s.z, {&table});
    return s;
}

SimulatedSeries simulate_series(const RegressionSpec& reg, const LatentModel& model,
                                std::uint64_t seed) {
    const std::vector<MarginalSpec> path = theta_path(reg);
    const int T = static_cast<int>(path.size()) - 1;
    SimulatedSeries s;
    s.z = simulate_latent(model, T, seed);

    // Distinct covariate rows are usually few; build each distinct table once.
    std::map<std::uint64_t, CumTable> cache;
    std::vector<const CumTable*> tables(path.size());
    for (std::size_t t = 0; t < path.size(); ++t) {
        const std::uint64_t key = spec_key_hash(path[t], 0);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, cum_table(path[t])).first;
        tables[t] = &it->second;
    }
    s.x = transform_counts(s.z, tables);
    return s;
}

std::vector<std::int64_t> simulate_counts(const MarginalSpec& spec, const LatentModel& model,
                                          int T, std::uint64_t seed) {
    return simulate_series(spec, model, T, seed).x;
}

std::vector<std::int64_t> simulate_counts(const RegressionSpec& reg, const LatentModel& model,
                                          std::uint64_t seed) {
    return simulate_series(reg, model, seed).x;
}

} // namespace lgc
