#include "lgc/optim.hpp"

#include "lgc/arma.hpp"
#include "lgc/errors.hpp"
#include "lgc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lgc {

namespace {

double guarded(const Objective& f, const std::vector<double>& x, int& evals) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : 1e300;
}

} // namespace

OptimResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts) {
    const std::size_t n = x0.size();
    if (n == 0) throw config_error("nelder_mead: empty parameter vector");
    const double nd = static_cast<double>(n);
    // adaptive constants (Gao & Han)
    const double alpha = 1.0;
    const double beta = 1.0 + 2.0 / nd;
    const double gamma = 0.75 - 0.5 / nd;
    const double delta = 1.0 - 1.0 / nd;

    OptimResult res;
    int evals = 0;
    std::vector<std::vector<double>> simplex;
    std::vector<double> fv;

    auto build_simplex = [&](const std::vector<double>& center, double step) {
        simplex.assign(1, center);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> v = center;
            v[i] += step;
            simplex.push_back(std::move(v));
        }
        fv.resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i) fv[i] = guarded(f, simplex[i], evals);
    };

    auto order = [&]() {
        std::vector<std::size_t> idx(n + 1);
        std::iota(idx.begin(), idx.end(), 0u);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> s2(n + 1);
        std::vector<double> f2(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            s2[i] = simplex[idx[i]];
            f2[i] = fv[idx[i]];
        }
        simplex.swap(s2);
        fv.swap(f2);
    };

    double step = opts.initial_step;
    build_simplex(x0, step);
    int iter = 0;
    int restarts_left = opts.restarts;
    while (iter < opts.max_iterations) {
        ++iter;
        order();
        if (std::fabs(fv[n] - fv[0]) < opts.tol) {
            if (restarts_left-- > 0) {
                // restart around the incumbent with a smaller simplex; guards
                // against premature shrink collapse
                step *= 0.25;
                std::vector<double> best = simplex[0];
                build_simplex(best, std::max(step, 1e-4));
                order();
                if (std::fabs(fv[n] - fv[0]) < opts.tol) {
                    res.converged = true;
                    break;
                }
                continue;
            }
            res.converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
        }
        for (double& c : centroid) c /= nd;

        auto blend = [&](double coef) {
            std::vector<double> v(n);
            for (std::size_t j = 0; j < n; ++j) v[j] = centroid[j] + coef * (simplex[n][j] - centroid[j]);
            return v;
        };
        std::vector<double> xr = blend(-alpha);
        const double fr = guarded(f, xr, evals);
        if (fr < fv[0]) {
            std::vector<double> xe = blend(-alpha * beta);
            const double fe = guarded(f, xe, evals);
            if (fe < fr) {
                simplex[n] = std::move(xe);
                fv[n] = fe;
            } else {
                simplex[n] = std::move(xr);
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            simplex[n] = std::move(xr);
            fv[n] = fr;
        } else {
            const bool outside = fr < fv[n];
            std::vector<double> xc = blend(outside ? -alpha * gamma : gamma);
            const double fc = guarded(f, xc, evals);
            if (fc < std::min(fr, fv[n])) {
                simplex[n] = std::move(xc);
                fv[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        simplex[i][j] = simplex[0][j] + delta * (simplex[i][j] - simplex[0][j]);
                    }
                    fv[i] = guarded(f, simplex[i], evals);
                }
            }
        }
    }
    order();
    res.x = simplex[0];
    res.value = fv[0];
    res.iterations = iter;
    res.evaluations = evals;
    return res;
}

OptimResult differential_evolution(const Objective& f, std::vector<double> x0,
                                   const DifferentialEvolutionOptions& opts) {
    const std::size_t n = x0.size();
    if (n == 0) throw config_error("differential_evolution: empty parameter vector");
    const int np = opts.population > 0 ? opts.population : static_cast<int>(10 * n);
    const CounterRng rng(opts.seed);

    OptimResult res;
    int evals = 0;
    std::vector<std::vector<double>> pop(static_cast<std::size_t>(np), x0);
    std::vector<double> fv(static_cast<std::size_t>(np));
    for (int i = 0; i < np; ++i) {
        if (i > 0) {
            for (std::size_t j = 0; j < n; ++j) {
                const double u = rng.uniform(streams::mc_generic, static_cast<std::uint64_t>(i), j);
                pop[static_cast<std::size_t>(i)][j] = x0[j] + opts.init_radius * (2.0 * u - 1.0);
            }
        }
        fv[static_cast<std::size_t>(i)] = guarded(f, pop[static_cast<std::size_t>(i)], evals);
    }

    std::vector<double> trial(n);
    for (int g = 1; g <= opts.generations; ++g) {
        for (int i = 0; i < np; ++i) {
            const std::uint64_t tag = static_cast<std::uint64_t>(g) * 1000003ull + static_cast<std::uint64_t>(i);
            auto pick = [&](int salt) {
                int r;
                int probe = 0;
                do {
                    r = static_cast<int>(rng.uniform(streams::mc_generic, tag, 100 + salt * 31 + probe++) * np);
                    r = std::min(r, np - 1);
                } while (r == i);
                return r;
            };
            const int a = pick(1), b = pick(2), c = pick(3);
            const std::size_t jrand = std::min<std::size_t>(
                static_cast<std::size_t>(rng.uniform(streams::mc_generic, tag, 7) * n), n - 1);
            for (std::size_t j = 0; j < n; ++j) {
                const double u = rng.uniform(streams::mc_generic, tag, 10 + j);
                if (u < opts.crossover || j == jrand) {
                    trial[j] = pop[static_cast<std::size_t>(a)][j] +
                               opts.weight * (pop[static_cast<std::size_t>(b)][j] - pop[static_cast<std::size_t>(c)][j]);
                } else {
                    trial[j] = pop[static_cast<std::size_t>(i)][j];
                }
            }
            const double ft = guarded(f, trial, evals);
            if (ft <= fv[static_cast<std::size_t>(i)]) {
                pop[static_cast<std::size_t>(i)] = trial;
                fv[static_cast<std::size_t>(i)] = ft;
            }
        }
        res.iterations = g;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
        if (fv[i] < fv[best]) best = i;
    }
    res.x = pop[best];
    res.value = fv[best];
    res.evaluations = evals;
    res.converged = true;
    return res;
}

namespace {

double clamp_unit(double v) { return std::clamp(v, 1e-12, 1.0 - 1e-12); }

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

std::vector<double> ParamMap::to_unconstrained(const std::vector<double>& natural) const {
    if (natural.size() != dim()) throw config_error("ParamMap: natural vector has wrong length");
    std::vector<double> x;
    x.reserve(dim());
    for (std::size_t i = 0; i < kinds_.size(); ++i) {
        const double v = natural[i];
        switch (kinds_[i]) {
            case ParamKind::identity: x.push_back(v); break;
            case ParamKind::positive: x.push_back(std::log(std::max(v, 1e-300))); break;
            case ParamKind::unit: x.push_back(logit(clamp_unit(v))); break;
            case ParamKind::half_unit: x.push_back(logit(clamp_unit(2.0 * v))); break;
            case ParamKind::unit_closed0: x.push_back(logit(clamp_unit(v))); break;
        }
    }
    auto push_block = [&](std::vector<double> coeffs, bool negate) {
        if (negate) {
            for (double& c : coeffs) c = -c;
        }
        const std::vector<double> pacf = ar_to_pacf(coeffs);
        for (double r : pacf) x.push_back(std::atanh(std::clamp(r, -1.0 + 1e-12, 1.0 - 1e-12)));
    };
    const std::size_t s = kinds_.size();
    if (p_ > 0) push_block({natural.begin() + s, natural.begin() + s + p_}, false);
    if (q_ > 0) push_block({natural.begin() + s + p_, natural.end()}, true);
    return x;
}

std::vector<double> ParamMap::to_natural(const std::vector<double>& x) const {
    if (x.size() != dim()) throw config_error("ParamMap: unconstrained vector has wrong length");
    std::vector<double> nat;
    nat.reserve(dim());
    for (std::size_t i = 0; i < kinds_.size(); ++i) {
        const double v = x[i];
        switch (kinds_[i]) {
            case ParamKind::identity: nat.push_back(v); break;
            case ParamKind::positive: nat.push_back(std::exp(std::clamp(v, -700.0, 700.0))); break;
            case ParamKind::unit: nat.push_back(sigmoid(v)); break;
            case ParamKind::half_unit: nat.push_back(0.5 * sigmoid(v)); break;
            case ParamKind::unit_closed0: nat.push_back(sigmoid(v)); break;
        }
    }
    auto pull_block = [&](std::size_t from, int len, bool negate) {
        std::vector<double> pacf(static_cast<std::size_t>(len));
        for (int j = 0; j < len; ++j) pacf[static_cast<std::size_t>(j)] = std::tanh(x[from + static_cast<std::size_t>(j)]);
        std::vector<double> coeffs = pacf_to_ar(pacf);
        for (double c : coeffs) nat.push_back(negate ? -c : c);
    };
    const std::size_t s = kinds_.size();
    if (p_ > 0) pull_block(s, p_, false);
    if (q_ > 0) pull_block(s + static_cast<std::size_t>(p_), q_, true);
    return nat;
}

} // namespace lgc
