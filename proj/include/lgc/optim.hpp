#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

// Derivative-free minimizers and the unconstrained parametrization used by
// every fit: positives through log, probabilities through logit, AR/MA blocks
// through partial autocorrelations, so optimizers roam a full Euclidean space
// and every iterate maps to a valid model.

namespace lgc {

using Objective = std::function<double(const std::vector<double>&)>;

struct OptimResult {
    std::vector<double> x;
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
};

struct NelderMeadOptions {
    double tol = 1e-6;          // stop when the simplex f-spread falls below
    int max_iterations = 2000;
    double initial_step = 0.25;
    int restarts = 2;           // rebuild the simplex around the incumbent
};

/// Adaptive Nelder-Mead (dimension-scaled expansion/contraction constants).
OptimResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts = {});

struct DifferentialEvolutionOptions {
    int population = 0;         // 0 = 10 * dimension
    int generations = 200;
    double weight = 0.8;        // differential weight F
    double crossover = 0.9;     // crossover rate CR
    double init_radius = 2.0;   // initial population spread around x0
    std::uint64_t seed = 42;
};

/// rand/1/bin differential evolution for noisy objectives.
OptimResult differential_evolution(const Objective& f, std::vector<double> x0,
                                   const DifferentialEvolutionOptions& opts = {});

/// Componentwise transform kinds for the marginal-parameter part.
enum class ParamKind {
    identity,
    positive,       // log <-> exp
    unit,           // logit <-> sigmoid on (0,1)
    half_unit,      // logit scaled onto (0, 1/2)
    unit_closed0,   // (0,1) but natural values may sit at 0 (clamped in)
};

/// Maps between natural parameters [theta..., ar..., ma...] and the
/// unconstrained vector.  AR/MA blocks go through tanh + the
/// partial-autocorrelation recursion, so any unconstrained point yields a
/// causal and invertible model.
class ParamMap {
public:
    ParamMap(std::vector<ParamKind> scalar_kinds, int p, int q)
        : kinds_(std::move(scalar_kinds)), p_(p), q_(q) {}

    std::size_t dim() const { return kinds_.size() + static_cast<std::size_t>(p_ + q_); }
    std::size_t scalar_count() const { return kinds_.size(); }
    int p() const { return p_; }
    int q() const { return q_; }

    std::vector<double> to_unconstrained(const std::vector<double>& natural) const;
    std::vector<double> to_natural(const std::vector<double>& x) const;

private:
    std::vector<ParamKind> kinds_;
    int p_ = 0;
    int q_ = 0;
};

} // namespace lgc
