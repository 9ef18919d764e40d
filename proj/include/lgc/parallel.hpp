#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Execution policy shared by all data-parallel kernels.  Each kernel has one
// algorithm with two drivers: a plain serial loop and an OpenMP loop over the
// same fixed block decomposition.  Reductions accumulate per block and then
// combine blocks in index order, so serial and parallel runs produce
// bit-identical results for any thread count.  The serial path is the
// reference the tests compare against; lgc-bench times the two side by side.

namespace lgc {

enum class Exec { serial, parallel };

/// Number of threads OpenMP kernels may use (0 = library default).
void set_max_threads(int n);
int max_threads();

namespace detail {
inline constexpr std::size_t kBlock = 2048;
}

/// Deterministic blocked sum of f(i) for i in [0, n).
template <typename F>
double blocked_sum(std::size_t n, F&& f, Exec exec = Exec::parallel) {
    if (n == 0) return 0.0;
    const std::size_t nblocks = (n + detail::kBlock - 1) / detail::kBlock;
    std::vector<double> partial(nblocks, 0.0);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
            const std::size_t lo = static_cast<std::size_t>(b) * detail::kBlock;
            const std::size_t hi = lo + detail::kBlock < n ? lo + detail::kBlock : n;
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += f(i);
            partial[static_cast<std::size_t>(b)] = s;
        }
    } else {
        for (std::size_t b = 0; b < nblocks; ++b) {
            const std::size_t lo = b * detail::kBlock;
            const std::size_t hi = lo + detail::kBlock < n ? lo + detail::kBlock : n;
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += f(i);
            partial[b] = s;
        }
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

double blocked_sum(std::span<const double> x, Exec exec = Exec::parallel);

/// Deterministic blocked maximum of f(i).
template <typename F>
double blocked_max(std::size_t n, F&& f, Exec exec = Exec::parallel) {
    const std::size_t nblocks = (n + detail::kBlock - 1) / detail::kBlock;
    std::vector<double> partial(nblocks);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
            const std::size_t lo = static_cast<std::size_t>(b) * detail::kBlock;
            const std::size_t hi = lo + detail::kBlock < n ? lo + detail::kBlock : n;
            double m = f(lo);
            for (std::size_t i = lo + 1; i < hi; ++i) {
                double v = f(i);
                if (v > m) m = v;
            }
            partial[static_cast<std::size_t>(b)] = m;
        }
    } else {
        for (std::size_t b = 0; b < nblocks; ++b) {
            const std::size_t lo = b * detail::kBlock;
            const std::size_t hi = lo + detail::kBlock < n ? lo + detail::kBlock : n;
            double m = f(lo);
            for (std::size_t i = lo + 1; i < hi; ++i) {
                double v = f(i);
                if (v > m) m = v;
            }
            partial[b] = m;
        }
    }
    double m = partial[0];
    for (double v : partial) {
        if (v > m) m = v;
    }
    return m;
}

/// log(sum exp(x_i)) with the blocked deterministic reduction.
double blocked_logsumexp(std::span<const double> x, Exec exec = Exec::parallel);

/// Elementwise parallel loop (no reduction, order irrelevant).
template <typename F>
void parallel_for(std::size_t n, F&& f, Exec exec = Exec::parallel) {
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            f(static_cast<std::size_t>(i));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) f(i);
    }
}

} // namespace lgc
