#include "lgc/parallel.hpp"

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lgc {

namespace {
int g_max_threads = 0;
}

void set_max_threads(int n) {
    g_max_threads = n;
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#endif
}

int max_threads() {
#ifdef _OPENMP
    return g_max_threads > 0 ? g_max_threads : omp_get_max_threads();
#else
    return 1;
#endif
}

double blocked_sum(std::span<const double> x, Exec exec) {
    return blocked_sum(x.size(), [&](std::size_t i) { return x[i]; }, exec);
}

double blocked_logsumexp(std::span<const double> x, Exec exec) {
    if (x.empty()) return -std::numeric_limits<double>::infinity();
    const double m = blocked_max(x.size(), [&](std::size_t i) { return x[i]; }, exec);
    if (!std::isfinite(m)) return m;
    const double s = blocked_sum(x.size(), [&](std::size_t i) { return std::exp(x[i] - m); }, exec);
    return m + std::log(s);
}

} // namespace lgc
