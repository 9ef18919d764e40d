#include "lgc/link.hpp"

#include "lgc/errors.hpp"
#include "lgc/normal.hpp"
#include "lgc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>

namespace lgc {

namespace {
constexpr double kSqrt2Pi = 2.5066282746310005024157653;
constexpr int kTailOrder = 1200;

double threshold_from_row(double c, double tail) {
    if (c <= 0.5) return norm_ppf(c);
    return norm_isf(tail);
}
} // namespace

double hermite_eval(int k, double z) {
    if (k < 0) throw domain_error("hermite_eval: order must be nonnegative");
    double hm1 = 1.0; // H_0
    if (k == 0) return hm1;
    double h = z; // H_1
    for (int j = 2; j <= k; ++j) {
        double next = z * h - (j - 1) * hm1;
        hm1 = h;
        h = next;
    }
    return h;
}

namespace {

/// b_k = g_k sqrt(k!) for k = 1..K, accumulated with the normalized
/// recursion Ht_k = (z Ht_{k-1} - sqrt(k-1) Ht_{k-2}) / sqrt(k) so nothing
/// overflows at large K.
std::vector<double> scaled_coeff_sums(const CumTable& table, int K) {
    std::vector<double> b(static_cast<std::size_t>(K), 0.0);
    for (std::size_t n = 0; n < table.cums.size(); ++n) {
        const double c = table.cums[n];
        if (!(c > 0.0 && c < 1.0)) continue;
        const double q = threshold_from_row(c, table.tails[n]);
        const double w = std::exp(-0.5 * q * q) / kSqrt2Pi;
        double hm2 = 0.0, hm1 = 1.0; // Ht_0 = 1
        b[0] += w;                   // k = 1 uses Ht_0
        for (int k = 2; k <= K; ++k) {
            const int m = k - 1;
            const double ht = (q * hm1 - std::sqrt(static_cast<double>(m - 1)) * hm2) /
                              std::sqrt(static_cast<double>(m));
            b[static_cast<std::size_t>(k - 1)] += w * ht / std::sqrt(static_cast<double>(k));
            hm2 = hm1;
            hm1 = ht;
        }
    }
    return b;
}

double tail_profile_sum(int from, int to, int parity) {
    double s = 0.0;
    for (int k = from; k <= to; ++k) {
        if ((k & 1) == parity) s += std::pow(static_cast<double>(k), -1.5);
    }
    return s;
}

/// Splits the missing mass delta_pos (value the correction must add at u=1)
/// and delta_neg (value at u=-1) into even/odd tail scales.
void attach_tail(LinkTable& t, double delta_pos, double delta_neg) {
    t.tail_order = kTailOrder;
    const double se = tail_profile_sum(t.K + 1, kTailOrder, 0);
    const double so = tail_profile_sum(t.K + 1, kTailOrder, 1);
    double mass_e = 0.5 * (delta_pos + delta_neg);
    double mass_o = 0.5 * (delta_pos - delta_neg);
    if (mass_e < 0.0) {
        mass_e = 0.0;
        mass_o = delta_pos;
    } else if (mass_o < 0.0) {
        mass_o = 0.0;
        mass_e = delta_pos;
    }
    t.tail_even = (se > 0.0) ? mass_e / se : 0.0;
    t.tail_odd = (so > 0.0) ? mass_o / so : 0.0;
    t.pseudo_pos = mass_e + mass_o;
    t.pseudo_neg = mass_e - mass_o;
}

LinkTable build_table(const MarginalSpec& spec, int K) {
    if (K < 1) throw domain_error("link_table: K must be >= 1");
    spec.validate();
    const CumTable table = cum_table(spec);
    const Moments mom = moments(spec);
    if (!(mom.variance > 0.0)) throw numerical_error("link_table: degenerate marginal (zero variance)");

    LinkTable t;
    t.K = K;
    t.mean = mom.mean;
    t.var0 = mom.variance;
    t.scaled = scaled_coeff_sums(table, K);
    t.g.resize(static_cast<std::size_t>(K));
    t.ell.resize(static_cast<std::size_t>(K));
    double lfact = 0.0; // log k!
    double ssum = 0.0;
    for (int k = 1; k <= K; ++k) {
        lfact += std::log(static_cast<double>(k));
        const double b = t.scaled[static_cast<std::size_t>(k - 1)];
        t.g[static_cast<std::size_t>(k - 1)] = b * std::exp(-0.5 * lfact);
        t.ell[static_cast<std::size_t>(k - 1)] = b * b / t.var0;
        ssum += t.ell[static_cast<std::size_t>(k - 1)];
    }
    const double delta_pos = std::max(1.0 - ssum, 0.0);
    // Neutral parity split until a Monte-Carlo L(-1) is attached.
    attach_tail(t, delta_pos, 0.0);
    t.pseudo_neg = 0.0;
    t.spec_hash = spec_key_hash(spec, K);
    return t;
}

double raw_series(const LinkTable& t, double u) {
    double up = 1.0, s = 0.0;
    for (int k = 1; k <= t.K; ++k) {
        up *= u;
        s += t.ell[static_cast<std::size_t>(k - 1)] * up;
    }
    return s;
}

double tail_series(const LinkTable& t, double u) {
    if (t.tail_even == 0.0 && t.tail_odd == 0.0) return 0.0;
    const double au = std::fabs(u);
    if (au == 0.0) return 0.0;
    double s = 0.0;
    double up = std::pow(u, t.K); // u^K, extended below from K+1
    for (int k = t.K + 1; k <= t.tail_order; ++k) {
        up *= u;
        const double scale = (k & 1) ? t.tail_odd : t.tail_even;
        s += scale * std::pow(static_cast<double>(k), -1.5) * up;
        if (std::fabs(up) * (t.tail_even + t.tail_odd) < 1e-18) break;
    }
    return s;
}

/// Sample correlation of (F^{-1}(U), F^{-1}(1-U)); one deterministic blocked
/// pass accumulating the five moment sums.
double mc_antithetic_corr(const MarginalSpec& spec, std::int64_t paths, std::uint64_t seed, Exec exec) {
    const CumTable table = cum_table(spec);
    const CounterRng rng(seed);
    const std::size_t n = static_cast<std::size_t>(paths);
    const std::size_t nblocks = (n + detail::kBlock - 1) / detail::kBlock;
    struct Acc {
        double x = 0, y = 0, xx = 0, yy = 0, xy = 0;
    };
    std::vector<Acc> partial(nblocks);
    auto body = [&](std::size_t b) {
        const std::size_t lo = b * detail::kBlock;
        const std::size_t hi = std::min(lo + detail::kBlock, n);
        Acc a;
        for (std::size_t i = lo; i < hi; ++i) {
            const double u = rng.uniform(streams::mc_link, i);
            const double x = static_cast<double>(quantile(table, u));
            const double y = static_cast<double>(quantile(table, 1.0 - u));
            a.x += x;
            a.y += y;
            a.xx += x * x;
            a.yy += y * y;
            a.xy += x * y;
        }
        partial[b] = a;
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < static_cast<long long>(nblocks); ++b) body(static_cast<std::size_t>(b));
    } else {
        for (std::size_t b = 0; b < nblocks; ++b) body(b);
    }
    Acc tot;
    for (const Acc& a : partial) {
        tot.x += a.x;
        tot.y += a.y;
        tot.xx += a.xx;
        tot.yy += a.yy;
        tot.xy += a.xy;
    }
    const double nd = static_cast<double>(paths);
    const double cov = tot.xy / nd - (tot.x / nd) * (tot.y / nd);
    const double vx = tot.xx / nd - (tot.x / nd) * (tot.x / nd);
    const double vy = tot.yy / nd - (tot.y / nd) * (tot.y / nd);
    if (!(vx > 0.0) || !(vy > 0.0)) throw numerical_error("antithetic correlation: degenerate sample");
    return std::clamp(cov / std::sqrt(vx * vy), -1.0, 0.0);
}

std::mutex g_lm1_mutex;
std::map<std::uint64_t, double> g_lm1_cache;

} // namespace

std::uint64_t spec_key_hash(const MarginalSpec& spec, int K) {
    std::uint64_t h = detail::mix64(static_cast<std::uint64_t>(spec.family) + 0x9e37u);
    h = detail::mix64(h ^ static_cast<std::uint64_t>(K));
    for (double p : spec.params) {
        // round to 12 significant digits so optimizer jitter below that
        // level reuses cache entries
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", p);
        for (const char* c = buf; *c; ++c) h = detail::mix64(h ^ static_cast<std::uint64_t>(*c));
    }
    return h;
}

std::vector<double> hermite_coeffs(const CumTable& table, int K) {
    if (K < 1) throw domain_error("hermite_coeffs: K must be >= 1");
    std::vector<double> b = scaled_coeff_sums(table, K);
    double lfact = 0.0;
    for (int k = 1; k <= K; ++k) {
        lfact += std::log(static_cast<double>(k));
        b[static_cast<std::size_t>(k - 1)] *= std::exp(-0.5 * lfact);
    }
    return b;
}

double hermite_coeff_asymptotic(const CumTable& table, int k) {
    const double pref = std::pow(2.0 * std::pow(M_PI, 3.0) * std::pow(static_cast<double>(k), 3.0), -0.25);
    double s = 0.0;
    for (std::size_t n = 0; n < table.cums.size(); ++n) {
        const double c = table.cums[n];
        if (!(c > 0.0 && c < 1.0)) continue;
        const double q = threshold_from_row(c, table.tails[n]);
        s += std::exp(-0.25 * q * q) *
             std::cos(q * std::sqrt(static_cast<double>(k - 1)) - (k - 1) * M_PI / 2.0);
    }
    return pref * s;
}

int truncation_order(const CumTable& table, double eps) {
    if (!(eps > 0.0)) throw domain_error("truncation_order: eps must be positive");
    double s = 0.0;
    for (std::size_t n = 0; n < table.cums.size(); ++n) {
        const double c = table.cums[n];
        if (!(c > 0.0 && c < 1.0)) continue;
        const double q = threshold_from_row(c, table.tails[n]);
        s += std::exp(-0.25 * q * q);
    }
    // envelope = (2 pi^3 k^3)^(-1/4) * s ; solve for the crossing then refine
    const double k0 = std::pow(std::pow(s / eps, 4.0) / (2.0 * std::pow(M_PI, 3.0)), 1.0 / 3.0);
    int k = std::max(1, static_cast<int>(std::floor(k0)) - 2);
    auto envelope = [&](int kk) {
        return std::pow(2.0 * std::pow(M_PI, 3.0) * std::pow(static_cast<double>(kk), 3.0), -0.25) * s;
    };
    while (envelope(k) >= eps) ++k;
    while (k > 1 && envelope(k - 1) < eps) --k;
    return k;
}

LinkTable link_table_fast(const MarginalSpec& spec, int K) { return build_table(spec, K); }

LinkTable link_table(const MarginalSpec& spec, int K, std::int64_t mc_paths, std::uint64_t seed) {
    LinkTable t = build_table(spec, K);
    const std::uint64_t key = detail::mix64(t.spec_hash ^ static_cast<std::uint64_t>(mc_paths) ^ seed);
    double lm1;
    {
        std::lock_guard<std::mutex> lock(g_lm1_mutex);
        auto it = g_lm1_cache.find(key);
        if (it != g_lm1_cache.end()) {
            lm1 = it->second;
        } else {
            lm1 = std::numeric_limits<double>::quiet_NaN();
        }
    }
    if (std::isnan(lm1)) {
        lm1 = mc_antithetic_corr(spec, mc_paths, seed, Exec::parallel);
        std::lock_guard<std::mutex> lock(g_lm1_mutex);
        g_lm1_cache.emplace(key, lm1);
    }
    t.l_minus1 = lm1;
    const double delta_pos = t.pseudo_pos;
    const double raw_m1 = raw_series(t, -1.0);
    // Anchor at (-1, L(-1)), but monotonicity outranks the anchor: an
    // aggressive odd-mass correction can dent the curve near -1, so back the
    // negative adjustment off geometrically until the grid stays increasing.
    double blend = 1.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        attach_tail(t, delta_pos, blend * (lm1 - raw_m1));
        bool monotone = true;
        double prev = link_eval(t, -1.0);
        for (int i = -199; i <= 0 && monotone; ++i) {
            const double v = link_eval(t, 0.005 * i);
            if (v <= prev) monotone = false;
            prev = v;
        }
        if (monotone) break;
        blend *= 0.5;
        if (attempt == 7) attach_tail(t, delta_pos, 0.0);
    }
    return t;
}

double link_eval(const LinkTable& t, double u) {
    if (!(u >= -1.0 && u <= 1.0)) throw domain_error("link_eval: u must lie in [-1,1]");
    if (u == 0.0) return 0.0;
    return raw_series(t, u) + tail_series(t, u);
}

double link_derivative(const LinkTable& t, double u) {
    if (!(u > -1.0 && u < 1.0)) throw domain_error("link_derivative: u must lie in (-1,1)");
    double up = 1.0, s = 0.0;
    for (int k = 1; k <= t.K; ++k) {
        s += k * t.ell[static_cast<std::size_t>(k - 1)] * up;
        up *= u;
    }
    return s;
}

double link_derivative_density(const CumTable& table, double var0, double u, Exec exec) {
    if (!(u > -1.0 && u < 1.0)) throw domain_error("link_derivative_density: u must lie in (-1,1)");
    std::vector<double> q;
    q.reserve(table.cums.size());
    for (std::size_t n = 0; n < table.cums.size(); ++n) {
        const double c = table.cums[n];
        if (c > 0.0 && c < 1.0) q.push_back(threshold_from_row(c, table.tails[n]));
    }
    const std::size_t m = q.size();
    const double om = 1.0 - u * u;
    const double pref = 1.0 / (2.0 * M_PI * var0 * std::sqrt(om));
    const double total = blocked_sum(m * m, [&](std::size_t idx) {
        const double a = q[idx / m];
        const double b = q[idx % m];
        return std::exp(-(a * a + b * b - 2.0 * u * a * b) / (2.0 * om));
    }, exec);
    return pref * total;
}

double link_inverse(const LinkTable& t, double rho) {
    const double lm1 = t.l_minus1 ? *t.l_minus1 : link_eval(t, -1.0);
    if (!(rho > lm1)) {
        throw domain_error("link_inverse: rho at or below the achievable minimum L(-1)");
    }
    if (!(rho < 1.0)) {
        throw domain_error("link_inverse: rho must be below the upper bound 1");
    }
    if (rho == 0.0) return 0.0;
    double lo = -1.0 + 1e-12, hi = 1.0 - 1e-12;
    double flo = link_eval(t, lo) - rho;
    double fhi = link_eval(t, hi) - rho;
    if (flo > 0.0) return lo; // rho below the computed curve everywhere (clamped case)
    if (fhi < 0.0) return hi;
    double u = std::clamp(rho, lo, hi); // L(u) ~ u is a decent start
    for (int it = 0; it < 200; ++it) {
        const double f = link_eval(t, u) - rho;
        if (std::fabs(f) < 1e-12) return u;
        if (f > 0.0) hi = u; else lo = u;
        const double d = link_derivative(t, std::clamp(u, -0.999999999, 0.999999999));
        double next = (d > 0.0) ? u - f / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - u) < 1e-13) return next;
        u = next;
    }
    return u;
}

double cross_link(const LinkTable& a, const LinkTable& b, double u) {
    if (a.K != b.K) throw config_error("cross_link: tables must share the truncation order K");
    if (!(u >= -1.0 && u <= 1.0)) throw domain_error("cross_link: u must lie in [-1,1]");
    if (a.spec_hash == b.spec_hash) return a.var0 * link_eval(a, u);
    double up = 1.0, s = 0.0;
    for (int k = 1; k <= a.K; ++k) {
        up *= u;
        s += a.scaled[static_cast<std::size_t>(k - 1)] * b.scaled[static_cast<std::size_t>(k - 1)] * up;
    }
    return s;
}

std::pair<double, double> correlation_bounds(const MarginalSpec& spec, std::int64_t mc_paths,
                                             std::uint64_t seed, Exec exec) {
    return {mc_antithetic_corr(spec, mc_paths, seed, exec), 1.0};
}

std::string link_csv(const LinkTable& t) {
    std::string out = "k,g_k,ell_k\n";
    char buf[96];
    for (int k = 1; k <= t.K; ++k) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", k, t.g[static_cast<std::size_t>(k - 1)],
                      t.ell[static_cast<std::size_t>(k - 1)]);
        out += buf;
    }
    return out;
}

} // namespace lgc
