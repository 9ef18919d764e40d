#include "lgc/arma.hpp"

#include "lgc/errors.hpp"
#include "lgc/normal.hpp"
#include "lgc/rng.hpp"

#include <algorithm>
#include <cmath>

namespace lgc {

namespace {

/// Solves A x = b in place by Gaussian elimination with partial pivoting.
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        }
        if (std::fabs(a[piv][col]) < 1e-300) throw numerical_error("singular system in ACVF solve");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri][c] * x[c];
        x[ri] = s / a[ri][ri];
    }
    return x;
}

/// Unnormalized gamma(0..max_lag) with unit innovation variance.
std::vector<double> acvf_raw(const LatentModel& model, int max_lag) {
    const int p = model.p(), q = model.q();
    // MA(infinity) weights up to lag q
    std::vector<double> psi(static_cast<std::size_t>(q) + 1, 0.0);
    psi[0] = 1.0;
    for (int j = 1; j <= q; ++j) {
        double s = model.ma[static_cast<std::size_t>(j - 1)];
        for (int i = 1; i <= std::min(j, p); ++i) {
            s += model.ar[static_cast<std::size_t>(i - 1)] * psi[static_cast<std::size_t>(j - i)];
        }
        psi[static_cast<std::size_t>(j)] = s;
    }
    auto theta = [&](int j) { return j == 0 ? 1.0 : model.ma[static_cast<std::size_t>(j - 1)]; };
    auto rhs = [&](int k) {
        double s = 0.0;
        for (int j = k; j <= q; ++j) s += theta(j) * psi[static_cast<std::size_t>(j - k)];
        return s;
    };

    // gamma(k) - sum_j ar_j gamma(|k-j|) = rhs(k), k = 0..p
    const std::size_t n = static_cast<std::size_t>(p) + 1;
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 0.0);
    for (int k = 0; k <= p; ++k) {
        A[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] += 1.0;
        for (int j = 1; j <= p; ++j) {
            A[static_cast<std::size_t>(k)][static_cast<std::size_t>(std::abs(k - j))] -=
                model.ar[static_cast<std::size_t>(j - 1)];
        }
        b[static_cast<std::size_t>(k)] = rhs(k);
    }
    std::vector<double> head = solve_dense(std::move(A), std::move(b));

    std::vector<double> g(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int k = 0; k <= std::min(p, max_lag); ++k) g[static_cast<std::size_t>(k)] = head[static_cast<std::size_t>(k)];
    for (int k = p + 1; k <= max_lag; ++k) {
        double s = (k <= q) ? rhs(k) : 0.0;
        for (int j = 1; j <= p; ++j) s += model.ar[static_cast<std::size_t>(j - 1)] * g[static_cast<std::size_t>(k - j)];
        g[static_cast<std::size_t>(k)] = s;
    }
    return g;
}

} // namespace

std::vector<double> ar_to_pacf(std::span<const double> ar) {
    std::vector<double> work(ar.begin(), ar.end());
    const int p = static_cast<int>(work.size());
    std::vector<double> pacf(static_cast<std::size_t>(p), 0.0);
    for (int m = p; m >= 1; --m) {
        const double r = work[static_cast<std::size_t>(m - 1)];
        if (!(std::fabs(r) < 1.0)) throw domain_error("AR/MA polynomial is not causal/invertible");
        pacf[static_cast<std::size_t>(m - 1)] = r;
        if (m == 1) break;
        std::vector<double> prev(static_cast<std::size_t>(m - 1));
        const double d = 1.0 - r * r;
        for (int j = 1; j <= m - 1; ++j) {
            prev[static_cast<std::size_t>(j - 1)] =
                (work[static_cast<std::size_t>(j - 1)] + r * work[static_cast<std::size_t>(m - 1 - j)]) / d;
        }
        work.assign(prev.begin(), prev.end());
    }
    return pacf;
}

std::vector<double> pacf_to_ar(std::span<const double> pacf) {
    const int p = static_cast<int>(pacf.size());
    std::vector<double> phi;
    phi.reserve(static_cast<std::size_t>(p));
    for (int m = 1; m <= p; ++m) {
        const double r = pacf[static_cast<std::size_t>(m - 1)];
        std::vector<double> next(static_cast<std::size_t>(m));
        for (int j = 1; j <= m - 1; ++j) {
            next[static_cast<std::size_t>(j - 1)] =
                phi[static_cast<std::size_t>(j - 1)] - r * phi[static_cast<std::size_t>(m - 1 - j)];
        }
        next[static_cast<std::size_t>(m - 1)] = r;
        phi = std::move(next);
    }
    return phi;
}

void LatentModel::validate() const {
    for (double v : ar) {
        if (!std::isfinite(v)) throw domain_error("latent model: AR coefficients must be finite");
    }
    for (double v : ma) {
        if (!std::isfinite(v)) throw domain_error("latent model: MA coefficients must be finite");
    }
    if (!ar.empty()) (void)ar_to_pacf(ar); // throws when non-causal
    if (!ma.empty()) {
        std::vector<double> neg(ma.size());
        for (std::size_t i = 0; i < ma.size(); ++i) neg[i] = -ma[i];
        try {
            (void)ar_to_pacf(neg);
        } catch (const domain_error&) {
            throw domain_error("latent model: MA polynomial is not invertible");
        }
    }
}

std::vector<double> arma_acvf(const LatentModel& model, int max_lag) {
    model.validate();
    if (max_lag < 0) throw domain_error("arma_acvf: max_lag must be nonnegative");
    std::vector<double> g = acvf_raw(model, max_lag);
    const double g0 = g[0];
    if (!(g0 > 0.0) || !std::isfinite(g0)) throw numerical_error("arma_acvf: nonpositive variance solve");
    for (double& v : g) v /= g0;
    return g;
}

double innovation_variance(const LatentModel& model) {
    model.validate();
    return 1.0 / acvf_raw(model, 0)[0];
}

DlCoeffs::DlCoeffs(std::span<const double> acvf, int t_max) {
    if (acvf.empty() || !(acvf[0] > 0.0)) throw numerical_error("durbin-levinson: invalid ACVF");
    t_max_ = t_max;
    r2_.push_back(acvf[0]);
    auto gamma = [&](int h) {
        return h < static_cast<int>(acvf.size()) ? acvf[static_cast<std::size_t>(h)] : 0.0;
    };
    // Last lag carrying autocovariance mass: rows may only be frozen past it,
    // otherwise a sparse ACVF (say a lag-4-only MA) would freeze too early.
    int h_nz = 0;
    for (int h = std::min(t_max, static_cast<int>(acvf.size()) - 1); h >= 1; --h) {
        if (std::fabs(acvf[static_cast<std::size_t>(h)]) > 1e-13) {
            h_nz = h;
            break;
        }
    }
    std::vector<double> cur; // row t under construction: coefficients of z_{t-1}..z_0
    int quiet = 0;
    for (int t = 1; t <= t_max; ++t) {
        double num = gamma(t);
        for (int j = 1; j <= t - 1; ++j) num -= cur[static_cast<std::size_t>(j - 1)] * gamma(t - j);
        const double v_prev = r2_.back();
        if (!(v_prev > 0.0)) throw numerical_error("durbin-levinson: ACVF not positive definite");
        const double a_tt = num / v_prev;
        if (!(std::fabs(a_tt) < 1.0 + 1e-12)) {
            throw numerical_error("durbin-levinson: reflection coefficient escaped the unit disc");
        }
        std::vector<double> next(static_cast<std::size_t>(t));
        for (int j = 1; j <= t - 1; ++j) {
            next[static_cast<std::size_t>(j - 1)] = cur[static_cast<std::size_t>(j - 1)] -
                                                    a_tt * cur[static_cast<std::size_t>(t - 1 - j)];
        }
        next[static_cast<std::size_t>(t - 1)] = a_tt;
        cur = std::move(next);
        r2_.push_back(v_prev * (1.0 - a_tt * a_tt));
        rows_.push_back(cur);
        stored_ = t;
        quiet = (std::fabs(a_tt) < 1e-13) ? quiet + 1 : 0;
        if (quiet >= 3 && t > h_nz) break; // coefficients converged; reuse the last row
    }
    // trim trailing negligible weights of the frozen row so predictions cost
    // only the effective memory of the model
    for (auto& row : rows_) {
        while (row.size() > 1 && std::fabs(row.back()) < 1e-15) row.pop_back();
    }
    for (const auto& row : rows_) max_len_ = std::max(max_len_, static_cast<int>(row.size()));
}

std::span<const double> DlCoeffs::row(int t) const {
    if (t < 1) return {};
    const int idx = std::min(t, stored_);
    return rows_[static_cast<std::size_t>(idx - 1)];
}

double DlCoeffs::mse(int t) const {
    if (t < 0) throw domain_error("DlCoeffs::mse: negative time");
    const int idx = std::min(t, stored_);
    return r2_[static_cast<std::size_t>(idx)];
}

double DlCoeffs::sd(int t) const { return std::sqrt(mse(t)); }

DLState durbin_levinson(std::span<const double> acvf, std::span<const double> data) {
    const int T = static_cast<int>(data.size()) - 1;
    if (T < 0) throw data_error("durbin_levinson: empty data");
    DlCoeffs dl(acvf, T + 1);
    DLState st;
    st.pred.resize(data.size(), 0.0);
    st.mse.resize(data.size(), 0.0);
    st.mse[0] = dl.mse(0);
    for (int t = 1; t <= T + 1; ++t) {
        auto row = dl.row(t);
        double zh = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            zh += row[j] * data[static_cast<std::size_t>(t) - 1 - j];
        }
        if (t <= T) {
            st.pred[static_cast<std::size_t>(t)] = zh;
            st.mse[static_cast<std::size_t>(t)] = dl.mse(t);
        } else {
            st.next_pred = zh;
            st.next_mse = dl.mse(t);
        }
    }
    return st;
}

double gaussian_loglik(std::span<const double> acvf, std::span<const double> mean,
                       std::span<const double> data) {
    if (mean.size() != data.size()) throw data_error("gaussian_loglik: mean/data length mismatch");
    const std::size_t n = data.size();
    if (n == 0) throw data_error("gaussian_loglik: empty data");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = data[i] - mean[i];

    DlCoeffs dl(acvf, static_cast<int>(n) - 1);
    double ll = 0.0;
    constexpr double kLog2Pi = 1.8378770664093454835606594;
    for (std::size_t t = 0; t < n; ++t) {
        auto row = dl.row(static_cast<int>(t));
        double zh = 0.0;
        for (std::size_t j = 0; j < row.size() && j < t; ++j) zh += row[j] * x[t - 1 - j];
        const double v = dl.mse(static_cast<int>(t));
        if (!(v > 0.0)) throw numerical_error("gaussian_loglik: lost positive definiteness");
        const double e = x[t] - zh;
        ll -= 0.5 * (e * e / v + std::log(v) + kLog2Pi);
    }
    return ll;
}

std::vector<double> simulate_latent(const LatentModel& model, int T, std::uint64_t seed) {
    if (T < 0) throw domain_error("simulate_latent: T must be nonnegative");
    const std::vector<double> acvf = arma_acvf(model, T + 1);
    DlCoeffs dl(acvf, T);
    CounterRng rng(seed);
    std::vector<double> z(static_cast<std::size_t>(T) + 1);
    for (int t = 0; t <= T; ++t) {
        auto row = dl.row(t);
        double zh = 0.0;
        for (std::size_t j = 0; j < row.size() && static_cast<int>(j) < t; ++j) {
            zh += row[j] * z[static_cast<std::size_t>(t - 1) - j];
        }
        const double eps = norm_ppf(rng.uniform(streams::latent, static_cast<std::uint64_t>(t)));
        z[static_cast<std::size_t>(t)] = zh + dl.sd(t) * eps;
    }
    return z;
}

} // namespace lgc
