#pragma once

#include <cmath>

// Minimal double-double arithmetic (Dekker/Knuth error-free transforms).
// Used only while accumulating cumulative probability tables: the cutoff
// decision "C_n rounds to exactly 1" compares tail masses near 5e-17, which
// plain double pmf recurrences cannot resolve reliably.

namespace lgc::detail {

struct dd {
    double hi = 0.0;
    double lo = 0.0;
};

inline dd two_sum(double a, double b) noexcept {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline dd two_prod(double a, double b) noexcept {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline dd dd_add(dd a, double b) noexcept {
    dd s = two_sum(a.hi, b);
    s.lo += a.lo;
    dd r = two_sum(s.hi, s.lo);
    return r;
}

inline dd dd_add(dd a, dd b) noexcept {
    dd s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    dd r = two_sum(s.hi, s.lo);
    return r;
}

inline dd dd_mul(dd a, dd b) noexcept {
    dd p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    dd r = two_sum(p.hi, p.lo);
    return r;
}

inline dd dd_mul(dd a, double b) noexcept {
    dd p = two_prod(a.hi, b);
    p.lo += a.lo * b;
    dd r = two_sum(p.hi, p.lo);
    return r;
}

/// a / b with one Newton correction term.
inline dd dd_div(dd a, dd b) noexcept {
    double q1 = a.hi / b.hi;
    dd r = dd_add(a, dd_mul(b, -q1));
    double q2 = r.hi / b.hi;
    return two_sum(q1, q2);
}

inline dd dd_from(double x) noexcept { return {x, 0.0}; }

} // namespace lgc::detail
