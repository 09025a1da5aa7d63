#pragma once

#include <optional>
#include <vector>

#include "pklab/expr.hpp"

namespace pklab {

/// Exact univariate polynomial over the rationals, coefficients by degree.
using RatPoly = std::vector<Rational>;

inline void rp_trim(RatPoly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

inline Rational rp_eval(const RatPoly& p, const Rational& x) {
    Rational v = 0;
    for (size_t k = p.size(); k-- > 0;) v = v * x + p[k];
    return v;
}

inline RatPoly rp_derivative(const RatPoly& p) {
    RatPoly d;
    for (size_t k = 1; k < p.size(); ++k) d.push_back(p[k] * Rational(static_cast<long>(k)));
    return d;
}

/// Remainder of a by b.
inline RatPoly rp_rem(RatPoly a, const RatPoly& b) {
    rp_trim(a);
    while (a.size() >= b.size() && !a.empty()) {
        Rational q = a.back() / b.back();
        size_t shift = a.size() - b.size();
        for (size_t k = 0; k < b.size(); ++k) a[k + shift] -= q * b[k];
        rp_trim(a);
    }
    return a;
}

inline RatPoly rp_gcd(RatPoly a, RatPoly b) {
    rp_trim(a);
    rp_trim(b);
    while (!b.empty()) {
        RatPoly r = rp_rem(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        Rational lead = a.back();
        for (Rational& c : a) c /= lead;
    }
    return a;
}

inline RatPoly rp_divide_exact(const RatPoly& a, const RatPoly& b) {
    RatPoly r = a, q(a.size() >= b.size() ? a.size() - b.size() + 1 : 0, Rational(0));
    rp_trim(r);
    while (r.size() >= b.size() && !r.empty()) {
        Rational c = r.back() / b.back();
        size_t shift = r.size() - b.size();
        q[shift] = c;
        for (size_t k = 0; k < b.size(); ++k) r[k + shift] -= c * b[k];
        rp_trim(r);
    }
    return q;
}

/// Sturm chain of a squarefree polynomial.
inline std::vector<RatPoly> sturm_chain(RatPoly p) {
    rp_trim(p);
    std::vector<RatPoly> chain;
    if (p.empty()) return chain;
    RatPoly g = rp_gcd(p, rp_derivative(p));
    if (g.size() > 1) p = rp_divide_exact(p, g); // squarefree part, same roots
    chain.push_back(p);
    RatPoly d = rp_derivative(p);
    rp_trim(d);
    while (!d.empty()) {
        chain.push_back(d);
        RatPoly r = rp_rem(chain[chain.size() - 2], d);
        for (Rational& c : r) c = -c;
        d = std::move(r);
        rp_trim(d);
    }
    return chain;
}

inline int sturm_variations(const std::vector<RatPoly>& chain, const Rational& x) {
    int var = 0, prev = 0;
    for (const RatPoly& p : chain) {
        Rational v = rp_eval(p, x);
        int s = v == 0 ? 0 : (v > 0 ? 1 : -1);
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++var;
        prev = s;
    }
    return var;
}

/// Number of distinct real roots in (a, b].
inline int roots_in(const std::vector<RatPoly>& chain, const Rational& a, const Rational& b) {
    if (chain.empty()) return 0;
    return sturm_variations(chain, a) - sturm_variations(chain, b);
}

inline Rational cauchy_bound(const RatPoly& p) {
    Rational m = 0;
    for (size_t k = 0; k + 1 < p.size(); ++k) {
        Rational a = abs(p[k] / p.back());
        if (a > m) m = a;
    }
    return m + 1;
}

/// The rational with the smallest denominator in [lo, hi] (Stern-Brocot).
inline Rational simplest_rational_in(const Rational& lo, const Rational& hi) {
    if (lo > hi) fail(errc::invalid_argument, "empty interval");
    if (lo <= 0 && hi >= 0) return Rational(0);
    if (hi < 0) return -simplest_rational_in(-hi, -lo);
    // 0 < lo <= hi
    Integer li = numerator(lo) / denominator(lo); // floor for positive values
    if (Rational(li) == lo) return lo;
    if (Rational(li + 1) <= hi) return Rational(li + 1);
    // same integer part: recurse on the fractional parts, inverted
    Rational fl = lo - Rational(li), fh = hi - Rational(li);
    Rational inner = simplest_rational_in(Rational(1) / fh, Rational(1) / fl);
    return Rational(li) + Rational(1) / inner;
}

/// Smallest positive root of p, or nullopt. Returned as an exact value when
/// the simplest rational in the isolating interval is a root, otherwise as a
/// certified open lower bound (second member false).
struct IsolatedRoot {
    Rational value;
    bool exact;
};

inline std::optional<IsolatedRoot> smallest_positive_root(const RatPoly& p) {
    std::vector<RatPoly> chain = sturm_chain(p);
    if (chain.empty()) return std::nullopt;
    Rational bound = cauchy_bound(chain[0]);
    if (roots_in(chain, Rational(0), bound) == 0) return std::nullopt;
    Rational lo = 0, hi = bound;
    for (int iter = 0; iter < 80; ++iter) {
        Rational mid = (lo + hi) / 2;
        if (roots_in(chain, Rational(0), mid) >= 1) hi = mid;
        else lo = mid;
        if (iter >= 8) {
            Rational cand = simplest_rational_in(lo, hi);
            if (rp_eval(chain[0], cand) == 0 && roots_in(chain, Rational(0), cand) == 1)
                return IsolatedRoot{cand, true};
        }
    }
    return IsolatedRoot{lo, false}; // no root in (0, lo]
}

inline std::optional<IsolatedRoot> largest_negative_root(RatPoly p) {
    // mirror x -> -x
    for (size_t k = 1; k < p.size(); k += 2) p[k] = -p[k];
    auto r = smallest_positive_root(p);
    if (!r) return std::nullopt;
    return IsolatedRoot{-r->value, r->exact};
}

/// Interval around 0 on which every polynomial stays strictly positive.
/// Requires p(0) > 0 for each p. Endpoints are exact roots when isolation
/// lands on one (flagged), otherwise certified open bounds.
struct PositivityInterval {
    Rational lo, hi;     // positivity certified on (lo, hi)
    bool lo_open_bound;  // true when lo is a conservative bound, not a root
    bool hi_open_bound;
    bool lo_unbounded = false;
    bool hi_unbounded = false;
};

inline PositivityInterval certify_positive_interval(const std::vector<RatPoly>& polys) {
    for (const RatPoly& p : polys)
        if (rp_eval(p, Rational(0)) <= 0)
            fail(errc::not_positive, "polynomial not positive at the origin");
    PositivityInterval out;
    out.hi_unbounded = true;
    out.lo_unbounded = true;
    out.lo_open_bound = out.hi_open_bound = false;
    for (const RatPoly& p : polys) {
        if (auto r = smallest_positive_root(p)) {
            if (out.hi_unbounded || r->value < out.hi ||
                (r->value == out.hi && !r->exact)) {
                out.hi = r->value;
                out.hi_open_bound = !r->exact;
                out.hi_unbounded = false;
            }
        }
        if (auto r = largest_negative_root(p)) {
            if (out.lo_unbounded || r->value > out.lo ||
                (r->value == out.lo && !r->exact)) {
                out.lo = r->value;
                out.lo_open_bound = !r->exact;
                out.lo_unbounded = false;
            }
        }
    }
    return out;
}

/// Expr -> univariate rational polynomial in the given atom; nullopt when the
/// expression involves anything else or complex coefficients.
inline std::optional<RatPoly> to_univariate(const Expr& e, uint32_t atom) {
    if (!e.den().empty()) return std::nullopt;
    RatPoly out;
    for (const auto& [m, c] : e.num().terms()) {
        if (!c.is_real()) return std::nullopt;
        uint32_t deg = 0;
        for (const auto& [a, k] : m) {
            if (a != atom) return std::nullopt;
            deg = k;
        }
        if (out.size() <= deg) out.resize(deg + 1, Rational(0));
        out[deg] = c.re;
    }
    rp_trim(out);
    return out;
}

} // namespace pklab
