#pragma once

#include <optional>
#include <vector>

#include "pklab/acs.hpp"
#include "pklab/pkahler.hpp"

namespace pklab {

/// A curve of almost Hermitian metrics omega_t = (i/2) sum h[j][k](z,t)
/// phi^j_t ^ phibar^k_t over a deformation family.
struct MetricFamily {
    DeformationFamily fam;
    ExprMat h; // Hermitian, positive at t = 0; identity when empty

    size_t n() const { return fam.n(); }

    ExprMat coefficients() const {
        const CtxPtr& ctx = fam.base->ctx();
        if (!h.empty()) return h;
        return mat_identity(ctx, n());
    }

    void validate() const {
        fam.validate();
        if (h.empty()) return;
        size_t nn = n();
        if (h.size() != nn) fail(errc::invalid_argument, "metric matrix must be n x n");
        for (const auto& row : h)
            if (row.size() != nn) fail(errc::invalid_argument, "metric matrix must be n x n");
        for (size_t j = 0; j < nn; ++j)
            for (size_t k = 0; k < nn; ++k)
                if (!h[j][k].equals(h[k][j].conj()))
                    fail(errc::type_mismatch, "metric matrix is not Hermitian");
    }
};

/// omega_t over the base working basis (so t-derivatives are plain
/// coefficient derivatives).
inline Form omega_family(const MetricFamily& m) {
    const CtxPtr& ctx = m.fam.base->ctx();
    size_t n = m.n();
    std::vector<Form> cof = deform_coframe(m.fam);
    ExprMat h = m.coefficients();
    Form w = Form::zero(ctx, m.fam.base->working());
    GaussRat ihalf(Rational(0), Rational(1, 2));
    for (size_t j = 0; j < n; ++j)
        for (size_t k = 0; k < n; ++k) {
            if (h[j][k].is_zero()) continue;
            w = w + cof[j].wedge(cof[k].conj()) * h[j][k].scaled(ihalf);
        }
    return w;
}

/// Omega_t := omega_t^{n-1} / (n-1)!.
inline Form omega_power_family(const MetricFamily& m) {
    size_t n = m.n();
    Form w = omega_family(m);
    Form pw = w.wedge_pow(unsigned(n - 1));
    Rational fact = 1;
    for (size_t j = 2; j < n; ++j) fact *= Rational(long(j));
    return pw.scaled(GaussRat(Rational(1) / fact));
}

struct FirstOrderData {
    Form omega_dot;  // d/dt Omega_t at t = 0, over the base working basis
    Form eta;        // (n-2, n) component
    Form lambda;     // (n-1, n-1) component
    bool real_ok = false;
};

namespace detail {

inline Form dt_at_zero(const Form& f, const std::vector<uint32_t>& params, uint32_t t) {
    Form out(f.ctx(), f.basis());
    for (const auto& [mask, c] : f.terms()) {
        Expr dc = c.diff(VarRef::atom(t));
        for (uint32_t p : params) dc = dc.subst(p, GaussRat(0));
        out.add_term(mask, dc);
    }
    return out;
}

} // namespace detail

/// First-order data of Omega_t at t = 0 with respect to the given parameter
/// (the family's single parameter by default). The derivative must decompose
/// into the (n,n-2), (n-1,n-1), (n-2,n) bidegrees; anything else signals an
/// implementation fault and is reported as TypeLeak.
inline FirstOrderData first_order(const MetricFamily& m, std::optional<uint32_t> param = {}) {
    size_t n = m.n();
    uint32_t t = param ? *param : m.fam.params.at(0);
    Form omega_t = omega_power_family(m);
    FirstOrderData out;
    out.omega_dot = detail::dt_at_zero(omega_t, m.fam.params, t);
    Form residue = out.omega_dot;
    for (auto [p, q] : {std::pair<int, int>{int(n), int(n) - 2},
                        {int(n) - 1, int(n) - 1},
                        {int(n) - 2, int(n)}})
        residue = residue - out.omega_dot.component(p, q);
    if (!residue.is_zero())
        fail(errc::type_leak, "Omega-dot has components outside the three expected bidegrees");
    out.eta = out.omega_dot.component(int(n) - 2, int(n));
    out.lambda = out.omega_dot.component(int(n) - 1, int(n) - 1);
    out.real_ok = out.omega_dot.is_real();
    return out;
}

/// Per-parameter first-order data for multi-parameter families.
inline std::vector<FirstOrderData> multiparameter_first_order(const MetricFamily& m) {
    std::vector<FirstOrderData> out;
    const CtxPtr& ctx = m.fam.base->ctx();
    for (uint32_t p : m.fam.params) {
        // conjugate partners of complex parameters are not independent directions
        if (ctx->atom(p).vkind == VarKind::complex_parameter && ctx->atom(p).conj_partner < p)
            continue;
        out.push_back(first_order(m, p));
    }
    return out;
}

/// del of a form: the (p+1, q) component of d for a pure (p,q) input.
inline Form del(const FramePtr& fr, const Form& f) {
    auto pqs = f.bidegrees();
    Form out(f.ctx(), f.basis());
    Form df = fr->d(f);
    for (auto [p, q] : pqs) out = out + df.component(p + 1, q);
    return out;
}

/// delbar of a form: the (p, q+1) component of d.
inline Form delbar(const FramePtr& fr, const Form& f) {
    auto pqs = f.bidegrees();
    Form out(f.ctx(), f.basis());
    Form df = fr->d(f);
    for (auto [p, q] : pqs) out = out + df.component(p, q + 1);
    return out;
}

struct SemiKahlerFirstOrder {
    FirstOrderData data;
    Form residual;             // del(eta) + delbar(lambda), zero <=> necessary condition holds
    bool passes = false;
    // n = 3, diagonal coordinate families: the packaged 1-form bracket wedge
    // phibar^123 (equal to 4*eta) and the curl system of its coefficients
    std::optional<Form> packaged;      // the explicit (1,3)-form, = 4*eta
    std::optional<Form> packaged_del;  // its del
    std::vector<Expr> pde;             // three curl expressions, all zero <=> del(eta) = 0
};

/// sigma-dot matrix at t = 0.
inline ExprMat sigma_dot(const DeformationFamily& d, uint32_t t) {
    const CtxPtr& ctx = d.base->ctx();
    size_t n = d.n();
    ExprMat s(n, std::vector<Expr>(n, Expr::zero(ctx)));
    for (size_t j = 0; j < n; ++j)
        for (size_t k = 0; k < n; ++k) {
            Expr e = d.sigma[j][k].diff(VarRef::atom(t));
            for (uint32_t p : d.params) e = e.subst(p, GaussRat(0));
            s[j][k] = e;
        }
    return s;
}

/// The first-order necessary condition del(eta) + delbar(lambda) = 0 for a
/// curve of semi-Kahler structures; lambda = 0 specializes it to del(eta) = 0.
inline SemiKahlerFirstOrder semi_kahler_first_order_check(const MetricFamily& m,
                                                          std::optional<uint32_t> param = {}) {
    const FramePtr& fr = m.fam.base;
    const CtxPtr& ctx = fr->ctx();
    SemiKahlerFirstOrder out;
    out.data = first_order(m, param);
    out.residual = del(fr, out.data.eta) + delbar(fr, out.data.lambda);
    out.passes = out.residual.is_zero();

    size_t n = m.n();
    bool diagonal_identity = m.h.empty();
    if (n == 3 && diagonal_identity) {
        uint32_t t = param ? *param : m.fam.params.at(0);
        ExprMat sd = sigma_dot(m.fam, t);
        // [(sdot^3_2 - sdot^2_3) phi^1 + (sdot^1_3 - sdot^3_1) phi^2 +
        //  (sdot^2_1 - sdot^1_2) phi^3] ^ phibar^123, which equals 4*eta
        Form bracket(ctx, fr->working());
        bracket.add_term(1u << 0, sd[2][1] - sd[1][2]);
        bracket.add_term(1u << 1, sd[0][2] - sd[2][0]);
        bracket.add_term(1u << 2, sd[1][0] - sd[0][1]);
        Form anti(ctx, fr->working());
        anti.add_term((1u << 3) | (1u << 4) | (1u << 5), Expr::one(ctx));
        Form packaged = bracket.wedge(anti);
        out.packaged = packaged;
        out.packaged_del = del(fr, packaged);
        if (fr->mode() == Frame::Mode::coordinate && fr->standard_coframe()) {
            // coordinate coframe phi^j = dz_j: the del reduces to a curl system
            Expr h1 = sd[2][1] - sd[1][2];
            Expr h2 = sd[0][2] - sd[2][0];
            Expr h3 = sd[1][0] - sd[0][1];
            auto dz = [&](const Expr& e, size_t j) { return e.diff(VarRef::z(fr->coords()[j])); };
            out.pde.push_back(dz(h2, 0) - dz(h1, 1));
            out.pde.push_back(dz(h3, 0) - dz(h1, 2));
            out.pde.push_back(dz(h3, 1) - dz(h2, 2));
        }
    }
    return out;
}

} // namespace pklab
