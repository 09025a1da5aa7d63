#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pklab/deform.hpp"

namespace pklab {

// ------------------------------------------------------------------ nop

/// Certificate for the closed-manifold non-existence argument: beta with
/// (d beta)^{n-p,n-p} = sum c_k sigma_{n-p} psi_k ^ conj(psi_k), the psi_k
/// simple (n-p,0)-covectors and the c_k on a single ray. The engine derives
/// the decomposition from the diagonal word structure of (d beta)^{n-p,n-p},
/// so every psi_k is a basis word and hence automatically simple.
struct NopCertificate {
    Form beta;
    int p = 0;
    std::vector<uint32_t> psi_words; // holomorphic word masks
    std::vector<Expr> coefficients;  // c_k in the sigma-normalized pairing
};

inline NopCertificate make_nop_certificate(const FramePtr& fr, const Form& beta, int p) {
    const CtxPtr& ctx = fr->ctx();
    size_t n = fr->n();
    int k = int(n) - p;
    NopCertificate cert;
    cert.beta = beta;
    cert.p = p;
    Form dbeta = fr->d(beta);
    Form target = dbeta.component(k, k);
    if (target.is_zero())
        fail(errc::invalid_argument, "d(beta) has no (n-p,n-p) part: certificate rejected");
    GaussRat sk = sigma_vol(k);
    for (const auto& [mask, c] : target.terms()) {
        uint32_t holo = mask & fr->working()->holo_mask();
        uint32_t anti = mask & fr->working()->anti_mask();
        if ((anti >> n) != holo)
            fail(errc::not_simple,
                 "(d beta)^{n-p,n-p} is not a sum of diagonal words psi ^ conj(psi)");
        // c * word = c_k * sigma_k * psi ^ psibar with psi the word form
        Form psi(ctx, fr->working());
        psi.add_term(holo, Expr::one(ctx));
        Form pp = psi.wedge(psi.conj());
        Expr unit = pp.coeff(mask); // +1 or -1
        cert.psi_words.push_back(holo);
        cert.coefficients.push_back(c / (Expr::constant(ctx, sk) * unit));
    }
    return cert;
}

struct NopReport {
    bool applies = false;        // non-existence certified
    std::string obstruction;     // which structures cannot exist
    std::vector<std::string> psi; // the simple covectors, printed
    std::vector<std::string> c;   // the ray coefficients, printed
    std::string degeneracy;       // parameter locus where the leading c vanishes
    bool witness_checked = false;
};

/// Verifies the certificate invariants and returns the non-existence verdict:
/// no almost p-Kahler structure on a closed manifold. Sign-uniformity is the
/// exact ray condition c_j / c_1 a positive rational constant; parameter
/// witnesses confirm c_1 does not vanish in the claimed regime.
inline NopReport nop_test(const FramePtr& fr, const NopCertificate& cert, bool closed_manifold,
                          const std::vector<std::pair<uint32_t, GaussRat>>& witness = {}) {
    if (!closed_manifold)
        fail(errc::not_closed_manifold, "the integral argument needs a closed manifold");
    if (cert.coefficients.empty())
        fail(errc::invalid_argument, "empty decomposition: certificate rejected");
    const CtxPtr& ctx = fr->ctx();
    size_t n = fr->n();
    int k = int(n) - cert.p;
    // re-verify the stored identity (d beta)^{k,k} = sum c sigma_k psi psibar
    Form recon(ctx, fr->working());
    GaussRat sk = sigma_vol(k);
    for (size_t j = 0; j < cert.psi_words.size(); ++j) {
        Form psi(ctx, fr->working());
        psi.add_term(cert.psi_words[j], Expr::one(ctx));
        recon = recon + psi.wedge(psi.conj()) * (cert.coefficients[j].scaled(sk));
    }
    Form target = fr->d(cert.beta).component(k, k);
    if (!recon.equals(target))
        fail(errc::invalid_argument, "certificate does not reproduce (d beta)^{n-p,n-p}");
    const Expr& c1 = cert.coefficients[0];
    if (c1.is_zero()) fail(errc::sign_mixed, "leading coefficient vanishes identically");
    for (const Expr& cj : cert.coefficients) {
        Expr ratio = cj / c1; // may throw CoordinateDenominator for bad certificates
        if (!ratio.is_constant())
            fail(errc::sign_mixed, "coefficients are not constant multiples of each other");
        GaussRat r = ratio.constant_value();
        if (!r.is_real() || r.re <= 0)
            fail(errc::sign_mixed, "coefficients do not lie on a single ray");
    }
    NopReport rep;
    rep.applies = true;
    rep.obstruction = "no almost " + std::to_string(cert.p) + "-Kahler structure";
    for (uint32_t w : cert.psi_words) rep.psi.push_back(fr->working()->word_str(w));
    for (const Expr& cj : cert.coefficients) rep.c.push_back(cj.str());
    rep.degeneracy = c1.num().str(*ctx); // vanishing locus of the leading coefficient
    if (!witness.empty()) {
        Expr at = c1;
        for (const auto& [atom, value] : witness) at = at.subst(atom, value);
        if (!at.is_constant() || at.constant_value().is_zero())
            fail(errc::sign_mixed, "certificate degenerates at the given witness");
        rep.witness_checked = true;
    }
    return rep;
}

// ------------------------------------------------------------------ MT

struct MTReport {
    Expr eq1, eq2;
    bool obstructed = false; // some equation is not identically zero
};

/// The two local-compatibility necessary conditions for an almost complex
/// structure P on R^6, all derivatives at the origin. `vec_action` is the
/// vector-action matrix J d/dx_j = sum_i P[i][j] d/dx_i in the coordinate
/// order (x1,x2,x3,x4,x5,x6) = (x1,x2,x3,y1,y2,y3).
inline MTReport mt_equations(const ExprMat& vec_action,
                             const std::vector<uint32_t>& coord_atoms) {
    if (vec_action.size() != 6 || coord_atoms.size() != 6)
        fail(errc::invalid_argument, "the compatibility equations live on R^6");
    auto P = [&](int i, int j) { return vec_action[i - 1][j - 1]; };
    auto D = [&](int i, const Expr& e) {
        Expr d = e.diff(VarRef::atom(coord_atoms[size_t(i - 1)]));
        for (uint32_t a : coord_atoms) d = d.subst(a, GaussRat(0));
        return d;
    };
    auto A = [&](int i, int j) { return P(i, j) - P(j, i); };
    MTReport rep;
    rep.eq1 = -D(1, A(2, 6)) - D(2, A(1, 6)) - D(3, A(1, 5)) - D(4, A(2, 3)) + D(5, A(1, 3)) -
              D(6, A(1, 2));
    rep.eq2 = -D(1, A(2, 3)) - D(2, A(1, 3)) - D(3, A(1, 2)) - D(4, A(2, 6)) + D(5, A(1, 6)) -
              D(6, A(1, 5));
    rep.obstructed = !(rep.eq1.is_zero() && rep.eq2.is_zero());
    return rep;
}

/// Public entry: J given over the real covector basis of a 3-coordinate
/// frame; the vector action is the transpose of the covector action.
inline MTReport mt_obstruction(const ACS& j_real, const Frame& fr) {
    const CtxPtr& ctx = j_real.ctx();
    if (fr.coords().size() != 3) fail(errc::invalid_argument, "mt_obstruction expects C^3 = R^6");
    j_real.check_square(); // NotAComplexStructure on failure
    ExprMat cov = j_real.matrix();
    size_t m = cov.size();
    ExprMat vec(m, std::vector<Expr>(m, Expr::zero(ctx)));
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) vec[i][j] = cov[j][i];
    std::vector<uint32_t> coords;
    for (uint32_t cc : fr.coords()) coords.push_back(ctx->complex_coords()[cc].x);
    for (uint32_t cc : fr.coords()) coords.push_back(ctx->complex_coords()[cc].y);
    return mt_equations(vec, coords);
}

/// Calibration scan over the sign/index conventions of the compatibility
/// equations: matrix read as vector vs covector action, coordinates in the
/// block order (x1,x2,x3,y1,y2,y3) vs interleaved (x1,y1,x2,y2,x3,y3).
struct MTConvention {
    bool covector_action = false;
    bool interleaved = false;
    std::string name() const {
        return std::string(covector_action ? "covector" : "vector") + "/" +
               (interleaved ? "interleaved" : "block");
    }
};

inline std::vector<MTConvention> mt_conventions() {
    return {{false, false}, {true, false}, {false, true}, {true, true}};
}

/// Evaluate the equations for a candidate convention, starting from the
/// vector action in block order.
inline MTReport mt_equations_under(const CtxPtr& ctx, const ExprMat& vec_block,
                                   const std::vector<uint32_t>& coords_block,
                                   const MTConvention& conv) {
    size_t m = 6;
    std::vector<size_t> perm(m);
    for (size_t i = 0; i < m; ++i) perm[i] = i;
    if (conv.interleaved) perm = {0, 3, 1, 4, 2, 5}; // position k holds block index perm[k]
    ExprMat p(m, std::vector<Expr>(m, Expr::zero(ctx)));
    std::vector<uint32_t> coords(m);
    for (size_t i = 0; i < m; ++i) {
        coords[i] = coords_block[perm[i]];
        for (size_t j = 0; j < m; ++j)
            p[i][j] = conv.covector_action ? vec_block[perm[j]][perm[i]]
                                           : vec_block[perm[i]][perm[j]];
    }
    return mt_equations(p, coords);
}

// --------------------------------------------------- invariant taming

struct TamingReport {
    bool exists = false;               // a closed taming form was exhibited
    bool impossible = false;           // a diagonal coefficient is forced to vanish
    std::vector<std::string> forced;   // names of forced-zero unknowns
    std::string witness;               // printed closed taming form, when found
    size_t rank = 0;
    size_t unknowns = 0;
};

/// Sets up the general invariant real 2-form with unknown coefficients over
/// the frame's coframe, imposes closedness as an exact linear system, and
/// reports forced degeneracies against the open taming condition. With
/// `compatible` the (2,0)+(0,2) part is constrained away (J-invariance).
inline TamingReport invariant_taming_solver(const FramePtr& fr, bool compatible = false) {
    const CtxPtr& ctx = fr->ctx();
    if (fr->mode() != Frame::Mode::invariant)
        fail(errc::invalid_argument, "the averaging argument needs an invariant frame");
    size_t n = fr->n();
    // real basis of invariant 2-forms, diagonal (1,1) entries first
    std::vector<Form> basis_forms;
    std::vector<std::string> names;
    Expr iu = Expr::i(ctx);
    for (size_t j = 0; j < n; ++j) { // i A_j phi^j ^ phibar^j
        Form f(ctx, fr->working());
        f.add_term((1u << j) | (1u << (n + j)), iu);
        basis_forms.push_back(f);
        names.push_back("A" + std::to_string(j + 1));
    }
    size_t diag_count = n;
    for (size_t j = 0; j < n; ++j)
        for (size_t k = j + 1; k < n; ++k) {
            // u phi^{j kbar} - ubar phi^{k jbar}, split into Re and Im parts
            Form re(ctx, fr->working());
            re.add_term((1u << j) | (1u << (n + k)), Expr::one(ctx));
            re.add_term((1u << k) | (1u << (n + j)), -Expr::one(ctx));
            basis_forms.push_back(re);
            names.push_back("Re u" + std::to_string(j + 1) + std::to_string(k + 1));
            Form im(ctx, fr->working());
            im.add_term((1u << j) | (1u << (n + k)), iu);
            im.add_term((1u << k) | (1u << (n + j)), iu);
            basis_forms.push_back(im);
            names.push_back("Im u" + std::to_string(j + 1) + std::to_string(k + 1));
            // w phi^{jk} + wbar phibar^{jk}
            Form wre(ctx, fr->working());
            wre.add_term((1u << j) | (1u << k), Expr::one(ctx));
            wre.add_term((1u << (n + j)) | (1u << (n + k)), Expr::one(ctx));
            basis_forms.push_back(wre);
            names.push_back("Re w" + std::to_string(j + 1) + std::to_string(k + 1));
            Form wim(ctx, fr->working());
            wim.add_term((1u << j) | (1u << k), iu);
            wim.add_term((1u << (n + j)) | (1u << (n + k)), -iu);
            basis_forms.push_back(wim);
            names.push_back("Im w" + std::to_string(j + 1) + std::to_string(k + 1));
        }
    // closedness rows: coefficients of d(basis form) on each 3-form word
    std::vector<Form> dbasis;
    std::map<uint32_t, size_t> row_of;
    for (const Form& f : basis_forms) {
        Form df = fr->d(f);
        dbasis.push_back(df);
        for (const auto& [mask, c] : df.terms())
            if (!row_of.count(mask)) row_of[mask] = row_of.size();
    }
    size_t rows = row_of.size(), cols = basis_forms.size();
    ExprMat a(std::max<size_t>(rows, 1), std::vector<Expr>(cols, Expr::zero(ctx)));
    for (size_t i = 0; i < cols; ++i)
        for (const auto& [mask, c] : dbasis[i].terms()) a[row_of[mask]][i] = c;
    if (compatible) {
        // J-invariance kills the (2,0)+(0,2) unknowns
        for (size_t i = 0; i < cols; ++i) {
            if (names[i].rfind("Re w", 0) == 0 || names[i].rfind("Im w", 0) == 0) {
                std::vector<Expr> row(cols, Expr::zero(ctx));
                row[i] = Expr::one(ctx);
                a.push_back(row);
            }
        }
    }
    TamingReport rep;
    rep.unknowns = cols;
    rep.rank = rank(a);
    std::vector<size_t> forced = forced_zero_variables(a);
    for (size_t f : forced) {
        rep.forced.push_back(names[f]);
        if (f < diag_count) rep.impossible = true;
    }
    if (!rep.impossible) {
        // candidate: the diagonal form with all A_j = 1
        Form omega = Form::zero(ctx, fr->working());
        for (size_t j = 0; j < diag_count; ++j) omega = omega + basis_forms[j];
        if (fr->d(omega).is_zero()) {
            rep.exists = true;
            rep.witness = omega.str();
        }
    }
    return rep;
}

// --------------------------------------------------- invariant dbar classes

struct DbarClassReport {
    bool exact = false;
    std::optional<Form> preimage;
    size_t rank_a = 0;       // rank of delbar on invariant (p,q-1)-forms
    size_t rank_augmented = 0;
};

/// Solve delbar(xi) = alpha over invariant (p,q-1)-forms; a rank certificate
/// is returned when the class is not exact within invariant forms.
inline DbarClassReport invariant_dbar_class(const FramePtr& fr, const Form& alpha, int p, int q) {
    const CtxPtr& ctx = fr->ctx();
    if (fr->mode() != Frame::Mode::invariant)
        fail(errc::invalid_argument, "invariant-level classes need an invariant frame");
    size_t n = fr->n();
    if (!alpha.is_pure(p, q)) fail(errc::type_mismatch, "alpha must be a pure (p,q)-form");
    std::vector<uint32_t> holo = detail::holo_words(n, p);
    std::vector<uint32_t> anti = detail::holo_words(n, q - 1);
    std::vector<Form> basis_forms;
    for (uint32_t hw : holo)
        for (uint32_t aw : anti) {
            Form f(ctx, fr->working());
            f.add_term(hw | (aw << n), Expr::one(ctx));
            basis_forms.push_back(f);
        }
    std::map<uint32_t, size_t> row_of;
    std::vector<Form> images;
    for (const Form& f : basis_forms) {
        Form df = delbar(fr, f);
        images.push_back(df);
        for (const auto& [mask, c] : df.terms())
            if (!row_of.count(mask)) row_of[mask] = row_of.size();
    }
    for (const auto& [mask, c] : alpha.terms())
        if (!row_of.count(mask)) row_of[mask] = row_of.size();
    size_t rows = std::max<size_t>(row_of.size(), 1), cols = basis_forms.size();
    ExprMat a(rows, std::vector<Expr>(cols, Expr::zero(ctx)));
    std::vector<Expr> b(rows, Expr::zero(ctx));
    for (size_t i = 0; i < cols; ++i)
        for (const auto& [mask, c] : images[i].terms()) a[row_of[mask]][i] = c;
    for (const auto& [mask, c] : alpha.terms()) b[row_of[mask]] = c;
    DbarClassReport rep;
    rep.rank_a = rank(a);
    ExprMat aug = a;
    for (size_t r = 0; r < rows; ++r) aug[r].push_back(b[r]);
    rep.rank_augmented = rank(aug);
    if (rep.rank_augmented > rep.rank_a) return rep; // not exact: rank certificate
    auto x = solve_linear(a, b);
    if (!x) return rep;
    Form pre = Form::zero(ctx, fr->working());
    for (size_t i = 0; i < cols; ++i) pre = pre + basis_forms[i] * (*x)[i];
    // every returned preimage is re-verified symbolically
    if (!delbar(fr, pre).equals(alpha))
        fail(errc::invalid_argument, "internal: delbar preimage does not reproduce the class");
    rep.exact = true;
    rep.preimage = pre;
    return rep;
}

// --------------------------------------------------- linear power preservation

struct LinearPowerReport {
    bool preserves_omega_p = false;
    int preserves_omega_sign = 0; // +1, -1, or 0 for none
};

/// Exact check whether a constant linear complex structure preserves omega^p
/// and whether it preserves omega up to sign.
inline LinearPowerReport linear_power_preservation(const ACS& j, const Form& omega, int p) {
    size_t n2 = j.basis()->size();
    if (omega.basis().get() != j.basis().get()) fail(errc::basis_mismatch, "omega over a different basis");
    Form top = omega.wedge_pow(unsigned(n2 / 2));
    if (top.is_zero()) fail(errc::degenerate_omega, "omega is degenerate");
    LinearPowerReport rep;
    Form wp = omega.wedge_pow(unsigned(p));
    rep.preserves_omega_p = j.act(wp).equals(wp);
    Form jw = j.act(omega);
    if (jw.equals(omega)) rep.preserves_omega_sign = 1;
    else if (jw.equals(-omega)) rep.preserves_omega_sign = -1;
    return rep;
}

} // namespace pklab
