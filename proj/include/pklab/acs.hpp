#pragma once

#include <complex>
#include <string>
#include <vector>

#include "pklab/frame.hpp"

namespace pklab {

/// An almost complex structure presented by its action on a covector basis:
/// J e_j = images[j]. For complex bases the action must be conj-equivariant;
/// J*J = -id is checked at construction.
class ACS {
public:
    ACS() = default;
    ACS(CtxPtr ctx, BasisPtr basis, std::vector<Form> images, bool validate = true)
        : ctx_(std::move(ctx)), basis_(std::move(basis)), images_(std::move(images)) {
        if (validate) check_square();
    }

    /// From a 2n x 2n matrix P over a basis, column convention J e_j = sum_i P[i][j] e_i.
    static ACS from_matrix(CtxPtr ctx, BasisPtr basis, const ExprMat& p, bool validate = true) {
        size_t m = basis->size();
        std::vector<Form> images;
        for (size_t j = 0; j < m; ++j) {
            Form f(ctx, basis);
            for (size_t i = 0; i < m; ++i) f.add_term(1u << i, p[i][j]);
            images.push_back(f);
        }
        return ACS(std::move(ctx), std::move(basis), std::move(images), validate);
    }

    /// From a (1,0)-coframe: J = +i on the span of the coframe, -i on the
    /// conjugate span. The coframe forms live over the basis the ACS will act on.
    static ACS from_coframe(const CtxPtr& ctx, const std::vector<Form>& coframe) {
        if (coframe.empty()) fail(errc::invalid_argument, "empty coframe");
        const BasisPtr& basis = coframe[0].basis();
        size_t n = coframe.size(), m = basis->size();
        if (m != 2 * n) fail(errc::invalid_argument, "coframe size does not match basis");
        ExprMat c(m, std::vector<Expr>(m, Expr::zero(ctx)));
        for (size_t i = 0; i < n; ++i) {
            Form cf = coframe[i].conj();
            for (size_t j = 0; j < m; ++j) {
                c[i][j] = coframe[i].coeff(1u << j);
                c[n + i][j] = cf.coeff(1u << j);
            }
        }
        Inverse inv = invert(c, "coframe");
        // J acts as C^{-1} D C on the column of basis covectors; with the
        // column convention P[i][j] the matrix is the transpose of that.
        ExprMat d(m, std::vector<Expr>(m, Expr::zero(ctx)));
        Expr iu = Expr::i(ctx);
        for (size_t k = 0; k < n; ++k) d[k][k] = iu;
        for (size_t k = n; k < m; ++k) d[k][k] = -iu;
        ExprMat a = mat_mul(inv.inv, mat_mul(d, c));
        ExprMat p(m, std::vector<Expr>(m, Expr::zero(ctx)));
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < m; ++j) p[i][j] = a[j][i];
        return from_matrix(ctx, basis, p, false);
    }

    const CtxPtr& ctx() const { return ctx_; }
    const BasisPtr& basis() const { return basis_; }
    const std::vector<Form>& images() const { return images_; }

    ExprMat matrix() const {
        size_t m = basis_->size();
        ExprMat p(m, std::vector<Expr>(m, Expr::zero(ctx_)));
        for (size_t j = 0; j < m; ++j)
            for (size_t i = 0; i < m; ++i) p[i][j] = images_[j].coeff(1u << i);
        return p;
    }

    /// (J F)(V_1,...,V_k) = F(J V_1,...,J V_k): substitute each covector by its image.
    Form act(const Form& f) const {
        if (f.basis().get() != basis_.get()) fail(errc::basis_mismatch, "form over a different basis");
        if (!f.homogeneous()) fail(errc::inhomogeneous_form, "J acts on homogeneous forms");
        return f.substituted(images_, basis_);
    }

    /// Re-express the same J on another basis, given the conversion maps.
    ACS converted(const BasisPtr& target, const std::vector<Form>& here_to_target,
                  const std::vector<Form>& target_to_here) const {
        std::vector<Form> imgs;
        for (size_t j = 0; j < target->size(); ++j) {
            Form pre = target_to_here[j];                         // target covector over this basis
            Form jpre = pre.substituted(images_, basis_);         // J applied
            imgs.push_back(jpre.substituted(here_to_target, target));
        }
        return ACS(ctx_, target, imgs, false);
    }

    void check_square() const {
        size_t m = basis_->size();
        for (size_t j = 0; j < m; ++j) {
            Form twice = images_[j].substituted(images_, basis_);
            Form expect = -Form::covector(ctx_, basis_, j);
            if (!twice.equals(expect))
                fail(errc::not_a_complex_structure, "J*J != -id on " + basis_->cov(j).name);
        }
    }

private:
    CtxPtr ctx_;
    BasisPtr basis_;
    std::vector<Form> images_;
};

/// The (1,0)-coframe of J in reduced form phi^j = e_j + corrections on the
/// conjugate block: the columns of (P + i*id) span the +i eigenspace, and the
/// holomorphic block is normalized to the identity.
inline std::vector<Form> coframe_of(const ACS& j) {
    const CtxPtr& ctx = j.ctx();
    const BasisPtr& basis = j.basis();
    if (!basis->is_complex())
        fail(errc::invalid_argument, "coframe extraction needs a complexified basis");
    size_t n = basis->half(), m = basis->size();
    ExprMat p = j.matrix();
    Expr iu = Expr::i(ctx);
    ExprMat k = p;
    for (size_t d = 0; d < m; ++d) k[d][d] += iu;
    // holomorphic block of the first n columns
    ExprMat h(n, std::vector<Expr>(n, Expr::zero(ctx)));
    for (size_t r = 0; r < n; ++r)
        for (size_t c = 0; c < n; ++c) h[r][c] = k[r][c];
    auto hinv = try_invert(h);
    if (!hinv)
        fail(errc::singular_coframe, "could not normalize the (1,0)-coframe against the holomorphic block");
    std::vector<Form> out;
    for (size_t c = 0; c < n; ++c) {
        Form f(ctx, basis);
        for (size_t r = 0; r < m; ++r) {
            Expr v = Expr::zero(ctx);
            for (size_t t = 0; t < n; ++t) v += k[r][t] * hinv->inv[t][c];
            f.add_term(1u << r, v);
        }
        out.push_back(f);
    }
    return out;
}

/// Phi(t) data: deformed coframe phi^j_t = phi^j - sum_k sigma[j][k] phibar^k
/// over a base frame, with sigma vanishing at the parameters' origin.
struct DeformationFamily {
    FramePtr base;
    ExprMat sigma;                // n x n, Expr in coordinates and parameters
    std::vector<uint32_t> params; // parameter atoms (t, or t and tbar, or t_1..t_k)

    size_t n() const { return base->n(); }

    void validate() const {
        const CtxPtr& ctx = base->ctx();
        size_t nn = n();
        if (sigma.size() != nn) fail(errc::invalid_argument, "sigma must be n x n");
        for (const auto& row : sigma) {
            if (row.size() != nn) fail(errc::invalid_argument, "sigma must be n x n");
            for (const Expr& e : row) {
                Expr at0 = e;
                for (uint32_t p : params) at0 = at0.subst(p, GaussRat(0));
                if (!at0.is_zero())
                    fail(errc::invalid_argument, "sigma must vanish at t = 0");
            }
        }
        (void)ctx;
    }
};

/// The deformed coframe {phi^j_t} as forms over the base working basis.
inline std::vector<Form> deform_coframe(const DeformationFamily& d) {
    const CtxPtr& ctx = d.base->ctx();
    const BasisPtr& w = d.base->working();
    size_t n = d.n();
    std::vector<Form> out;
    for (size_t j = 0; j < n; ++j) {
        Form f = Form::covector(ctx, w, j);
        for (size_t k = 0; k < n; ++k)
            f.add_term(1u << (n + k), -d.sigma[j][k]);
        out.push_back(f);
    }
    return out;
}

/// The frame adapted to J_t: the working basis is the deformed coframe, and d
/// is inherited from the base frame.
inline FramePtr deformed_frame(const DeformationFamily& d) {
    const CtxPtr& ctx = d.base->ctx();
    size_t n = d.n();
    std::vector<Form> cof = deform_coframe(d);
    std::vector<std::string> names;
    for (size_t j = 0; j < n; ++j) names.push_back(d.base->working()->cov(j).name);
    if (d.base->mode() == Frame::Mode::coordinate) {
        std::vector<Form> in_diff;
        for (size_t j = 0; j < n; ++j) in_diff.push_back(d.base->to_diff(cof[j]));
        return Frame::coordinate(ctx, d.base->coords(), names, in_diff);
    }
    // invariant base: derive the deformed structure equations symbolically
    for (const auto& row : d.sigma)
        for (const Expr& e : row)
            if (!e.num().all_atoms([&](uint32_t a) { return ctx->is_parameter_atom(a); }))
                fail(errc::invalid_argument, "invariant deformations need parameter-only sigma");
    BasisPtr tb = Basis::complex_pairs(names);
    // change of basis between {phi_t} and {phi}
    size_t m = 2 * n;
    ExprMat c(m, std::vector<Expr>(m, Expr::zero(ctx)));
    for (size_t j = 0; j < n; ++j) {
        Form cf = cof[j].conj();
        for (size_t b = 0; b < m; ++b) {
            c[j][b] = cof[j].coeff(1u << b);
            c[n + j][b] = cf.coeff(1u << b);
        }
    }
    Inverse inv = invert(c, "deformed coframe");
    std::vector<Form> base_in_t; // base working covector b over the deformed basis
    for (size_t b = 0; b < m; ++b) {
        Form g(ctx, tb);
        for (size_t j = 0; j < m; ++j) g.add_term(1u << j, inv.inv[b][j]);
        base_in_t.push_back(g);
    }
    std::vector<Form> structure_t;
    for (size_t j = 0; j < n; ++j) {
        Form dphi_t = d.base->d(cof[j]); // over base working
        structure_t.push_back(dphi_t.substituted(base_in_t, tb));
    }
    return Frame::invariant(ctx, names, structure_t);
}

/// d(phi^j_t) re-expressed in the deformed coframe basis, one form per j.
inline std::vector<Form> structure_equations_t(const DeformationFamily& d) {
    FramePtr ft = deformed_frame(d);
    std::vector<Form> out;
    for (size_t j = 0; j < d.n(); ++j) out.push_back(ft->d_covector(j));
    return out;
}

/// Invert a substitution map: images[i] is basis covector i of `domain`
/// expressed over some basis B; the result expresses each B covector over
/// `domain`.
inline std::vector<Form> invert_covector_map(const std::vector<Form>& images,
                                             const BasisPtr& domain) {
    const CtxPtr& ctx = images.at(0).ctx();
    const BasisPtr& b = images[0].basis();
    size_t m = b->size();
    if (images.size() != m || domain->size() != m)
        fail(errc::invalid_argument, "covector map must be square");
    ExprMat c(m, std::vector<Expr>(m, Expr::zero(ctx)));
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) c[i][j] = images[i].coeff(1u << j);
    Inverse inv = invert(c, "covector map");
    std::vector<Form> out;
    for (size_t j = 0; j < m; ++j) {
        Form g(ctx, domain);
        for (size_t i = 0; i < m; ++i) g.add_term(1u << i, inv.inv[j][i]);
        out.push_back(g);
    }
    return out;
}

/// Project a form onto its (p,q) part relative to an arbitrary (1,0)-coframe
/// given over the form's own basis; the result is expressed in that coframe.
inline Form bidegree_project(const Form& f, const std::vector<Form>& coframe, int p, int q,
                             const std::vector<std::string>& names = {}) {
    size_t n = coframe.size();
    std::vector<std::string> basis_names = names;
    if (basis_names.empty())
        for (size_t j = 0; j < n; ++j) basis_names.push_back("c" + std::to_string(j + 1));
    BasisPtr target = Basis::complex_pairs(basis_names);
    std::vector<Form> full = coframe;
    for (size_t j = 0; j < n; ++j) full.push_back(coframe[j].conj());
    std::vector<Form> into = invert_covector_map(full, target);
    return f.substituted(into, target).component(p, q);
}

/// Express a form given over the base frame on the deformed frame's basis.
inline Form to_deformed_basis(const DeformationFamily& d, const FramePtr& ft, const Form& f) {
    if (d.base->mode() == Frame::Mode::coordinate)
        return ft->to_working(d.base->to_diff(f));
    std::vector<Form> cof = deform_coframe(d);
    size_t n = d.n();
    for (size_t j = 0; j < n; ++j) cof.push_back(cof[j].conj());
    std::vector<Form> base_in_t = invert_covector_map(cof, ft->working());
    return f.substituted(base_in_t, ft->working());
}

/// Express a form given over the deformed frame back on the base frame.
inline Form from_deformed_basis(const DeformationFamily& d, const FramePtr& ft, const Form& f) {
    if (d.base->mode() == Frame::Mode::coordinate)
        return d.base->to_working(ft->to_diff(f));
    std::vector<Form> cof = deform_coframe(d);
    size_t n = d.n();
    for (size_t j = 0; j < n; ++j) cof.push_back(cof[j].conj());
    return f.substituted(cof, d.base->working());
}

/// The (0,2) components of d(phi^j_t); J_t is integrable iff all vanish.
inline std::vector<Form> integrability_defect(const DeformationFamily& d) {
    std::vector<Form> out;
    for (Form& f : structure_equations_t(d)) out.push_back(f.component(0, 2));
    return out;
}

inline std::vector<Form> integrability_defect(const FramePtr& frame) {
    std::vector<Form> out;
    for (size_t j = 0; j < frame->n(); ++j)
        out.push_back(frame->d_covector(j).component(0, 2));
    return out;
}

/// J_t as an ACS over the base working basis (or, for coordinate frames, over
/// the coordinate differentials).
inline ACS reconstruct_Jt(const DeformationFamily& d) {
    std::vector<Form> cof = deform_coframe(d);
    if (d.base->mode() == Frame::Mode::coordinate) {
        std::vector<Form> in_diff;
        for (const Form& f : cof) in_diff.push_back(d.base->to_diff(f));
        return ACS::from_coframe(d.base->ctx(), in_diff);
    }
    return ACS::from_coframe(d.base->ctx(), cof);
}

/// J of a frame's base coframe: +i on the working (1,0) block. For coordinate
/// frames the ACS acts on the coordinate differentials.
inline ACS base_acs(const FramePtr& fr) {
    const CtxPtr& ctx = fr->ctx();
    if (fr->mode() == Frame::Mode::coordinate) {
        std::vector<Form> cof;
        for (size_t j = 0; j < fr->n(); ++j) cof.push_back(fr->to_diff(fr->covector(j)));
        return ACS::from_coframe(ctx, cof);
    }
    size_t n = fr->n();
    std::vector<Form> images;
    Expr iu = Expr::i(ctx);
    for (size_t j = 0; j < 2 * n; ++j)
        images.push_back(Form::covector(ctx, fr->working(), j) * (j < n ? iu : -iu));
    return ACS(ctx, fr->working(), images, false);
}

/// Move an ACS given on the real coordinate covectors to the dz/dzbar basis.
inline ACS complexified(const ACS& j_real, const Frame& fr) {
    if (j_real.basis().get() != fr.real_basis().get())
        fail(errc::basis_mismatch, "expected an ACS over the frame's real covector basis");
    const CtxPtr& ctx = j_real.ctx();
    std::vector<Form> images;
    for (size_t j = 0; j < fr.diff_basis()->size(); ++j) {
        Form dz = Form::covector(ctx, fr.diff_basis(), j);
        images.push_back(fr.real_to_diff(j_real.act(fr.diff_to_real(dz))));
    }
    return ACS(ctx, fr.diff_basis(), images, false);
}

/// Move an ACS given on the dz/dzbar basis to the real coordinate covectors.
inline ACS realified(const ACS& j_diff, const Frame& fr) {
    if (j_diff.basis().get() != fr.diff_basis().get())
        fail(errc::basis_mismatch, "expected an ACS over the frame's differential basis");
    const CtxPtr& ctx = j_diff.ctx();
    std::vector<Form> images;
    for (size_t j = 0; j < fr.real_basis()->size(); ++j) {
        Form e = Form::covector(ctx, fr.real_basis(), j);
        images.push_back(fr.diff_to_real(j_diff.act(fr.real_to_diff(e))));
    }
    return ACS(ctx, fr.real_basis(), images, false);
}

/// The endomorphism data L_t with J_t = (1+L)J(1+L)^{-1}, L anti-commuting
/// with J, together with the compatibility predicates.
struct EndoL {
    ExprMat L; // vector action on the complexified basis dual to acs.basis()
    bool anticommutes = false;
    bool g_symmetric = false; // w.r.t. the flat metric of the base covector basis
};

inline EndoL deformation_endomorphism(const ACS& j0, const ACS& jt) {
    const CtxPtr& ctx = j0.ctx();
    size_t m = j0.basis()->size();
    // vector actions are the transposes of the covector actions
    ExprMat a = j0.matrix(), b = jt.matrix();
    ExprMat av(m, std::vector<Expr>(m, Expr::zero(ctx))), bv = av;
    for (size_t i = 0; i < m; ++i)
        for (size_t k = 0; k < m; ++k) {
            av[i][k] = a[k][i];
            bv[i][k] = b[k][i];
        }
    // solve (J0 + Jt) L = J0 - Jt
    ExprMat sum = mat_add(av, bv);
    ExprMat diffm = mat_add(av, mat_scaled(bv, -Expr::one(ctx)));
    Inverse inv = invert(sum, "J0 + Jt");
    EndoL out;
    out.L = mat_mul(inv.inv, diffm);
    ExprMat anti = mat_add(mat_mul(out.L, av), mat_mul(av, out.L));
    out.anticommutes = mat_is_zero(anti);
    bool symm = true;
    for (size_t i = 0; i < m && symm; ++i)
        for (size_t k = 0; k < m && symm; ++k)
            if (!out.L[i][k].equals(out.L[k][i])) symm = false;
    out.g_symmetric = symm;
    return out;
}

/// sigma recovered from J_t: express its (1,0) space as a graph over the base
/// coframe, phi^j_t = phi^j - sum sigma[j][k] phibar^k, and read sigma off.
inline ExprMat sigma_of_Jt(const DeformationFamily& d, const ACS& jt) {
    const CtxPtr& ctx = d.base->ctx();
    size_t n = d.n();
    std::vector<Form> cof = coframe_of(jt);
    if (d.base->mode() == Frame::Mode::coordinate)
        for (Form& f : cof) f = d.base->to_working(f);
    ExprMat h(n, std::vector<Expr>(n, Expr::zero(ctx)));
    for (size_t j = 0; j < n; ++j)
        for (size_t k = 0; k < n; ++k) h[j][k] = cof[j].coeff(1u << k);
    Inverse hinv = invert(h, "coframe holomorphic block");
    ExprMat s(n, std::vector<Expr>(n, Expr::zero(ctx)));
    for (size_t j = 0; j < n; ++j)
        for (size_t k = 0; k < n; ++k) {
            Expr v = Expr::zero(ctx);
            for (size_t l = 0; l < n; ++l) v += hinv.inv[j][l] * cof[l].coeff(1u << (n + k));
            s[j][k] = -v;
        }
    return s;
}

/// sigma recovered through the endomorphism route: Phi = (1/2)(L - i J0 L)
/// restricted to the (0,1) frame, paired against the base coframe.
inline ExprMat sigma_via_L(const DeformationFamily& d) {
    const CtxPtr& ctx = d.base->ctx();
    size_t n = d.n(), m = 2 * n;
    ACS j0 = base_acs(d.base);
    ACS jt = reconstruct_Jt(d);
    EndoL e = deformation_endomorphism(j0, jt);
    ExprMat a = j0.matrix();
    ExprMat av(m, std::vector<Expr>(m, Expr::zero(ctx)));
    for (size_t i = 0; i < m; ++i)
        for (size_t k = 0; k < m; ++k) av[i][k] = a[k][i];
    Expr half = Expr::constant(ctx, GaussRat(Rational(1, 2)));
    ExprMat phi = mat_scaled(mat_add(e.L, mat_scaled(mat_mul(av, e.L), -Expr::i(ctx))), half);
    // coframe matrix over the acting basis (identity for invariant frames)
    ExprMat c = mat_identity(ctx, m);
    if (d.base->mode() == Frame::Mode::coordinate) {
        for (size_t j = 0; j < n; ++j) {
            Form w = d.base->to_diff(d.base->covector(j));
            Form wb = w.conj();
            for (size_t b = 0; b < m; ++b) {
                c[j][b] = w.coeff(1u << b);
                c[n + j][b] = wb.coeff(1u << b);
            }
        }
    }
    Inverse cinv = invert(c, "base coframe");
    ExprMat full = mat_mul(c, mat_mul(phi, cinv.inv));
    ExprMat s(n, std::vector<Expr>(n, Expr::zero(ctx)));
    for (size_t j = 0; j < n; ++j)
        for (size_t k = 0; k < n; ++k) s[j][k] = full[j][n + k];
    return s;
}

} // namespace pklab
