#pragma once

// Executable claims: each catalog entry carries a list of checks whose
// expected outcomes are exact symbolic identities or solver verdicts; the
// runner reports pass/fail with residuals.

#include <sstream>
#include <string>
#include <vector>

#include "pklab/catalog.hpp"

namespace pklab {

struct ClaimResult {
    std::string id;
    std::string verb;
    bool pass = false;
    std::string detail;
};

struct ClaimsReport {
    std::string manifold;
    std::vector<ClaimResult> results;
    bool all_passed() const {
        for (const auto& r : results)
            if (!r.pass) return false;
        return true;
    }
};

namespace claimrun {

using detail_dsl::eval_const;
using detail_dsl::eval_form;
using detail_dsl::eval_scalar;

struct Runtime {
    const ManifoldSpec* spec = nullptr;
    FramePtr ft; // deformed frame, when a family is declared

    const FramePtr& base() const { return spec->frame; }
    const CtxPtr& ctx() const { return spec->ctx; }

    Form resolve(const std::string& name, bool deformed) const {
        auto it = spec->forms.find(name);
        Form f(ctx(), base()->working());
        if (it != spec->forms.end()) f = it->second;
        else if (name == "omega" && spec->has_metric) {
            MetricFamily mf{family(), {}};
            f = omega_family(mf);
        } else {
            int idx = base()->working()->index_of(name);
            if (idx < 0) fail(errc::unknown_name, "no form or covector named '" + name + "'");
            if (deformed) return Form::covector(ctx(), ft->working(), size_t(idx));
            return base()->covector(size_t(idx));
        }
        if (!deformed) return f;
        return to_deformed_basis(family(), ft, f);
    }

    DeformationFamily family() const {
        if (spec->family) return *spec->family;
        // zero family on the base frame
        DeformationFamily fam;
        fam.base = base();
        size_t n = base()->n();
        fam.sigma = ExprMat(n, std::vector<Expr>(n, Expr::zero(ctx())));
        return fam;
    }

    ACS acs() const {
        if (spec->acs_real) return *spec->acs_real;
        return realified(base_acs(base()), *base());
    }

    Scope scope(bool deformed, BasisPtr target = nullptr) const {
        Scope sc;
        sc.ctx = ctx();
        sc.frame = deformed ? ft : base();
        sc.target = target ? target : sc.frame->working();
        sc.named_forms = deformed ? nullptr : &spec->forms;
        return sc;
    }

    std::vector<std::pair<uint32_t, GaussRat>> witness_pairs(
        const std::vector<dsl::Assignment>& group) const {
        std::vector<std::pair<uint32_t, GaussRat>> out;
        Scope sc = scope(false);
        for (const auto& a : group) {
            auto v = ctx()->find_variable(a.name);
            if (!v) fail(errc::unknown_name, "unknown parameter '" + a.name + "'");
            GaussRat value = eval_const(a.value, sc);
            uint32_t partner = ctx()->atom(*v).conj_partner;
            if (partner == *v && !value.is_real())
                fail(errc::inconsistent_conjugates,
                     "real parameter '" + a.name + "' given a complex witness");
            out.emplace_back(*v, value);
            if (partner != *v) out.emplace_back(partner, value.conj());
        }
        return out;
    }

    static Form subst_all(Form f, const std::vector<std::pair<uint32_t, GaussRat>>& w) {
        for (const auto& [a, v] : w) f = f.subst_param(a, v);
        return f;
    }
};

inline std::string truncate(std::string s, size_t n = 160) {
    if (s.size() > n) s = s.substr(0, n) + "...";
    return s;
}

/// Apply a claim's 'with' substitutions: opaque functions replaced by
/// expressions, parameters pinned to exact values, everywhere in the spec.
inline ManifoldSpec specialize(const ManifoldSpec& spec,
                               const std::vector<dsl::Assignment>& substs) {
    if (substs.empty()) return spec;
    ManifoldSpec out = spec;
    Scope sc{spec.ctx, spec.frame, spec.frame->working(), nullptr, {}};
    struct Sub {
        bool is_fn;
        uint32_t id;
        Expr expr;
        GaussRat value;
    };
    std::vector<Sub> subs;
    for (const auto& a : substs) {
        if (auto fn = spec.ctx->find_fn(a.name)) {
            subs.push_back({true, *fn, eval_scalar(a.value, sc), GaussRat(0)});
        } else if (auto var = spec.ctx->find_variable(a.name)) {
            if (!spec.ctx->is_parameter_atom(*var))
                fail(errc::invalid_argument, "'with' can substitute functions and parameters only");
            GaussRat value = eval_const(a.value, sc);
            uint32_t partner = spec.ctx->atom(*var).conj_partner;
            if (partner == *var && !value.is_real())
                fail(errc::inconsistent_conjugates,
                     "real parameter '" + a.name + "' given a complex value");
            subs.push_back({false, *var, Expr::zero(spec.ctx), value});
            // a complex parameter pins its conjugate partner as well
            if (partner != *var) subs.push_back({false, partner, Expr::zero(spec.ctx), value.conj()});
        } else fail(errc::unknown_name, "unknown substitution target '" + a.name + "'");
    }
    auto apply_form = [&](Form f) {
        for (const auto& s : subs) f = s.is_fn ? f.subst_fn(s.id, s.expr) : f.subst_param(s.id, s.value);
        return f;
    };
    auto apply_expr = [&](Expr e) {
        for (const auto& s : subs) e = s.is_fn ? e.subst_fn(s.id, s.expr) : e.subst(s.id, s.value);
        return e;
    };
    // frame
    if (spec.frame->mode() == Frame::Mode::coordinate) {
        std::vector<Form> cof;
        bool changed = false;
        for (const Form& f : spec.frame->coframe_in_diff()) {
            Form g = apply_form(f);
            if (!g.equals(f)) changed = true;
            cof.push_back(g);
        }
        if (changed) {
            std::vector<std::string> names;
            for (size_t j = 0; j < spec.frame->n(); ++j)
                names.push_back(spec.frame->working()->cov(j).name);
            out.frame = Frame::coordinate(spec.ctx, spec.frame->coords(), names, cof);
        }
    }
    // forms: constant coefficients over the coframe move over unchanged,
    // coordinate-dependent ones are substituted
    out.forms.clear();
    for (const auto& [name, f] : spec.forms) {
        Form g(spec.ctx, out.frame->working());
        for (const auto& [mask, c] : f.terms()) g.add_term(mask, apply_expr(c));
        out.forms.emplace(name, g);
    }
    if (spec.family) {
        DeformationFamily fam = *spec.family;
        fam.base = out.frame;
        for (auto& row : fam.sigma)
            for (Expr& e : row) e = apply_expr(e);
        out.family = fam;
    }
    if (spec.acs_real) {
        std::vector<Form> images;
        for (const Form& f : spec.acs_real->images()) images.push_back(apply_form(f));
        out.acs_real = ACS(spec.ctx, spec.acs_real->basis(), images, false);
    }
    return out;
}

inline ClaimResult run_one(const ManifoldSpec& spec0, const dsl::ClaimAst& c, int index) {
    ClaimResult res;
    res.verb = c.verb;
    res.id = c.verb + "-" + std::to_string(index);
    try {
        ManifoldSpec spec = specialize(spec0, c.with_subst);
        Runtime rt;
        rt.spec = &spec;
        if (spec.family) rt.ft = deformed_frame(*spec.family);
        const CtxPtr& ctx = spec.ctx;
        auto arg = [&](size_t k) -> std::string {
            if (k >= c.args.size()) fail(errc::invalid_argument, "claim is missing an argument");
            return c.args[k];
        };
        auto int_arg = [&](size_t k) { return std::stoi(arg(k)); };
        auto need_rhs = [&]() {
            if (!c.rhs) fail(errc::invalid_argument, "claim needs a ': value' right-hand side");
            return c.rhs;
        };

        if (c.verb == "frame-closure") {
            bool ok = true;
            for (size_t j = 0; j < spec.frame->working()->size(); ++j)
                if (!spec.frame->d(spec.frame->d_covector(j)).is_zero()) ok = false;
            if (rt.ft)
                for (size_t j = 0; j < rt.ft->working()->size(); ++j)
                    if (!rt.ft->d(rt.ft->d_covector(j)).is_zero()) ok = false;
            res.pass = ok;
            res.detail = "d*d = 0 on every basis covector";
        } else if (c.verb == "acs-involutive") {
            rt.acs().check_square();
            res.pass = true;
            res.detail = "J*J = -id";
        } else if (c.verb == "acs-coframe") {
            ACS j = complexified(rt.acs(), *spec.frame);
            bool ok = true;
            for (size_t k = 0; k < spec.frame->n(); ++k) {
                Form phi = spec.frame->to_diff(spec.frame->covector(k));
                if (!j.act(phi).equals(phi * Expr::i(ctx))) ok = false;
            }
            res.pass = ok;
            res.detail = "declared coframe is +i-eigen for the acs block";
        } else if (c.verb == "acs-matches-family") {
            if (!rt.ft) fail(errc::invalid_argument, "needs a deform block");
            ACS jt = reconstruct_Jt(*spec.family);
            ACS expect = complexified(rt.acs(), *spec.frame);
            auto w = rt.witness_pairs(c.witnesses.at(0));
            bool ok = true;
            for (size_t j = 0; j < jt.images().size(); ++j)
                if (!Runtime::subst_all(jt.images()[j], w).equals(expect.images()[j])) ok = false;
            res.pass = ok;
            res.detail = "reconstructed J_t matches the acs block at the witness";
        } else if (c.verb == "coframe") {
            size_t idx = size_t(int_arg(0)) - 1;
            ACS j = complexified(rt.acs(), *spec.frame);
            Form got = coframe_of(j).at(idx);
            Scope sc = rt.scope(false, spec.frame->diff_basis());
            Form expect = eval_form(need_rhs(), sc);
            res.pass = got.equals(expect);
            res.detail = truncate(got.str());
        } else if (c.verb == "structure" || c.verb == "structure-t") {
            bool t = c.verb.back() == 't';
            const FramePtr& fr = t ? rt.ft : spec.frame;
            int idx = fr->working()->index_of(arg(0));
            if (idx < 0) fail(errc::unknown_name, "unknown covector '" + arg(0) + "'");
            Form got = fr->d_covector(size_t(idx));
            Scope sc = rt.scope(t);
            Form expect = eval_form(need_rhs(), sc);
            res.pass = got.equals(expect);
            res.detail = truncate("d " + arg(0) + " = " + got.str());
        } else if (c.verb == "equal") {
            Form lhs = rt.resolve(arg(0), false);
            Scope sc = rt.scope(false);
            Form rhs = eval_form(need_rhs(), sc);
            res.pass = lhs.equals(rhs);
            res.detail = res.pass ? "forms agree" : truncate("difference " + (lhs - rhs).str());
        } else if (c.verb == "closed" || c.verb == "nonclosed") {
            Form f = rt.resolve(arg(0), false);
            Form df = spec.frame->d(f);
            bool closed = df.is_zero();
            res.pass = (c.verb == "closed") ? closed : !closed;
            res.detail = closed ? "d = 0" : truncate("d = " + df.str());
        } else if (c.verb == "closed-iff") {
            Form f = rt.resolve(arg(0), false);
            Scope sc = rt.scope(false);
            Form expect = eval_form(need_rhs(), sc);
            Form df = spec.frame->d(f);
            res.pass = df.equals(expect);
            res.detail = truncate("d " + arg(0) + " = " + df.str());
        } else if (c.verb == "power-closed-t") {
            Form f = rt.resolve(arg(0), true);
            unsigned p = unsigned(int_arg(1));
            Form dfp = rt.ft->d(f.wedge_pow(p));
            res.pass = dfp.is_zero();
            res.detail = res.pass ? "d(omega^" + arg(1) + ") = 0" : truncate(dfp.str());
        } else if (c.verb == "type") {
            Form f = rt.resolve(arg(0), false);
            res.pass = f.is_pure(int_arg(1), int_arg(2));
            res.detail = "bidegree check";
        } else if (c.verb == "real") {
            Form f = rt.resolve(arg(0), false);
            res.pass = f.is_real();
            res.detail = "conj(F) = F";
        } else if (c.verb == "jinv" || c.verb == "jinv-t") {
            bool t = c.verb.back() == 't';
            Form f = rt.resolve(arg(0), false);
            ACS j = t ? reconstruct_Jt(*spec.family) : base_acs(spec.frame);
            Form on_basis = spec.frame->mode() == Frame::Mode::coordinate ? spec.frame->to_diff(f) : f;
            res.pass = j.act(on_basis).equals(on_basis);
            res.detail = "J-action fixes the form";
        } else if (c.verb == "integrable" || c.verb == "nonintegrable") {
            std::vector<Form> defect =
                rt.ft ? integrability_defect(rt.ft) : integrability_defect(spec.frame);
            bool all_zero = true;
            std::string nz;
            for (const Form& f : defect)
                if (!f.is_zero()) {
                    all_zero = false;
                    nz = f.str();
                }
            if (c.verb == "integrable") {
                res.pass = all_zero;
                res.detail = all_zero ? "no (0,2) defect" : truncate(nz);
            } else {
                res.pass = !all_zero;
                if (res.pass && spec.family && !spec.family->params.empty()) {
                    // the defect must vanish at the parameter origin
                    for (Form f : defect) {
                        for (uint32_t p : spec.family->params) f = f.subst_param(p, GaussRat(0));
                        if (!f.is_zero()) res.pass = false;
                    }
                    if (!c.witnesses.empty()) {
                        auto w = rt.witness_pairs(c.witnesses[0]);
                        bool witness_nonzero = false;
                        for (const Form& f : defect)
                            if (!Runtime::subst_all(f, w).is_zero()) witness_nonzero = true;
                        if (!witness_nonzero) res.pass = false;
                    }
                }
                res.detail = truncate("defect " + nz);
            }
        } else if (c.verb == "balanced" || c.verb == "kahler") {
            Form omega = rt.resolve(arg(0), false);
            MetricReport rep = metric_predicates(spec.frame, omega);
            if (c.verb == "balanced") {
                res.pass = rep.positive && rep.balanced && !rep.kahler;
                res.detail = "d omega^{n-1} = 0, d omega != 0";
            } else {
                res.pass = rep.positive && rep.kahler;
                res.detail = "d omega = 0";
            }
        } else if (c.verb == "transverse" || c.verb == "transverse-t") {
            bool t = c.verb.back() == 't';
            Form f = rt.resolve(arg(0), t);
            int p = int_arg(1);
            const FramePtr& fr = t ? rt.ft : spec.frame;
            if (c.witnesses.empty()) {
                TransversalityReport rep = is_transverse(fr, f, p);
                res.pass = rep.verdict == TransversalityReport::Verdict::transverse_exact;
            } else {
                res.pass = true;
                for (const auto& group : c.witnesses) {
                    auto w = rt.witness_pairs(group);
                    TransversalityReport rep = is_transverse(fr, Runtime::subst_all(f, w), p);
                    if (rep.verdict != TransversalityReport::Verdict::transverse_exact)
                        res.pass = false;
                }
            }
            res.detail = "exact transversality certificate";
        } else if (c.verb == "transverse-power-t") {
            // transversality of omega^k (positive rescaling is immaterial)
            Form f = rt.resolve(arg(0), true);
            unsigned k = unsigned(int_arg(1));
            int p = int_arg(2);
            TransversalityReport rep = is_transverse(rt.ft, f.wedge_pow(k), p);
            res.pass = rep.verdict == TransversalityReport::Verdict::transverse_exact;
            res.detail = "exact transversality certificate for the power";
        } else if (c.verb == "transverse-range") {
            Form f = rt.resolve(arg(0), false);
            int p = int_arg(1);
            TransversalityReport rep = is_transverse(spec.frame, f, p);
            bool ok = rep.verdict == TransversalityReport::Verdict::transverse_exact &&
                      rep.param_range.has_value();
            if (ok && c.has_range) {
                Rational lo(c.range.first), hi(c.range.second);
                ok = !rep.param_range->lo_unbounded && !rep.param_range->hi_unbounded &&
                     rep.param_range->lo == lo && rep.param_range->hi == hi &&
                     !rep.param_range->lo_open_bound && !rep.param_range->hi_open_bound;
            }
            res.pass = ok;
            if (rep.param_range) {
                res.detail = "certified " + rep.param_name + " in (" +
                             rat_str(rep.param_range->lo) + ", " + rat_str(rep.param_range->hi) + ")";
            }
        } else if (c.verb == "pkahler" || c.verb == "pkahler-t") {
            bool t = c.verb.back() == 't';
            Form f = rt.resolve(arg(0), t);
            int p = int_arg(1);
            const FramePtr& fr = t ? rt.ft : spec.frame;
            bool ok = f.is_real() && f.is_pure(p, p) && fr->d(f).is_zero();
            std::string why = ok ? "" : "real/type/closed conjunct failed";
            if (ok) {
                if (c.witnesses.empty()) {
                    TransversalityReport rep = is_transverse(fr, f, p);
                    ok = rep.verdict == TransversalityReport::Verdict::transverse_exact;
                } else {
                    for (const auto& group : c.witnesses) {
                        auto w = rt.witness_pairs(group);
                        TransversalityReport rep = is_transverse(fr, Runtime::subst_all(f, w), p);
                        if (rep.verdict != TransversalityReport::Verdict::transverse_exact) ok = false;
                    }
                }
                if (!ok) why = "transversality failed";
            }
            res.pass = ok;
            res.detail = ok ? "closed real transverse (p,p)-form" : why;
        } else if (c.verb == "first-order") {
            MetricFamily mf{rt.family(), {}};
            SemiKahlerFirstOrder chk = semi_kahler_first_order_check(mf);
            bool expect_pass = arg(0) == "pass";
            res.pass = chk.passes == expect_pass;
            res.detail = truncate("del eta + delbar lambda = " + chk.residual.str());
        } else if (c.verb == "pde3-zero") {
            MetricFamily mf{rt.family(), {}};
            SemiKahlerFirstOrder chk = semi_kahler_first_order_check(mf);
            res.pass = !chk.pde.empty();
            for (const Expr& e : chk.pde)
                if (!e.is_zero()) res.pass = false;
            res.detail = "three curl equations vanish";
        } else if (c.verb == "cor3-partial") {
            MetricFamily mf{rt.family(), {}};
            SemiKahlerFirstOrder chk = semi_kahler_first_order_check(mf);
            Scope sc = rt.scope(false);
            Form expect = eval_form(need_rhs(), sc);
            res.pass = chk.packaged_del.has_value() && chk.packaged_del->equals(expect) &&
                       chk.packaged->equals(chk.data.eta.scaled(GaussRat(4)));
            res.detail = chk.packaged_del ? truncate(chk.packaged_del->str()) : "no packaged form";
        } else if (c.verb == "nop" || c.verb == "nop-t") {
            bool t = c.verb.back() == 't';
            const FramePtr& fr = t ? rt.ft : spec.frame;
            Form beta = rt.resolve(arg(0), t);
            int p = int_arg(1);
            NopCertificate cert = make_nop_certificate(fr, beta, p);
            std::vector<std::pair<uint32_t, GaussRat>> w;
            if (!c.witnesses.empty()) w = rt.witness_pairs(c.witnesses[0]);
            NopReport rep = nop_test(fr, cert, spec.closed_manifold, w);
            res.pass = rep.applies;
            res.detail = rep.obstruction;
        } else if (c.verb == "taming") {
            FramePtr fr = rt.ft ? rt.ft : invariant_presentation(spec.frame);
            if (fr->mode() != Frame::Mode::invariant) fr = invariant_presentation(fr);
            TamingReport rep = invariant_taming_solver(fr);
            if (arg(0) == "exists") {
                res.pass = rep.exists;
                res.detail = truncate("closed taming form " + rep.witness);
            } else {
                res.pass = rep.impossible;
                // optional: 'forced NAME...' must appear among the forced unknowns
                for (size_t k = 1; k < c.args.size(); ++k) {
                    if (c.args[k] == "forced") continue;
                    bool found = false;
                    for (const std::string& f : rep.forced)
                        if (f == c.args[k]) found = true;
                    if (!found) res.pass = false;
                }
                std::string fl;
                for (const std::string& f : rep.forced) fl += (fl.empty() ? "" : ", ") + f;
                res.detail = "closedness forces " + fl + " = 0";
            }
        } else if (c.verb == "dbar-nonexact" || c.verb == "dbar-exact") {
            FramePtr fr = invariant_presentation(spec.frame);
            Scope sc = rt.scope(false);
            sc.frame = fr;
            Form alpha = eval_form(need_rhs(), sc);
            auto pqs = alpha.bidegrees();
            if (pqs.size() != 1) fail(errc::type_mismatch, "class representative must be pure (p,q)");
            DbarClassReport rep = invariant_dbar_class(fr, alpha, pqs[0].first, pqs[0].second);
            if (c.verb == "dbar-exact") {
                res.pass = rep.exact && delbar(fr, *rep.preimage).equals(alpha);
                res.detail = "preimage verified";
            } else {
                res.pass = !rep.exact && rep.rank_augmented > rep.rank_a;
                res.detail = "rank " + std::to_string(rep.rank_a) + " vs " +
                             std::to_string(rep.rank_augmented) + " augmented";
            }
        } else if (c.verb == "mt" || c.verb == "mt-zero") {
            ACS acs = rt.acs();
            FramePtr fr = spec.frame;
            if (spec.frame->coords().size() == 4) {
                // restriction to R^6: drop the fourth coordinate exactly
                std::vector<uint32_t> sub(spec.frame->coords().begin(),
                                          spec.frame->coords().end() - 1);
                FramePtr fr6 = Frame::standard(ctx, sub);
                size_t map[6] = {0, 1, 2, 4, 5, 6};
                ExprMat p8 = acs.matrix();
                ExprMat p6(6, std::vector<Expr>(6, Expr::zero(ctx)));
                for (int r = 0; r < 6; ++r)
                    for (int cidx = 0; cidx < 6; ++cidx) p6[r][cidx] = p8[map[r]][map[cidx]];
                for (int cidx = 0; cidx < 6; ++cidx)
                    for (size_t r8 : {size_t(3), size_t(7)})
                        if (!p8[r8][map[cidx]].is_zero())
                            fail(errc::invalid_argument, "J does not restrict to R^6");
                ACS acs6 = ACS::from_matrix(ctx, fr6->real_basis(), p6);
                acs = acs6;
                fr = fr6;
            }
            MTReport rep = mt_obstruction(acs, *fr);
            if (c.verb == "mt-zero") {
                Expr which = arg(0) == "eq1" ? rep.eq1 : rep.eq2;
                res.pass = which.is_zero();
                res.detail = arg(0) + " = 0";
            } else if (arg(0) == "none") {
                res.pass = !rep.obstructed;
                res.detail = "both equations vanish";
            } else {
                Expr which = arg(0) == "eq1" ? rep.eq1 : rep.eq2;
                Scope sc = rt.scope(false);
                Expr expect = eval_scalar(need_rhs(), sc);
                res.pass = which.equals(expect) && !which.is_zero();
                res.detail = truncate(arg(0) + " = " + which.str());
            }
        } else {
            fail(errc::invalid_argument, "unhandled claim verb '" + c.verb + "'");
        }
    } catch (const error& e) {
        res.pass = false;
        res.detail = e.what();
    } catch (const std::exception& e) {
        res.pass = false;
        res.detail = e.what();
    }
    return res;
}

} // namespace claimrun

inline ClaimsReport run_claims(const ManifoldSpec& spec) {
    ClaimsReport rep;
    rep.manifold = spec.name;
    int index = 0;
    for (const auto& c : spec.doc.claims) rep.results.push_back(claimrun::run_one(spec, c, index++));
    return rep;
}

} // namespace pklab
