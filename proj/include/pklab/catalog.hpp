#pragma once

// Loading .pk documents into engine objects, the claim runner, and the
// built-in manifold specifications (each of which also ships as a catalog/
// file with identical canonical text).

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pklab/dsl.hpp"
#include "pklab/obstruct.hpp"

namespace pklab {

struct ManifoldSpec {
    std::string name;
    bool closed_manifold = true;
    CtxPtr ctx;
    FramePtr frame;
    std::optional<ACS> acs_real; // from the acs block, over frame->real_basis()
    std::optional<DeformationFamily> family;
    bool has_metric = false;
    std::map<std::string, Form> forms; // over frame->working()
    dsl::Document doc;
};

// ------------------------------------------------------------- evaluation

/// A value in the spec language: a scalar or a form.
struct Value {
    std::optional<Expr> e;
    std::optional<Form> f;
    bool is_form() const { return f.has_value(); }
};

struct Scope {
    CtxPtr ctx;
    FramePtr frame;  // frame providing conversions and d(.); may be null early on
    BasisPtr target; // covector names resolve onto this basis
    const std::map<std::string, Form>* named_forms = nullptr;
    // extra covector aliases, e.g. bracket-frame vector names
    std::map<std::string, size_t> aliases;
};

namespace detail_dsl {

[[noreturn]] inline void bad(const dsl::AstExpr& at, const std::string& msg) {
    fail(errc::invalid_argument,
         msg + " (line " + std::to_string(at.span.line) + ", col " + std::to_string(at.span.col) + ")");
}

inline std::optional<Form> resolve_covector(const Scope& sc, const std::string& name) {
    if (!sc.target) return std::nullopt;
    auto alias = sc.aliases.find(name);
    if (alias != sc.aliases.end()) return Form::covector(sc.ctx, sc.target, alias->second);
    int idx = sc.target->index_of(name);
    if (idx >= 0) return Form::covector(sc.ctx, sc.target, size_t(idx));
    if (!sc.frame || sc.frame->mode() != Frame::Mode::coordinate) return std::nullopt;
    // coordinate differentials and real covectors, converted into the target
    int di = sc.frame->diff_basis()->index_of(name);
    if (di >= 0) {
        Form f = Form::covector(sc.ctx, sc.frame->diff_basis(), size_t(di));
        if (sc.target.get() == sc.frame->diff_basis().get()) return f;
        return sc.frame->to_working(f);
    }
    int ri = sc.frame->real_basis()->index_of(name);
    if (ri >= 0) {
        Form f = sc.frame->real_to_diff(Form::covector(sc.ctx, sc.frame->real_basis(), size_t(ri)));
        if (sc.target.get() == sc.frame->diff_basis().get()) return f;
        return sc.frame->to_working(f);
    }
    return std::nullopt;
}

inline std::optional<Expr> resolve_scalar(const Scope& sc, const std::string& name) {
    if (auto v = sc.ctx->find_variable(name)) return Expr::atom(sc.ctx, *v);
    if (auto cc = sc.ctx->find_complex_coord(name)) return Expr::coord_z(sc.ctx, *cc, false);
    // conjugate coordinate names: zbar1
    for (uint32_t c = 0; c < sc.ctx->complex_coords().size(); ++c) {
        if (VarContext::conj_name(sc.ctx->complex_coords()[c].name) == name)
            return Expr::coord_z(sc.ctx, c, true);
    }
    // function symbols, possibly conjugated, possibly with derivative suffixes
    std::vector<std::string> parts;
    size_t start = 0;
    for (size_t k = 0; k <= name.size(); ++k) {
        if (k == name.size() || name[k] == '_') {
            parts.push_back(name.substr(start, k - start));
            start = k + 1;
        }
    }
    std::string base = parts[0];
    bool conj = false;
    std::optional<uint32_t> fn = sc.ctx->find_fn(base);
    if (!fn) {
        for (uint32_t k = 0; k < sc.ctx->fn_count(); ++k)
            if (VarContext::conj_name(sc.ctx->fn(k).name) == base) {
                fn = k;
                conj = true;
                break;
            }
    }
    if (!fn) return std::nullopt;
    std::vector<uint32_t> derivs;
    for (size_t k = 1; k < parts.size(); ++k) {
        auto v = sc.ctx->find_variable(parts[k]);
        if (!v) return std::nullopt;
        derivs.push_back(*v);
    }
    return Expr::atom(sc.ctx, sc.ctx->fn_atom(*fn, conj, derivs));
}

inline Value eval_ast(const dsl::AstPtr& node, const Scope& sc);

inline Value binary(const dsl::AstExpr& at, Value l, Value r,
                    const std::function<Expr(Expr, Expr)>& ee,
                    const std::function<Form(Form, Form)>& ff,
                    const std::function<Form(Form, Expr)>& fe,
                    const std::function<Form(Expr, Form)>& ef) {
    if (!l.is_form() && !r.is_form()) return {ee(*l.e, *r.e), {}};
    if (l.is_form() && r.is_form()) {
        if (!ff) bad(at, "operation not defined on two forms");
        return {{}, ff(*l.f, *r.f)};
    }
    if (l.is_form()) {
        if (!fe) bad(at, "operation not defined on a form and a scalar");
        return {{}, fe(*l.f, *r.e)};
    }
    if (!ef) bad(at, "operation not defined on a scalar and a form");
    return {{}, ef(*l.e, *r.f)};
}

inline Value eval_ast(const dsl::AstPtr& node, const Scope& sc) {
    using K = dsl::AstExpr::K;
    const dsl::AstExpr& at = *node;
    switch (at.kind) {
        case K::num:
            return {Expr::constant(sc.ctx, GaussRat(Rational(at.value))), {}};
        case K::imag: return {Expr::i(sc.ctx), {}};
        case K::ident: {
            if (auto f = resolve_covector(sc, at.name)) return {{}, *f};
            if (sc.named_forms) {
                auto it = sc.named_forms->find(at.name);
                if (it != sc.named_forms->end()) {
                    if (it->second.basis().get() != sc.target.get())
                        bad(at, "named form '" + at.name + "' lives on a different basis here");
                    return {{}, it->second};
                }
            }
            if (auto e = resolve_scalar(sc, at.name)) return {*e, {}};
            bad(at, "unknown identifier '" + at.name + "'");
        }
        case K::call: {
            // function application sugar: u(x2, y2) with the declared arguments
            auto fn = sc.ctx->find_fn(at.name);
            bool conj = false;
            if (!fn) {
                for (uint32_t k = 0; k < sc.ctx->fn_count(); ++k)
                    if (VarContext::conj_name(sc.ctx->fn(k).name) == at.name) {
                        fn = k;
                        conj = true;
                    }
            }
            if (!fn) bad(at, "unknown function symbol '" + at.name + "'");
            const auto& info = sc.ctx->fn(*fn);
            if (at.args.size() != info.args.size())
                bad(at, "'" + at.name + "' expects " + std::to_string(info.args.size()) + " arguments");
            for (size_t k = 0; k < at.args.size(); ++k) {
                if (at.args[k]->kind != K::ident ||
                    sc.ctx->find_variable(at.args[k]->name) != std::optional<uint32_t>(info.args[k]))
                    bad(at, "'" + at.name + "' must be applied to its declared arguments");
            }
            return {Expr::atom(sc.ctx, sc.ctx->fn_atom(*fn, conj, {})), {}};
        }
        case K::neg: {
            Value v = eval_ast(at.args[0], sc);
            if (v.is_form()) return {{}, -*v.f};
            return {-*v.e, {}};
        }
        case K::add:
            return binary(
                at, eval_ast(at.args[0], sc), eval_ast(at.args[1], sc),
                [](Expr a, Expr b) { return a + b; }, [](Form a, Form b) { return a + b; }, nullptr,
                nullptr);
        case K::sub:
            return binary(
                at, eval_ast(at.args[0], sc), eval_ast(at.args[1], sc),
                [](Expr a, Expr b) { return a - b; }, [](Form a, Form b) { return a - b; }, nullptr,
                nullptr);
        case K::mul:
            return binary(
                at, eval_ast(at.args[0], sc), eval_ast(at.args[1], sc),
                [](Expr a, Expr b) { return a * b; }, nullptr,
                [](Form a, Expr b) { return a * b; }, [](Expr a, Form b) { return b * a; });
        case K::div:
            return binary(
                at, eval_ast(at.args[0], sc), eval_ast(at.args[1], sc),
                [](Expr a, Expr b) { return a / b; }, nullptr,
                [](Form a, Expr b) { return a * (Expr::one(a.ctx()) / b); }, nullptr);
        case K::wedgepow: {
            Value l = eval_ast(at.args[0], sc);
            Value r = eval_ast(at.args[1], sc);
            if (l.is_form() && r.is_form()) return {{}, l.f->wedge(*r.f)};
            if (!l.is_form() && !r.is_form()) {
                if (!r.e->is_constant()) bad(at, "scalar powers need a constant exponent");
                GaussRat g = r.e->constant_value();
                if (!g.is_real() || denominator(g.re) != 1 || g.re < 0)
                    bad(at, "scalar powers need a non-negative integer exponent");
                return {l.e->pow(unsigned(g.re.convert_to<long>())), {}};
            }
            bad(at, "'^' wedges two forms or raises a scalar to an integer power");
        }
        case K::conj: {
            Value v = eval_ast(at.args[0], sc);
            if (v.is_form()) return {{}, v.f->conj()};
            return {v.e->conj(), {}};
        }
        case K::d: {
            Value v = eval_ast(at.args[0], sc);
            if (!v.is_form()) bad(at, "d(...) applies to forms");
            if (!sc.frame) bad(at, "no frame available for d(...) here");
            return {{}, sc.frame->d(*v.f)};
        }
    }
    bad(at, "unreachable expression kind");
}

inline Expr eval_scalar(const dsl::AstPtr& node, const Scope& sc) {
    Value v = eval_ast(node, sc);
    if (v.is_form()) bad(*node, "expected a scalar expression");
    return *v.e;
}

inline Form eval_form(const dsl::AstPtr& node, const Scope& sc) {
    Value v = eval_ast(node, sc);
    if (!v.is_form()) {
        if (v.e->is_zero()) return Form::zero(sc.ctx, sc.target);
        bad(*node, "expected a form-valued expression");
    }
    return *v.f;
}

inline GaussRat eval_const(const dsl::AstPtr& node, const Scope& sc) {
    Expr e = eval_scalar(node, sc);
    if (!e.is_constant()) bad(*node, "expected a numeric constant");
    return e.constant_value();
}

} // namespace detail_dsl

// ------------------------------------------------------------- loading

struct LoadResult {
    std::optional<ManifoldSpec> spec;
    std::vector<dsl::Diagnostic> diagnostics;
    bool ok() const { return spec.has_value(); }
};

inline const std::vector<std::string>& claim_verbs() {
    static const std::vector<std::string> verbs = {
        "frame-closure", "acs-involutive", "acs-coframe", "acs-matches-family", "coframe",
        "structure", "structure-t", "equal", "closed", "nonclosed", "closed-iff",
        "power-closed-t", "type", "real", "jinv", "jinv-t", "integrable", "nonintegrable",
        "balanced", "kahler", "transverse", "transverse-t", "transverse-power-t",
        "transverse-range", "pkahler", "pkahler-t", "first-order", "pde3-zero", "cor3-partial",
        "nop", "nop-t", "taming", "dbar-nonexact", "dbar-exact", "mt", "mt-zero"};
    return verbs;
}

inline LoadResult load_document(const dsl::Document& doc) {
    LoadResult out;
    auto diag = [&](dsl::Span s, const std::string& m, const std::string& hint = "") {
        out.diagnostics.push_back({dsl::Diagnostic::Severity::error, s, m, hint});
    };
    ManifoldSpec spec;
    spec.doc = doc;
    spec.name = doc.name;
    spec.closed_manifold = doc.closed_manifold;
    spec.ctx = std::make_shared<VarContext>();
    try {
        std::vector<uint32_t> ccs;
        for (const std::string& z : doc.coordinates) ccs.push_back(spec.ctx->add_complex_coordinate(z));
        std::vector<uint32_t> params;
        for (const auto& p : doc.parameters) {
            if (p.is_complex) {
                auto pr = spec.ctx->add_complex_parameter(p.name);
                params.push_back(pr.first);
                params.push_back(pr.second);
            } else params.push_back(spec.ctx->add_real_parameter(p.name));
        }
        for (const auto& f : doc.functions) {
            std::vector<uint32_t> args;
            for (const std::string& a : f.args) {
                auto v = spec.ctx->find_variable(a);
                if (!v) {
                    diag({0, 0}, "unknown function argument '" + a + "' in '" + f.name + "'",
                         "function arguments must be declared coordinates like x2, y2");
                    return out;
                }
                args.push_back(*v);
            }
            spec.ctx->add_function(f.name, args, f.real, f.periodic);
        }
        // frame
        switch (doc.frame_kind) {
            case dsl::Document::FrameKind::coordinate: {
                Scope sc{spec.ctx, nullptr, Frame::differentials(*spec.ctx, ccs), nullptr, {}};
                // allow dz names directly on the target
                std::vector<Form> cof;
                for (const auto& a : doc.frame_entries) cof.push_back(detail_dsl::eval_form(a.value, sc));
                spec.frame = Frame::coordinate(spec.ctx, ccs, doc.frame_names, cof);
                break;
            }
            case dsl::Document::FrameKind::invariant: {
                BasisPtr basis = Basis::complex_pairs(doc.frame_names);
                Scope sc{spec.ctx, nullptr, basis, nullptr, {}};
                std::vector<Form> st;
                for (const auto& a : doc.frame_entries) st.push_back(detail_dsl::eval_form(a.value, sc));
                spec.frame = Frame::invariant(spec.ctx, doc.frame_names, st);
                break;
            }
            case dsl::Document::FrameKind::brackets: {
                BasisPtr basis = Basis::complex_pairs(doc.frame_names);
                Scope sc{spec.ctx, nullptr, basis, nullptr, {}};
                for (size_t j = 0; j < doc.frame_names.size(); ++j)
                    sc.aliases["Z" + std::to_string(j + 1)] = j;
                std::vector<Frame::Bracket> table;
                for (const auto& b : doc.brackets) {
                    auto index_of = [&](const std::string& n) -> size_t {
                        auto it = sc.aliases.find(n);
                        if (it == sc.aliases.end())
                            fail(errc::invalid_argument, "unknown frame vector '" + n + "'");
                        return it->second;
                    };
                    Form rhs = detail_dsl::eval_form(b.rhs, sc);
                    Frame::Bracket br;
                    br.i = index_of(b.a);
                    br.j = index_of(b.b);
                    if (br.i > br.j) std::swap(br.i, br.j); // brackets are antisymmetric
                    std::vector<GaussRat> coeffs;
                    for (size_t k = 0; k < doc.frame_names.size(); ++k) {
                        Expr c = rhs.coeff(1u << k);
                        coeffs.push_back(c.is_zero() ? GaussRat(0) : c.constant_value());
                    }
                    if (index_of(b.a) > index_of(b.b))
                        for (GaussRat& c : coeffs) c = -c;
                    br.coeffs = coeffs;
                    table.push_back(br);
                }
                spec.frame = Frame::from_brackets(spec.ctx, doc.frame_names, table);
                break;
            }
            case dsl::Document::FrameKind::none:
                diag({0, 0}, "a frame block is required");
                return out;
        }
        // acs block
        if (!doc.acs_entries.empty()) {
            if (spec.frame->mode() != Frame::Mode::coordinate) {
                diag(doc.acs_entries[0].span, "acs blocks need a coordinate frame");
                return out;
            }
            Scope sc{spec.ctx, spec.frame, spec.frame->real_basis(), nullptr, {}};
            size_t m = spec.frame->real_basis()->size();
            std::vector<Form> images(m, Form::zero(spec.ctx, spec.frame->real_basis()));
            std::vector<bool> seen(m, false);
            for (const auto& a : doc.acs_entries) {
                int idx = spec.frame->real_basis()->index_of(a.name);
                if (idx < 0) {
                    diag(a.span, "unknown real covector '" + a.name + "' in acs block");
                    return out;
                }
                if (seen[size_t(idx)]) {
                    diag(a.span, "duplicate acs entry for '" + a.name + "'");
                    return out;
                }
                seen[size_t(idx)] = true;
                images[size_t(idx)] = detail_dsl::eval_form(a.value, sc);
            }
            for (size_t k = 0; k < m; ++k)
                if (!seen[k]) {
                    diag({0, 0}, "acs block is missing the image of '" +
                                     spec.frame->real_basis()->cov(k).name + "'");
                    return out;
                }
            spec.acs_real = ACS(spec.ctx, spec.frame->real_basis(), images); // checks J*J = -id
        }
        // deform block
        if (doc.has_deform) {
            size_t n = spec.frame->n();
            DeformationFamily fam;
            fam.base = spec.frame;
            fam.sigma = ExprMat(n, std::vector<Expr>(n, Expr::zero(spec.ctx)));
            Scope sc{spec.ctx, spec.frame, spec.frame->working(), nullptr, {}};
            for (const auto& e : doc.deform) {
                if (e.j < 1 || e.j > int(n) || e.k < 1 || e.k > int(n)) {
                    diag(e.span, "sigma index out of range");
                    return out;
                }
                fam.sigma[size_t(e.j - 1)][size_t(e.k - 1)] = detail_dsl::eval_scalar(e.value, sc);
            }
            fam.params = params;
            fam.validate();
            spec.family = fam;
        }
        spec.has_metric = doc.has_metric;
        // forms
        {
            Scope sc{spec.ctx, spec.frame, spec.frame->working(), &spec.forms, {}};
            for (const auto& a : doc.forms) {
                if (spec.forms.count(a.name))
                    fail(errc::invalid_argument, "duplicate form name '" + a.name + "'");
                spec.forms.emplace(a.name, detail_dsl::eval_form(a.value, sc));
            }
        }
        // claims: verbs validated now, executed later
        for (const auto& c : doc.claims) {
            bool known = false;
            for (const std::string& v : claim_verbs())
                if (v == c.verb) known = true;
            if (!known) {
                diag(c.span, "unknown claim verb '" + c.verb + "'");
                return out;
            }
        }
    } catch (const error& e) {
        diag({0, 0}, e.what());
        return out;
    }
    out.spec = std::move(spec);
    return out;
}

inline LoadResult parse_and_load(std::string_view text) {
    dsl::Parser parser(text);
    auto doc = parser.parse();
    LoadResult out;
    out.diagnostics = parser.diagnostics();
    if (!doc) return out;
    LoadResult loaded = load_document(*doc);
    for (const auto& d : loaded.diagnostics) out.diagnostics.push_back(d);
    out.spec = std::move(loaded.spec);
    return out;
}

/// Invariant presentation of a coordinate frame whose structure equations
/// have constant coefficients (the Lie-algebra level of a nilmanifold).
inline FramePtr invariant_presentation(const FramePtr& fr) {
    if (fr->mode() == Frame::Mode::invariant) return fr;
    std::vector<Form> st;
    std::vector<std::string> names;
    for (size_t j = 0; j < fr->n(); ++j) {
        st.push_back(fr->d_covector(j));
        names.push_back(fr->working()->cov(j).name);
    }
    return Frame::invariant(fr->ctx(), names, st);
}

} // namespace pklab
