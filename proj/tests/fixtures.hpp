#pragma once

// Shared constructions for the test suites: the SL(2,C) quotient, the Iwasawa
// manifold, the deformed 6-torus, the C^4 family and the Heisenberg
// nilmanifolds, built directly through the public API.

#include <cmath>
#include <random>
#include <vector>

#include "pklab/acs.hpp"
#include "pklab/frame.hpp"

namespace fixtures {

using namespace pklab;

/// Wedge word from 1-based coframe indices, negative meaning the conjugate
/// covector; the sign of sorting the written order is computed here so tests
/// can transcribe displayed formulas literally.
inline Form word(const CtxPtr& ctx, const BasisPtr& basis, std::vector<int> idx, Expr coeff) {
    size_t n = basis->half();
    std::vector<size_t> bits;
    for (int k : idx) bits.push_back(k > 0 ? size_t(k - 1) : n + size_t(-k - 1));
    int inv = 0;
    for (size_t i = 0; i < bits.size(); ++i)
        for (size_t j = i + 1; j < bits.size(); ++j)
            if (bits[i] > bits[j]) ++inv;
    uint32_t mask = 0;
    for (size_t b : bits) {
        if (mask >> b & 1) return Form::zero(ctx, basis); // repeated covector
        mask |= 1u << b;
    }
    Form f(ctx, basis);
    f.add_term(mask, (inv & 1) ? -coeff : coeff);
    return f;
}

inline Form word(const FramePtr& fr, std::vector<int> idx, Expr coeff) {
    return word(fr->ctx(), fr->working(), std::move(idx), std::move(coeff));
}

inline Form word1(const FramePtr& fr, std::vector<int> idx) {
    return word(fr, std::move(idx), Expr::one(fr->ctx()));
}

/// i/2 * sum_j phi^j ^ phibar^j over the frame's working basis.
inline Form standard_fundamental_form(const FramePtr& fr) {
    const CtxPtr& ctx = fr->ctx();
    Form w = Form::zero(ctx, fr->working());
    GaussRat ihalf(Rational(0), Rational(1, 2));
    for (size_t j = 0; j < fr->n(); ++j) {
        int jj = int(j) + 1;
        w = w + word(fr, {jj, -jj}, Expr::constant(ctx, ihalf));
    }
    return w;
}

// ---------------------------------------------------------------- SL(2,C)

struct Sl2c {
    CtxPtr ctx;
    uint32_t t, tbar;
    FramePtr frame;
    DeformationFamily fam;
    Form Omega, gamma;

    Sl2c() {
        ctx = std::make_shared<VarContext>();
        auto pr = ctx->add_complex_parameter("t");
        t = pr.first;
        tbar = pr.second;
        // [Z1,Z2] = -Z3, [Z1,Z3] = Z2, [Z2,Z3] = -Z1
        std::vector<Frame::Bracket> table = {
            {0, 1, {GaussRat(0), GaussRat(0), GaussRat(-1)}},
            {0, 2, {GaussRat(0), GaussRat(1), GaussRat(0)}},
            {1, 2, {GaussRat(-1), GaussRat(0), GaussRat(0)}},
        };
        frame = Frame::from_brackets(ctx, {"psi1", "psi2", "psi3"}, table);

        Expr q4 = Expr::constant(ctx, GaussRat(Rational(1, 4)));
        Omega = word(frame, {1, 2, -1, -2}, q4) + word(frame, {1, 3, -1, -3}, q4) +
                word(frame, {2, 3, -2, -3}, q4);
        Expr q8 = Expr::constant(ctx, GaussRat(Rational(1, 8)));
        gamma = word(frame, {1, 2, -3}, q8) + word(frame, {-1, -2, 3}, q8) -
                word(frame, {1, 3, -2}, q8) - word(frame, {-1, -3, 2}, q8) +
                word(frame, {2, 3, -1}, q8) + word(frame, {-2, -3, 1}, q8);

        fam.base = frame;
        Expr z = Expr::zero(ctx);
        fam.sigma = {{z, z, z}, {z, z, z}, {z, z, Expr::atom(ctx, t)}}; // psi3_t = psi3 - t psibar3
        fam.params = {t, tbar};
        fam.validate();
    }
};

// ---------------------------------------------------------------- Iwasawa

struct Iwasawa {
    CtxPtr ctx;
    uint32_t z1, z2, z3;
    uint32_t t;
    FramePtr frame;
    DeformationFamily fam;

    Iwasawa() {
        ctx = std::make_shared<VarContext>();
        z1 = ctx->add_complex_coordinate("z1");
        z2 = ctx->add_complex_coordinate("z2");
        z3 = ctx->add_complex_coordinate("z3");
        t = ctx->add_real_parameter("t");
        BasisPtr diffb = Frame::differentials(*ctx, {z1, z2, z3});
        Form dz1 = Form::covector(ctx, diffb, 0);
        Form dz2 = Form::covector(ctx, diffb, 1);
        Form dz3 = Form::covector(ctx, diffb, 2);
        Form phi3 = dz3 - Expr::coord_z(ctx, z1, false) * dz2;
        frame = Frame::coordinate(ctx, {z1, z2, z3}, {"phi1", "phi2", "phi3"}, {dz1, dz2, phi3});

        fam.base = frame;
        Expr z = Expr::zero(ctx);
        Expr te = Expr::atom(ctx, t);
        fam.sigma = {{z, -te, z}, {te, z, z}, {z, z, z}}; // sigma^2_1 = t, sigma^1_2 = -t
        fam.params = {t};
        fam.validate();
    }
};

// ---------------------------------------------------------------- torus T^6

struct Torus6 {
    CtxPtr ctx;
    uint32_t z1, z2, z3;
    uint32_t x2, y2;
    uint32_t t;
    uint32_t u_fn, v_fn;
    FramePtr frame; // the J(f) coframe {dz1, dz2, dz3 - f dzbar1}
    DeformationFamily fam;

    Expr f() const {
        Expr u = Expr::atom(ctx, ctx->fn_atom(u_fn, false, {}));
        Expr v = Expr::atom(ctx, ctx->fn_atom(v_fn, false, {}));
        return u + Expr::i(ctx) * v;
    }

    Torus6() {
        ctx = std::make_shared<VarContext>();
        z1 = ctx->add_complex_coordinate("z1");
        z2 = ctx->add_complex_coordinate("z2");
        z3 = ctx->add_complex_coordinate("z3");
        x2 = *ctx->find_variable("x2");
        y2 = *ctx->find_variable("y2");
        t = ctx->add_real_parameter("t");
        u_fn = ctx->add_function("u", {x2, y2}, true, true);
        v_fn = ctx->add_function("v", {x2, y2}, true, true);
        BasisPtr diffb = Frame::differentials(*ctx, {z1, z2, z3});
        Form dz1f = Form::covector(ctx, diffb, 0);
        Form dz2f = Form::covector(ctx, diffb, 1);
        Form dz3f = Form::covector(ctx, diffb, 2);
        Form dz1b = Form::covector(ctx, diffb, 3);
        Form phi3 = dz3f - f() * dz1b;
        frame = Frame::coordinate(ctx, {z1, z2, z3}, {"phi1", "phi2", "phi3"}, {dz1f, dz2f, phi3});

        // the deformation J_t = J(t f): base is the standard frame
        FramePtr std_frame = Frame::standard(ctx, {z1, z2, z3});
        fam.base = std_frame;
        Expr z = Expr::zero(ctx);
        fam.sigma = {{z, z, z}, {z, z, z}, {Expr::atom(ctx, t) * f(), z, z}};
        fam.params = {t};
        fam.validate();
    }

    /// Vector action of J(scale*f) from the defining equations, column
    /// convention J d/de_j = sum_i V[i][j] d/de_i over (x1,x2,x3,y1,y2,y3).
    ExprMat vector_action(Expr scale) const {
        Expr z = Expr::zero(ctx);
        ExprMat V(6, std::vector<Expr>(6, z));
        Expr u = scale * Expr::atom(ctx, ctx->fn_atom(u_fn, false, {}));
        Expr v = scale * Expr::atom(ctx, ctx->fn_atom(v_fn, false, {}));
        Expr two = Expr::constant(ctx, GaussRat(2));
        auto set = [&](int row, int col, Expr val) { V[row][col] = std::move(val); };
        // J dx1 -> 2v dx3 + dy1 - 2u dy3
        set(2, 0, two * v);
        set(3, 0, Expr::one(ctx));
        set(5, 0, -(two * u));
        set(4, 1, Expr::one(ctx));  // J dx2 = dy2
        set(5, 2, Expr::one(ctx));  // J dx3 = dy3
        // J dy1 = -dx1 - 2u dx3 - 2v dy3
        set(0, 3, -Expr::one(ctx));
        set(2, 3, -(two * u));
        set(5, 3, -(two * v));
        set(1, 4, -Expr::one(ctx)); // J dy2 = -dx2
        set(2, 5, -Expr::one(ctx)); // J dy3 = -dx3
        return V;
    }
};

// ---------------------------------------------------------------- C^4 family

struct C4Family {
    CtxPtr ctx;
    uint32_t z1, z2, z3, z4;
    uint32_t x2, x3;
    uint32_t tau;
    uint32_t g_fn;
    FramePtr frame; // working basis = the displayed coframe Phi
    Form Omega, Omega_tau;

    Expr g() const { return Expr::atom(ctx, ctx->fn_atom(g_fn, false, {})); }

    C4Family() {
        ctx = std::make_shared<VarContext>();
        z1 = ctx->add_complex_coordinate("z1");
        z2 = ctx->add_complex_coordinate("z2");
        z3 = ctx->add_complex_coordinate("z3");
        z4 = ctx->add_complex_coordinate("z4");
        x2 = *ctx->find_variable("x2");
        x3 = *ctx->find_variable("x3");
        tau = ctx->add_real_parameter("tau");
        g_fn = ctx->add_function("g", {x2, x3}, true);
        BasisPtr diffb = Frame::differentials(*ctx, {z1, z2, z3, z4});
        auto dz = [&](int j) { return Form::covector(ctx, diffb, j - 1); };
        auto dzb = [&](int j) { return Form::covector(ctx, diffb, 3 + j); };
        GaussRat mihalf(Rational(0), Rational(-1, 2));
        // Phi3 = dz3 - (i/2) g (dz1 + dzbar1) = dx3 + i(-g dx1 + dy3)
        Form phi3 = dz(3) + (g().scaled(mihalf)) * (dz(1) + dzb(1));
        frame = Frame::coordinate(ctx, {z1, z2, z3, z4}, {"Phi1", "Phi2", "Phi3", "Phi4"},
                                  {dz(1), dz(2), phi3, dz(4)});

        // The positive (j k | jbar kbar) ordering: 1/4 Phi^{jk} ^ conj(Phi^{jk})
        // is sigma_2 psi ^ psibar for the simple psi = Phi^{jk}. The whole
        // tau-package is the negation of the (j jbar k kbar)-ordered display,
        // so the Re-term enters with a minus sign.
        Expr q4 = Expr::constant(ctx, GaussRat(Rational(1, 4)));
        Omega = Form::zero(ctx, frame->working());
        for (int j = 1; j <= 4; ++j)
            for (int k = j + 1; k <= 4; ++k)
                Omega = Omega + word(frame, {j, k, -j, -k}, q4);
        Form x = word(frame, {2, -3, 4, -4}, Expr::one(ctx));
        Form re_x = (x + x.conj()).scaled(GaussRat(Rational(1, 2)));
        Omega_tau = Omega - re_x * Expr::atom(ctx, tau);
    }

    /// The same data with g substituted by a concrete expression.
    struct Concrete {
        FramePtr frame;
        Form Omega, Omega_tau;
    };
    Concrete concrete(const Expr& gval) const {
        Concrete out;
        std::vector<Form> cof;
        for (size_t j = 0; j < 4; ++j)
            cof.push_back(frame->to_diff(frame->covector(j)).subst_fn(g_fn, gval));
        out.frame = Frame::coordinate(ctx, {z1, z2, z3, z4},
                                      {"Phi1", "Phi2", "Phi3", "Phi4"}, cof);
        // Omega and Omega_tau have constant coefficients over the coframe
        out.Omega = Form::zero(ctx, out.frame->working());
        for (const auto& [mask, c] : Omega.terms()) out.Omega.add_term(mask, c);
        out.Omega_tau = Form::zero(ctx, out.frame->working());
        for (const auto& [mask, c] : Omega_tau.terms()) out.Omega_tau.add_term(mask, c);
        return out;
    }

    /// Restriction of the vector action to R^6 = C^3_(z1,z2,z3), over
    /// (x1,x2,x3,y1,y2,y3).
    ExprMat vector_action_r6() const {
        Expr z = Expr::zero(ctx);
        ExprMat V(6, std::vector<Expr>(6, z));
        auto set = [&](int row, int col, Expr val) { V[row][col] = std::move(val); };
        set(2, 0, g());             // J dx1 -> g dx3 + dy1
        set(3, 0, Expr::one(ctx));
        set(4, 1, Expr::one(ctx));  // J dx2 = dy2
        set(5, 2, Expr::one(ctx));  // J dx3 = dy3
        set(0, 3, -Expr::one(ctx)); // J dy1 = -dx1 - g dy3
        set(5, 3, -g());
        set(1, 4, -Expr::one(ctx)); // J dy2 = -dx2
        set(2, 5, -Expr::one(ctx)); // J dy3 = -dx3
        return V;
    }
};

// ---------------------------------------------------------------- Heisenberg

struct Heisenberg {
    CtxPtr ctx;
    FramePtr frame;
    int n;

    explicit Heisenberg(int n_) : n(n_) {
        ctx = std::make_shared<VarContext>();
        std::vector<std::string> names;
        for (int j = 1; j <= n; ++j) names.push_back("phi" + std::to_string(j));
        BasisPtr basis = Basis::complex_pairs(names);
        std::vector<Form> structure;
        for (int j = 0; j + 1 < n; ++j) structure.push_back(Form::zero(ctx, basis));
        Form dlast(ctx, basis);
        GaussRat half(Rational(1, 2));
        for (int b = 0; b + 1 < n; ++b)
            dlast.add_term((1u << b) | (1u << (n + b)), Expr::constant(ctx, half));
        structure.push_back(dlast);
        // rebuild through the public constructor so the basis and forms agree
        frame = Frame::invariant(ctx, names, structure);
    }
};

inline Form random_form(const FramePtr& fr, std::mt19937& rng, int max_terms = 4) {
    const CtxPtr& ctx = fr->ctx();
    std::uniform_int_distribution<int> nterms(1, max_terms);
    std::uniform_int_distribution<uint32_t> mask(0, (1u << fr->working()->size()) - 1);
    std::uniform_int_distribution<int> cv(-3, 3);
    Form f = Form::zero(ctx, fr->working());
    int k = nterms(rng);
    for (int j = 0; j < k; ++j) {
        GaussRat c(cv(rng), cv(rng));
        f.add_term(mask(rng), Expr::constant(ctx, c));
    }
    return f;
}

/// Random form with polynomial coordinate coefficients (coordinate frames).
inline Form random_coord_form(const FramePtr& fr, std::mt19937& rng, int max_terms = 3) {
    const CtxPtr& ctx = fr->ctx();
    std::uniform_int_distribution<uint32_t> mask(0, (1u << fr->working()->size()) - 1);
    std::uniform_int_distribution<int> cv(-2, 2);
    std::uniform_int_distribution<int> which(0, int(fr->coords().size()) - 1);
    std::uniform_int_distribution<int> degree(0, 2);
    Form f = Form::zero(ctx, fr->working());
    std::uniform_int_distribution<int> nterms(1, max_terms);
    int k = nterms(rng);
    for (int j = 0; j < k; ++j) {
        Expr c = Expr::constant(ctx, GaussRat(cv(rng), cv(rng)));
        int d = degree(rng);
        for (int e = 0; e < d; ++e) {
            uint32_t cc = fr->coords()[which(rng)];
            c = c * Expr::coord_z(ctx, cc, e % 2 == 1);
        }
        f.add_term(mask(rng), c);
    }
    return f;
}

} // namespace fixtures
