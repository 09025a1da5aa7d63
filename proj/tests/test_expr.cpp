#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pklab/expr.hpp"
#include "pklab/linalg.hpp"

using namespace pklab;

namespace {

struct World {
    CtxPtr ctx = std::make_shared<VarContext>();
    uint32_t z1, z2; // complex coordinate indices
    uint32_t x1, y1, x2, y2;
    uint32_t t;          // real parameter
    uint32_t s, sbar;    // complex parameter
    uint32_t u_fn, f_fn; // u real, f complex, both functions of (x2, y2)

    World() {
        z1 = ctx->add_complex_coordinate("z1");
        z2 = ctx->add_complex_coordinate("z2");
        x1 = *ctx->find_variable("x1");
        y1 = *ctx->find_variable("y1");
        x2 = *ctx->find_variable("x2");
        y2 = *ctx->find_variable("y2");
        t = ctx->add_real_parameter("t");
        auto pr = ctx->add_complex_parameter("s");
        s = pr.first;
        sbar = pr.second;
        u_fn = ctx->add_function("u", {x2, y2}, true);
        f_fn = ctx->add_function("f", {x2, y2}, false);
    }

    Expr atom(uint32_t a) const { return Expr::atom(ctx, a); }
    Expr c(long v) const { return Expr::constant(ctx, GaussRat(v)); }
    Expr q(long n, long d) const { return Expr::constant(ctx, GaussRat(Rational(n, d))); }
    Expr i() const { return Expr::i(ctx); }
    Expr u() const { return atom(ctx->fn_atom(u_fn, false, {})); }
    Expr f() const { return atom(ctx->fn_atom(f_fn, false, {})); }
};

Expr random_expr(World& w, std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 5);
    switch (pick(rng)) {
        case 0: {
            std::uniform_int_distribution<int> cv(-3, 3);
            return w.c(cv(rng)) + w.i() * w.c(cv(rng));
        }
        case 1: {
            std::uniform_int_distribution<int> av(0, 5);
            uint32_t pool[6] = {w.x1, w.y1, w.x2, w.y2, w.t, w.s};
            return w.atom(pool[av(rng)]);
        }
        case 2: {
            std::uniform_int_distribution<int> fv(0, 1);
            return fv(rng) ? w.u() : w.f();
        }
        case 3: return random_expr(w, rng, depth - 1) + random_expr(w, rng, depth - 1);
        case 4: return random_expr(w, rng, depth - 1) * random_expr(w, rng, depth - 1);
        default: {
            // occasional division by a parameter-only expression
            Expr den = w.c(1) + w.atom(w.t) * w.atom(w.t);
            return random_expr(w, rng, depth - 1) / den;
        }
    }
}

Expr::EvalEnv base_env(const World& w) {
    Expr::EvalEnv env;
    env.vars[w.x1] = 0.37;
    env.vars[w.y1] = -0.81;
    env.vars[w.x2] = 0.59;
    env.vars[w.y2] = 0.23;
    env.vars[w.t] = 0.71;
    env.vars[w.s] = std::complex<double>(0.31, -0.44);
    env.vars[w.sbar] = std::conj(std::complex<double>(0.31, -0.44));
    auto wrap = [](std::function<std::complex<double>(double, double)> g) {
        return [g](const std::vector<std::complex<double>>& a) { return g(a[0].real(), a[1].real()); };
    };
    env.fns["u"] = wrap([](double x, double y) { return std::sin(x) * std::cos(y); });
    env.fns["u_x2"] = wrap([](double x, double y) { return std::cos(x) * std::cos(y); });
    env.fns["u_y2"] = wrap([](double x, double y) { return -std::sin(x) * std::sin(y); });
    env.fns["u_x2_x2"] = wrap([](double x, double y) { return -std::sin(x) * std::cos(y); });
    env.fns["u_x2_y2"] = wrap([](double x, double y) { return -std::cos(x) * std::sin(y); });
    env.fns["u_y2_y2"] = wrap([](double x, double y) { return -std::sin(x) * std::cos(y); });
    auto fc = [](double x, double y) {
        return std::complex<double>(std::exp(0.3 * x) * std::cos(y), std::sin(x * y));
    };
    env.fns["f"] = wrap(fc);
    env.fns["f_x2"] = wrap([](double x, double y) {
        return std::complex<double>(0.3 * std::exp(0.3 * x) * std::cos(y), y * std::cos(x * y));
    });
    env.fns["f_y2"] = wrap([](double x, double y) {
        return std::complex<double>(-std::exp(0.3 * x) * std::sin(y), x * std::cos(x * y));
    });
    env.fns["f_x2_x2"] = wrap([](double x, double y) {
        return std::complex<double>(0.09 * std::exp(0.3 * x) * std::cos(y), -y * y * std::sin(x * y));
    });
    env.fns["f_x2_y2"] = wrap([](double x, double y) {
        return std::complex<double>(-0.3 * std::exp(0.3 * x) * std::sin(y),
                                    std::cos(x * y) - x * y * std::sin(x * y));
    });
    env.fns["f_y2_y2"] = wrap([](double x, double y) {
        return std::complex<double>(-std::exp(0.3 * x) * std::cos(y), -x * x * std::sin(x * y));
    });
    return env;
}

} // namespace

TEST_CASE("cancellation and zero decision") {
    World w;
    Expr tt = w.atom(w.s) * w.atom(w.sbar);
    Expr sum = tt + (w.c(1) - tt);
    REQUIRE(sum.equals(w.c(1)));

    Expr x = w.atom(w.x1);
    Expr lhs = (x + w.c(1)).pow(2);
    Expr rhs = x * x + w.c(2) * x + w.c(1);
    REQUIRE(lhs.equals(rhs));
    REQUIRE((lhs - rhs).is_zero());
    REQUIRE_FALSE((lhs - rhs - w.c(1)).is_zero());
}

TEST_CASE("division is restricted to parameter denominators") {
    World w;
    Expr den = w.c(1) + w.atom(w.t).pow(2);
    Expr r = w.c(1) / den;
    REQUIRE(r.den().size() == 1);
    Expr::EvalEnv env = base_env(w);
    env.vars[w.t] = 1.0;
    REQUIRE(std::abs(r.eval(env) - 0.5) < 1e-12);

    REQUIRE_THROWS_AS(w.c(1) / w.atom(w.x2), error);
    try {
        (void)(w.c(1) / w.atom(w.x2));
    } catch (const error& e) {
        REQUIRE(e.code() == errc::coordinate_denominator);
    }
    REQUIRE_THROWS_AS(w.c(1) / (w.atom(w.t) - w.atom(w.t)), error);

    // trial division reduces fractions introduced along the way
    Expr again = r * den;
    REQUIRE(again.equals(w.c(1)));
    REQUIRE(again.den().empty());
}

TEST_CASE("differentiation: linearity, Leibniz, formal partials") {
    World w;
    uint32_t tau = w.ctx->add_real_parameter("tau");
    Expr g = w.c(2) * w.atom(tau) * w.atom(w.x2) + w.atom(*w.ctx->find_variable("x1"));
    // d/dx2 (2*tau*x2 + x1) = 2*tau
    REQUIRE(g.diff(VarRef::atom(w.x2)).equals(w.c(2) * w.atom(tau)));
    REQUIRE(w.c(5).diff(VarRef::atom(w.x2)).is_zero());

    uint32_t v_fn = w.ctx->add_function("v", {w.x2, w.y2}, true);
    Expr u = w.u();
    Expr v = Expr::atom(w.ctx, w.ctx->fn_atom(v_fn, false, {}));
    Expr prod = u * v;
    Expr lhs = prod.diff(VarRef::atom(w.x2));
    Expr ux = Expr::atom(w.ctx, w.ctx->fn_atom(w.u_fn, false, {w.x2}));
    Expr vx = Expr::atom(w.ctx, w.ctx->fn_atom(v_fn, false, {w.x2}));
    REQUIRE(lhs.equals(ux * v + u * vx));

    // derivative w.r.t. a variable not among the arguments vanishes
    REQUIRE(u.diff(VarRef::atom(w.x1)).is_zero());
}

TEST_CASE("Wirtinger convention: z and zbar independent") {
    World w;
    Expr z2 = Expr::coord_z(w.ctx, w.z2, false);
    Expr z2b = Expr::coord_z(w.ctx, w.z2, true);
    REQUIRE(z2.diff(VarRef::z(w.z2)).equals(w.c(1)));
    REQUIRE(z2b.diff(VarRef::z(w.z2)).is_zero());
    REQUIRE(z2b.diff(VarRef::zbar(w.z2)).equals(w.c(1)));
    REQUIRE(z2.diff(VarRef::zbar(w.z2)).is_zero());
    // dz/dt and mixed products
    Expr e = z2 * z2b; // |z2|^2 = x2^2 + y2^2
    Expr expect = w.atom(w.x2).pow(2) + w.atom(w.y2).pow(2);
    REQUIRE(e.equals(expect));
}

TEST_CASE("conjugation is a ring involution") {
    World w;
    Expr e = (w.c(2) + w.i()) * w.atom(w.s) + w.f() * w.atom(w.x2);
    REQUIRE(e.conj().conj().equals(e));
    Expr a = w.atom(w.s) + w.i() * w.u();
    Expr b = w.f() - w.c(3);
    REQUIRE((a * b).conj().equals(a.conj() * b.conj()));
    REQUIRE((a + b).conj().equals(a.conj() + b.conj()));
    // real parameter is fixed, complex parameter swaps with its partner
    REQUIRE(w.atom(w.t).conj().equals(w.atom(w.t)));
    REQUIRE(w.atom(w.s).conj().equals(w.atom(w.sbar)));
    // declared-real function is fixed
    REQUIRE(w.u().conj().equals(w.u()));
    REQUIRE_FALSE(w.f().conj().equals(w.f()));
}

TEST_CASE("eval: worked examples") {
    World w;
    uint32_t tau = w.ctx->add_real_parameter("tau");
    uint32_t x3 = w.ctx->add_real_coordinate("x3");
    // g = 2*tau*x2 + x3 satisfies g_x2 - 2 tau g_x3 = 0
    Expr g = w.c(2) * w.atom(tau) * w.atom(w.x2) + w.atom(x3);
    Expr resid = g.diff(VarRef::atom(w.x2)) - w.c(2) * w.atom(tau) * g.diff(VarRef::atom(x3));
    REQUIRE(resid.is_zero());

    Expr::EvalEnv env = base_env(w);
    env.vars[tau] = 0.9;
    env.vars[x3] = -1.2;
    REQUIRE(std::abs(g.eval(env) - (2 * 0.9 * 0.59 - 1.2)) < 1e-12);

    Expr::EvalEnv missing;
    REQUIRE_THROWS_AS(g.eval(missing), error);

    Expr::EvalEnv bad = base_env(w);
    bad.vars[w.sbar] = std::complex<double>(5, 5); // not conj(s)
    REQUIRE_THROWS_AS((w.atom(w.s) * w.atom(w.sbar)).eval(bad), error);
}

TEST_CASE("finite-difference oracle for diff") {
    World w;
    std::mt19937 rng(20260810);
    Expr::EvalEnv env = base_env(w);
    const double h = 1e-6;
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        Expr e = random_expr(w, rng, 3);
        for (uint32_t var : {w.x2, w.y2, w.t}) {
            Expr de = e.diff(VarRef::atom(var));
            Expr::EvalEnv up = env, dn = env;
            up.vars[var] += h;
            dn.vars[var] -= h;
            std::complex<double> fd = (e.eval(up) - e.eval(dn)) / (2 * h);
            std::complex<double> sym = de.eval(env);
            double scale = std::max(1.0, std::abs(sym));
            REQUIRE(std::abs(fd - sym) <= 1e-6 * scale * 10);
            ++checked;
        }
    }
    REQUIRE(checked > 0);
}

TEST_CASE("ring axioms and diff commutation on random expressions") {
    World w;
    std::mt19937 rng(777);
    for (int trial = 0; trial < 60; ++trial) {
        Expr a = random_expr(w, rng, 2);
        Expr b = random_expr(w, rng, 2);
        Expr c = random_expr(w, rng, 2);
        REQUIRE(((a + b) + c).equals(a + (b + c)));
        REQUIRE(((a * b) * c).equals(a * (b * c)));
        REQUIRE((a * (b + c)).equals(a * b + a * c));
        REQUIRE((a * b).equals(b * a));
        // mixed partials commute
        Expr dxdy = a.diff(VarRef::atom(w.x2)).diff(VarRef::atom(w.y2));
        Expr dydx = a.diff(VarRef::atom(w.y2)).diff(VarRef::atom(w.x2));
        REQUIRE(dxdy.equals(dydx));
        // conj commutes with diff under the z <-> zbar pairing
        Expr lhs = a.diff(VarRef::z(w.z2)).conj();
        Expr rhs = a.conj().diff(VarRef::zbar(w.z2));
        REQUIRE(lhs.equals(rhs));
    }
}

TEST_CASE("eval agrees after normalization paths") {
    World w;
    std::mt19937 rng(424242);
    Expr::EvalEnv env = base_env(w);
    for (int trial = 0; trial < 40; ++trial) {
        Expr a = random_expr(w, rng, 2);
        Expr b = random_expr(w, rng, 2);
        // two algebraically equal routes
        Expr r1 = (a + b) * (a - b);
        Expr r2 = a * a - b * b;
        REQUIRE(r1.equals(r2));
        std::complex<double> v1 = r1.eval(env);
        std::complex<double> v2 = r2.eval(env);
        REQUIRE(std::abs(v1 - v2) <= 1e-9 * std::max(1.0, std::abs(v1)));
    }
}

TEST_CASE("substitution of parameters and opaque functions") {
    World w;
    Expr den = w.c(1) + w.atom(w.t).pow(2);
    Expr e = w.atom(w.x2) / den;
    Expr at1 = e.subst(w.t, GaussRat(1));
    REQUIRE(at1.equals(w.atom(w.x2).scaled(GaussRat(Rational(1, 2)))));

    // substitute f := x2^2 + i*y2; derivative atoms follow suit
    Expr fx = Expr::atom(w.ctx, w.ctx->fn_atom(w.f_fn, false, {w.x2}));
    Expr expr = fx + w.f();
    Expr sub = expr.subst_fn(w.f_fn, w.atom(w.x2).pow(2) + w.i() * w.atom(w.y2));
    Expr expect = w.c(2) * w.atom(w.x2) + w.atom(w.x2).pow(2) + w.i() * w.atom(w.y2);
    REQUIRE(sub.equals(expect));
}

TEST_CASE("denominator bookkeeping is path-independent up to equality") {
    World w;
    uint32_t s2 = w.ctx->add_real_parameter("r");
    Expr a = w.c(1) + w.atom(w.t);
    Expr b = w.c(1) + w.atom(s2);
    // one division by the product vs two successive divisions
    Expr one_shot = w.atom(w.x1) / (a * b);
    Expr stepwise = (w.atom(w.x1) / a) / b;
    REQUIRE(one_shot.equals(stepwise));
    REQUIRE((one_shot - stepwise).is_zero());
    // mixed arithmetic across the two representations stays exact
    Expr mixed = one_shot * (a * b) - w.atom(w.x1);
    REQUIRE(mixed.is_zero());
    Expr sum = one_shot + stepwise;
    REQUIRE(sum.equals(w.c(2) * one_shot));
}

TEST_CASE("fraction-free inversion and determinants") {
    World w;
    std::mt19937 rng(90210);
    std::uniform_int_distribution<int> cv(-3, 3);
    auto random_matrix = [&](size_t n, bool with_coords) {
        ExprMat m(n, std::vector<Expr>(n, w.c(0)));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                Expr e = w.c(cv(rng));
                if (cv(rng) > 1) e = e + w.c(cv(rng)) * w.atom(w.t);
                if (with_coords && cv(rng) > 1) e = e + w.c(cv(rng)) * w.atom(w.x1);
                m[i][j] = e;
            }
        return m;
    };
    int inverted = 0;
    for (int trial = 0; trial < 25; ++trial) {
        ExprMat m = random_matrix(4, false); // parameter entries only
        auto inv = try_invert(m);
        if (!inv) continue;
        ++inverted;
        ExprMat prod = mat_mul(m, inv->inv);
        for (size_t i = 0; i < 4; ++i)
            for (size_t j = 0; j < 4; ++j)
                REQUIRE(prod[i][j].equals(i == j ? w.c(1) : w.c(0)));
        REQUIRE(det(m).equals(inv->det));
    }
    REQUIRE(inverted > 5);
    // determinant is multiplicative, including with coordinate entries
    for (int trial = 0; trial < 10; ++trial) {
        ExprMat a = random_matrix(3, true);
        ExprMat b = random_matrix(3, true);
        REQUIRE(det(mat_mul(a, b)).equals(det(a) * det(b)));
    }
    // a singular matrix is reported
    ExprMat s(2, std::vector<Expr>(2, w.c(0)));
    s[0][0] = w.atom(w.t);
    s[0][1] = w.atom(w.t);
    s[1][0] = w.c(1);
    s[1][1] = w.c(1);
    REQUIRE_FALSE(try_invert(s).has_value());
    REQUIRE(det(s).is_zero());
}

TEST_CASE("canonical printing is deterministic") {
    World w;
    Expr e1 = w.atom(w.x2) * w.c(2) + w.atom(w.t) / (w.c(1) + w.atom(w.t).pow(2));
    Expr e2 = w.atom(w.t) / (w.c(1) + w.atom(w.t).pow(2)) + w.c(2) * w.atom(w.x2);
    REQUIRE(e1.equals(e2));
    REQUIRE(e1.str() == e2.str());
    REQUIRE_FALSE(e1.str().empty());
}
