#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "pklab/deform.hpp"

using namespace pklab;
using fixtures::word;
using fixtures::word1;

TEST_CASE("omega_family: torus and Iwasawa expansions") {
    fixtures::Torus6 m;
    MetricFamily mf{m.fam, {}};
    mf.validate();
    Form omega_t = omega_family(mf);
    // hand expansion over the differentials
    BasisPtr db = m.fam.base->diff_basis();
    auto dz = [&](int j) { return Form::covector(m.ctx, db, j - 1); };
    auto dzb = [&](int j) { return Form::covector(m.ctx, db, 2 + j); };
    Expr tf = Expr::atom(m.ctx, m.t) * m.f();
    GaussRat ihalf(Rational(0), Rational(1, 2));
    Form phi3 = dz(3) - tf * dzb(1);
    Form expect = (dz(1).wedge(dzb(1)) + dz(2).wedge(dzb(2)) + phi3.wedge(phi3.conj()))
                      .scaled(ihalf);
    REQUIRE(m.fam.base->to_diff(omega_t).equals(expect));

    // t = 0 gives the base fundamental form
    Form at0 = omega_t.subst_param(m.t, GaussRat(0));
    REQUIRE(at0.equals(fixtures::standard_fundamental_form(m.fam.base)));

    // Iwasawa base metric in coordinates, including the |z1|^2 coefficient
    fixtures::Iwasawa iw;
    DeformationFamily zf;
    zf.base = iw.frame;
    Expr ze = Expr::zero(iw.ctx);
    zf.sigma = {{ze, ze, ze}, {ze, ze, ze}, {ze, ze, ze}};
    zf.params = {iw.t};
    MetricFamily imf{zf, {}};
    Form iomega = omega_family(imf);
    BasisPtr idb = iw.frame->diff_basis();
    auto idz = [&](int j) { return Form::covector(iw.ctx, idb, j - 1); };
    auto idzb = [&](int j) { return Form::covector(iw.ctx, idb, 2 + j); };
    Expr z1 = Expr::coord_z(iw.ctx, iw.z1, false);
    Expr z1b = Expr::coord_z(iw.ctx, iw.z1, true);
    Form iex = (idz(1).wedge(idzb(1)) +
                (Expr::one(iw.ctx) + z1 * z1b) * idz(2).wedge(idzb(2)) -
                z1 * idz(2).wedge(idzb(3)) - z1b * idz(3).wedge(idzb(2)) +
                idz(3).wedge(idzb(3)))
                   .scaled(ihalf);
    REQUIRE(iw.frame->to_diff(iomega).equals(iex));
}

TEST_CASE("Hermitian validation of metric coefficient matrices") {
    fixtures::Iwasawa iw;
    MetricFamily bad{iw.fam, {}};
    bad.h = mat_identity(iw.ctx, 3);
    bad.h[0][1] = Expr::i(iw.ctx); // breaks conj-transpose symmetry
    REQUIRE_THROWS_AS(bad.validate(), error);
}

TEST_CASE("first_order on the Iwasawa family: eta, lambda, del eta") {
    fixtures::Iwasawa m;
    MetricFamily mf{m.fam, {}};
    FirstOrderData fo = first_order(mf);
    REQUIRE(fo.real_ok);
    // eta = 1/2 phi^3 ^ phibar^123, lambda = 0
    Form eta_expect = word(m.frame, {3, -1, -2, -3}, Expr::constant(m.ctx, GaussRat(Rational(1, 2))));
    REQUIRE(fo.eta.equals(eta_expect));
    REQUIRE(fo.lambda.is_zero());
    REQUIRE(fo.omega_dot.equals(fo.eta + fo.eta.conj() + fo.lambda));

    SemiKahlerFirstOrder chk = semi_kahler_first_order_check(mf);
    // del eta = -1/2 phi^12 ^ phibar^123 != 0: the necessary condition fails
    Form del_eta_expect =
        word(m.frame, {1, 2, -1, -2, -3}, Expr::constant(m.ctx, GaussRat(Rational(-1, 2))));
    REQUIRE(del(m.frame, fo.eta).equals(del_eta_expect));
    REQUIRE(chk.residual.equals(del_eta_expect));
    REQUIRE_FALSE(chk.passes);

    // the packaged n=3 bracket form equals 4*eta and its del is the displayed
    // -2 phi^{12 bar123}
    REQUIRE(chk.packaged.has_value());
    REQUIRE(chk.packaged->equals(fo.eta.scaled(GaussRat(4))));
    Form packaged_del_expect =
        word(m.frame, {1, 2, -1, -2, -3}, Expr::constant(m.ctx, GaussRat(-2)));
    REQUIRE(chk.packaged_del->equals(packaged_del_expect));
}

TEST_CASE("first_order is zero for the constant family") {
    fixtures::Iwasawa m;
    DeformationFamily zf;
    zf.base = m.frame;
    Expr ze = Expr::zero(m.ctx);
    zf.sigma = {{ze, ze, ze}, {ze, ze, ze}, {ze, ze, ze}};
    zf.params = {m.t};
    MetricFamily mf{zf, {}};
    FirstOrderData fo = first_order(mf);
    REQUIRE(fo.eta.is_zero());
    REQUIRE(fo.lambda.is_zero());
    REQUIRE(fo.omega_dot.is_zero());
    SemiKahlerFirstOrder chk = semi_kahler_first_order_check(mf);
    REQUIRE(chk.passes);
}

TEST_CASE("torus family: the three coordinate PDEs vanish and the check passes") {
    fixtures::Torus6 m;
    MetricFamily mf{m.fam, {}};
    SemiKahlerFirstOrder chk = semi_kahler_first_order_check(mf);
    REQUIRE(chk.passes);
    REQUIRE(chk.pde.size() == 3);
    for (const Expr& e : chk.pde) REQUIRE(e.is_zero());
    // 4*eta = -f phi^2 ^ phibar^123
    REQUIRE(chk.packaged.has_value());
    Form expect(m.ctx, m.fam.base->working());
    expect.add_term((1u << 1) | (1u << 3) | (1u << 4) | (1u << 5), -m.f());
    REQUIRE(chk.packaged->equals(expect));
    REQUIRE(chk.packaged->equals(chk.data.eta.scaled(GaussRat(4))));
}

TEST_CASE("varying metric coefficients produce a nonzero lambda") {
    fixtures::Iwasawa m;
    MetricFamily mf{m.fam, {}};
    mf.h = mat_identity(m.ctx, 3);
    mf.h[0][0] = Expr::one(m.ctx) + Expr::atom(m.ctx, m.t); // omega_11(t) = 1 + t
    mf.validate();
    FirstOrderData fo = first_order(mf);
    // lambda = (i/2 phi^{1 1bar}) ^ omega_0 = -1/4 (phi^{1 1bar 2 2bar} + phi^{1 1bar 3 3bar})
    GaussRat mq(Rational(-1, 4));
    Form expect = word(m.frame, {1, -1, 2, -2}, Expr::constant(m.ctx, mq)) +
                  word(m.frame, {1, -1, 3, -3}, Expr::constant(m.ctx, mq));
    REQUIRE(fo.lambda.equals(expect));
    REQUIRE_FALSE(fo.lambda.is_zero());
    REQUIRE(fo.real_ok);
    REQUIRE(fo.omega_dot.equals(fo.eta + fo.eta.conj() + fo.lambda));
    // the proof identity holds with both eta and lambda present
    Form lhs = m.frame->d(fo.omega_dot);
    Form rhs = del(m.frame, fo.eta) + delbar(m.frame, fo.eta.conj()) +
               del(m.frame, fo.lambda) + delbar(m.frame, fo.lambda);
    REQUIRE(lhs.equals(rhs));
    // and the residual now contains the delbar(lambda) contribution
    SemiKahlerFirstOrder chk = semi_kahler_first_order_check(mf);
    REQUIRE(chk.residual.equals(del(m.frame, fo.eta) + delbar(m.frame, fo.lambda)));
}

TEST_CASE("d(omega_dot) = del eta + delbar etabar + del lambda + delbar lambda") {
    fixtures::Iwasawa m;
    MetricFamily mf{m.fam, {}};
    FirstOrderData fo = first_order(mf);
    Form lhs = m.frame->d(fo.omega_dot);
    Form rhs = del(m.frame, fo.eta) + delbar(m.frame, fo.eta.conj()) +
               del(m.frame, fo.lambda) + delbar(m.frame, fo.lambda);
    REQUIRE(lhs.equals(rhs));

    fixtures::Torus6 t6;
    MetricFamily tf{t6.fam, {}};
    FirstOrderData tfo = first_order(tf);
    Form tl = t6.fam.base->d(tfo.omega_dot);
    Form tr = del(t6.fam.base, tfo.eta) + delbar(t6.fam.base, tfo.eta.conj()) +
              del(t6.fam.base, tfo.lambda) + delbar(t6.fam.base, tfo.lambda);
    REQUIRE(tl.equals(tr));
}

TEST_CASE("first_order is linear in sigma-dot") {
    fixtures::Torus6 m;
    MetricFamily mf{m.fam, {}};
    FirstOrderData fo = first_order(mf);

    DeformationFamily doubled = m.fam;
    for (auto& row : doubled.sigma)
        for (Expr& e : row) e = Expr::constant(m.ctx, GaussRat(2)) * e;
    MetricFamily mf2{doubled, {}};
    FirstOrderData fo2 = first_order(mf2);
    REQUIRE(fo2.eta.equals(fo.eta.scaled(GaussRat(2))));
    REQUIRE(fo2.lambda.equals(fo.lambda.scaled(GaussRat(2))));
}

TEST_CASE("multiparameter families reduce to per-parameter first order") {
    fixtures::Torus6 m;
    // single parameter: one entry equal to first_order
    MetricFamily mf{m.fam, {}};
    std::vector<FirstOrderData> all = multiparameter_first_order(mf);
    REQUIRE(all.size() == 1);
    REQUIRE(all[0].eta.equals(first_order(mf).eta));

    // two parameters: f = t*u + s*v split
    auto ctx = m.ctx;
    uint32_t s = ctx->add_real_parameter("s");
    DeformationFamily two;
    two.base = m.fam.base;
    Expr ze = Expr::zero(ctx);
    Expr u = Expr::atom(ctx, ctx->fn_atom(m.u_fn, false, {}));
    Expr v = Expr::atom(ctx, ctx->fn_atom(m.v_fn, false, {}));
    Expr sig = Expr::atom(ctx, m.t) * u + Expr::atom(ctx, s) * (Expr::i(ctx) * v);
    two.sigma = {{ze, ze, ze}, {ze, ze, ze}, {sig, ze, ze}};
    two.params = {m.t, s};
    two.validate();
    MetricFamily mtwo{two, {}};
    std::vector<FirstOrderData> fos = multiparameter_first_order(mtwo);
    REQUIRE(fos.size() == 2);
    // each direction sees only its own sigma-dot
    Form e1(ctx, two.base->working());
    e1.add_term((1u << 1) | (1u << 3) | (1u << 4) | (1u << 5), -u);
    REQUIRE(fos[0].eta.scaled(GaussRat(4)).equals(e1));
    Form e2(ctx, two.base->working());
    e2.add_term((1u << 1) | (1u << 3) | (1u << 4) | (1u << 5), -(Expr::i(ctx) * v));
    REQUIRE(fos[1].eta.scaled(GaussRat(4)).equals(e2));

    // no parameters: empty list
    DeformationFamily none;
    none.base = m.fam.base;
    none.sigma = {{ze, ze, ze}, {ze, ze, ze}, {ze, ze, ze}};
    MetricFamily mnone{none, {}};
    REQUIRE(multiparameter_first_order(mnone).empty());
}

TEST_CASE("SL(2,C) family first order along the real direction") {
    fixtures::Sl2c m;
    MetricFamily mf{m.fam, {}};
    // differentiate along Re(t): both t and tbar move; use the t-atom
    // direction (Wirtinger in the parameter), then check reality of omega_dot
    FirstOrderData fo = first_order(mf, m.t);
    // sigma^3_3 = t: 4 eta = (sdot^2_1 - sdot^1_2) phi^3 ... all zero except
    // nothing involves sigma^3_3 in the bracket, but eta itself need not be
    // zero; verify the decomposition identity instead
    REQUIRE(fo.omega_dot.equals(fo.eta + fo.eta.conj() + fo.lambda));
}
