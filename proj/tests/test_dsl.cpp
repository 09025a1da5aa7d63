#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pklab/builtins.hpp"

using namespace pklab;
using dsl::AstExpr;
using dsl::AstPtr;

TEST_CASE("catalog documents round-trip through print and parse") {
    for (const std::string& name : builtin_names()) {
        dsl::Parser p(builtin_source(name));
        auto doc = p.parse();
        REQUIRE(doc.has_value());
        std::string printed = dsl::print(*doc);
        dsl::Parser p2(printed);
        auto doc2 = p2.parse();
        REQUIRE(doc2.has_value());
        REQUIRE(dsl::doc_equal(*doc, *doc2));
        REQUIRE(dsl::print(*doc2) == printed);
    }
}

TEST_CASE("coframe entries evaluate to the expected engine forms") {
    ManifoldSpec iw = builtin("iwasawa");
    // phi3 = dz3 - z1*dz2
    Form phi3 = iw.frame->to_diff(iw.frame->covector(2));
    BasisPtr db = iw.frame->diff_basis();
    Form expect = Form::covector(iw.ctx, db, 2) -
                  Expr::coord_z(iw.ctx, 0, false) * Form::covector(iw.ctx, db, 1);
    REQUIRE(phi3.equals(expect));
}

TEST_CASE("diagnostics carry spans and hints") {
    // undeclared function symbol in a deform block
    const char* text = R"(manifold broken closed

coordinates { z1 z2 z3 }

parameters {
  t : real
}

frame coordinate {
  phi1 = dz1
  phi2 = dz2
  phi3 = dz3
}

deform {
  sigma[3][1] = t*f(x2, y2)
}
)";
    LoadResult r = parse_and_load(text);
    REQUIRE_FALSE(r.ok());
    bool mentions_unknown = false;
    for (const auto& d : r.diagnostics)
        if (d.message.find("unknown function symbol 'f'") != std::string::npos) mentions_unknown = true;
    REQUIRE(mentions_unknown);

    // syntax error: every failure produces at least one diagnostic with a span
    dsl::Parser p("manifold x closed\n\nforms {\n  Omega = \n}\n");
    auto doc = p.parse();
    REQUIRE_FALSE(p.diagnostics().empty());
    REQUIRE(p.diagnostics()[0].span.line > 0);

    // duplicate declaration
    LoadResult dup = parse_and_load("manifold d closed\n\ncoordinates { z1 z1 }\n\nframe coordinate {\n  phi1 = dz1\n}\n");
    REQUIRE_FALSE(dup.ok());
    bool mentions_dup = false;
    for (const auto& d : dup.diagnostics)
        if (d.message.find("duplicate") != std::string::npos) mentions_dup = true;
    REQUIRE(mentions_dup);

    // unknown claim verbs are rejected at load with their span
    LoadResult verb = parse_and_load(
        "manifold v closed\n\ncoordinates { z1 }\n\nframe coordinate {\n  phi1 = dz1\n}\n\nclaims {\n  fly-to-the-moon\n}\n");
    REQUIRE_FALSE(verb.ok());
    bool mentions_verb = false;
    for (const auto& d : verb.diagnostics)
        if (d.message.find("unknown claim verb") != std::string::npos && d.span.line == 10)
            mentions_verb = true;
    REQUIRE(mentions_verb);

    // blocks out of order
    dsl::Parser order("manifold o closed\n\nparameters {\n  t : real\n}\n\ncoordinates { z1 }\n");
    auto odoc = order.parse();
    REQUIRE(order.has_errors());
}

namespace {

struct Fuzzer {
    std::mt19937 rng;
    explicit Fuzzer(uint32_t seed) : rng(seed) {}

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

    std::string ident() {
        static const char* pool[] = {"phi1", "phi2", "phibar1", "t", "z1", "x1", "u", "alpha", "dz1"};
        return pool[pick(9)];
    }

    AstPtr expr(int depth) {
        dsl::Span s{1, 1};
        if (depth <= 0) {
            switch (pick(3)) {
                case 0: return AstExpr::num(Integer(pick(12)), s);
                case 1: return AstExpr::make(AstExpr::K::imag, s, {});
                default: return AstExpr::make(AstExpr::K::ident, s, {}, ident());
            }
        }
        switch (pick(10)) {
            case 0: return AstExpr::num(Integer(pick(12)), s);
            case 1: return AstExpr::make(AstExpr::K::imag, s, {});
            case 2: return AstExpr::make(AstExpr::K::ident, s, {}, ident());
            case 3: return AstExpr::make(AstExpr::K::neg, s, {expr(depth - 1)});
            case 4: return AstExpr::make(AstExpr::K::add, s, {expr(depth - 1), expr(depth - 1)});
            case 5: return AstExpr::make(AstExpr::K::sub, s, {expr(depth - 1), expr(depth - 1)});
            case 6: return AstExpr::make(AstExpr::K::mul, s, {expr(depth - 1), expr(depth - 1)});
            case 7: return AstExpr::make(AstExpr::K::div, s, {expr(depth - 1), expr(depth - 1)});
            case 8: return AstExpr::make(AstExpr::K::wedgepow, s, {expr(depth - 1), expr(depth - 1)});
            default: return AstExpr::make(AstExpr::K::conj, s, {expr(depth - 1)});
        }
    }

    dsl::Document doc() {
        dsl::Document d;
        d.name = "fuzz" + std::to_string(pick(1000));
        d.closed_manifold = pick(2) == 0;
        int ncoords = pick(3);
        for (int j = 0; j < ncoords; ++j) d.coordinates.push_back("z" + std::to_string(j + 1));
        int nparams = pick(2);
        for (int j = 0; j < nparams; ++j)
            d.parameters.push_back({std::string("t") + std::to_string(j + 1), pick(2) == 0});
        if (pick(2)) {
            dsl::Document::Fn f;
            f.name = "u";
            f.args = {"x1", "y1"};
            f.real = pick(2) == 0;
            f.periodic = pick(2) == 0;
            d.functions.push_back(f);
        }
        d.frame_kind = pick(2) == 0 ? dsl::Document::FrameKind::coordinate
                                    : dsl::Document::FrameKind::invariant;
        int nframe = 1 + pick(3);
        for (int j = 0; j < nframe; ++j) {
            dsl::Assignment a;
            a.name = "e" + std::to_string(j + 1);
            a.value = expr(2);
            d.frame_entries.push_back(a);
            d.frame_names.push_back(a.name);
        }
        if (pick(2)) {
            d.has_deform = true;
            dsl::Document::SigmaEntry e;
            e.j = 1 + pick(3);
            e.k = 1 + pick(3);
            e.value = expr(2);
            d.deform.push_back(e);
        }
        d.has_metric = pick(2) == 0;
        int nforms = pick(3);
        for (int j = 0; j < nforms; ++j) {
            dsl::Assignment a;
            a.name = "F" + std::to_string(j + 1);
            a.value = expr(3);
            d.forms.push_back(a);
        }
        int nclaims = pick(4);
        for (int j = 0; j < nclaims; ++j) {
            dsl::ClaimAst c;
            static const char* verbs[] = {"frame-closure", "closed", "structure-t", "mt", "nop"};
            c.verb = verbs[pick(5)];
            if (pick(2)) c.args.push_back(ident());
            if (pick(2)) c.args.push_back(std::to_string(pick(4)));
            if (pick(2)) c.rhs = expr(2);
            if (pick(3) == 0) {
                dsl::Assignment w;
                w.name = "t1";
                w.value = expr(1);
                c.witnesses.push_back({w});
            }
            if (pick(3) == 0) {
                dsl::Assignment w;
                w.name = "u";
                w.value = expr(1);
                c.with_subst.push_back(w);
            }
            d.claims.push_back(c);
        }
        return d;
    }
};

} // namespace

TEST_CASE("printer and parser are inverse on 100 fuzzed documents") {
    Fuzzer fz(20260810);
    for (int trial = 0; trial < 100; ++trial) {
        dsl::Document d = fz.doc();
        std::string text = dsl::print(d);
        dsl::Parser p(text);
        auto back = p.parse();
        INFO("document:\n" << text);
        REQUIRE(back.has_value());
        REQUIRE(dsl::doc_equal(d, *back));
        REQUIRE(dsl::print(*back) == text);
    }
}

TEST_CASE("identical inputs give byte-identical diagnostics output") {
    const char* bad = "manifold x closed\n\nframe coordinate {\n  phi1 = dz1 +\n}\n";
    dsl::Parser p1(bad), p2(bad);
    p1.parse();
    p2.parse();
    REQUIRE(p1.diagnostics().size() == p2.diagnostics().size());
    for (size_t i = 0; i < p1.diagnostics().size(); ++i) {
        REQUIRE(p1.diagnostics()[i].message == p2.diagnostics()[i].message);
        REQUIRE(p1.diagnostics()[i].span.line == p2.diagnostics()[i].span.line);
    }
}
