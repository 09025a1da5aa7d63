#pragma once

// The .pk manifold-spec language: lexer, AST with source spans, recursive
// descent parser with diagnostics, and the canonical printer. Loading an AST
// into engine objects lives in catalog.hpp; this header is pure syntax.

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "pklab/rational.hpp"

namespace pklab::dsl {

struct Span {
    int line = 0, col = 0;
};

struct Diagnostic {
    enum class Severity { error, warning };
    Severity severity = Severity::error;
    Span span;
    std::string message;
    std::string hint;
};

// ------------------------------------------------------------------ lexer

struct Token {
    enum class K { ident, number, punct, end };
    K kind = K::end;
    std::string text;
    Span span;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run(std::vector<Diagnostic>& diags) {
        std::vector<Token> out;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
                continue;
            }
            if (c == '\n') {
                out.push_back(Token{Token::K::punct, "\n", here()});
                advance();
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r') {
                advance();
                continue;
            }
            if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
                Span s = here();
                std::string t;
                while (pos_ < src_.size() &&
                       (isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    t += src_[advance_idx()];
                out.push_back(Token{Token::K::ident, t, s});
                continue;
            }
            if (isdigit(static_cast<unsigned char>(c))) {
                Span s = here();
                std::string t;
                while (pos_ < src_.size() && isdigit(static_cast<unsigned char>(src_[pos_])))
                    t += src_[advance_idx()];
                out.push_back(Token{Token::K::number, t, s});
                continue;
            }
            static const std::string puncts = "{}()[]=,;:+-*/^<>|";
            if (puncts.find(c) != std::string::npos) {
                out.push_back(Token{Token::K::punct, std::string(1, c), here()});
                advance();
                continue;
            }
            diags.push_back(
                {Diagnostic::Severity::error, here(), std::string("unexpected character '") + c + "'", ""});
            advance();
        }
        out.push_back(Token{Token::K::end, "", here()});
        return out;
    }

private:
    Span here() const { return {line_, col_}; }
    void advance() { (void)advance_idx(); }
    size_t advance_idx() {
        size_t i = pos_++;
        if (src_[i] == '\n') {
            ++line_;
            col_ = 1;
        } else ++col_;
        return i;
    }
    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
};

// ------------------------------------------------------------------ AST

struct AstExpr;
using AstPtr = std::shared_ptr<AstExpr>;

struct AstExpr {
    enum class K { num, imag, ident, call, neg, add, sub, mul, div, wedgepow, conj, d };
    K kind;
    Span span;
    Integer value;            // num
    std::string name;         // ident / call
    std::vector<AstPtr> args; // call arguments or operands

    static AstPtr num(Integer v, Span s) {
        auto n = std::make_shared<AstExpr>();
        n->kind = K::num;
        n->value = std::move(v);
        n->span = s;
        return n;
    }
    static AstPtr make(K k, Span s, std::vector<AstPtr> args, std::string name = "") {
        auto n = std::make_shared<AstExpr>();
        n->kind = k;
        n->span = s;
        n->args = std::move(args);
        n->name = std::move(name);
        return n;
    }
};

inline bool ast_equal(const AstPtr& a, const AstPtr& b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind || a->name != b->name || a->value != b->value) return false;
    if (a->args.size() != b->args.size()) return false;
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!ast_equal(a->args[i], b->args[i])) return false;
    return true;
}

struct Assignment {
    std::string name;
    AstPtr value;
    Span span;
};

struct ClaimAst {
    std::string verb;
    std::vector<std::string> args; // identifier/number arguments
    AstPtr rhs;                    // optional ': expr'
    std::pair<std::string, std::string> range; // for transverse-range: "(lo, hi)" as written
    bool has_range = false;
    std::vector<Assignment> with_subst;
    std::vector<std::vector<Assignment>> witnesses; // 'at' groups separated by '|'
    Span span;
};

struct Document {
    std::string name;
    bool closed_manifold = true;
    std::vector<std::string> coordinates;
    struct Param {
        std::string name;
        bool is_complex = false;
    };
    std::vector<Param> parameters;
    struct Fn {
        std::string name;
        std::vector<std::string> args;
        bool real = false;
        bool periodic = false;
    };
    std::vector<Fn> functions;
    enum class FrameKind { none, coordinate, invariant, brackets } frame_kind = FrameKind::none;
    std::vector<std::string> frame_names;
    std::vector<Assignment> frame_entries; // coordinate: name = expr; invariant: name = d-expr
    struct Bracket {
        std::string a, b;
        AstPtr rhs;
    };
    std::vector<Bracket> brackets;
    std::vector<Assignment> acs_entries; // 'J dx1 = expr' keyed by the covector name
    struct SigmaEntry {
        int j = 0, k = 0;
        AstPtr value;
        Span span;
    };
    std::vector<SigmaEntry> deform;
    bool has_deform = false;
    bool has_metric = false;
    bool metric_identity = true;
    std::vector<Assignment> forms;
    std::vector<ClaimAst> claims;
};

inline bool doc_equal(const Document& a, const Document& b) {
    auto assigns_equal = [](const std::vector<Assignment>& x, const std::vector<Assignment>& y) {
        if (x.size() != y.size()) return false;
        for (size_t i = 0; i < x.size(); ++i)
            if (x[i].name != y[i].name || !ast_equal(x[i].value, y[i].value)) return false;
        return true;
    };
    if (a.name != b.name || a.closed_manifold != b.closed_manifold) return false;
    if (a.coordinates != b.coordinates) return false;
    if (a.parameters.size() != b.parameters.size()) return false;
    for (size_t i = 0; i < a.parameters.size(); ++i)
        if (a.parameters[i].name != b.parameters[i].name ||
            a.parameters[i].is_complex != b.parameters[i].is_complex)
            return false;
    if (a.functions.size() != b.functions.size()) return false;
    for (size_t i = 0; i < a.functions.size(); ++i) {
        const auto &f = a.functions[i], &g = b.functions[i];
        if (f.name != g.name || f.args != g.args || f.real != g.real || f.periodic != g.periodic)
            return false;
    }
    if (a.frame_kind != b.frame_kind || a.frame_names != b.frame_names) return false;
    if (!assigns_equal(a.frame_entries, b.frame_entries)) return false;
    if (a.brackets.size() != b.brackets.size()) return false;
    for (size_t i = 0; i < a.brackets.size(); ++i)
        if (a.brackets[i].a != b.brackets[i].a || a.brackets[i].b != b.brackets[i].b ||
            !ast_equal(a.brackets[i].rhs, b.brackets[i].rhs))
            return false;
    if (!assigns_equal(a.acs_entries, b.acs_entries)) return false;
    if (a.has_deform != b.has_deform || a.deform.size() != b.deform.size()) return false;
    for (size_t i = 0; i < a.deform.size(); ++i)
        if (a.deform[i].j != b.deform[i].j || a.deform[i].k != b.deform[i].k ||
            !ast_equal(a.deform[i].value, b.deform[i].value))
            return false;
    if (a.has_metric != b.has_metric || a.metric_identity != b.metric_identity) return false;
    if (!assigns_equal(a.forms, b.forms)) return false;
    if (a.claims.size() != b.claims.size()) return false;
    for (size_t i = 0; i < a.claims.size(); ++i) {
        const auto &c = a.claims[i], &d = b.claims[i];
        if (c.verb != d.verb || c.args != d.args || !ast_equal(c.rhs, d.rhs)) return false;
        if (c.has_range != d.has_range || (c.has_range && c.range != d.range)) return false;
        if (c.with_subst.size() != d.with_subst.size()) return false;
        for (size_t k = 0; k < c.with_subst.size(); ++k)
            if (c.with_subst[k].name != d.with_subst[k].name ||
                !ast_equal(c.with_subst[k].value, d.with_subst[k].value))
                return false;
        if (c.witnesses.size() != d.witnesses.size()) return false;
        for (size_t k = 0; k < c.witnesses.size(); ++k)
            if (!assigns_equal(c.witnesses[k], d.witnesses[k])) return false;
    }
    return true;
}

// ------------------------------------------------------------------ parser

class Parser {
public:
    Parser(std::string_view src) {
        Lexer lex(src);
        toks_ = lex.run(diags_);
    }

    std::optional<Document> parse() {
        Document doc;
        skip_newlines();
        if (!expect_ident("manifold", "every spec starts with 'manifold NAME closed|open'"))
            return fail_doc();
        doc.name = take_ident("manifold name");
        std::string mode = take_ident("'closed' or 'open'");
        if (mode == "closed") doc.closed_manifold = true;
        else if (mode == "open") doc.closed_manifold = false;
        else err("expected 'closed' or 'open', got '" + mode + "'");
        skip_newlines();
        // blocks in canonical order, each optional
        if (peek_ident("coordinates")) parse_coordinates(doc);
        skip_newlines();
        if (peek_ident("parameters")) parse_parameters(doc);
        skip_newlines();
        if (peek_ident("functions")) parse_functions(doc);
        skip_newlines();
        if (peek_ident("frame")) parse_frame(doc);
        skip_newlines();
        if (peek_ident("acs")) parse_acs(doc);
        skip_newlines();
        if (peek_ident("deform")) parse_deform(doc);
        skip_newlines();
        if (peek_ident("metric")) parse_metric(doc);
        skip_newlines();
        if (peek_ident("forms")) parse_forms(doc);
        skip_newlines();
        if (peek_ident("claims")) parse_claims(doc);
        skip_newlines();
        if (cur().kind != Token::K::end)
            err("unexpected content after the claims block (blocks must appear in canonical order)");
        if (has_errors()) return std::nullopt;
        return doc;
    }

    const std::vector<Diagnostic>& diagnostics() const { return diags_; }
    bool has_errors() const {
        for (const auto& d : diags_)
            if (d.severity == Diagnostic::Severity::error) return true;
        return false;
    }

    // expression parser, exposed for CLI '--at' arguments
    AstPtr parse_expression() {
        skip_newlines();
        return parse_expr();
    }

private:
    std::optional<Document> fail_doc() { return std::nullopt; }

    const Token& cur() const { return toks_[i_]; }
    const Token& next() {
        if (toks_[i_].kind != Token::K::end) ++i_;
        return toks_[i_ - 1];
    }
    bool is_punct(const char* p) const { return cur().kind == Token::K::punct && cur().text == p; }
    bool accept_punct(const char* p) {
        if (is_punct(p)) {
            next();
            return true;
        }
        return false;
    }
    void expect_punct(const char* p, const char* what) {
        if (!accept_punct(p)) err(std::string("expected '") + p + "' " + what);
    }
    bool peek_ident(const char* name) const {
        return cur().kind == Token::K::ident && cur().text == name;
    }
    bool expect_ident(const char* name, const char* hint) {
        if (peek_ident(name)) {
            next();
            return true;
        }
        err(std::string("expected '") + name + "'", hint);
        return false;
    }
    std::string take_ident(const char* what) {
        if (cur().kind == Token::K::ident) return next().text;
        err(std::string("expected ") + what);
        return "";
    }
    void skip_newlines() {
        while (is_punct("\n") || is_punct(";")) next();
    }
    void skip_to_line_end() {
        while (cur().kind != Token::K::end && !is_punct("\n") && !is_punct(";") && !is_punct("}"))
            next();
    }
    void err(const std::string& m, const std::string& hint = "") {
        diags_.push_back({Diagnostic::Severity::error, cur().span, m, hint});
    }

    // expr := term (('+'|'-') term)*
    AstPtr parse_expr() {
        AstPtr lhs = parse_term();
        while (is_punct("+") || is_punct("-")) {
            bool plus = cur().text == "+";
            Span s = next().span;
            AstPtr rhs = parse_term();
            lhs = AstExpr::make(plus ? AstExpr::K::add : AstExpr::K::sub, s, {lhs, rhs});
        }
        return lhs;
    }
    AstPtr parse_term() {
        AstPtr lhs = parse_power();
        while (is_punct("*") || is_punct("/")) {
            bool mul = cur().text == "*";
            Span s = next().span;
            AstPtr rhs = parse_power();
            lhs = AstExpr::make(mul ? AstExpr::K::mul : AstExpr::K::div, s, {lhs, rhs});
        }
        return lhs;
    }
    AstPtr parse_power() {
        AstPtr lhs = parse_factor();
        while (is_punct("^")) {
            Span s = next().span;
            AstPtr rhs = parse_factor();
            lhs = AstExpr::make(AstExpr::K::wedgepow, s, {lhs, rhs});
        }
        return lhs;
    }
    AstPtr parse_factor() {
        Span s = cur().span;
        if (cur().kind == Token::K::number) {
            Integer v(next().text);
            return AstExpr::num(v, s);
        }
        if (accept_punct("-")) return AstExpr::make(AstExpr::K::neg, s, {parse_factor()});
        if (accept_punct("(")) {
            AstPtr inner = parse_expr();
            expect_punct(")", "to close the parenthesis");
            return inner;
        }
        if (cur().kind == Token::K::ident) {
            std::string name = next().text;
            if (name == "i" && !is_punct("(")) return AstExpr::make(AstExpr::K::imag, s, {});
            if (name == "conj" && is_punct("(")) {
                next();
                AstPtr inner = parse_expr();
                expect_punct(")", "to close conj(...)");
                return AstExpr::make(AstExpr::K::conj, s, {inner});
            }
            if (name == "d" && is_punct("(")) {
                next();
                AstPtr inner = parse_expr();
                expect_punct(")", "to close d(...)");
                return AstExpr::make(AstExpr::K::d, s, {inner});
            }
            if (is_punct("(")) {
                next();
                std::vector<AstPtr> args;
                if (!is_punct(")")) {
                    args.push_back(parse_expr());
                    while (accept_punct(",")) args.push_back(parse_expr());
                }
                expect_punct(")", "to close the argument list");
                return AstExpr::make(AstExpr::K::call, s, std::move(args), name);
            }
            return AstExpr::make(AstExpr::K::ident, s, {}, name);
        }
        err("expected an expression");
        next();
        return AstExpr::num(Integer(0), s);
    }

    void parse_coordinates(Document& doc) {
        next(); // 'coordinates'
        expect_punct("{", "after 'coordinates'");
        skip_newlines();
        while (cur().kind == Token::K::ident) {
            doc.coordinates.push_back(next().text);
            skip_newlines();
        }
        expect_punct("}", "to close coordinates");
    }

    void parse_parameters(Document& doc) {
        next();
        expect_punct("{", "after 'parameters'");
        skip_newlines();
        while (cur().kind == Token::K::ident) {
            Document::Param p;
            p.name = next().text;
            expect_punct(":", "parameters are declared 'name : real|complex'");
            std::string k = take_ident("'real' or 'complex'");
            if (k == "complex") p.is_complex = true;
            else if (k != "real") err("parameter kind must be 'real' or 'complex'");
            doc.parameters.push_back(p);
            skip_newlines();
        }
        expect_punct("}", "to close parameters");
    }

    void parse_functions(Document& doc) {
        next();
        expect_punct("{", "after 'functions'");
        skip_newlines();
        while (cur().kind == Token::K::ident) {
            Document::Fn f;
            f.name = next().text;
            expect_punct("(", "functions declare their coordinate arguments");
            if (!is_punct(")")) {
                f.args.push_back(take_ident("argument name"));
                while (accept_punct(",")) f.args.push_back(take_ident("argument name"));
            }
            expect_punct(")", "to close the argument list");
            expect_punct(":", "functions are declared 'name(args) : real|complex [periodic]'");
            std::string k = take_ident("'real' or 'complex'");
            if (k == "real") f.real = true;
            else if (k != "complex") err("function kind must be 'real' or 'complex'");
            if (peek_ident("periodic")) {
                next();
                f.periodic = true;
            }
            doc.functions.push_back(f);
            skip_newlines();
        }
        expect_punct("}", "to close functions");
    }

    void parse_frame(Document& doc) {
        next(); // 'frame'
        std::string kind = take_ident("'coordinate', 'invariant' or 'brackets'");
        if (kind == "coordinate") doc.frame_kind = Document::FrameKind::coordinate;
        else if (kind == "invariant") doc.frame_kind = Document::FrameKind::invariant;
        else if (kind == "brackets") doc.frame_kind = Document::FrameKind::brackets;
        else err("frame kind must be 'coordinate', 'invariant' or 'brackets'");
        if (doc.frame_kind == Document::FrameKind::brackets) {
            expect_punct("(", "bracket frames list their coframe names: frame brackets (psi1 ...)");
            while (cur().kind == Token::K::ident) doc.frame_names.push_back(next().text);
            expect_punct(")", "to close the coframe name list");
        }
        expect_punct("{", "to open the frame block");
        skip_newlines();
        while (!is_punct("}") && cur().kind != Token::K::end) {
            if (doc.frame_kind == Document::FrameKind::brackets) {
                expect_punct("[", "bracket entries look like [Z1, Z2] = -Z3");
                Document::Bracket br;
                br.a = take_ident("frame vector name");
                expect_punct(",", "between the two bracket arguments");
                br.b = take_ident("frame vector name");
                expect_punct("]", "to close the bracket");
                expect_punct("=", "bracket entries look like [Z1, Z2] = -Z3");
                br.rhs = parse_expr();
                doc.brackets.push_back(br);
            } else if (doc.frame_kind == Document::FrameKind::invariant) {
                if (!expect_ident("d", "invariant entries look like 'd phi1 = ...'")) skip_to_line_end();
                Assignment a;
                a.span = cur().span;
                a.name = take_ident("coframe covector name");
                expect_punct("=", "after the covector name");
                a.value = parse_expr();
                doc.frame_entries.push_back(a);
                doc.frame_names.push_back(a.name);
            } else {
                Assignment a;
                a.span = cur().span;
                a.name = take_ident("coframe covector name");
                expect_punct("=", "coframe entries look like 'phi3 = dz3 - z1*dz2'");
                a.value = parse_expr();
                doc.frame_entries.push_back(a);
                doc.frame_names.push_back(a.name);
            }
            skip_newlines();
        }
        expect_punct("}", "to close the frame block");
    }

    void parse_acs(Document& doc) {
        next();
        expect_punct("{", "after 'acs'");
        skip_newlines();
        while (peek_ident("J")) {
            next();
            Assignment a;
            a.span = cur().span;
            a.name = take_ident("covector name (dx1, dy1, ...)");
            expect_punct("=", "acs entries look like 'J dx1 = -dy1'");
            a.value = parse_expr();
            doc.acs_entries.push_back(a);
            skip_newlines();
        }
        expect_punct("}", "to close the acs block");
    }

    void parse_deform(Document& doc) {
        next();
        doc.has_deform = true;
        expect_punct("{", "after 'deform'");
        skip_newlines();
        while (peek_ident("sigma")) {
            next();
            Document::SigmaEntry e;
            e.span = cur().span;
            expect_punct("[", "sigma entries look like sigma[3][1] = ...");
            e.j = take_int("row index");
            expect_punct("]", "after the row index");
            expect_punct("[", "sigma entries look like sigma[3][1] = ...");
            e.k = take_int("column index");
            expect_punct("]", "after the column index");
            expect_punct("=", "after sigma[j][k]");
            e.value = parse_expr();
            doc.deform.push_back(e);
            skip_newlines();
        }
        expect_punct("}", "to close the deform block");
    }

    void parse_metric(Document& doc) {
        next();
        doc.has_metric = true;
        if (peek_ident("identity")) {
            next();
            doc.metric_identity = true;
            return;
        }
        err("only 'metric identity' is supported",
            "general coefficient matrices can be expressed through forms");
        skip_to_line_end();
    }

    void parse_forms(Document& doc) {
        next();
        expect_punct("{", "after 'forms'");
        skip_newlines();
        while (cur().kind == Token::K::ident) {
            Assignment a;
            a.span = cur().span;
            a.name = next().text;
            expect_punct("=", "form declarations look like 'Omega = ...'");
            a.value = parse_expr();
            doc.forms.push_back(a);
            skip_newlines();
        }
        expect_punct("}", "to close forms");
    }

    int take_int(const char* what) {
        if (cur().kind == Token::K::number) return std::stoi(next().text);
        err(std::string("expected ") + what);
        return 0;
    }

    void parse_claims(Document& doc) {
        next();
        expect_punct("{", "after 'claims'");
        skip_newlines();
        while (cur().kind == Token::K::ident) {
            ClaimAst c;
            c.span = cur().span;
            c.verb = next().text;
            // verbs may be hyphenated: frame-closure, structure-t, ...
            while (is_punct("-") && toks_[i_ + 1].kind == Token::K::ident) {
                next();
                c.verb += "-" + next().text;
            }
            // identifier/number arguments up to ':', 'with', 'at', or line end
            while ((cur().kind == Token::K::ident || cur().kind == Token::K::number) &&
                   !peek_ident("with") && !peek_ident("at"))
                c.args.push_back(next().text);
            if (accept_punct(":")) {
                if (is_punct("(") && c.verb == "transverse-range") {
                    next();
                    c.has_range = true;
                    c.range.first = take_signed_rational();
                    expect_punct(",", "ranges look like (-1/2, 1/2)");
                    c.range.second = take_signed_rational();
                    expect_punct(")", "to close the range");
                } else {
                    c.rhs = parse_expr();
                }
            }
            if (peek_ident("with")) {
                next();
                do {
                    Assignment a;
                    a.span = cur().span;
                    a.name = take_ident("substitution target");
                    expect_punct("=", "substitutions look like 'with g = 2*tau*x2 + x3'");
                    a.value = parse_expr();
                    c.with_subst.push_back(a);
                } while (accept_punct(","));
            }
            if (peek_ident("at")) {
                next();
                std::vector<Assignment> group;
                while (true) {
                    Assignment a;
                    a.span = cur().span;
                    a.name = take_ident("parameter name");
                    expect_punct("=", "witnesses look like 'at t = 1/2'");
                    a.value = parse_expr();
                    group.push_back(a);
                    if (accept_punct(",")) continue;
                    if (accept_punct("|")) {
                        c.witnesses.push_back(group);
                        group.clear();
                        continue;
                    }
                    break;
                }
                if (!group.empty()) c.witnesses.push_back(group);
            }
            doc.claims.push_back(std::move(c));
            skip_newlines();
        }
        expect_punct("}", "to close claims");
    }

    std::string take_signed_rational() {
        std::string s;
        if (accept_punct("-")) s += "-";
        if (cur().kind != Token::K::number) {
            err("expected a rational number");
            return "0";
        }
        s += next().text;
        if (accept_punct("/")) {
            s += "/";
            if (cur().kind != Token::K::number) {
                err("expected a denominator");
                return s + "1";
            }
            s += next().text;
        }
        return s;
    }

    std::vector<Token> toks_;
    size_t i_ = 0;
    std::vector<Diagnostic> diags_;
};

// ------------------------------------------------------------------ printer

inline int precedence(AstExpr::K k) {
    switch (k) {
        case AstExpr::K::add:
        case AstExpr::K::sub: return 1;
        case AstExpr::K::mul:
        case AstExpr::K::div: return 2;
        case AstExpr::K::wedgepow: return 3;
        case AstExpr::K::neg: return 4;
        default: return 5;
    }
}

inline void print_ast(std::ostream& os, const AstPtr& e, int parent_prec = 0) {
    int prec = precedence(e->kind);
    bool wrap = prec < parent_prec;
    if (wrap) os << "(";
    switch (e->kind) {
        case AstExpr::K::num: os << e->value.str(); break;
        case AstExpr::K::imag: os << "i"; break;
        case AstExpr::K::ident: os << e->name; break;
        case AstExpr::K::call:
            os << e->name << "(";
            for (size_t i = 0; i < e->args.size(); ++i) {
                if (i) os << ", ";
                print_ast(os, e->args[i], 0);
            }
            os << ")";
            break;
        case AstExpr::K::neg:
            os << "-";
            print_ast(os, e->args[0], prec + 1);
            break;
        case AstExpr::K::add:
            print_ast(os, e->args[0], prec);
            os << " + ";
            print_ast(os, e->args[1], prec + 1);
            break;
        case AstExpr::K::sub:
            print_ast(os, e->args[0], prec);
            os << " - ";
            print_ast(os, e->args[1], prec + 1);
            break;
        case AstExpr::K::mul:
            print_ast(os, e->args[0], prec);
            os << "*";
            print_ast(os, e->args[1], prec + 1);
            break;
        case AstExpr::K::div:
            print_ast(os, e->args[0], prec);
            os << "/";
            print_ast(os, e->args[1], prec + 1);
            break;
        case AstExpr::K::wedgepow:
            print_ast(os, e->args[0], prec);
            os << "^";
            print_ast(os, e->args[1], prec + 1);
            break;
        case AstExpr::K::conj:
            os << "conj(";
            print_ast(os, e->args[0], 0);
            os << ")";
            break;
        case AstExpr::K::d:
            os << "d(";
            print_ast(os, e->args[0], 0);
            os << ")";
            break;
    }
    if (wrap) os << ")";
}

inline std::string ast_str(const AstPtr& e) {
    std::ostringstream os;
    print_ast(os, e);
    return os.str();
}

inline std::string print(const Document& doc) {
    std::ostringstream os;
    os << "manifold " << doc.name << " " << (doc.closed_manifold ? "closed" : "open") << "\n";
    if (!doc.coordinates.empty()) {
        os << "\ncoordinates {";
        for (const auto& c : doc.coordinates) os << " " << c;
        os << " }\n";
    }
    if (!doc.parameters.empty()) {
        os << "\nparameters {\n";
        for (const auto& p : doc.parameters)
            os << "  " << p.name << " : " << (p.is_complex ? "complex" : "real") << "\n";
        os << "}\n";
    }
    if (!doc.functions.empty()) {
        os << "\nfunctions {\n";
        for (const auto& f : doc.functions) {
            os << "  " << f.name << "(";
            for (size_t i = 0; i < f.args.size(); ++i) os << (i ? ", " : "") << f.args[i];
            os << ") : " << (f.real ? "real" : "complex") << (f.periodic ? " periodic" : "") << "\n";
        }
        os << "}\n";
    }
    if (doc.frame_kind != Document::FrameKind::none) {
        os << "\nframe ";
        switch (doc.frame_kind) {
            case Document::FrameKind::coordinate: os << "coordinate"; break;
            case Document::FrameKind::invariant: os << "invariant"; break;
            case Document::FrameKind::brackets: {
                os << "brackets (";
                for (size_t i = 0; i < doc.frame_names.size(); ++i)
                    os << (i ? " " : "") << doc.frame_names[i];
                os << ")";
                break;
            }
            default: break;
        }
        os << " {\n";
        if (doc.frame_kind == Document::FrameKind::brackets) {
            for (const auto& b : doc.brackets)
                os << "  [" << b.a << ", " << b.b << "] = " << ast_str(b.rhs) << "\n";
        } else {
            for (const auto& a : doc.frame_entries)
                os << "  " << (doc.frame_kind == Document::FrameKind::invariant ? "d " : "")
                   << a.name << " = " << ast_str(a.value) << "\n";
        }
        os << "}\n";
    }
    if (!doc.acs_entries.empty()) {
        os << "\nacs {\n";
        for (const auto& a : doc.acs_entries) os << "  J " << a.name << " = " << ast_str(a.value) << "\n";
        os << "}\n";
    }
    if (doc.has_deform) {
        os << "\ndeform {\n";
        for (const auto& e : doc.deform)
            os << "  sigma[" << e.j << "][" << e.k << "] = " << ast_str(e.value) << "\n";
        os << "}\n";
    }
    if (doc.has_metric) os << "\nmetric identity\n";
    if (!doc.forms.empty()) {
        os << "\nforms {\n";
        for (const auto& a : doc.forms) os << "  " << a.name << " = " << ast_str(a.value) << "\n";
        os << "}\n";
    }
    if (!doc.claims.empty()) {
        os << "\nclaims {\n";
        for (const auto& c : doc.claims) {
            os << "  " << c.verb;
            for (const auto& a : c.args) os << " " << a;
            if (c.has_range) os << " : (" << c.range.first << ", " << c.range.second << ")";
            else if (c.rhs) os << " : " << ast_str(c.rhs);
            if (!c.with_subst.empty()) {
                os << " with ";
                for (size_t i = 0; i < c.with_subst.size(); ++i)
                    os << (i ? ", " : "") << c.with_subst[i].name << " = "
                       << ast_str(c.with_subst[i].value);
            }
            if (!c.witnesses.empty()) {
                os << " at ";
                for (size_t g = 0; g < c.witnesses.size(); ++g) {
                    if (g) os << " | ";
                    for (size_t i = 0; i < c.witnesses[g].size(); ++i)
                        os << (i ? ", " : "") << c.witnesses[g][i].name << " = "
                           << ast_str(c.witnesses[g][i].value);
                }
            }
            os << "\n";
        }
        os << "}\n";
    }
    return os.str();
}

} // namespace pklab::dsl
