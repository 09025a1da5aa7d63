#pragma once

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pklab/rational.hpp"
#include "pklab/symbols.hpp"

namespace pklab {

/// Sparse monomial: (atom id, exponent) pairs sorted by atom id.
using Monomial = std::vector<std::pair<uint32_t, uint32_t>>;

/// Lex order, earlier-declared atoms most significant. A proper monomial
/// order, so leading-term cancellation gives an exact divisibility test.
struct MonoCmp {
    bool operator()(const Monomial& a, const Monomial& b) const {
        size_t i = 0, j = 0;
        while (i < a.size() || j < b.size()) {
            uint32_t av = i < a.size() ? a[i].first : UINT32_MAX;
            uint32_t bv = j < b.size() ? b[j].first : UINT32_MAX;
            if (av < bv) return false; // a has a positive exponent first -> a greater
            if (bv < av) return true;
            if (a[i].second != b[j].second) return a[i].second < b[j].second;
            ++i; ++j;
        }
        return false;
    }
};

inline Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial r;
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) r.push_back(a[i++]);
        else if (i == a.size() || b[j].first < a[i].first) r.push_back(b[j++]);
        else { r.emplace_back(a[i].first, a[i].second + b[j].second); ++i; ++j; }
    }
    return r;
}

/// a / b if b divides a, else nullopt.
inline std::optional<Monomial> mono_div(const Monomial& a, const Monomial& b) {
    Monomial r;
    size_t i = 0;
    for (const auto& [atom, exp] : b) {
        while (i < a.size() && a[i].first < atom) r.push_back(a[i++]);
        if (i == a.size() || a[i].first != atom || a[i].second < exp) return std::nullopt;
        if (a[i].second > exp) r.emplace_back(atom, a[i].second - exp);
        ++i;
    }
    while (i < a.size()) r.push_back(a[i++]);
    return r;
}

/// Multivariate polynomial over the Gaussian rationals.
class Poly {
public:
    using Terms = std::map<Monomial, GaussRat, MonoCmp>;

    Poly() = default;
    explicit Poly(GaussRat c) {
        if (!c.is_zero()) t_[Monomial{}] = std::move(c);
    }
    static Poly atom(uint32_t id, uint32_t exp = 1) {
        Poly p;
        p.t_[Monomial{{id, exp}}] = GaussRat(1);
        return p;
    }

    bool is_zero() const { return t_.empty(); }
    bool is_constant() const { return t_.empty() || (t_.size() == 1 && t_.begin()->first.empty()); }
    GaussRat constant_value() const {
        if (t_.empty()) return GaussRat(0);
        return t_.begin()->second;
    }
    const Terms& terms() const { return t_; }
    size_t size() const { return t_.size(); }

    void add_term(const Monomial& m, const GaussRat& c) {
        if (c.is_zero()) return;
        auto it = t_.find(m);
        if (it == t_.end()) t_[m] = c;
        else {
            it->second += c;
            if (it->second.is_zero()) t_.erase(it);
        }
    }

    Poly operator+(const Poly& o) const {
        Poly r = *this;
        for (const auto& [m, c] : o.t_) r.add_term(m, c);
        return r;
    }
    Poly operator-() const {
        Poly r = *this;
        for (auto& [m, c] : r.t_) c = -c;
        return r;
    }
    Poly operator-(const Poly& o) const { return *this + (-o); }
    Poly operator*(const Poly& o) const {
        Poly r;
        for (const auto& [m1, c1] : t_)
            for (const auto& [m2, c2] : o.t_) r.add_term(mono_mul(m1, m2), c1 * c2);
        return r;
    }
    Poly scaled(const GaussRat& c) const {
        Poly r;
        if (c.is_zero()) return r;
        for (const auto& [m, k] : t_) r.t_[m] = k * c;
        return r;
    }
    Poly pow(unsigned k) const {
        Poly acc{GaussRat(1)}, base = *this;
        while (k) {
            if (k & 1) acc = acc * base;
            base = base * base;
            k >>= 1;
        }
        return acc;
    }

    bool operator==(const Poly& o) const { return t_ == o.t_; }

    /// Deterministic total order on polynomials (for use as map keys).
    int cmp(const Poly& o) const {
        auto i = t_.begin();
        auto j = o.t_.begin();
        MonoCmp less;
        for (; i != t_.end() && j != o.t_.end(); ++i, ++j) {
            if (i->first != j->first) return less(i->first, j->first) ? -1 : 1;
            int c = i->second.cmp(j->second);
            if (c) return c;
        }
        if (i != t_.end()) return 1;
        if (j != o.t_.end()) return -1;
        return 0;
    }

    /// Leading (greatest) term in the monomial order.
    std::pair<Monomial, GaussRat> leading() const { return *t_.rbegin(); }

    /// Exact division; nullopt when d does not divide this polynomial.
    std::optional<Poly> divided_by(const Poly& d) const {
        if (d.is_zero()) fail(errc::division_by_zero, "polynomial division by zero");
        Poly q, r = *this;
        auto [dm, dc] = d.leading();
        while (!r.is_zero()) {
            auto [rm, rc] = r.leading();
            auto qm = mono_div(rm, dm);
            if (!qm) return std::nullopt;
            GaussRat qc = rc / dc;
            Poly term;
            term.t_[*qm] = qc;
            q.add_term(*qm, qc);
            r = r - term * d;
        }
        return q;
    }

    bool depends_on(uint32_t atom) const {
        for (const auto& [m, c] : t_)
            for (const auto& [a, e] : m)
                if (a == atom) return true;
        return false;
    }

    template <typename Pred>
    bool all_atoms(Pred p) const {
        for (const auto& [m, c] : t_)
            for (const auto& [a, e] : m)
                if (!p(a)) return false;
        return true;
    }

    template <typename Fn>
    void for_each_atom(Fn f) const {
        for (const auto& [m, c] : t_)
            for (const auto& [a, e] : m) f(a);
    }

    /// Polynomial partial derivative w.r.t. a real atom. Function atoms turn
    /// into their formal-derivative atoms via the context.
    Poly diff_atom(uint32_t var_atom, VarContext& ctx) const {
        Poly r;
        for (const auto& [m, c] : t_) {
            for (size_t k = 0; k < m.size(); ++k) {
                const auto [a, e] = m[k];
                Poly datom; // derivative of the single atom a
                if (a == var_atom) datom = Poly{GaussRat(1)};
                else if (ctx.atom(a).kind == VarContext::Atom::Kind::function) {
                    auto d = ctx.fn_atom_derivative(a, var_atom);
                    if (d) datom = Poly::atom(*d);
                }
                if (datom.is_zero()) continue;
                Monomial rest;
                for (size_t k2 = 0; k2 < m.size(); ++k2) {
                    if (k2 == k) {
                        if (e > 1) rest.emplace_back(a, e - 1);
                    } else rest.push_back(m[k2]);
                }
                Poly restp;
                restp.t_[rest] = c * GaussRat(Rational(e));
                r = r + restp * datom;
            }
        }
        return r;
    }

    Poly conj(VarContext& ctx) const {
        Poly r;
        for (const auto& [m, c] : t_) {
            Monomial cm;
            for (const auto& [a, e] : m) cm.emplace_back(ctx.conj_atom(a), e);
            std::sort(cm.begin(), cm.end());
            r.add_term(cm, c.conj());
        }
        return r;
    }

    /// Substitute an atom by a polynomial.
    Poly subst_atom(uint32_t atom, const Poly& value) const {
        Poly r;
        for (const auto& [m, c] : t_) {
            Poly term{c};
            for (const auto& [a, e] : m) {
                if (a == atom) term = term * value.pow(e);
                else term = term * Poly::atom(a, e);
            }
            r = r + term;
        }
        return r;
    }

    std::complex<double> eval(const std::function<std::complex<double>(uint32_t)>& atom_value) const {
        std::complex<double> s = 0;
        for (const auto& [m, c] : t_) {
            std::complex<double> v = c.to_complex();
            for (const auto& [a, e] : m) {
                std::complex<double> av = atom_value(a);
                for (uint32_t k = 0; k < e; ++k) v *= av;
            }
            s += v;
        }
        return s;
    }

    std::string str(const VarContext& ctx) const {
        if (t_.empty()) return "0";
        std::string out;
        bool first = true;
        for (const auto& [m, c] : t_) {
            GaussRat coef = c;
            std::string sign;
            if (!first) {
                // pull a leading minus out of purely real/imaginary coefficients
                if ((coef.im == 0 && coef.re < 0) || (coef.re == 0 && coef.im < 0)) {
                    sign = " - ";
                    coef = -coef;
                } else sign = " + ";
            } else {
                if ((coef.im == 0 && coef.re < 0) || (coef.re == 0 && coef.im < 0)) {
                    sign = "-";
                    coef = -coef;
                }
                first = false;
            }
            std::string mono;
            for (const auto& [a, e] : m) {
                if (!mono.empty()) mono += "*";
                mono += ctx.atom(a).name;
                if (e > 1) mono += "^" + std::to_string(e);
            }
            std::string term;
            if (mono.empty()) term = to_string(coef);
            else if (coef.is_one()) term = mono;
            else term = to_string(coef) + "*" + mono;
            out += sign + term;
        }
        return out;
    }

private:
    Terms t_;
};

struct PolyCmp {
    bool operator()(const Poly& a, const Poly& b) const { return a.cmp(b) < 0; }
};

/// Exact symbolic scalar: a polynomial numerator over a product of monic
/// parameter-only polynomial factors. Always kept reduced by trial division,
/// so is_zero() and equality are decidable.
class Expr {
public:
    using Den = std::map<Poly, uint32_t, PolyCmp>;

    Expr() = default;
    Expr(CtxPtr ctx, Poly num) : ctx_(std::move(ctx)), num_(std::move(num)) { reduce(); }
    Expr(CtxPtr ctx, Poly num, Den den) : ctx_(std::move(ctx)), num_(std::move(num)), den_(std::move(den)) {
        reduce();
    }

    static Expr constant(CtxPtr ctx, GaussRat c) { return Expr(std::move(ctx), Poly(std::move(c))); }
    static Expr zero(CtxPtr ctx) { return constant(std::move(ctx), GaussRat(0)); }
    static Expr one(CtxPtr ctx) { return constant(std::move(ctx), GaussRat(1)); }
    static Expr i(CtxPtr ctx) { return constant(std::move(ctx), GaussRat::i_unit()); }
    static Expr atom(CtxPtr ctx, uint32_t id) { return Expr(std::move(ctx), Poly::atom(id)); }
    /// z_j as x_j + i*y_j (or the conjugate).
    static Expr coord_z(CtxPtr ctx, uint32_t cc_index, bool conjugated) {
        const auto& cc = ctx->complex_coords().at(cc_index);
        Poly p = Poly::atom(cc.x) + Poly::atom(cc.y).scaled(conjugated ? -GaussRat::i_unit()
                                                                       : GaussRat::i_unit());
        return Expr(std::move(ctx), std::move(p));
    }

    const CtxPtr& ctx() const { return ctx_; }
    const Poly& num() const { return num_; }
    const Den& den() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }
    bool is_constant() const { return num_.is_constant() && den_.empty(); }
    GaussRat constant_value() const {
        if (!is_constant()) fail(errc::invalid_argument, "expression is not constant: " + str());
        return num_.constant_value();
    }

    Expr operator-() const { return Expr(ctx_, -num_, den_); }

    Expr operator+(const Expr& o) const {
        check_ctx(o);
        if (den_.empty() && o.den_.empty()) return Expr(ctx_, num_ + o.num_);
        Den d = den_;
        for (const auto& [f, e] : o.den_) {
            auto it = d.find(f);
            if (it == d.end()) d[f] = e;
            else it->second = std::max(it->second, e);
        }
        Poly n1 = num_ * complement(d, den_);
        Poly n2 = o.num_ * complement(d, o.den_);
        return Expr(ctx_, n1 + n2, std::move(d));
    }
    Expr operator-(const Expr& o) const { return *this + (-o); }
    Expr operator*(const Expr& o) const {
        check_ctx(o);
        Den d = den_;
        for (const auto& [f, e] : o.den_) d[f] += e;
        return Expr(ctx_, num_ * o.num_, std::move(d));
    }
    Expr operator/(const Expr& o) const {
        check_ctx(o);
        if (o.is_zero()) fail(errc::division_by_zero, "division by zero");
        if (!o.num_.all_atoms([&](uint32_t a) { return ctx_->is_parameter_atom(a); }))
            fail(errc::coordinate_denominator,
                 "division by coordinate-dependent expression: " + o.str());
        // this * o.den / o.num
        Den d = den_;
        Poly n = num_;
        for (const auto& [f, e] : o.den_) n = n * f.pow(e);
        if (o.num_.is_constant()) {
            n = n.scaled(GaussRat(1) / o.num_.constant_value());
        } else {
            auto [lead_m, lead_c] = o.num_.leading();
            Poly monic = o.num_.scaled(GaussRat(1) / lead_c);
            n = n.scaled(GaussRat(1) / lead_c);
            d[monic] += 1;
        }
        return Expr(ctx_, std::move(n), std::move(d));
    }

    Expr& operator+=(const Expr& o) { *this = *this + o; return *this; }
    Expr& operator-=(const Expr& o) { *this = *this - o; return *this; }
    Expr& operator*=(const Expr& o) { *this = *this * o; return *this; }

    Expr scaled(const GaussRat& c) const { return Expr(ctx_, num_.scaled(c), den_); }
    Expr pow(unsigned k) const {
        Expr acc = one(ctx_), base = *this;
        while (k) {
            if (k & 1) acc = acc * base;
            base = base * base;
            k >>= 1;
        }
        return acc;
    }

    bool equals(const Expr& o) const { return (*this - o).is_zero(); }

    Expr conj() const {
        Den d;
        Poly n = num_.conj(*ctx_);
        for (const auto& [f, e] : den_) {
            Poly cf = f.conj(*ctx_);
            auto [m, c] = cf.leading();
            if (!c.is_one()) { // re-normalize to a monic factor
                cf = cf.scaled(GaussRat(1) / c);
                n = n.scaled(GaussRat(1) / c.pow(e));
            }
            d[cf] += e;
        }
        return Expr(ctx_, std::move(n), std::move(d));
    }

    Expr diff(const VarRef& v) const {
        if (v.tag == VarRef::Tag::z || v.tag == VarRef::Tag::zbar) {
            const auto& cc = ctx_->complex_coords().at(v.id);
            Expr dx = diff(VarRef::atom(cc.x));
            Expr dy = diff(VarRef::atom(cc.y));
            GaussRat half(Rational(1, 2));
            GaussRat ihalf = v.tag == VarRef::Tag::z ? GaussRat(Rational(0), Rational(-1, 2))
                                                     : GaussRat(Rational(0), Rational(1, 2));
            return dx.scaled(half) + dy.scaled(ihalf);
        }
        uint32_t a = v.id;
        Expr r(ctx_, num_.diff_atom(a, *ctx_), den_);
        if (ctx_->is_parameter_atom(a)) {
            for (const auto& [f, e] : den_) {
                Poly df = f.diff_atom(a, *ctx_);
                if (df.is_zero()) continue;
                // -e * num * f' / (den * f)
                Den d = den_;
                d[f] += 1;
                r += Expr(ctx_, (num_ * df).scaled(GaussRat(Rational(-(long long)e))), std::move(d));
            }
        }
        return r;
    }

    /// Substitute a parameter (or coordinate) atom by an exact constant.
    Expr subst(uint32_t atom, const GaussRat& value) const {
        Poly n = num_.subst_atom(atom, Poly(value));
        Den d;
        for (const auto& [f, e] : den_) {
            Poly sf = f.subst_atom(atom, Poly(value));
            if (sf.is_zero()) fail(errc::division_by_zero, "substitution vanishes a denominator");
            if (sf.is_constant()) {
                n = n.scaled(GaussRat(1) / sf.constant_value().pow(e));
            } else {
                auto [m, c] = sf.leading();
                if (!c.is_one()) {
                    sf = sf.scaled(GaussRat(1) / c);
                    n = n.scaled(GaussRat(1) / c.pow(e));
                }
                d[sf] += e;
            }
        }
        return Expr(ctx_, std::move(n), std::move(d));
    }

    /// Substitute every atom of an opaque function symbol (including its
    /// derivative atoms and conjugates) by the corresponding expression.
    Expr subst_fn(uint32_t fn, const Expr& value) const {
        // collect the fn atoms present
        std::vector<uint32_t> hits;
        auto scan = [&](const Poly& p) {
            p.for_each_atom([&](uint32_t a) {
                const auto& info = ctx_->atom(a);
                if (info.kind == VarContext::Atom::Kind::function && info.fn == fn)
                    hits.push_back(a);
            });
        };
        scan(num_);
        for (const auto& [f, e] : den_) scan(f);
        if (hits.empty()) return *this;
        std::sort(hits.begin(), hits.end());
        hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
        Expr r = *this;
        for (uint32_t a : hits) {
            const auto& info = ctx_->atom(a);
            Expr rep = info.conjugated ? value.conj() : value;
            for (uint32_t d : info.derivs) rep = rep.diff(VarRef::atom(d));
            if (!rep.den().empty())
                fail(errc::invalid_argument, "function substitution must be denominator-free");
            Poly n = r.num_.subst_atom(a, rep.num());
            for (const auto& [f, e] : r.den_)
                if (f.depends_on(a)) fail(errc::invalid_argument, "function atom in denominator");
            r = Expr(ctx_, std::move(n), r.den_);
        }
        return r;
    }

    struct EvalEnv {
        std::map<uint32_t, std::complex<double>> vars; // atom id -> value
        std::map<std::string, std::function<std::complex<double>(const std::vector<std::complex<double>>&)>> fns;
    };

    std::complex<double> eval(const EvalEnv& env) const {
        auto atom_value = [&](uint32_t a) -> std::complex<double> { return eval_atom(a, env); };
        std::complex<double> n = num_.eval(atom_value);
        std::complex<double> d = 1;
        for (const auto& [f, e] : den_) {
            std::complex<double> fv = f.eval(atom_value);
            for (uint32_t k = 0; k < e; ++k) d *= fv;
        }
        if (std::abs(d) == 0.0) fail(errc::division_by_zero, "denominator vanishes at point");
        return n / d;
    }

    std::string str() const {
        std::string n = num_.str(*ctx_);
        if (den_.empty()) return n;
        bool wrap = num_.size() > 1;
        std::string out = wrap ? "(" + n + ")" : n;
        for (const auto& [f, e] : den_) {
            out += " / (" + f.str(*ctx_) + ")";
            if (e > 1) out += "^" + std::to_string(e);
        }
        return out;
    }

private:
    void check_ctx(const Expr& o) const {
        if (ctx_.get() != o.ctx_.get())
            fail(errc::basis_mismatch, "expressions from different contexts");
    }

    static Poly complement(const Den& total, const Den& mine) {
        Poly p{GaussRat(1)};
        for (const auto& [f, e] : total) {
            uint32_t have = 0;
            auto it = mine.find(f);
            if (it != mine.end()) have = it->second;
            if (e > have) p = p * f.pow(e - have);
        }
        return p;
    }

    void reduce() {
        if (num_.is_zero()) { den_.clear(); return; }
        for (auto it = den_.begin(); it != den_.end();) {
            while (it->second > 0) {
                auto q = num_.divided_by(it->first);
                if (!q) break;
                num_ = std::move(*q);
                --it->second;
            }
            if (it->second == 0) it = den_.erase(it);
            else ++it;
        }
    }

    std::complex<double> eval_atom(uint32_t a, const EvalEnv& env) const {
        const auto& info = ctx_->atom(a);
        if (info.kind == VarContext::Atom::Kind::variable) {
            auto it = env.vars.find(a);
            if (it == env.vars.end()) {
                // allow looking up by conjugate partner
                uint32_t p = info.conj_partner;
                auto jt = env.vars.find(p);
                if (p != a && jt != env.vars.end()) return std::conj(jt->second);
                fail(errc::missing_assignment, "no value for variable " + info.name);
            }
            if (info.vkind != VarKind::complex_parameter && std::abs(it->second.imag()) > 1e-12)
                fail(errc::inconsistent_conjugates, "real variable " + info.name + " given complex value");
            if (info.vkind == VarKind::complex_parameter && info.conj_partner != a) {
                auto jt = env.vars.find(info.conj_partner);
                if (jt != env.vars.end()) {
                    auto c = std::conj(jt->second);
                    if (std::abs(c - it->second) > 1e-9 * (1.0 + std::abs(c)))
                        fail(errc::inconsistent_conjugates,
                             "conjugate pair " + info.name + " assigned non-conjugate values");
                }
            }
            return it->second;
        }
        // function atom: look up by name without the conjugation marker
        const auto& fn = ctx_->fn(info.fn);
        std::string key = fn.name;
        for (uint32_t d : info.derivs) key += "_" + ctx_->atom(d).name;
        auto it = env.fns.find(key);
        if (it == env.fns.end()) fail(errc::missing_assignment, "no numeric function for " + key);
        std::vector<std::complex<double>> args;
        for (uint32_t arg : fn.args) {
            auto vt = env.vars.find(arg);
            if (vt == env.vars.end()) fail(errc::missing_assignment, "no value for " + ctx_->atom(arg).name);
            args.push_back(vt->second);
        }
        std::complex<double> v = it->second(args);
        return info.conjugated ? std::conj(v) : v;
    }

    CtxPtr ctx_;
    Poly num_;
    Den den_;
};

inline Expr operator*(const GaussRat& c, const Expr& e) { return e.scaled(c); }

} // namespace pklab
