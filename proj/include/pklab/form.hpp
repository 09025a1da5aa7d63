#pragma once

#include <algorithm>
#include <bit>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pklab/expr.hpp"

namespace pklab {

enum class CovTag { holomorphic, antiholomorphic, real };

struct Covector {
    std::string name;
    CovTag tag = CovTag::real;
    size_t conj_partner = 0; // index within the basis; ==self for real
};

/// An ordered covector basis. Complex bases are laid out as the holomorphic
/// block followed by the antiholomorphic block (partner of j is j+n).
class Basis {
public:
    static std::shared_ptr<const Basis> complex_pairs(std::vector<std::string> holo_names) {
        Basis b;
        size_t n = holo_names.size();
        for (size_t j = 0; j < n; ++j)
            b.covs_.push_back({holo_names[j], CovTag::holomorphic, n + j});
        for (size_t j = 0; j < n; ++j)
            b.covs_.push_back({VarContext::conj_name(holo_names[j]), CovTag::antiholomorphic, j});
        b.half_ = n;
        return std::make_shared<const Basis>(std::move(b));
    }

    static std::shared_ptr<const Basis> real(std::vector<std::string> names) {
        Basis b;
        for (size_t j = 0; j < names.size(); ++j) b.covs_.push_back({names[j], CovTag::real, j});
        b.half_ = 0;
        return std::make_shared<const Basis>(std::move(b));
    }

    size_t size() const { return covs_.size(); }
    size_t half() const { return half_; } // complex dimension n, or 0 for real bases
    bool is_complex() const { return half_ > 0; }
    const Covector& cov(size_t i) const { return covs_.at(i); }

    uint32_t holo_mask() const { return half_ ? ((1u << half_) - 1) : 0; }
    uint32_t anti_mask() const { return half_ ? (((1u << half_) - 1) << half_) : 0; }

    int index_of(const std::string& name) const {
        for (size_t i = 0; i < covs_.size(); ++i)
            if (covs_[i].name == name) return static_cast<int>(i);
        return -1;
    }

    std::string word_str(uint32_t mask) const {
        if (mask == 0) return "1";
        std::string s;
        for (size_t i = 0; i < covs_.size(); ++i) {
            if (!(mask >> i & 1)) continue;
            if (!s.empty()) s += "^";
            s += covs_[i].name;
        }
        return s;
    }

private:
    std::vector<Covector> covs_;
    size_t half_ = 0;
};

using BasisPtr = std::shared_ptr<const Basis>;

/// Sign of merging two sorted index words (bitmasks); 0 when they intersect.
inline int wedge_sign(uint32_t a, uint32_t b) {
    if (a & b) return 0;
    // count (i in a, j in b) pairs with i > j
    int crossings = 0;
    uint32_t bb = b;
    while (bb) {
        uint32_t j = bb & (~bb + 1); // lowest set bit
        crossings += std::popcount(a & ~(j - 1) & ~j);
        bb ^= j;
    }
    return (crossings & 1) ? -1 : 1;
}

/// A graded sum of wedge monomials over a fixed basis, with Expr coefficients.
/// Monomials are stored sorted (as bitmasks) with the permutation sign folded
/// into the coefficient; zero coefficients are dropped.
class Form {
public:
    Form() = default;
    Form(CtxPtr ctx, BasisPtr basis) : ctx_(std::move(ctx)), basis_(std::move(basis)) {}

    static Form zero(CtxPtr ctx, BasisPtr basis) { return Form(std::move(ctx), std::move(basis)); }
    static Form covector(CtxPtr ctx, BasisPtr basis, size_t index) {
        Form f(std::move(ctx), std::move(basis));
        f.add_term(1u << index, Expr::one(f.ctx_));
        return f;
    }
    static Form scalar(CtxPtr ctx, BasisPtr basis, Expr coeff) {
        Form f(std::move(ctx), std::move(basis));
        f.add_term(0, std::move(coeff));
        return f;
    }

    const CtxPtr& ctx() const { return ctx_; }
    const BasisPtr& basis() const { return basis_; }
    const std::map<uint32_t, Expr>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }

    void add_term(uint32_t mask, Expr coeff) {
        if (coeff.is_zero()) return;
        auto it = t_.find(mask);
        if (it == t_.end()) t_.emplace(mask, std::move(coeff));
        else {
            it->second += coeff;
            if (it->second.is_zero()) t_.erase(it);
        }
    }

    Expr coeff(uint32_t mask) const {
        auto it = t_.find(mask);
        return it == t_.end() ? Expr::zero(ctx_) : it->second;
    }

    bool homogeneous(int* degree_out = nullptr) const {
        int deg = -1;
        for (const auto& [m, c] : t_) {
            int d = std::popcount(m);
            if (deg == -1) deg = d;
            else if (deg != d) return false;
        }
        if (degree_out) *degree_out = deg < 0 ? 0 : deg;
        return true;
    }

    int degree() const {
        int d = 0;
        if (!homogeneous(&d)) fail(errc::inhomogeneous_form, "mixed-degree form");
        return d;
    }

    Form operator+(const Form& o) const {
        check(o);
        Form r = *this;
        for (const auto& [m, c] : o.t_) r.add_term(m, c);
        return r;
    }
    Form operator-() const {
        Form r = *this;
        for (auto& [m, c] : r.t_) c = -c;
        return r;
    }
    Form operator-(const Form& o) const { return *this + (-o); }

    Form operator*(const Expr& s) const {
        Form r(ctx_, basis_);
        for (const auto& [m, c] : t_) r.add_term(m, c * s);
        return r;
    }
    Form scaled(const GaussRat& s) const {
        Form r(ctx_, basis_);
        for (const auto& [m, c] : t_) r.add_term(m, c.scaled(s));
        return r;
    }

    Form wedge(const Form& o) const {
        check(o);
        Form r(ctx_, basis_);
        for (const auto& [m1, c1] : t_)
            for (const auto& [m2, c2] : o.t_) {
                int s = wedge_sign(m1, m2);
                if (s == 0) continue;
                Expr c = c1 * c2;
                if (s < 0) c = -c;
                r.add_term(m1 | m2, std::move(c));
            }
        return r;
    }

    Form wedge_pow(unsigned k) const {
        Form acc = scalar(ctx_, basis_, Expr::one(ctx_));
        for (unsigned j = 0; j < k; ++j) acc = acc.wedge(*this);
        return acc;
    }

    /// Antilinear involution: conjugate coefficients, swap each covector with
    /// its partner, re-sort with the permutation sign.
    Form conj() const {
        Form r(ctx_, basis_);
        for (const auto& [m, c] : t_) {
            uint32_t nm = 0;
            std::vector<size_t> mapped;
            for (size_t i = 0; i < basis_->size(); ++i)
                if (m >> i & 1) mapped.push_back(basis_->cov(i).conj_partner);
            int inversions = 0;
            for (size_t i = 0; i < mapped.size(); ++i)
                for (size_t j = i + 1; j < mapped.size(); ++j)
                    if (mapped[i] > mapped[j]) ++inversions;
            for (size_t i : mapped) nm |= 1u << i;
            Expr cc = c.conj();
            if (inversions & 1) cc = -cc;
            r.add_term(nm, std::move(cc));
        }
        return r;
    }

    bool is_real() const { return equals(conj()); }

    bool equals(const Form& o) const { return (*this - o).is_zero(); }

    /// Bidegree (p,q) component relative to this form's own complex basis.
    Form component(int p, int q) const {
        if (!basis_->is_complex()) fail(errc::type_mismatch, "bidegree needs a complex basis");
        Form r(ctx_, basis_);
        for (const auto& [m, c] : t_) {
            int ph = std::popcount(m & basis_->holo_mask());
            int qh = std::popcount(m & basis_->anti_mask());
            if (ph == p && qh == q) r.add_term(m, c);
        }
        return r;
    }

    /// All (p,q) with a nonzero component.
    std::vector<std::pair<int, int>> bidegrees() const {
        std::vector<std::pair<int, int>> out;
        for (const auto& [m, c] : t_) {
            int ph = std::popcount(m & basis_->holo_mask());
            int qh = std::popcount(m & basis_->anti_mask());
            std::pair<int, int> pq{ph, qh};
            if (std::find(out.begin(), out.end(), pq) == out.end()) out.push_back(pq);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    bool is_pure(int p, int q) const { return equals(component(p, q)); }

    /// Apply a linear substitution: basis covector i of this form's basis is
    /// replaced by images[i] (a 1-form over the target basis).
    Form substituted(const std::vector<Form>& images, const BasisPtr& target) const {
        Form r(ctx_, target);
        for (const auto& [m, c] : t_) {
            Form acc = Form::scalar(ctx_, target, Expr::one(ctx_));
            for (size_t i = 0; i < basis_->size(); ++i)
                if (m >> i & 1) acc = acc.wedge(images.at(i));
            r = r + acc * c;
        }
        return r;
    }

    /// Substitute a parameter atom by an exact constant in every coefficient.
    Form subst_param(uint32_t atom, const GaussRat& value) const {
        Form r(ctx_, basis_);
        for (const auto& [m, c] : t_) r.add_term(m, c.subst(atom, value));
        return r;
    }

    Form subst_fn(uint32_t fn, const Expr& value) const {
        Form r(ctx_, basis_);
        for (const auto& [m, c] : t_) r.add_term(m, c.subst_fn(fn, value));
        return r;
    }

    std::map<uint32_t, std::complex<double>> eval(const Expr::EvalEnv& env) const {
        std::map<uint32_t, std::complex<double>> out;
        for (const auto& [m, c] : t_) out[m] = c.eval(env);
        return out;
    }

    std::string str() const {
        if (t_.empty()) return "0";
        std::string out;
        bool first = true;
        for (const auto& [m, c] : t_) {
            std::string cs = c.str();
            std::string term;
            if (m == 0) term = cs;
            else if (cs == "1") term = basis_->word_str(m);
            else term = "(" + cs + ") * " + basis_->word_str(m);
            out += first ? term : " + " + term;
            first = false;
        }
        return out;
    }

private:
    void check(const Form& o) const {
        if (basis_.get() != o.basis_.get()) fail(errc::basis_mismatch, "forms over different bases");
    }

    CtxPtr ctx_;
    BasisPtr basis_;
    std::map<uint32_t, Expr> t_;
};

inline Form wedge(const Form& a, const Form& b) { return a.wedge(b); }

inline Form operator*(const Expr& s, const Form& f) { return f * s; }

} // namespace pklab
