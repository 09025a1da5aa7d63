#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pklab/form.hpp"
#include "pklab/linalg.hpp"

namespace pklab {

class Frame;
using FramePtr = std::shared_ptr<const Frame>;

/// A frame fixes the covector basis and the exterior derivative.
///
/// Coordinate mode: the working covectors are Expr-linear combinations of the
/// complex coordinate differentials dz_j, dzbar_j; d differentiates
/// coefficients (Wirtinger) and is extended by Leibniz.
///
/// Invariant mode: d is given on each working covector by structure equations
/// with constant (parameter-only) coefficients; d*d = 0 is verified at
/// construction, which is the Jacobi identity for a bracket table.
class Frame {
public:
    enum class Mode { coordinate, invariant };

    /// The canonical dz/dzbar basis used to write coframe entries.
    static BasisPtr differentials(const VarContext& ctx, const std::vector<uint32_t>& coords) {
        return make_diff_basis(ctx, coords);
    }

    static FramePtr coordinate(CtxPtr ctx, std::vector<uint32_t> coords,
                               std::vector<std::string> holo_names,
                               const std::vector<Form>& coframe_in_diff) {
        auto f = std::make_shared<Frame>();
        f->ctx_ = ctx;
        f->mode_ = Mode::coordinate;
        f->coords_ = std::move(coords);
        size_t n = f->coords_.size();
        if (holo_names.size() != n || coframe_in_diff.size() != n)
            fail(errc::invalid_argument, "coframe must have one (1,0)-form per complex coordinate");
        // adopt the differential basis the coframe entries are written on
        f->diff_ = coframe_in_diff[0].basis();
        if (f->diff_->half() != n)
            fail(errc::basis_mismatch, "coframe entries over a mismatched differential basis");
        f->working_ = Basis::complex_pairs(holo_names);
        f->working_in_diff_.clear();
        for (const Form& w : coframe_in_diff) {
            if (w.basis().get() != f->diff_.get())
                fail(errc::basis_mismatch, "coframe entries must share one differential basis");
            if (!w.is_zero() && w.degree() != 1)
                fail(errc::invalid_argument, "coframe entries must be 1-forms");
            f->working_in_diff_.push_back(w);
        }
        for (size_t j = 0; j < n; ++j) f->working_in_diff_.push_back(coframe_in_diff[j].conj());
        f->finish_coordinate();
        return f;
    }

    /// The standard frame on C^n: working covectors are the differentials.
    static FramePtr standard(CtxPtr ctx, std::vector<uint32_t> coords) {
        auto tmp_diff = make_diff_basis(*ctx, coords);
        std::vector<Form> id;
        std::vector<std::string> names;
        for (size_t j = 0; j < coords.size(); ++j) {
            names.push_back(tmp_diff->cov(j).name);
            id.push_back(Form::covector(ctx, tmp_diff, j));
        }
        auto f = std::make_shared<Frame>();
        f->ctx_ = ctx;
        f->mode_ = Mode::coordinate;
        f->coords_ = std::move(coords);
        f->diff_ = tmp_diff;
        f->working_ = tmp_diff; // same object: conversions are the identity
        for (size_t j = 0; j < id.size(); ++j) f->working_in_diff_.push_back(id[j]);
        for (size_t j = 0; j < id.size(); ++j)
            f->working_in_diff_.push_back(Form::covector(ctx, tmp_diff, id.size() + j));
        f->finish_coordinate();
        return f;
    }

    static FramePtr invariant(CtxPtr ctx, std::vector<std::string> holo_names,
                              std::vector<Form> structure_holo) {
        auto f = std::make_shared<Frame>();
        f->ctx_ = ctx;
        f->mode_ = Mode::invariant;
        size_t n = holo_names.size();
        if (structure_holo.size() != n)
            fail(errc::invalid_argument, "need one structure equation per (1,0)-covector");
        // adopt the basis the structure forms already live on
        f->working_ = structure_holo.empty() ? Basis::complex_pairs(holo_names)
                                             : structure_holo[0].basis();
        if (f->working_->half() != n)
            fail(errc::invalid_argument, "structure equations over a mismatched basis");
        for (size_t j = 0; j < n; ++j)
            if (f->working_->cov(j).name != holo_names[j])
                fail(errc::invalid_argument, "structure equations over a mismatched basis");
        f->structure_ = std::move(structure_holo);
        for (size_t j = 0; j < n; ++j) f->structure_.push_back(f->structure_[j].conj());
        f->validate_invariant();
        return f;
    }

    /// Build an invariant frame from a complex Lie bracket table:
    /// [Z_i, Z_j] = sum_k c^k_ij Z_k gives d psi^k = -sum_{i<j} c^k_ij psi^i^psi^j.
    struct Bracket {
        size_t i, j;                  // 0-based, i < j
        std::vector<GaussRat> coeffs; // component on each Z_k
    };
    static FramePtr from_brackets(CtxPtr ctx, std::vector<std::string> holo_names,
                                  const std::vector<Bracket>& table) {
        size_t n = holo_names.size();
        auto basis = Basis::complex_pairs(holo_names);
        std::vector<Form> structure;
        for (size_t k = 0; k < n; ++k) structure.push_back(Form::zero(ctx, basis));
        for (const auto& br : table) {
            if (br.i >= br.j || br.j >= n || br.coeffs.size() != n)
                fail(errc::invalid_argument, "malformed bracket table entry");
            uint32_t mask = (1u << br.i) | (1u << br.j);
            for (size_t k = 0; k < n; ++k)
                structure[k].add_term(mask, Expr::constant(ctx, -br.coeffs[k]));
        }
        // reuse the basis built above so the structure forms line up
        auto f = std::make_shared<Frame>();
        f->ctx_ = ctx;
        f->mode_ = Mode::invariant;
        f->working_ = basis;
        f->structure_ = std::move(structure);
        for (size_t j = 0; j < n; ++j) f->structure_.push_back(f->structure_[j].conj());
        f->validate_invariant();
        return f;
    }

    const CtxPtr& ctx() const { return ctx_; }
    Mode mode() const { return mode_; }
    const BasisPtr& working() const { return working_; }
    const BasisPtr& diff_basis() const { return diff_; }
    size_t n() const { return working_->half(); }
    const std::vector<uint32_t>& coords() const { return coords_; }

    Form covector(size_t i) const { return Form::covector(ctx_, working_, i); }
    Form zero() const { return Form::zero(ctx_, working_); }
    Form scalar(Expr e) const { return Form::scalar(ctx_, working_, std::move(e)); }

    Form to_diff(const Form& f) const {
        require_coordinate();
        if (f.basis().get() == diff_.get()) return f;
        return f.substituted(working_in_diff_, diff_);
    }
    Form to_working(const Form& f) const {
        require_coordinate();
        if (working_.get() == diff_.get()) return f;
        return f.substituted(diff_in_working_, working_);
    }

    Form d(const Form& f) const {
        if (f.basis().get() != working_.get() &&
            !(mode_ == Mode::coordinate && f.basis().get() == diff_.get()))
            fail(errc::basis_mismatch, "form is not over this frame's basis");
        if (mode_ == Mode::coordinate) {
            bool was_working = f.basis().get() == working_.get() && working_.get() != diff_.get();
            Form g = was_working ? to_diff(f) : f;
            Form r(ctx_, diff_);
            size_t n = coords_.size();
            for (const auto& [mask, c] : g.terms()) {
                for (size_t j = 0; j < n; ++j) {
                    Expr dz = c.diff(VarRef::z(coords_[j]));
                    Expr dzb = c.diff(VarRef::zbar(coords_[j]));
                    if (!dz.is_zero()) accumulate(r, 1u << j, mask, dz);
                    if (!dzb.is_zero()) accumulate(r, 1u << (j + n), mask, dzb);
                }
            }
            return was_working ? to_working(r) : r;
        }
        // invariant mode
        for (const auto& [mask, c] : f.terms()) {
            bool ok = c.num().all_atoms([&](uint32_t a) { return ctx_->is_parameter_atom(a); });
            if (!ok)
                fail(errc::invalid_argument,
                     "invariant frame cannot differentiate coordinate-dependent coefficients");
        }
        Form r(ctx_, working_);
        for (const auto& [mask, c] : f.terms()) {
            int sign = 1;
            for (size_t i = 0; i < working_->size(); ++i) {
                if (!(mask >> i & 1)) continue;
                uint32_t rest = mask & ~(1u << i);
                Form restf(ctx_, working_);
                restf.add_term(rest, sign < 0 ? -c : c);
                r = r + structure_[i].wedge(restf);
                sign = -sign;
            }
        }
        return r;
    }

    /// d of the i-th working covector.
    Form d_covector(size_t i) const {
        if (mode_ == Mode::invariant) return structure_[i];
        return d(covector(i));
    }

    /// Whether the declared coframe is exactly the coordinate differentials.
    bool standard_coframe() const {
        if (mode_ != Mode::coordinate) return false;
        for (size_t j = 0; j < working_->size(); ++j) {
            const Form& w = working_in_diff_[j];
            if (w.terms().size() != 1) return false;
            auto it = w.terms().begin();
            if (it->first != (1u << j) || !it->second.equals(Expr::one(ctx_))) return false;
        }
        return true;
    }

    /// The declared (1,0)-coframe over the differentials (coordinate mode).
    std::vector<Form> coframe_in_diff() const {
        require_coordinate();
        std::vector<Form> out;
        for (size_t j = 0; j < n(); ++j) out.push_back(working_in_diff_[j]);
        return out;
    }

    // --- real coordinate covector basis (coordinate mode only) ---

    const BasisPtr& real_basis() const {
        require_coordinate();
        return real_;
    }
    /// dz_j = dx_j + i dy_j and conjugates.
    Form real_to_diff(const Form& f) const {
        require_coordinate();
        return f.substituted(real_in_diff_, diff_);
    }
    Form diff_to_real(const Form& f) const {
        require_coordinate();
        return f.substituted(diff_in_real_, real_);
    }

private:
    static BasisPtr make_diff_basis(const VarContext& ctx, const std::vector<uint32_t>& coords) {
        std::vector<std::string> names;
        for (uint32_t cc : coords) names.push_back("d" + ctx.complex_coords().at(cc).name);
        return Basis::complex_pairs(std::move(names));
    }

    static void accumulate(Form& r, uint32_t lead_bit, uint32_t mask, const Expr& c) {
        int s = wedge_sign(lead_bit, mask);
        if (s == 0) return;
        r.add_term(lead_bit | mask, s < 0 ? -c : c);
    }

    void require_coordinate() const {
        if (mode_ != Mode::coordinate) fail(errc::invalid_argument, "needs a coordinate frame");
    }

    void finish_coordinate() {
        size_t n2 = working_->size();
        if (working_.get() != diff_.get()) {
            ExprMat m(n2, std::vector<Expr>(n2, Expr::zero(ctx_)));
            for (size_t i = 0; i < n2; ++i)
                for (size_t j = 0; j < n2; ++j) m[i][j] = working_in_diff_[i].coeff(1u << j);
            auto inv = try_invert(m);
            if (!inv) fail(errc::singular_coframe, "coframe is not an invertible change of basis");
            diff_in_working_.clear();
            for (size_t j = 0; j < n2; ++j) {
                Form g(ctx_, working_);
                for (size_t i = 0; i < n2; ++i) g.add_term(1u << i, inv->inv[j][i]);
                diff_in_working_.push_back(g);
            }
        }
        // real covector basis dx_j, dy_j and the conversions both ways
        size_t n = coords_.size();
        std::vector<std::string> rnames;
        for (uint32_t cc : coords_) rnames.push_back("d" + ctx_->atom(ctx_->complex_coords()[cc].x).name);
        for (uint32_t cc : coords_) rnames.push_back("d" + ctx_->atom(ctx_->complex_coords()[cc].y).name);
        real_ = Basis::real(rnames);
        GaussRat half(Rational(1, 2));
        GaussRat mihalf(Rational(0), Rational(-1, 2)); // 1/(2i)
        GaussRat ihalf(Rational(0), Rational(1, 2));
        for (size_t j = 0; j < n; ++j) { // dx_j over diff
            Form g(ctx_, diff_);
            g.add_term(1u << j, Expr::constant(ctx_, half));
            g.add_term(1u << (j + n), Expr::constant(ctx_, half));
            real_in_diff_.push_back(g);
        }
        for (size_t j = 0; j < n; ++j) { // dy_j over diff
            Form g(ctx_, diff_);
            g.add_term(1u << j, Expr::constant(ctx_, mihalf));
            g.add_term(1u << (j + n), Expr::constant(ctx_, -mihalf));
            real_in_diff_.push_back(g);
        }
        for (size_t j = 0; j < n; ++j) { // dz_j over real
            Form g(ctx_, real_);
            g.add_term(1u << j, Expr::one(ctx_));
            g.add_term(1u << (j + n), Expr::constant(ctx_, GaussRat::i_unit()));
            diff_in_real_.push_back(g);
        }
        for (size_t j = 0; j < n; ++j) { // dzbar_j over real
            Form g(ctx_, real_);
            g.add_term(1u << j, Expr::one(ctx_));
            g.add_term(1u << (j + n), Expr::constant(ctx_, -GaussRat::i_unit()));
            diff_in_real_.push_back(g);
        }
    }

    void validate_invariant() {
        for (size_t i = 0; i < working_->size(); ++i) {
            const Form& s = structure_[i];
            for (const auto& [mask, c] : s.terms()) {
                if (std::popcount(mask) != 2)
                    fail(errc::invalid_argument, "structure equations must be 2-forms");
                bool ok = c.num().all_atoms([&](uint32_t a) { return ctx_->is_parameter_atom(a); });
                if (!ok)
                    fail(errc::invalid_argument,
                         "invariant structure equations must have constant coefficients");
            }
        }
        for (size_t i = 0; i < working_->size(); ++i) {
            if (!d(structure_[i]).is_zero())
                fail(errc::invalid_argument,
                     "structure equations violate d*d = 0 (Jacobi) on " + working_->cov(i).name);
        }
    }

    CtxPtr ctx_;
    Mode mode_ = Mode::coordinate;
    BasisPtr working_;
    std::vector<uint32_t> coords_;

    BasisPtr diff_;
    std::vector<Form> working_in_diff_; // all 2n working covectors over diff
    std::vector<Form> diff_in_working_;
    BasisPtr real_;
    std::vector<Form> real_in_diff_;
    std::vector<Form> diff_in_real_;

    std::vector<Form> structure_;

public:
    Frame() = default;
};

} // namespace pklab
