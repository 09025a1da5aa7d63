#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pklab/expr.hpp"

namespace pklab {

using ExprMat = std::vector<std::vector<Expr>>;

inline ExprMat mat_identity(const CtxPtr& ctx, size_t n) {
    ExprMat m(n, std::vector<Expr>(n, Expr::zero(ctx)));
    for (size_t i = 0; i < n; ++i) m[i][i] = Expr::one(ctx);
    return m;
}

inline ExprMat mat_mul(const ExprMat& a, const ExprMat& b) {
    size_t n = a.size(), k = b.size(), m = b[0].size();
    const CtxPtr& ctx = a[0][0].ctx();
    ExprMat r(n, std::vector<Expr>(m, Expr::zero(ctx)));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < m; ++j) {
            Expr s = Expr::zero(ctx);
            for (size_t t = 0; t < k; ++t) s += a[i][t] * b[t][j];
            r[i][j] = s;
        }
    return r;
}

inline ExprMat mat_add(const ExprMat& a, const ExprMat& b) {
    ExprMat r = a;
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) r[i][j] += b[i][j];
    return r;
}

inline ExprMat mat_scaled(const ExprMat& a, const Expr& c) {
    ExprMat r = a;
    for (auto& row : r)
        for (auto& e : row) e = e * c;
    return r;
}

inline bool mat_is_zero(const ExprMat& a) {
    for (const auto& row : a)
        for (const auto& e : row)
            if (!e.is_zero()) return false;
    return true;
}

namespace detail {

inline Poly exact_div(const Poly& a, const Poly& b) {
    auto q = a.divided_by(b);
    if (!q) fail(errc::invalid_argument, "internal: fraction-free elimination division failed");
    return *q;
}

} // namespace detail

/// Determinant and inverse by fraction-free (Montante/Bareiss) elimination.
/// Entries may carry parameter denominators; the determinant itself must be a
/// nonzero parameter-only expression or the inversion is reported as singular.
struct Inverse {
    Expr det;
    ExprMat inv;
};

inline std::optional<Inverse> try_invert(const ExprMat& a) {
    size_t n = a.size();
    const CtxPtr& ctx = a[0][0].ctx();
    // clear denominators: a = A~ / L entry-wise
    Expr::Den lcm;
    for (const auto& row : a)
        for (const auto& e : row)
            for (const auto& [f, k] : e.den()) {
                auto it = lcm.find(f);
                if (it == lcm.end()) lcm[f] = k;
                else it->second = std::max(it->second, k);
            }
    Expr L = Expr::one(ctx);
    for (const auto& [f, k] : lcm) L = L * Expr(ctx, f.pow(k));
    std::vector<std::vector<Poly>> m(n, std::vector<Poly>(2 * n));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            Expr scaled = a[i][j] * L;
            m[i][j] = scaled.num(); // denominator cleared by construction
        }
        m[i][n + i] = Poly(GaussRat(1));
    }
    Poly prev{GaussRat(1)};
    int sign = 1;
    for (size_t k = 0; k < n; ++k) {
        if (m[k][k].is_zero()) {
            size_t swap_row = k;
            for (size_t i = k + 1; i < n; ++i)
                if (!m[i][k].is_zero()) { swap_row = i; break; }
            if (swap_row == k) return std::nullopt;
            std::swap(m[k], m[swap_row]);
            sign = -sign;
        }
        Poly pivot = m[k][k];
        for (size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            for (size_t j = 0; j < 2 * n; ++j) {
                if (j == k) continue;
                m[i][j] = detail::exact_div(pivot * m[i][j] - m[i][k] * m[k][j], prev);
            }
            m[i][k] = Poly();
        }
        prev = pivot;
    }
    // left block is now det * I with det = m[n-1][n-1] (up to the swap sign)
    Poly det_tilde = m[n - 1][n - 1];
    if (det_tilde.is_zero()) return std::nullopt;
    bool det_param_only = det_tilde.all_atoms([&](uint32_t at) { return ctx->is_parameter_atom(at); });
    if (!det_param_only) return std::nullopt; // not invertible as a rational expression here
    // right block R satisfies R*A~ = det_tilde*I, so inv(A~) = R/det_tilde;
    // det(A~) picks up the row-swap sign separately.
    Expr det_tilde_expr = Expr(ctx, det_tilde);
    Inverse result;
    result.det = (sign < 0 ? -det_tilde_expr : det_tilde_expr) / L.pow(static_cast<unsigned>(n));
    result.inv = ExprMat(n, std::vector<Expr>(n, Expr::zero(ctx)));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            result.inv[i][j] = (Expr(ctx, m[i][n + j]) * L) / det_tilde_expr;
    return result;
}

/// Determinant by fraction-free elimination (any Expr entries).
inline Expr det(const ExprMat& a) {
    size_t n = a.size();
    const CtxPtr& ctx = a[0][0].ctx();
    Expr::Den lcm;
    for (const auto& row : a)
        for (const auto& e : row)
            for (const auto& [f, k] : e.den()) {
                auto it = lcm.find(f);
                if (it == lcm.end()) lcm[f] = k;
                else it->second = std::max(it->second, k);
            }
    Expr L = Expr::one(ctx);
    for (const auto& [f, k] : lcm) L = L * Expr(ctx, f.pow(k));
    std::vector<std::vector<Poly>> m(n, std::vector<Poly>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) m[i][j] = (a[i][j] * L).num();
    Poly prev{GaussRat(1)};
    int sign = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k].is_zero()) {
            size_t swap_row = k;
            for (size_t i = k + 1; i < n; ++i)
                if (!m[i][k].is_zero()) { swap_row = i; break; }
            if (swap_row == k) return Expr::zero(ctx);
            std::swap(m[k], m[swap_row]);
            sign = -sign;
        }
        for (size_t i = k + 1; i < n; ++i) {
            for (size_t j = k + 1; j < n; ++j)
                m[i][j] = detail::exact_div(m[k][k] * m[i][j] - m[i][k] * m[k][j], prev);
            m[i][k] = Poly();
        }
        prev = m[k][k];
    }
    Expr d = Expr(ctx, m[n - 1][n - 1]);
    if (sign < 0) d = -d;
    return d / L.pow(static_cast<unsigned>(n));
}

inline Inverse invert(const ExprMat& a, const char* what = "matrix") {
    auto r = try_invert(a);
    if (!r) fail(errc::singular_coframe, std::string(what) + " is not invertible as a rational expression");
    return *r;
}

/// Reduced row echelon form over the Expr fraction field (in place).
/// Returns the pivot column of each row, in order. Entries must keep
/// denominators parameter-only, which holds for invariant-frame systems.
inline std::vector<size_t> rref(ExprMat& m) {
    std::vector<size_t> pivots;
    if (m.empty()) return pivots;
    size_t rows = m.size(), cols = m[0].size();
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t pr = rows;
        for (size_t i = r; i < rows; ++i)
            if (!m[i][c].is_zero()) { pr = i; break; }
        if (pr == rows) continue;
        std::swap(m[r], m[pr]);
        Expr inv_pivot = Expr::one(m[r][c].ctx()) / m[r][c];
        for (size_t j = c; j < cols; ++j) m[r][j] = m[r][j] * inv_pivot;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c].is_zero()) continue;
            Expr f = m[i][c];
            for (size_t j = c; j < cols; ++j) m[i][j] = m[i][j] - f * m[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

inline size_t rank(ExprMat m) { return rref(m).size(); }

/// For the homogeneous system m*x = 0: the set of variables forced to vanish
/// on the whole solution space.
inline std::vector<size_t> forced_zero_variables(ExprMat m) {
    std::vector<size_t> pivots = rref(m);
    size_t cols = m.empty() ? 0 : m[0].size();
    std::vector<bool> is_pivot(cols, false);
    for (size_t c : pivots) is_pivot[c] = true;
    std::vector<size_t> forced;
    for (size_t r = 0; r < pivots.size(); ++r) {
        bool pure = true;
        for (size_t j = 0; j < cols; ++j)
            if (!is_pivot[j] && !m[r][j].is_zero()) { pure = false; break; }
        if (pure) forced.push_back(pivots[r]);
    }
    return forced;
}

/// Solve m*x = b exactly; returns a particular solution or nullopt when
/// inconsistent.
inline std::optional<std::vector<Expr>> solve_linear(ExprMat m, std::vector<Expr> b) {
    size_t rows = m.size();
    if (rows == 0) return std::vector<Expr>{};
    size_t cols = m[0].size();
    for (size_t i = 0; i < rows; ++i) m[i].push_back(b[i]);
    std::vector<size_t> pivots = rref(m);
    const CtxPtr& ctx = b.empty() ? m[0][0].ctx() : b[0].ctx();
    // inconsistent when a pivot lands in the augmented column
    for (size_t r = 0; r < pivots.size(); ++r)
        if (pivots[r] == cols) return std::nullopt;
    std::vector<Expr> x(cols, Expr::zero(ctx));
    for (size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = m[r][cols];
    return x;
}

} // namespace pklab
