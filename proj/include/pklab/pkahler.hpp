#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pklab/acs.hpp"
#include "pklab/rootisolate.hpp"

namespace pklab {

/// sigma_p = i^(p^2) * 2^(-p), the constant making sigma_p phi^phibar real.
inline GaussRat sigma_vol(int p) {
    if (p < 0) fail(errc::invalid_argument, "sigma_vol needs p >= 0");
    return GaussRat::i_pow(long(p) * p) * GaussRat(Rational(1, Integer(1) << p));
}

/// Vol = sigma_n phi^1^...^phi^n^phibar^1^...^phibar^n over the working basis.
inline Form volume_form(const FramePtr& fr) {
    size_t n = fr->n();
    uint32_t full = (1u << (2 * n)) - 1;
    Form v(fr->ctx(), fr->working());
    v.add_term(full, Expr::constant(fr->ctx(), sigma_vol(int(n))));
    return v;
}

/// The coefficient a in Omega ^ sigma_{n-p} psi ^ conj(psi) = a * Vol.
inline Expr transversality_pairing(const FramePtr& fr, const Form& omega, const Form& psi) {
    size_t n = fr->n();
    if (omega.basis().get() != fr->working().get() || psi.basis().get() != fr->working().get())
        fail(errc::basis_mismatch, "pairing arguments must live on the frame's coframe basis");
    int k = psi.is_zero() ? 0 : psi.degree();
    if (!psi.is_pure(k, 0)) fail(errc::type_mismatch, "psi must be a (n-p,0)-form");
    int p = int(n) - k;
    if (!omega.is_pure(p, p)) fail(errc::type_mismatch, "omega must be a real (p,p)-form");
    if (!omega.is_real()) fail(errc::type_mismatch, "omega must be real");
    Form prod = omega.wedge(psi.wedge(psi.conj()).scaled(sigma_vol(k)));
    uint32_t full = (1u << (2 * n)) - 1;
    return prod.coeff(full) / Expr::constant(fr->ctx(), sigma_vol(int(n)));
}

namespace detail {

/// All strictly increasing k-subsets of {0..n-1} as masks, in mask order.
inline std::vector<uint32_t> holo_words(size_t n, int k) {
    std::vector<uint32_t> out;
    for (uint32_t m = 0; m < (1u << n); ++m)
        if (std::popcount(m) == k) out.push_back(m);
    return out;
}

} // namespace detail

/// Hermitian matrix H of the pairing on Lambda^{n-p} V^{1,0}:
/// pairing(Omega, sum a_S phi^S) = sum H[S][T] a_S conj(a_T).
inline ExprMat hermitian_pairing_matrix(const FramePtr& fr, const Form& omega, int p,
                                        std::vector<uint32_t>* words_out = nullptr) {
    const CtxPtr& ctx = fr->ctx();
    size_t n = fr->n();
    int k = int(n) - p;
    std::vector<uint32_t> words = detail::holo_words(n, k);
    if (words_out) *words_out = words;
    GaussRat sk = sigma_vol(k);
    GaussRat sn = sigma_vol(int(n));
    uint32_t full = (1u << (2 * n)) - 1;
    ExprMat h(words.size(), std::vector<Expr>(words.size(), Expr::zero(ctx)));
    for (size_t a = 0; a < words.size(); ++a) {
        Form psi_a(ctx, fr->working());
        psi_a.add_term(words[a], Expr::one(ctx));
        for (size_t b = 0; b < words.size(); ++b) {
            Form psi_b(ctx, fr->working());
            psi_b.add_term(words[b], Expr::one(ctx));
            Form prod = omega.wedge(psi_a.wedge(psi_b.conj()).scaled(sk));
            h[a][b] = prod.coeff(full) / Expr::constant(ctx, sn);
        }
    }
    return h;
}

struct TransversalityReport {
    enum class Verdict { transverse_exact, transverse_sampled, not_transverse, inconclusive };
    Verdict verdict = Verdict::inconclusive;
    // exact path
    bool exact_certificate = false;       // Hermitian form positive-definite
    std::optional<PositivityInterval> param_range; // when entries depend on one parameter
    std::string param_name;
    // witness for a not-transverse verdict: rows are (1,0)-covector coefficient
    // vectors whose wedge pairs non-positively
    std::vector<std::vector<GaussRat>> witness;
    GaussRat witness_pairing;
    // sampling path
    uint64_t seed = 0;
    int samples = 0;
    double margin = 0.0;
    std::string note;
};

namespace detail {

/// Leading principal minors of an Expr matrix (sizes 1..n) via the dets of
/// the upper-left blocks.
inline std::vector<Expr> leading_minors(const ExprMat& h) {
    const CtxPtr& ctx = h[0][0].ctx();
    std::vector<Expr> out;
    for (size_t k = 1; k <= h.size(); ++k) {
        ExprMat sub(k, std::vector<Expr>(k, Expr::zero(ctx)));
        for (size_t i = 0; i < k; ++i)
            for (size_t j = 0; j < k; ++j) sub[i][j] = h[i][j];
        out.push_back(det(sub));
    }
    return out;
}

inline bool all_constant(const ExprMat& h) {
    for (const auto& row : h)
        for (const Expr& e : row)
            if (!e.is_constant()) return false;
    return true;
}

/// Exact positive-definiteness by leading principal minors; on failure hunts
/// for an exact non-positive witness vector over the word basis.
inline bool sylvester_positive(const ExprMat& h, std::vector<GaussRat>* witness,
                               GaussRat* witness_value) {
    size_t n = h.size();
    std::vector<Expr> minors = leading_minors(h);
    bool pos = true;
    for (const Expr& m : minors) {
        GaussRat v = m.constant_value();
        if (!v.is_real()) fail(errc::type_mismatch, "pairing matrix is not Hermitian");
        if (v.re <= 0) { pos = false; break; }
    }
    if (pos) return true;
    if (!witness) return false;
    auto pairing_of = [&](const std::vector<GaussRat>& a) {
        GaussRat s(0);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) s += h[i][j].constant_value() * a[i] * a[j].conj();
        return s;
    };
    // deterministic witness search: axes, then signed pairs, then seeded draws
    std::vector<std::vector<GaussRat>> cands;
    for (size_t i = 0; i < n; ++i) {
        std::vector<GaussRat> e(n, GaussRat(0));
        e[i] = GaussRat(1);
        cands.push_back(e);
    }
    GaussRat signs[4] = {GaussRat(1), GaussRat(-1), GaussRat::i_unit(), -GaussRat::i_unit()};
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            for (const GaussRat& s : signs) {
                std::vector<GaussRat> e(n, GaussRat(0));
                e[i] = GaussRat(1);
                e[j] = s;
                cands.push_back(e);
            }
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    std::uniform_int_distribution<int> coef(-6, 6);
    for (int trial = 0; trial < 4096; ++trial) {
        std::vector<GaussRat> e(n);
        for (size_t i = 0; i < n; ++i) e[i] = GaussRat(coef(rng), coef(rng));
        cands.push_back(e);
    }
    for (const auto& cand : cands) {
        bool zero = true;
        for (const GaussRat& c : cand)
            if (!c.is_zero()) { zero = false; break; }
        if (zero) continue;
        GaussRat v = pairing_of(cand);
        if (v.re <= 0) {
            *witness = cand;
            if (witness_value) *witness_value = v;
            return false;
        }
    }
    fail(errc::invalid_argument, "indefinite pairing but no witness found");
}

} // namespace detail

struct TransversalityOptions {
    int samples = 100000;
    uint64_t seed = 0x5eed5eedULL;
    std::optional<Expr::EvalEnv> env; // point/parameter values for numeric paths
    bool force_sampling = false;      // exercise the sampled path even when exact works
};

/// Transversality of a real (p,p)-form against simple (n-p,0)-covectors.
///
/// n-p = 1: the Hermitian-minor test is exact and complete. 1 < n-p < n: the
/// positive-definiteness of the pairing on all of Lambda^{n-p} V^{1,0} is a
/// sufficient exact certificate (decomposables are a subset); when it cannot
/// be applied, unit-normalized random decomposables are sampled.
inline TransversalityReport is_transverse(const FramePtr& fr, const Form& omega, int p,
                                          const TransversalityOptions& opt = {}) {
    const CtxPtr& ctx = fr->ctx();
    size_t n = fr->n();
    int k = int(n) - p;
    if (k < 1 || k > int(n)) fail(errc::invalid_argument, "need 1 <= n-p <= n");
    if (!omega.is_pure(p, p) || !omega.is_real())
        fail(errc::type_mismatch, "omega must be a real (p,p)-form");
    std::vector<uint32_t> words;
    ExprMat h = hermitian_pairing_matrix(fr, omega, p, &words);
    TransversalityReport rep;
    rep.seed = opt.seed;

    if (detail::all_constant(h) && !opt.force_sampling) {
        std::vector<GaussRat> wit;
        GaussRat wval;
        if (detail::sylvester_positive(h, &wit, &wval)) {
            rep.verdict = TransversalityReport::Verdict::transverse_exact;
            rep.exact_certificate = true;
            return rep;
        }
        if (k == 1) {
            rep.verdict = TransversalityReport::Verdict::not_transverse;
            rep.witness.push_back(wit);
            rep.witness_pairing = wval;
            return rep;
        }
        // indefinite on the full exterior power: inconclusive for decomposables,
        // fall through to sampling (a sampled witness is still decisive)
        rep.note = "full-space certificate failed; sampling decomposables";
    }

    // single-real-parameter path: certify a positivity interval by minors
    if (!opt.force_sampling) {
        uint32_t the_param = UINT32_MAX;
        bool single = true, any = false;
        for (const auto& row : h)
            for (const Expr& e : row) {
                e.num().for_each_atom([&](uint32_t a) {
                    any = true;
                    if (the_param == UINT32_MAX) the_param = a;
                    else if (the_param != a) single = false;
                });
                if (!e.den().empty()) single = false;
            }
        if (any && single && the_param != UINT32_MAX && ctx->is_parameter_atom(the_param) &&
            ctx->atom(the_param).vkind == VarKind::real_parameter) {
            std::vector<RatPoly> minors;
            bool ok = true;
            for (const Expr& m : detail::leading_minors(h)) {
                auto rp = to_univariate(m, the_param);
                if (!rp) { ok = false; break; }
                minors.push_back(*rp);
            }
            if (ok) {
                rep.param_name = ctx->atom(the_param).name;
                rep.param_range = certify_positive_interval(minors);
                rep.verdict = TransversalityReport::Verdict::transverse_exact;
                rep.exact_certificate = true;
                return rep;
            }
        }
    }

    // sampling over decomposables psi = alpha_1 ^ ... ^ alpha_k
    if (!opt.env) {
        rep.verdict = TransversalityReport::Verdict::inconclusive;
        rep.note = "non-constant pairing matrix and no evaluation point given";
        return rep;
    }
    std::vector<std::vector<std::complex<double>>> hn(words.size());
    for (size_t a = 0; a < words.size(); ++a)
        for (size_t b = 0; b < words.size(); ++b) hn[a].push_back(h[a][b].eval(*opt.env));
    double margin = 0;
    bool first = true;
    for (int s = 0; s < opt.samples; ++s) {
        std::mt19937_64 rng(opt.seed + 0x9e3779b97f4a7c15ull * uint64_t(s + 1));
        std::normal_distribution<double> gauss(0.0, 1.0);
        // random decomposable through its Pluecker coordinates
        std::vector<std::vector<std::complex<double>>> alpha(k, std::vector<std::complex<double>>(n));
        double norm2 = 0;
        for (int r = 0; r < k; ++r)
            for (size_t c = 0; c < n; ++c) {
                alpha[r][c] = {gauss(rng), gauss(rng)};
                norm2 += std::norm(alpha[r][c]);
            }
        double scale = 1.0 / std::sqrt(norm2);
        std::vector<std::complex<double>> coords(words.size());
        double cnorm2 = 0;
        for (size_t w = 0; w < words.size(); ++w) {
            // k x k minor determinant on the columns of words[w]
            std::vector<size_t> cols;
            for (size_t c = 0; c < n; ++c)
                if (words[w] >> c & 1) cols.push_back(c);
            std::vector<std::vector<std::complex<double>>> mm(k, std::vector<std::complex<double>>(k));
            for (int r = 0; r < k; ++r)
                for (int c = 0; c < k; ++c) mm[r][c] = alpha[r][cols[c]] * scale;
            // Laplace for k <= 3
            std::complex<double> detv = 0;
            if (k == 1) detv = mm[0][0];
            else if (k == 2) detv = mm[0][0] * mm[1][1] - mm[0][1] * mm[1][0];
            else if (k == 3)
                detv = mm[0][0] * (mm[1][1] * mm[2][2] - mm[1][2] * mm[2][1]) -
                       mm[0][1] * (mm[1][0] * mm[2][2] - mm[1][2] * mm[2][0]) +
                       mm[0][2] * (mm[1][0] * mm[2][1] - mm[1][1] * mm[2][0]);
            else fail(errc::invalid_argument, "sampling supports n-p <= 3");
            coords[w] = detv;
            cnorm2 += std::norm(detv);
        }
        if (cnorm2 < 1e-30) continue;
        double cscale = 1.0 / std::sqrt(cnorm2);
        std::complex<double> pairing = 0;
        for (size_t a = 0; a < words.size(); ++a)
            for (size_t b = 0; b < words.size(); ++b)
                pairing += hn[a][b] * (coords[a] * cscale) * std::conj(coords[b] * cscale);
        double val = pairing.real();
        ++rep.samples;
        if (first || val < margin) {
            margin = val;
            first = false;
        }
        if (val <= 0) {
            rep.verdict = TransversalityReport::Verdict::not_transverse;
            rep.margin = val;
            rep.note = "sampled witness (numeric)";
            return rep;
        }
    }
    rep.verdict = TransversalityReport::Verdict::transverse_sampled;
    rep.margin = margin;
    return rep;
}

struct PKahlerReport {
    bool real = false;
    bool pure_pp = false;
    bool closed = false;
    TransversalityReport transverse;
    bool verdict() const {
        return real && pure_pp && closed &&
               (transverse.verdict == TransversalityReport::Verdict::transverse_exact ||
                transverse.verdict == TransversalityReport::Verdict::transverse_sampled);
    }
};

/// closed + real + pure (p,p) + transverse, each conjunct reported separately.
inline PKahlerReport is_almost_p_kahler(const FramePtr& fr, const Form& omega, int p,
                                        const TransversalityOptions& opt = {}) {
    PKahlerReport rep;
    rep.real = omega.is_real();
    rep.pure_pp = omega.is_pure(p, p);
    rep.closed = fr->d(omega).is_zero();
    if (rep.real && rep.pure_pp) rep.transverse = is_transverse(fr, omega, p, opt);
    return rep;
}

struct MetricReport {
    bool positive = false;
    bool kahler = false;          // d omega = 0
    bool balanced = false;        // d omega^{n-1} = 0 (semi-Kahler for non-integrable J)
    Form omega_power;             // Omega := omega^{n-1}/(n-1)!
};

/// Flags for a real positive (1,1)-form; positivity is certified exactly on
/// the coframe-constant Hermitian matrix.
inline MetricReport metric_predicates(const FramePtr& fr, const Form& omega) {
    size_t n = fr->n();
    if (!omega.is_pure(1, 1) || !omega.is_real())
        fail(errc::not_positive, "omega must be a real (1,1)-form");
    ExprMat h = hermitian_pairing_matrix(fr, omega, 1);
    // pairing against (1,0)-covectors equals the coefficient matrix up to a
    // positive factor, so Sylvester on it certifies positivity
    if (!detail::all_constant(h))
        fail(errc::not_positive, "cannot certify positivity of a non-constant coefficient matrix");
    std::vector<GaussRat> wit;
    if (!detail::sylvester_positive(h, &wit, nullptr))
        fail(errc::not_positive, "omega is not positive-definite");
    MetricReport rep;
    rep.positive = true;
    rep.kahler = fr->d(omega).is_zero();
    Form pw = omega.wedge_pow(unsigned(n - 1));
    Rational fact = 1;
    for (size_t j = 2; j < n; ++j) fact *= Rational(long(j));
    rep.omega_power = pw.scaled(GaussRat(Rational(1) / fact));
    rep.balanced = fr->d(rep.omega_power).is_zero();
    return rep;
}

} // namespace pklab
