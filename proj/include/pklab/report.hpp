#pragma once

// JSON report serialization ("schema": 1). Field order is fixed through
// ordered_json so identical inputs produce byte-identical reports.

#include <json.hpp>

#include "pklab/builtins.hpp"

namespace pklab {

using Json = nlohmann::ordered_json;

inline Json to_json(const TransversalityReport& r) {
    Json j;
    j["verdict"] = [&] {
        switch (r.verdict) {
            case TransversalityReport::Verdict::transverse_exact: return "transverse-exact";
            case TransversalityReport::Verdict::transverse_sampled: return "transverse-sampled";
            case TransversalityReport::Verdict::not_transverse: return "not-transverse";
            default: return "inconclusive";
        }
    }();
    j["exact_certificate"] = r.exact_certificate;
    if (r.param_range) {
        Json pr;
        pr["parameter"] = r.param_name;
        pr["lo"] = r.param_range->lo_unbounded ? "-inf" : rat_str(r.param_range->lo);
        pr["hi"] = r.param_range->hi_unbounded ? "+inf" : rat_str(r.param_range->hi);
        pr["lo_exact_root"] = !r.param_range->lo_unbounded && !r.param_range->lo_open_bound;
        pr["hi_exact_root"] = !r.param_range->hi_unbounded && !r.param_range->hi_open_bound;
        j["param_range"] = pr;
    }
    if (!r.witness.empty()) {
        Json w = Json::array();
        for (const auto& row : r.witness) {
            Json wr = Json::array();
            for (const GaussRat& g : row) wr.push_back(to_string(g));
            w.push_back(wr);
        }
        j["witness"] = w;
        j["witness_pairing"] = to_string(r.witness_pairing);
    }
    if (r.samples > 0) {
        j["samples"] = r.samples;
        j["margin"] = r.margin;
    }
    j["seed"] = r.seed;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline Json to_json(const PKahlerReport& r) {
    Json j;
    j["real"] = r.real;
    j["pure_pp"] = r.pure_pp;
    j["closed"] = r.closed;
    j["transverse"] = to_json(r.transverse);
    j["verdict"] = r.verdict();
    return j;
}

inline Json to_json(const MTReport& r) {
    Json j;
    j["eq1"] = r.eq1.str();
    j["eq2"] = r.eq2.str();
    j["verdict"] = r.obstructed ? "obstructed" : "necessary-conditions-hold";
    return j;
}

inline Json to_json(const NopReport& r) {
    Json j;
    j["applies"] = r.applies;
    j["obstruction"] = r.obstruction;
    j["psi"] = r.psi;
    j["coefficients"] = r.c;
    j["degeneracy_locus"] = r.degeneracy;
    j["witness_checked"] = r.witness_checked;
    return j;
}

inline Json to_json(const TamingReport& r) {
    Json j;
    j["exists"] = r.exists;
    j["impossible"] = r.impossible;
    j["forced_zero"] = r.forced;
    if (!r.witness.empty()) j["witness"] = r.witness;
    j["rank"] = r.rank;
    j["unknowns"] = r.unknowns;
    j["note"] = "invariant-level verdict; an averaging argument extends non-existence "
                "to all taming forms on homogeneous quotients";
    return j;
}

inline Json to_json(const DbarClassReport& r) {
    Json j;
    j["exact_in_invariants"] = r.exact;
    if (r.preimage) j["preimage"] = r.preimage->str();
    j["rank"] = r.rank_a;
    j["rank_augmented"] = r.rank_augmented;
    return j;
}

inline Json to_json(const SemiKahlerFirstOrder& r) {
    Json j;
    j["passes"] = r.passes;
    j["residual"] = r.residual.str();
    j["eta"] = r.data.eta.str();
    j["lambda"] = r.data.lambda.str();
    if (r.packaged) j["packaged"] = r.packaged->str();
    if (r.packaged_del) j["packaged_del"] = r.packaged_del->str();
    Json pde = Json::array();
    for (const Expr& e : r.pde) pde.push_back(e.str());
    if (!r.pde.empty()) j["pde"] = pde;
    return j;
}

inline Json to_json(const ClaimsReport& r) {
    Json j;
    j["schema"] = 1;
    j["manifold"] = r.manifold;
    j["all_passed"] = r.all_passed();
    Json claims = Json::array();
    for (const auto& c : r.results) {
        Json cj;
        cj["id"] = c.id;
        cj["verb"] = c.verb;
        cj["pass"] = c.pass;
        cj["detail"] = c.detail;
        claims.push_back(cj);
    }
    j["claims"] = claims;
    return j;
}

inline Json to_json(const std::vector<dsl::Diagnostic>& diags) {
    Json arr = Json::array();
    for (const auto& d : diags) {
        Json j;
        j["severity"] = d.severity == dsl::Diagnostic::Severity::error ? "error" : "warning";
        j["line"] = d.span.line;
        j["col"] = d.span.col;
        j["message"] = d.message;
        if (!d.hint.empty()) j["hint"] = d.hint;
        arr.push_back(j);
    }
    return arr;
}

/// Serialize a form as {basis word: coefficient string}.
inline Json form_to_json(const Form& f) {
    Json j = Json::object();
    for (const auto& [mask, c] : f.terms()) j[f.basis()->word_str(mask)] = c.str();
    return j;
}

} // namespace pklab
