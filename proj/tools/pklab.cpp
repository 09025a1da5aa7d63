// pklab: check, deform, and verify almost p-Kahler structures described by
// .pk manifold specs.
//
// Exit codes: 0 all checks pass, 1 a check fails (residual reported),
// 2 usage or parse error.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pklab/report.hpp"

using namespace pklab;

namespace {

struct Options {
    std::string spec_file;
    std::string builtin_name;
    bool json = false;
    std::vector<std::string> at;
    int samples = 100000;
    uint64_t seed = 0x5eed5eedULL;
};

int usage_error(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return 2;
}

std::optional<ManifoldSpec> load_spec(const Options& opt, int& rc) {
    LoadResult r;
    if (!opt.builtin_name.empty()) {
        try {
            r.spec = builtin(opt.builtin_name);
        } catch (const error& e) {
            rc = usage_error(e.what());
            return std::nullopt;
        }
    } else if (!opt.spec_file.empty()) {
        std::ifstream in(opt.spec_file);
        if (!in) {
            rc = usage_error("cannot open " + opt.spec_file);
            return std::nullopt;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        r = parse_and_load(ss.str());
        if (!r.ok()) {
            for (const auto& d : r.diagnostics)
                std::cerr << opt.spec_file << ":" << d.span.line << ":" << d.span.col << ": "
                          << d.message << (d.hint.empty() ? "" : " (" + d.hint + ")") << "\n";
            rc = 2;
            return std::nullopt;
        }
    } else {
        rc = usage_error("provide --spec FILE or --builtin NAME");
        return std::nullopt;
    }
    // --at name=value substitutions (parameters or opaque functions)
    if (!opt.at.empty()) {
        std::vector<dsl::Assignment> assigns;
        for (const std::string& kv : opt.at) {
            size_t start = 0;
            while (start < kv.size()) {
                size_t comma = kv.find(',', start);
                std::string piece = kv.substr(start, comma == std::string::npos ? comma : comma - start);
                start = comma == std::string::npos ? kv.size() : comma + 1;
                size_t eq = piece.find('=');
                if (eq == std::string::npos) {
                    rc = usage_error("--at expects name=value, got '" + piece + "'");
                    return std::nullopt;
                }
                dsl::Parser p(piece.substr(eq + 1));
                dsl::Assignment a;
                a.name = piece.substr(0, eq);
                a.value = p.parse_expression();
                if (p.has_errors()) {
                    rc = usage_error("could not parse --at value for '" + a.name + "'");
                    return std::nullopt;
                }
                assigns.push_back(a);
            }
        }
        try {
            r.spec = claimrun::specialize(*r.spec, assigns);
        } catch (const error& e) {
            rc = usage_error(e.what());
            return std::nullopt;
        }
    }
    return r.spec;
}

void emit(const Options& opt, const std::string& text, const Json& j) {
    if (opt.json) std::cout << j.dump(2) << "\n";
    else std::cout << text << "\n";
}

int run_check(const Options& opt, const std::string& what, const std::vector<std::string>& args) {
    int rc = 0;
    auto spec = load_spec(opt, rc);
    if (!spec) return rc;
    claimrun::Runtime rt;
    rt.spec = &*spec;
    if (spec->family) rt.ft = deformed_frame(*spec->family);
    Json j;
    j["schema"] = 1;
    j["command"] = "check " + what;
    j["manifold"] = spec->name;
    try {
        if (what == "d2") {
            bool ok = true;
            for (size_t k = 0; k < spec->frame->working()->size(); ++k)
                if (!spec->frame->d(spec->frame->d_covector(k)).is_zero()) ok = false;
            if (rt.ft)
                for (size_t k = 0; k < rt.ft->working()->size(); ++k)
                    if (!rt.ft->d(rt.ft->d_covector(k)).is_zero()) ok = false;
            j["pass"] = ok;
            emit(opt, ok ? "d*d = 0 on every covector" : "d*d != 0", j);
            return ok ? 0 : 1;
        }
        if (what == "type") {
            Json forms = Json::object();
            for (const auto& [name, f] : spec->forms) {
                Json fj;
                Json pq = Json::array();
                for (auto [p, q] : f.bidegrees()) pq.push_back(Json::array({p, q}));
                fj["bidegrees"] = pq;
                fj["real"] = f.is_real();
                forms[name] = fj;
            }
            j["forms"] = forms;
            emit(opt, j.dump(2), j);
            return 0;
        }
        if (what == "closed") {
            if (args.empty()) return usage_error("check closed <form>");
            Form f = rt.resolve(args[0], false);
            Form df = spec->frame->d(f);
            bool ok = df.is_zero();
            j["pass"] = ok;
            j["residual"] = df.str();
            emit(opt, args[0] + (ok ? " is closed" : " is not closed: d = " + df.str()), j);
            return ok ? 0 : 1;
        }
        if (what == "positive") {
            if (args.empty()) return usage_error("check positive <form>");
            Form f = rt.resolve(args[0], false);
            int deg = f.degree();
            if (deg % 2 != 0 || !f.is_pure(deg / 2, deg / 2))
                return usage_error("transversality needs a real (p,p)-form");
            TransversalityOptions topt;
            topt.samples = opt.samples;
            topt.seed = opt.seed;
            topt.env = Expr::EvalEnv{};
            TransversalityReport rep = is_transverse(spec->frame, f, deg / 2, topt);
            j["report"] = to_json(rep);
            bool ok = rep.verdict == TransversalityReport::Verdict::transverse_exact ||
                      rep.verdict == TransversalityReport::Verdict::transverse_sampled;
            j["pass"] = ok;
            emit(opt, std::string("transversality: ") + j["report"]["verdict"].get<std::string>(), j);
            return ok ? 0 : 1;
        }
        if (what == "integrable") {
            std::vector<Form> defect =
                rt.ft ? integrability_defect(rt.ft) : integrability_defect(spec->frame);
            bool ok = true;
            Json dl = Json::array();
            for (const Form& f : defect) {
                dl.push_back(f.str());
                if (!f.is_zero()) ok = false;
            }
            j["defect"] = dl;
            j["pass"] = ok;
            emit(opt, ok ? "integrable: (0,2)-defect vanishes" : "not integrable", j);
            return ok ? 0 : 1;
        }
        if (what == "mt") {
            ACS acs = rt.acs();
            FramePtr fr = spec->frame;
            if (spec->frame->coords().size() == 4)
                return usage_error("run mt on the R^6 restriction via the claims suite");
            MTReport rep = mt_obstruction(acs, *fr);
            j["report"] = to_json(rep);
            j["pass"] = !rep.obstructed;
            emit(opt,
                 rep.obstructed ? "obstructed: eq1 = " + rep.eq1.str() + ", eq2 = " + rep.eq2.str()
                                : "necessary conditions hold",
                 j);
            return rep.obstructed ? 1 : 0;
        }
        if (what == "nop") {
            if (args.empty()) return usage_error("check nop <beta>");
            Form beta = rt.resolve(args[0], false);
            size_t n = spec->frame->n();
            int deg = beta.degree();
            int p = (2 * int(n) - 1 - deg) / 2;
            if (2 * int(n) - 2 * p - 1 != deg) return usage_error("beta must have odd degree 2n-2p-1");
            NopCertificate cert = make_nop_certificate(spec->frame, beta, p);
            NopReport rep = nop_test(spec->frame, cert, spec->closed_manifold);
            j["p"] = p;
            j["report"] = to_json(rep);
            j["pass"] = rep.applies;
            emit(opt, rep.applies ? rep.obstruction : "certificate rejected", j);
            return rep.applies ? 0 : 1;
        }
        if (what == "semi-kahler-first-order") {
            MetricFamily mf{rt.family(), {}};
            SemiKahlerFirstOrder chk = semi_kahler_first_order_check(mf);
            j["report"] = to_json(chk);
            j["pass"] = chk.passes;
            emit(opt,
                 chk.passes ? "first-order necessary condition holds"
                            : "first-order condition fails: " + chk.residual.str(),
                 j);
            return chk.passes ? 0 : 1;
        }
    } catch (const error& e) {
        return usage_error(e.what());
    }
    return usage_error("unknown check '" + what + "'");
}

int run_taming(const Options& opt) {
    int rc = 0;
    auto spec = load_spec(opt, rc);
    if (!spec) return rc;
    try {
        FramePtr fr = spec->family ? deformed_frame(*spec->family) : spec->frame;
        if (fr->mode() != Frame::Mode::invariant) {
            try {
                fr = invariant_presentation(fr);
            } catch (const error&) {
                return usage_error(
                    "the taming solver works on left-invariant structures; this spec's structure "
                    "equations have coordinate-dependent coefficients");
            }
        }
        TamingReport rep = invariant_taming_solver(fr);
        Json j;
        j["schema"] = 1;
        j["command"] = "solve taming";
        j["manifold"] = spec->name;
        j["report"] = to_json(rep);
        std::string text = rep.exists ? "closed taming form: " + rep.witness
                         : rep.impossible ? "no invariant taming form (forced degeneracies)"
                                          : "no verdict";
        emit(opt, text, j);
        return rep.exists ? 0 : 1;
    } catch (const error& e) {
        return usage_error(e.what());
    }
}

int run_claims_cmd(const Options& opt) {
    std::vector<std::string> names;
    if (opt.builtin_name == "all") names = builtin_names();
    else names.push_back(opt.builtin_name); // may be empty: spec file path below
    int worst = 0;
    Json all = Json::array();
    for (const std::string& name : names) {
        Options one = opt;
        one.builtin_name = name;
        int rc = 0;
        auto spec = load_spec(one, rc);
        if (!spec) return rc;
        ClaimsReport rep = run_claims(*spec);
        Json j = to_json(rep);
        if (!opt.json) {
            std::cout << spec->name << ":\n";
            for (const auto& r : rep.results)
                std::cout << "  [" << (r.pass ? "pass" : "FAIL") << "] " << r.id << "  " << r.detail
                          << "\n";
        }
        all.push_back(j);
        if (!rep.all_passed()) worst = 1;
    }
    if (opt.json) {
        Json j;
        j["schema"] = 1;
        j["command"] = "claims run";
        j["reports"] = all;
        std::cout << j.dump(2) << "\n";
    }
    return worst;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"symbolic almost p-Kahler structure checker"};
    app.require_subcommand(1);
    Options opt;
    if (const char* env = std::getenv("PKLAB_SEED")) opt.seed = std::strtoull(env, nullptr, 10);

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--spec", opt.spec_file, "a .pk manifold spec file");
        cmd->add_option("--builtin", opt.builtin_name, "a builtin manifold name");
        cmd->add_flag("--json", opt.json, "emit a JSON report");
        cmd->add_option("--at", opt.at, "substitutions name=value (functions or parameters)");
    };

    CLI::App* check = app.add_subcommand("check", "run a single check");
    std::vector<std::string> check_args;
    check->add_option("what", check_args, "d2|type|closed <form>|positive <form>|integrable|mt|nop <beta>|semi-kahler-first-order")
        ->expected(-1);
    add_common(check);
    check->add_option("--samples", opt.samples, "sample count for positivity checks");
    check->add_option("--seed", opt.seed, "sampling seed (PKLAB_SEED overrides the default)");

    CLI::App* solve = app.add_subcommand("solve", "run a solver");
    std::vector<std::string> solve_args;
    solve->add_option("what", solve_args, "taming")->expected(-1);
    add_common(solve);

    CLI::App* claims = app.add_subcommand("claims", "run a spec's claim suite");
    std::vector<std::string> claims_args;
    claims->add_option("what", claims_args, "run [spec.pk]")->expected(-1);
    add_common(claims);

    CLI::App* catalog = app.add_subcommand("catalog", "list or print builtin specs");
    std::vector<std::string> catalog_args;
    catalog->add_option("what", catalog_args, "list | print NAME")->expected(-1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (check->parsed()) {
        if (check_args.empty()) return usage_error("check needs an argument");
        std::string what = check_args[0];
        std::vector<std::string> rest(check_args.begin() + 1, check_args.end());
        return run_check(opt, what, rest);
    }
    if (solve->parsed()) {
        if (solve_args.empty() || solve_args[0] != "taming")
            return usage_error("supported solver: taming");
        return run_taming(opt);
    }
    if (claims->parsed()) {
        if (claims_args.empty() || claims_args[0] != "run")
            return usage_error("usage: claims run [spec.pk] [--builtin NAME]");
        if (claims_args.size() > 1) opt.spec_file = claims_args[1];
        if (opt.builtin_name.empty() && opt.spec_file.empty())
            return usage_error("claims run needs --builtin NAME, --spec FILE, or a file argument");
        if (!opt.builtin_name.empty()) return run_claims_cmd(opt);
        // single file
        int rc = 0;
        auto spec = load_spec(opt, rc);
        if (!spec) return rc;
        ClaimsReport rep = run_claims(*spec);
        if (opt.json) {
            Json j;
            j["schema"] = 1;
            j["command"] = "claims run";
            j["reports"] = Json::array({to_json(rep)});
            std::cout << j.dump(2) << "\n";
        } else {
            std::cout << spec->name << ":\n";
            for (const auto& r : rep.results)
                std::cout << "  [" << (r.pass ? "pass" : "FAIL") << "] " << r.id << "  " << r.detail
                          << "\n";
        }
        return rep.all_passed() ? 0 : 1;
    }
    if (catalog->parsed()) {
        if (!catalog_args.empty() && catalog_args[0] == "list") {
            for (const std::string& n : builtin_names()) std::cout << n << "\n";
            return 0;
        }
        if (catalog_args.size() == 2 && catalog_args[0] == "print") {
            try {
                dsl::Parser p(builtin_source(catalog_args[1]));
                auto doc = p.parse();
                if (!doc) return usage_error("builtin text failed to parse");
                std::cout << dsl::print(*doc);
                return 0;
            } catch (const error& e) {
                return usage_error(e.what());
            }
        }
        return usage_error("usage: catalog list | catalog print NAME");
    }
    return 2;
}
