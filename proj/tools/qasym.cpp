// Command-line front end: point evaluation of the q-series objects,
// Diophantine utilities, and the asymptotic verification sweeps.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "qasym/harness.hpp"

using namespace qasym;

namespace {

std::string complex_str(const BigComplex& v, std::size_t digits) {
    if (v.imag().is_zero()) return v.real().str(digits);
    std::string im = v.imag().str(digits);
    if (!im.empty() && im[0] == '-') return v.real().str(digits) + im + "i";
    return v.real().str(digits) + "+" + im + "i";
}

std::size_t digits_for(mpfr_prec_t prec) {
    return static_cast<std::size_t>(static_cast<double>(prec) * 0.3010299957 + 1);
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file '" + out_path + "'");
    f << text;
}

struct EvalOpts {
    std::string z = "1";
    std::string q = "0.5";
    std::string a = "0";
    long prec = 256;
    long n = 0;
    bool inf = false;
    std::string method = "series";
    std::vector<std::string> cbh_a, cbh_b;
    std::string cbh_l = "1";
};

int run_eval(const std::string& what, const EvalOpts& o) {
    mpfr_prec_t prec = std::max<long>(o.prec, kMinPrecision);
    prec = std::max(prec, env_precision_floor());
    QBase q(BigReal::parse(o.q, prec));
    std::size_t digits = digits_for(prec);
    if (what == "aq") {
        BigComplex z = parse_complex(o.z, prec);
        std::cout << complex_str(aq_direct(z, q), digits) << "\n";
        return 0;
    }
    if (what == "qpoch") {
        BigComplex a = parse_complex(o.a, prec);
        if (o.inf)
            std::cout << complex_str(qpoch_inf(a, q, default_rel_eps(prec)), digits) << "\n";
        else
            std::cout << complex_str(qpoch_n(a, q, o.n), digits) << "\n";
        return 0;
    }
    if (what == "theta") {
        BigComplex z = parse_complex(o.z, prec);
        if (o.method == "both") {
            BigComplex s = theta(z, q, ThetaMethod::series);
            BigComplex p = theta(z, q, ThetaMethod::product);
            std::cout << "series  = " << complex_str(s, digits) << "\n";
            std::cout << "product = " << complex_str(p, digits) << "\n";
            std::cout << "|diff|  = " << abs(s - p).str(6) << "\n";
            return 0;
        }
        ThetaMethod m = o.method == "product" ? ThetaMethod::product : ThetaMethod::series;
        std::cout << complex_str(theta(z, q, m), digits) << "\n";
        return 0;
    }
    if (what == "cbh") {
        std::vector<BigComplex> a, b;
        for (const auto& s : o.cbh_a) a.push_back(parse_complex(s, prec));
        for (const auto& s : o.cbh_b) b.push_back(parse_complex(s, prec));
        BigComplex z = parse_complex(o.z, prec);
        BigReal l = BigReal::parse(o.cbh_l, prec);
        std::cout << complex_str(cbh_direct(a, b, l, z, q, default_rel_eps(prec)), digits) << "\n";
        return 0;
    }
    throw CLI::ValidationError("unknown eval target");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Arbitrary-precision evaluation of the Ramanujan entire function, theta\n"
                 "functions and confluent basic hypergeometric series, with numerical\n"
                 "verification of their scaled asymptotic expansions.\n\n"
                 "Scaling parameter grammar: \"p/q\", \"sqrt(c)\", \"(a+b*sqrt(c))/d\",\n"
                 "\"liouville(base)\", or a decimal literal (exact; append \"~err\" for a\n"
                 "stated-error literal, e.g. 0.7656~1e-30)."};
    app.require_subcommand(1);

    // ---- eval ----------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "evaluate one function at a point");
    eval->require_subcommand(1);
    EvalOpts eo;
    for (const char* name : {"aq", "theta", "qpoch", "cbh"}) {
        auto* sub = eval->add_subcommand(name);
        sub->add_option("--z", eo.z, "argument (complex, e.g. 2+1i)");
        sub->add_option("--q", eo.q, "base q in (0,1)");
        sub->add_option("--prec", eo.prec, "working precision bits")->default_val(256);
        if (std::string(name) == "qpoch") {
            sub->add_option("--a", eo.a, "q-shifted factorial argument");
            sub->add_option("--n", eo.n, "index (negative allowed)");
            sub->add_flag("--inf", eo.inf, "infinite product");
        }
        if (std::string(name) == "theta")
            sub->add_option("--method", eo.method, "series|product|both")->default_val("series");
        if (std::string(name) == "cbh") {
            sub->add_option("--a", eo.cbh_a, "numerator parameters (repeatable)");
            sub->add_option("--b", eo.cbh_b, "denominator parameters (repeatable)");
            sub->add_option("--l", eo.cbh_l, "quadratic coefficient l > 0")->default_val("1");
        }
    }

    // ---- dio -----------------------------------------------------------
    auto* dio = app.add_subcommand("dio", "Diophantine utilities for the scaling parameter");
    dio->require_subcommand(1);
    std::string dio_t = "sqrt(2)", dio_beta = "0";
    long long dio_N = 10000;
    int dio_K = 10, dio_count = 5;
    auto* dcf = dio->add_subcommand("cf", "continued fraction expansion");
    dcf->add_option("--t", dio_t, "scaling parameter");
    dcf->add_option("--K", dio_K, "number of partial quotients");
    auto* drec = dio->add_subcommand("records", "brute-force circular-distance records");
    drec->add_option("--t", dio_t);
    drec->add_option("--beta", dio_beta);
    drec->add_option("--N", dio_N);
    auto* dost = dio->add_subcommand("ostrowski", "structural record generation");
    dost->add_option("--t", dio_t);
    dost->add_option("--beta", dio_beta);
    dost->add_option("--count", dio_count);
    auto* dchx = dio->add_subcommand("chaotic-index", "empirical decay exponent of record distances");
    dchx->add_option("--t", dio_t);
    dchx->add_option("--beta", dio_beta);
    dchx->add_option("--N", dio_N);

    // ---- asym ----------------------------------------------------------
    auto* asym = app.add_subcommand("asym", "asymptotic verification");
    asym->require_subcommand(1);
    ExperimentSpec spec;
    std::string out_path, n_text, family_text = "aq", output_text = "csv", spec_file;
    for (const char* name : {"verify", "sweep"}) {
        auto* sub = asym->add_subcommand(name);
        sub->add_option("--spec", spec_file, "key=value spec file (flags win)");
        sub->add_option("--family", family_text, "aq|cbh");
        sub->add_option("--t", spec.t, "scaling parameter");
        sub->add_option("--q", spec.q, "base q in (0,1)");
        sub->add_option("--u", spec.u, "nonzero complex u");
        sub->add_option("--offset", spec.offset, "lambda (rational t) / beta (irrational t)");
        sub->add_option("--beta", spec.offset, "alias of --offset");
        sub->add_option("--n", n_text, "n list: start:stop:step or comma list");
        sub->add_option("--records", spec.records_limit, "take records up to N (irrational t)");
        sub->add_option("--convergents", spec.convergent_count,
                        "take K convergent denominators (irrational t, beta = 0)");
        sub->add_option("--prec", spec.precision_override, "precision override in bits");
        sub->add_option("--output", output_text, "csv|json")->default_val("csv");
        sub->add_option("--out", out_path, "write to file instead of stdout");
        sub->add_flag("--verbose", spec.verbose, "append both error-bound variants");
        sub->add_option("--cbh-a", spec.cbh_a, "CBH numerator parameters (repeatable)");
        sub->add_option("--cbh-b", spec.cbh_b, "CBH denominator parameters (repeatable)");
        sub->add_option("--cbh-l", spec.cbh_l, "CBH quadratic coefficient");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (eval->parsed()) {
            for (auto* sub : eval->get_subcommands()) return run_eval(sub->get_name(), eo);
        }
        if (dio->parsed()) {
            ScalingParam t = ScalingParam::parse(dio_t);
            if (dcf->parsed()) {
                CFExpansion cf = cf_expand(t, dio_K);
                std::cout << cf.partial_quotients.front().get_str() << ";";
                for (std::size_t i = 1; i < cf.partial_quotients.size(); ++i)
                    std::cout << " " << cf.partial_quotients[i].get_str();
                if (cf.exact_termination) std::cout << " (terminated)";
                std::cout << "\n";
                return 0;
            }
            BigReal beta = BigReal::parse(dio_beta, 256);
            if (drec->parsed() || dost->parsed()) {
                std::vector<ApproxRecord> recs = drec->parsed()
                                                     ? inhom_records_bruteforce(t, beta, dio_N)
                                                     : inhom_ostrowski(t, beta, dio_count);
                std::cout << "n,m,gamma,gamma_bound,theorem_eligible\n";
                for (const auto& r : recs)
                    std::cout << r.n << "," << r.m << "," << r.gamma.str(30) << ","
                              << r.gamma_bound.str(8) << "," << (r.theorem_eligible ? 1 : 0)
                              << "\n";
                return 0;
            }
            if (dchx->parsed()) {
                ChaoticIndexEstimate est = chaotic_exponent_estimate(t, beta, dio_N);
                std::cout << "r_hat=" << est.r_hat.str(12) << " records_used=" << est.records_used
                          << " intercept=" << est.intercept.str(12)
                          << " distance_floor=" << (est.distance_floor ? 1 : 0) << "\n";
                return 0;
            }
        }
        if (asym->parsed()) {
            if (!spec_file.empty()) {
                std::ifstream f(spec_file);
                if (!f) throw std::runtime_error("cannot read spec file '" + spec_file + "'");
                std::string text((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
                ExperimentSpec from_file = ExperimentSpec::from_kv(text);
                // flags win over the file: only fill fields still at defaults
                ExperimentSpec defaults;
                if (spec.t == defaults.t) spec.t = from_file.t;
                if (spec.q == defaults.q) spec.q = from_file.q;
                if (spec.u == defaults.u) spec.u = from_file.u;
                if (spec.offset == defaults.offset) spec.offset = from_file.offset;
                if (n_text.empty()) spec.n_list = from_file.n_list;
                if (spec.records_limit == 0) spec.records_limit = from_file.records_limit;
                if (spec.convergent_count == 0) spec.convergent_count = from_file.convergent_count;
                if (!spec.precision_override) spec.precision_override = from_file.precision_override;
                if (family_text == "aq") family_text = from_file.family == Family::cbh ? "cbh" : "aq";
                if (spec.cbh_a.empty()) spec.cbh_a = from_file.cbh_a;
                if (spec.cbh_b.empty()) spec.cbh_b = from_file.cbh_b;
                if (spec.cbh_l == defaults.cbh_l) spec.cbh_l = from_file.cbh_l;
                if (output_text == "csv" && from_file.output == OutputFormat::json)
                    output_text = "json";
            }
            spec.family = family_text == "cbh" ? Family::cbh : Family::aq;
            spec.output = output_text == "json" ? OutputFormat::json : OutputFormat::csv;
            if (!n_text.empty()) spec.n_list = parse_n_spec(n_text);
            if (spec.records_limit > 0)
                spec.n_source = ExperimentSpec::NSource::records;
            else if (spec.convergent_count > 0)
                spec.n_source = ExperimentSpec::NSource::convergent_denominators;
            else
                spec.n_source = ExperimentSpec::NSource::explicit_list;
            SweepResult result = run_sweep(spec);
            emit(spec.output == OutputFormat::json ? to_json(spec, result) : to_csv(spec, result),
                 out_path);
            return result.all_bounds_ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
