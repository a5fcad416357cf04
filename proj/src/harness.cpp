#include "qasym/harness.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>
#include <sstream>

#include <json.hpp>

namespace qasym {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string join(const std::vector<std::string>& v, char sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += v[i];
    }
    return out;
}

}  // namespace

Rational decimal_to_rational(const std::string& text) {
    static const std::regex frac_re(R"(^\s*(-?[0-9]+)\s*/\s*([0-9]+)\s*$)");
    static const std::regex dec_re(R"(^\s*(-?)([0-9]*)\.?([0-9]*)(?:[eE]([+-]?[0-9]+))?\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, frac_re)) {
        Rational r(Integer(m[1].str()), Integer(m[2].str()));
        r.canonicalize();
        return r;
    }
    if (std::regex_match(text, m, dec_re)) {
        std::string ip = m[2].str(), fp = m[3].str();
        if (ip.empty() && fp.empty()) throw std::invalid_argument("empty decimal: '" + text + "'");
        Integer digits(ip + fp + (ip.empty() && fp.empty() ? "0" : ""));
        long e10 = m[4].matched ? std::stol(m[4].str()) : 0;
        e10 -= static_cast<long>(fp.size());
        Rational r(digits);
        Integer p10;
        mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(e10 < 0 ? -e10 : e10));
        if (e10 < 0)
            r /= Rational(p10);
        else
            r *= Rational(p10);
        r.canonicalize();
        if (m[1].str() == "-") r = -r;
        return r;
    }
    throw std::invalid_argument("not a decimal or fraction: '" + text + "'");
}

BigComplex parse_complex(const std::string& text, mpfr_prec_t prec) {
    static const std::regex full_re(
        R"(^\s*([+-]?[0-9.][0-9.eE+-]*?)\s*([+-])\s*([0-9.][0-9.eE+-]*?)?\s*[ij]\s*$)");
    static const std::regex imag_re(R"(^\s*([+-]?)([0-9.][0-9.eE+-]*?)?\s*[ij]\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, full_re)) {
        BigReal re = BigReal::parse(m[1].str(), prec);
        std::string bs = m[3].matched && !m[3].str().empty() ? m[3].str() : "1";
        BigReal im = BigReal::parse(bs, prec);
        if (m[2].str() == "-") im = -im;
        return {re, im};
    }
    if (std::regex_match(text, m, imag_re)) {
        std::string bs = m[2].matched && !m[2].str().empty() ? m[2].str() : "1";
        BigReal im = BigReal::parse(bs, prec);
        if (m[1].str() == "-") im = -im;
        return {BigReal(prec), im};
    }
    return BigComplex(BigReal::parse(trim(text), prec), BigReal(prec));
}

mpfr_prec_t env_precision_floor() {
    const char* v = std::getenv("Q_ASYM_DEFAULT_PREC");
    if (v == nullptr || *v == '\0') return 0;
    long bits = std::strtol(v, nullptr, 10);
    return bits > 0 ? static_cast<mpfr_prec_t>(bits) : 0;
}

// ---------------------------------------------------------------------------
// ExperimentSpec round-trip

namespace {

std::string family_str(Family f) { return f == Family::aq ? "aq" : "cbh"; }
Family family_parse(const std::string& s) {
    if (s == "aq") return Family::aq;
    if (s == "cbh") return Family::cbh;
    throw std::invalid_argument("family must be 'aq' or 'cbh', got '" + s + "'");
}

std::string nsource_str(ExperimentSpec::NSource s) {
    switch (s) {
        case ExperimentSpec::NSource::explicit_list: return "list";
        case ExperimentSpec::NSource::records: return "records";
        case ExperimentSpec::NSource::convergent_denominators: return "convergents";
    }
    return {};
}

ExperimentSpec::NSource nsource_parse(const std::string& s) {
    if (s == "list") return ExperimentSpec::NSource::explicit_list;
    if (s == "records") return ExperimentSpec::NSource::records;
    if (s == "convergents") return ExperimentSpec::NSource::convergent_denominators;
    throw std::invalid_argument("n_source must be list|records|convergents, got '" + s + "'");
}

}  // namespace

std::vector<long long> parse_n_spec(const std::string& text) {
    std::vector<long long> out;
    std::string s = trim(text);
    if (s.empty()) return out;
    if (s.find(':') != std::string::npos) {
        auto parts = split(s, ':');
        if (parts.size() != 2 && parts.size() != 3)
            throw std::invalid_argument("n range must be start:stop[:step], got '" + text + "'");
        long long start = std::stoll(parts[0]);
        long long stop = std::stoll(parts[1]);
        long long step = parts.size() == 3 ? std::stoll(parts[2]) : 1;
        if (step < 1 || stop < start)
            throw std::invalid_argument("bad n range '" + text + "'");
        for (long long n = start; n <= stop; n += step) out.push_back(n);
        return out;
    }
    for (const auto& part : split(s, ',')) {
        std::string p = trim(part);
        if (!p.empty()) out.push_back(std::stoll(p));
    }
    return out;
}

ExperimentSpec ExperimentSpec::from_kv(const std::string& text) {
    ExperimentSpec spec;
    std::istringstream in(text);
    std::string line;
    std::map<std::string, std::string> kv;
    while (std::getline(in, line)) {
        std::string l = trim(line);
        if (l.empty() || l[0] == '#') continue;
        auto eq = l.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("expected key=value, got '" + l + "'");
        kv[trim(l.substr(0, eq))] = trim(l.substr(eq + 1));
    }
    auto get = [&](const std::string& k) -> std::optional<std::string> {
        auto it = kv.find(k);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    if (auto v = get("family")) spec.family = family_parse(*v);
    if (auto v = get("q")) spec.q = *v;
    if (auto v = get("u")) spec.u = *v;
    if (auto v = get("t")) spec.t = *v;
    if (auto v = get("offset")) spec.offset = *v;
    if (auto v = get("n_source")) spec.n_source = nsource_parse(*v);
    if (auto v = get("n")) spec.n_list = parse_n_spec(*v);
    if (auto v = get("records_N")) spec.records_limit = std::stoll(*v);
    if (auto v = get("convergents_K")) spec.convergent_count = std::stoi(*v);
    if (auto v = get("prec")) spec.precision_override = std::stol(*v);
    if (auto v = get("output")) spec.output = (*v == "json" ? OutputFormat::json : OutputFormat::csv);
    if (auto v = get("verbose")) spec.verbose = (*v == "1" || *v == "true");
    if (auto v = get("cbh_a"); v && !v->empty()) spec.cbh_a = split(*v, ',');
    if (auto v = get("cbh_b"); v && !v->empty()) spec.cbh_b = split(*v, ',');
    if (auto v = get("cbh_l")) spec.cbh_l = *v;
    return spec;
}

std::string ExperimentSpec::to_kv() const {
    std::ostringstream out;
    out << "family=" << family_str(family) << "\n";
    out << "q=" << q << "\n";
    out << "u=" << u << "\n";
    out << "t=" << t << "\n";
    out << "offset=" << offset << "\n";
    out << "n_source=" << nsource_str(n_source) << "\n";
    if (!n_list.empty()) {
        out << "n=";
        for (std::size_t i = 0; i < n_list.size(); ++i) out << (i ? "," : "") << n_list[i];
        out << "\n";
    }
    if (records_limit > 0) out << "records_N=" << records_limit << "\n";
    if (convergent_count > 0) out << "convergents_K=" << convergent_count << "\n";
    if (precision_override) out << "prec=" << *precision_override << "\n";
    out << "output=" << (output == OutputFormat::json ? "json" : "csv") << "\n";
    out << "verbose=" << (verbose ? 1 : 0) << "\n";
    if (!cbh_a.empty()) out << "cbh_a=" << join(cbh_a, ',') << "\n";
    if (!cbh_b.empty()) out << "cbh_b=" << join(cbh_b, ',') << "\n";
    if (family == Family::cbh) out << "cbh_l=" << cbh_l << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------

FitReport fit_line(const std::vector<std::pair<BigReal, BigReal>>& points,
                   FitReport::Model model) {
    if (points.size() < 3) throw DegenerateFit("fit_line: needs at least 3 points");
    const mpfr_prec_t fp = 256;
    BigReal sx(fp), sy(fp), sxx(fp), sxy(fp), syy(fp);
    for (const auto& [x, y] : points) {
        sx += x.with_precision(fp);
        sy += y.with_precision(fp);
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    long k = static_cast<long>(points.size());
    BigReal det = sxx * k - sx * sx;
    if (det.is_zero()) throw DegenerateFit("fit_line: all x equal");
    FitReport rep;
    rep.model = model;
    rep.points_used = static_cast<int>(points.size());
    rep.slope = (sxy * k - sx * sy) / det;
    rep.intercept = (sy - rep.slope * sx) / k;
    BigReal ss_tot = syy - sy * sy / k;
    BigReal ss_res(fp);
    for (const auto& [x, y] : points) {
        BigReal e = y - (rep.slope * x + rep.intercept);
        ss_res += e * e;
    }
    rep.r_squared = ss_tot.is_zero() ? BigReal::of(1L, fp) : 1L - ss_res / ss_tot;
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

CBHParams cbh_params_of(const ExperimentSpec& spec, mpfr_prec_t prec) {
    std::vector<BigReal> a, b;
    for (const auto& s : spec.cbh_a) a.push_back(BigReal::parse(trim(s), prec));
    for (const auto& s : spec.cbh_b) b.push_back(BigReal::parse(trim(s), prec));
    return CBHParams(std::move(a), std::move(b), BigReal::parse(spec.cbh_l, prec));
}

mpfr_prec_t choose_precision(const TheoremPoint& pt, const std::optional<long>& override_bits) {
    if (override_bits) return std::max<mpfr_prec_t>(*override_bits, kMinPrecision);
    return std::max(auto_precision(pt), env_precision_floor());
}

TheoremPoint make_point(const ExperimentSpec& spec, const ScalingParam& t, long long n,
                        const std::optional<ApproxRecord>& rec, const BigReal& beta,
                        mpfr_prec_t param_prec) {
    BigReal q = BigReal::parse(spec.q, param_prec);
    BigComplex u = parse_complex(spec.u, param_prec);
    std::optional<CBHParams> cbh;
    if (spec.family == Family::cbh) cbh = cbh_params_of(spec, param_prec);
    if (rec) return TheoremPoint::record_point(spec.family, t, *rec, beta, u, q, cbh);
    return TheoremPoint::rational_point(spec.family, t, n, u, q, cbh);
}

}  // namespace

SweepResult run_sweep(const ExperimentSpec& spec) {
    ScalingParam t = ScalingParam::parse(spec.t);
    bool rational = t.kind() == ScalingParam::Kind::rational;
    SweepResult result;

    struct PointSeed {
        long long n;
        std::optional<ApproxRecord> rec;
    };
    std::vector<PointSeed> seeds;
    BigReal beta = BigReal::parse(spec.offset, 256);

    if (rational) {
        if (spec.n_source != ExperimentSpec::NSource::explicit_list)
            throw std::invalid_argument(
                "run_sweep: rational t uses an explicit n list (records/convergents describe the "
                "irrational pathway)");
        Rational lam = decimal_to_rational(spec.offset);
        std::vector<long long> ns = spec.n_list;
        std::sort(ns.begin(), ns.end());
        ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
        for (long long n : ns) {
            if (n < 1) continue;
            auto [m, fr] = frac_floor_exact(t.rational_value(), n);
            if (fr == lam) seeds.push_back({n, std::nullopt});
        }
    } else {
        std::vector<ApproxRecord> recs;
        switch (spec.n_source) {
            case ExperimentSpec::NSource::records:
                if (spec.records_limit < 1)
                    throw std::invalid_argument("run_sweep: records source needs records_N >= 1");
                recs = inhom_records_bruteforce(t, beta, spec.records_limit);
                break;
            case ExperimentSpec::NSource::convergent_denominators: {
                if (spec.convergent_count < 1)
                    throw std::invalid_argument(
                        "run_sweep: convergents source needs convergents_K >= 1");
                if (!beta.is_zero())
                    throw std::invalid_argument(
                        "run_sweep: convergent denominators are the beta = 0 record subsequence; "
                        "use records_N for nonzero beta");
                recs = inhom_ostrowski(t, beta, spec.convergent_count);
                break;
            }
            case ExperimentSpec::NSource::explicit_list: {
                if (spec.n_list.empty())
                    throw std::invalid_argument("run_sweep: empty n list");
                long long nmax = *std::max_element(spec.n_list.begin(), spec.n_list.end());
                // explicit irrational points must come from records
                int count = 8;
                for (; count <= 4096; count *= 2) {
                    recs = inhom_ostrowski(t, beta, count);
                    if (!recs.empty() && recs.back().n >= nmax) break;
                }
                std::vector<ApproxRecord> keep;
                for (const auto& r : recs)
                    if (std::find(spec.n_list.begin(), spec.n_list.end(), r.n) != spec.n_list.end())
                        keep.push_back(r);
                recs = keep;
                break;
            }
        }
        for (auto& r : recs)
            if (r.theorem_eligible) seeds.push_back({r.n, std::move(r)});
    }

    if (seeds.empty()) throw std::runtime_error("run_sweep: no theorem-eligible points");
    std::sort(seeds.begin(), seeds.end(),
              [](const PointSeed& a, const PointSeed& b) { return a.n < b.n; });

    std::vector<std::pair<BigReal, BigReal>> fit_pts;
    for (const auto& seed : seeds) {
        SweepRow out_row;
        out_row.n = seed.n;
        try {
            TheoremPoint probe = make_point(spec, t, seed.n, seed.rec, beta, 256);
            mpfr_prec_t P = choose_precision(probe, spec.precision_override);
            TheoremPoint pt = make_point(spec, t, seed.n, seed.rec, beta, P);
            VerifyRow row = residual_row(pt, P);
            if (spec.verbose && spec.family == Family::aq && pt.rational_pathway()) {
                AqBoundVariants v = aq_error_bound_variants(pt);
                out_row.bound_product_denominator = v.product_denominator;
                out_row.bound_linear_denominator = v.linear_denominator;
            }
            if (row.paper_bound && !row.bound_satisfied) result.all_bounds_ok = false;
            BigReal res_abs = abs(row.residual);
            if (!res_abs.is_zero()) {
                const mpfr_prec_t fp = 256;
                BigReal x = rational ? BigReal::of(seed.n, fp) : log(BigReal::of(seed.n, fp));
                fit_pts.emplace_back(x, log(res_abs.with_precision(fp)));
            }
            out_row.row = std::move(row);
        } catch (const PrecisionRetryExhausted& e) {
            out_row.error = e.what();
            result.all_bounds_ok = false;
        } catch (const UnresolvableBoundary& e) {
            out_row.error = e.what();
            result.all_bounds_ok = false;
        } catch (const PrecisionExhausted& e) {
            out_row.error = e.what();
            result.all_bounds_ok = false;
        }
        result.rows.push_back(std::move(out_row));
    }
    if (fit_pts.size() >= 3)
        result.fit = fit_line(fit_pts, rational ? FitReport::Model::log_vs_n
                                                : FitReport::Model::log_vs_log_n);
    return result;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string fit_model_str(FitReport::Model m) {
    return m == FitReport::Model::log_vs_n ? "log-vs-n" : "log-vs-log-n";
}

}  // namespace

std::string to_csv(const ExperimentSpec& spec, const SweepResult& result) {
    std::ostringstream out;
    out << "n,m,offset,gamma,residual_abs,residual_rel,bound,ok,precision_bits";
    if (spec.verbose) out << ",bound_product_denominator,bound_linear_denominator";
    out << "\n";
    for (const auto& r : result.rows) {
        if (!r.row) {
            out << r.n << ",,,,,,,error,";
            if (spec.verbose) out << ",,";
            out << "\n";
            continue;
        }
        const VerifyRow& v = *r.row;
        out << v.n << "," << v.m << "," << v.offset.str() << "," << v.gamma.str() << ","
            << abs(v.residual).str() << ","
            << (v.residual_rel ? v.residual_rel->str() : std::string()) << ","
            << (v.paper_bound ? v.paper_bound->str() : std::string()) << ","
            << (v.paper_bound ? (v.bound_satisfied ? "1" : "0") : std::string()) << ","
            << v.precision_bits;
        if (spec.verbose)
            out << ","
                << (r.bound_product_denominator ? r.bound_product_denominator->str() : std::string())
                << ","
                << (r.bound_linear_denominator ? r.bound_linear_denominator->str() : std::string());
        out << "\n";
    }
    if (result.fit) {
        out << "# fit_model=" << fit_model_str(result.fit->model) << "\n";
        out << "# slope=" << result.fit->slope.str(30) << "\n";
        out << "# intercept=" << result.fit->intercept.str(30) << "\n";
        out << "# r_squared=" << result.fit->r_squared.str(30) << "\n";
        out << "# points_used=" << result.fit->points_used << "\n";
    }
    return out.str();
}

std::string to_json(const ExperimentSpec& spec, const SweepResult& result) {
    nlohmann::ordered_json j;
    j["spec"] = nlohmann::ordered_json::object();
    {
        std::istringstream kv(spec.to_kv());
        std::string line;
        while (std::getline(kv, line)) {
            auto eq = line.find('=');
            if (eq != std::string::npos) j["spec"][line.substr(0, eq)] = line.substr(eq + 1);
        }
    }
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : result.rows) {
        nlohmann::ordered_json row;
        row["n"] = r.n;
        if (!r.row) {
            row["error"] = r.error;
        } else {
            const VerifyRow& v = *r.row;
            row["m"] = v.m;
            row["offset"] = v.offset.str();
            row["gamma"] = v.gamma.str();
            row["residual_abs"] = abs(v.residual).str();
            if (v.residual_rel) row["residual_rel"] = v.residual_rel->str();
            if (v.paper_bound) {
                row["bound"] = v.paper_bound->str();
                row["ok"] = v.bound_satisfied;
            }
            row["precision_bits"] = static_cast<long>(v.precision_bits);
            if (r.bound_product_denominator)
                row["bound_product_denominator"] = r.bound_product_denominator->str();
            if (r.bound_linear_denominator)
                row["bound_linear_denominator"] = r.bound_linear_denominator->str();
        }
        j["rows"].push_back(std::move(row));
    }
    if (result.fit) {
        j["fit"] = {{"model", fit_model_str(result.fit->model)},
                    {"slope", result.fit->slope.str(30)},
                    {"intercept", result.fit->intercept.str(30)},
                    {"r_squared", result.fit->r_squared.str(30)},
                    {"points_used", result.fit->points_used}};
    }
    j["all_bounds_ok"] = result.all_bounds_ok;
    return j.dump(2) + "\n";
}

}  // namespace qasym
