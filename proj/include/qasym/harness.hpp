#ifndef QASYM_HARNESS_HPP
#define QASYM_HARNESS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qasym/asymptotics.hpp"

namespace qasym {

enum class OutputFormat { csv, json };

// A sweep description; parses losslessly from a flat key=value block and
// serializes back to it.
struct ExperimentSpec {
    enum class NSource { explicit_list, records, convergent_denominators };

    Family family = Family::aq;
    std::string q = "0.5";
    std::string u = "1";
    std::string t = "1/2";
    std::string offset = "0";  // lambda for rational t, beta for irrational t
    NSource n_source = NSource::explicit_list;
    std::vector<long long> n_list;
    long long records_limit = 0;
    int convergent_count = 0;
    std::optional<long> precision_override;
    OutputFormat output = OutputFormat::csv;
    bool verbose = false;
    std::vector<std::string> cbh_a;
    std::vector<std::string> cbh_b;
    std::string cbh_l = "1";

    static ExperimentSpec from_kv(const std::string& text);
    std::string to_kv() const;
};

struct FitReport {
    enum class Model { log_vs_n, log_vs_log_n };
    BigReal slope;
    BigReal intercept;
    BigReal r_squared;
    int points_used = 0;
    Model model = Model::log_vs_n;
};

struct SweepRow {
    long long n = 0;
    std::optional<VerifyRow> row;       // absent on per-point failure
    std::string error;                  // row-level error marker
    std::optional<BigReal> bound_product_denominator;  // verbose, AQ only
    std::optional<BigReal> bound_linear_denominator;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::optional<FitReport> fit;
    bool all_bounds_ok = true;
};

// Ordinary least squares, exact closed form; throws DegenerateFit for fewer
// than 3 points or all-equal x.
FitReport fit_line(const std::vector<std::pair<BigReal, BigReal>>& points,
                   FitReport::Model model);

// Builds theorem points from the spec (rational points filtered to the given
// lambda; irrational points restricted to theorem-eligible records), runs
// residual_row per point at auto precision, fits log|residual| against n
// (rational t) or log n (irrational t).
SweepResult run_sweep(const ExperimentSpec& spec);

std::string to_csv(const ExperimentSpec& spec, const SweepResult& result);
std::string to_json(const ExperimentSpec& spec, const SweepResult& result);

// "a", "a+bi", "a-bi", "bi", "i" with decimal a, b.
BigComplex parse_complex(const std::string& text, mpfr_prec_t prec);
// "start:stop[:step]" or comma-separated values.
std::vector<long long> parse_n_spec(const std::string& text);
// Exact value of a decimal or "p/q" literal.
Rational decimal_to_rational(const std::string& text);
// Q_ASYM_DEFAULT_PREC precision floor (0 when unset).
mpfr_prec_t env_precision_floor();

}  // namespace qasym

#endif
