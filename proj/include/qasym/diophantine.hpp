#ifndef QASYM_DIOPHANTINE_HPP
#define QASYM_DIOPHANTINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "qasym/numerics.hpp"

namespace qasym {

struct PrecisionExhausted : std::runtime_error {
    explicit PrecisionExhausted(const std::string& what) : std::runtime_error(what) {}
};
struct UnresolvableBoundary : std::runtime_error {
    explicit UnresolvableBoundary(const std::string& what) : std::runtime_error(what) {}
};
struct DegenerateFit : std::runtime_error {
    explicit DegenerateFit(const std::string& what) : std::runtime_error(what) {}
};

// The scaling parameter t > 0 as an exact object with an approximation
// oracle that delivers any requested precision with a certified error bound.
//
// String grammar (CLI):  "p/q" | "sqrt(c)" | "(a+b*sqrt(c))/d" |
//                        "liouville(base)" | decimal-literal["~err"]
class ScalingParam {
public:
    enum class Kind { rational, quadratic_surd, liouville_series, decimal_literal };

    static ScalingParam rational(Integer num, Integer den);
    // (a + b*sqrt(c)) / d; degenerates to rational when b = 0 or c is square.
    static ScalingParam quadratic_surd(Integer a, Integer b, Integer c, Integer d);
    // sum_{k>=1} base^{-k!}
    static ScalingParam liouville(unsigned base);
    // exact decimal digits with a stated absolute error radius
    static ScalingParam decimal(const std::string& digits, BigReal stated_error);
    static ScalingParam parse(const std::string& text);

    Kind kind() const { return kind_; }
    // Irrational by construction (non-degenerate surd or a Liouville series).
    bool certified_irrational() const {
        return kind_ == Kind::quadratic_surd || kind_ == Kind::liouville_series;
    }
    // Approximation with |t - result| <= 2^{-bits}; deterministic.
    BigReal approx(mpfr_prec_t bits) const;
    const Rational& rational_value() const;
    const Rational& decimal_value() const;
    const BigReal& decimal_error() const;
    unsigned liouville_base() const { return base_; }
    void surd_parts(Integer& a, Integer& b, Integer& c, Integer& d) const;
    std::string str() const;

private:
    ScalingParam() = default;
    Kind kind_ = Kind::rational;
    Rational rat_;            // rational / decimal_literal value
    Integer a_, b_, c_, d_;   // quadratic surd, normalized d > 0
    unsigned base_ = 0;       // liouville series
    BigReal dec_err_;         // decimal_literal
};

// liouville_param(base) = sum_{k>=1} base^{-k!} as a ScalingParam.
inline ScalingParam liouville_param(unsigned base) { return ScalingParam::liouville(base); }

struct CFExpansion {
    std::vector<Integer> partial_quotients;  // a_0 >= 0, a_k >= 1 for k >= 1
    bool exact_termination = false;          // finite expansion fully emitted
};

struct ConvergentPQ {
    Integer p;
    Integer q;
};

// One inhomogeneous approximation n*t = m + beta + gamma.
struct ApproxRecord {
    long long n = 0;
    long long m = 0;
    BigReal gamma;
    BigReal gamma_bound;          // |gamma| rounded up one ulp
    bool theorem_eligible = false;  // m == floor(n t)
};

struct ChaoticIndexEstimate {
    BigReal r_hat;
    int records_used = 0;
    BigReal intercept;
    bool distance_floor = false;  // rational t whose grid never reaches beta
};

int chi(long long n);

// m = floor(n t) and the fractional part n t - m, certified by escalating the
// oracle precision until n t is separated from the integers.
std::pair<long long, BigReal> frac_floor(const ScalingParam& t, long long n,
                                         mpfr_prec_t frac_bits = 256);
// Exact variant for rational t.
std::pair<long long, Rational> frac_floor_exact(const Rational& t, long long n);

// {frac(n t) : 1 <= n <= N}, sorted ascending, deduplicated exactly for
// rational t.
std::vector<BigReal> s_of_t(const ScalingParam& t, long long N, mpfr_prec_t bits = 192);

CFExpansion cf_expand(const ScalingParam& t, int K);
std::vector<ConvergentPQ> convergents(const CFExpansion& cf);

// Scans n = 1..N keeping strict improvements of the circular distance
// | frac(n t) - beta | on R/Z; ties keep the earlier n.
std::vector<ApproxRecord> inhom_records_bruteforce(const ScalingParam& t, const BigReal& beta,
                                                   long long N);

// Structural generation of the same record sequence for certified-irrational
// t: a minimal-point chain whose inter-record gaps are convergent or
// intermediate-fraction denominators of t (the Ostrowski numeration of beta
// unrolled one denominator at a time).  The trivial n = 1 record is skipped;
// all emitted records satisfy |gamma| <= 3/n.
std::vector<ApproxRecord> inhom_ostrowski(const ScalingParam& t, const BigReal& beta, int count);

// Least-squares fit of log d(n) against log n over brute-force records with
// n >= 10; r_hat is the negated slope.  Rational t with beta off the grid
// reports r_hat = 0 with the distance_floor flag.
ChaoticIndexEstimate chaotic_exponent_estimate(const ScalingParam& t, const BigReal& beta,
                                               long long N);

}  // namespace qasym

#endif
