#ifndef QASYM_ASYMPTOTICS_HPP
#define QASYM_ASYMPTOTICS_HPP

#include <optional>
#include <utility>

#include "qasym/diophantine.hpp"
#include "qasym/qseries.hpp"

namespace qasym {

enum class Family { aq, cbh };

// One asymptotic checkpoint: m = floor(n t) always; for rational t the offset
// is lambda = frac(n t) exactly, for irrational t it is beta and the point
// must originate from a theorem-eligible ApproxRecord.
class TheoremPoint {
public:
    static TheoremPoint rational_point(Family family, const ScalingParam& t, long long n,
                                       BigComplex u, BigReal q,
                                       std::optional<CBHParams> cbh = std::nullopt);
    static TheoremPoint record_point(Family family, const ScalingParam& t,
                                     const ApproxRecord& rec, const BigReal& beta, BigComplex u,
                                     BigReal q, std::optional<CBHParams> cbh = std::nullopt);

    Family family() const { return family_; }
    long long n() const { return n_; }
    long long m() const { return m_; }
    long long half_m() const { return m_ >= 0 ? m_ / 2 : -((-m_ + 1) / 2); }
    int chi_m() const { return chi(m_); }
    const BigReal& offset() const { return offset_; }
    const std::optional<Rational>& offset_exact() const { return offset_exact_; }
    const ScalingParam& t() const { return t_; }
    const BigComplex& u() const { return u_; }
    const BigReal& q() const { return q_; }
    const std::optional<CBHParams>& cbh() const { return cbh_; }
    const BigReal& gamma() const { return gamma_; }
    const std::optional<BigReal>& gamma_bound() const { return gamma_bound_; }
    bool rational_pathway() const { return offset_exact_.has_value(); }

    // n t at working precision, from the exact oracle.
    BigReal nt(mpfr_prec_t prec) const;
    // floor(m/2) * (n t - floor(m/2)), the q-scale exponent of the prefactor.
    BigReal prefactor_exponent(mpfr_prec_t prec) const;

private:
    TheoremPoint(Family family, ScalingParam t, BigComplex u, BigReal q)
        : family_(family), t_(std::move(t)), u_(std::move(u)), q_(std::move(q)) {}
    Family family_;
    long long n_ = 0;
    long long m_ = 0;
    BigReal offset_;
    std::optional<Rational> offset_exact_;
    ScalingParam t_;
    BigComplex u_;
    BigReal q_;
    std::optional<CBHParams> cbh_;
    BigReal gamma_;
    std::optional<BigReal> gamma_bound_;
};

struct VerifyRow {
    long long n = 0;
    long long m = 0;
    BigReal offset;
    BigReal gamma;
    LogScaled lhs_scaled;        // the direct evaluation, q-scaled
    BigComplex main_theta;       // theta factor of the main term
    BigComplex residual;         // normalized direct value minus main_theta
    std::optional<BigReal> paper_bound;  // rational pathway only
    bool bound_satisfied = true;
    std::optional<BigReal> residual_rel;  // only when |main_theta| > 2^{-P/4}
    mpfr_prec_t precision_bits = 0;
};

// Precision sized from the q-scale of the prefactor, before any floor/override.
mpfr_prec_t auto_precision(const TheoremPoint& pt);

// Main term of the scaled expansion as a LogScaled value (base q).
LogScaled aq_main_term(const TheoremPoint& pt, mpfr_prec_t prec = 0);
LogScaled cbh_main_term(const TheoremPoint& pt, mpfr_prec_t prec = 0);

// Explicit error bounds of the rational-parameter theorems.  The AQ bound is
// stated in two places with different constants; the conservative form uses
// D = min((q;q)_inf, 1-q) and theta base q^2, and both literal variants are
// available for verbose reporting.
BigReal aq_error_bound(const TheoremPoint& pt, mpfr_prec_t prec = 0);
struct AqBoundVariants {
    BigReal conservative;
    BigReal product_denominator;  // (q;q)_inf denominator, theta base q^2
    BigReal linear_denominator;   // (1-q) denominator, theta base q
};
AqBoundVariants aq_error_bound_variants(const TheoremPoint& pt, mpfr_prec_t prec = 0);
BigReal cbh_error_bound(const TheoremPoint& pt, mpfr_prec_t prec = 0);

// Evaluates the direct series at the scaled argument, rearranges the theorem
// display exactly, and measures the residual against the theta main factor.
VerifyRow residual_row(const TheoremPoint& pt, mpfr_prec_t prec = 0);

// The discrete-Laplace split of the normalized direct value at k = floor(m/2):
// the two parts sum to the full normalized value; the first converges to the
// k >= 0 half of the bilateral theta sum, the second to the k <= -1 half.
std::pair<BigComplex, BigComplex> residual_decomposition(const TheoremPoint& pt,
                                                         mpfr_prec_t prec = 0);

}  // namespace qasym

#endif
