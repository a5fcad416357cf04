#ifndef QASYM_QSERIES_HPP
#define QASYM_QSERIES_HPP

#include <utility>
#include <vector>

#include "qasym/numerics.hpp"

namespace qasym {

// The base q, restricted to the open interval (0,1).
class QBase {
public:
    explicit QBase(BigReal q) : q_(std::move(q)) {
        if (q_ <= 0L || q_ >= 1L) throw std::domain_error("q must lie strictly in (0,1)");
    }
    static QBase of(double q, mpfr_prec_t prec) { return QBase(BigReal::of(q, prec)); }
    const BigReal& value() const { return q_; }
    mpfr_prec_t precision() const { return q_.precision(); }

private:
    BigReal q_;
};

// Parameters of the confluent basic hypergeometric family
//   f(z) = sum_k (a_1,...,a_r;q)_k q^{l k^2} z^k / (b_1,...,b_s;q)_k,  l > 0.
// Theorem statements additionally require every a_j, b_j in [0,1).
struct CBHParams {
    std::vector<BigReal> a;
    std::vector<BigReal> b;
    BigReal l;

    CBHParams(std::vector<BigReal> a_, std::vector<BigReal> b_, BigReal l_)
        : a(std::move(a_)), b(std::move(b_)), l(std::move(l_)) {
        if (l <= 0L) throw std::domain_error("CBH quadratic coefficient l must be > 0");
    }
    bool theorem_window() const {
        for (const auto& x : a)
            if (x < 0L || x >= 1L) return false;
        for (const auto& x : b)
            if (x < 0L || x >= 1L) return false;
        return true;
    }
};

// Default truncation tolerance at working precision P: 2^{-P/2}, leaving half
// the budget for downstream cancellation.
inline BigReal default_rel_eps(mpfr_prec_t prec) { return BigReal::pow2(-static_cast<long>(prec / 2), 64); }

// (a;q)_n.  Negative n uses (a;q)_n = (a;q)_inf / (a q^n;q)_inf, which
// collapses to 1 / prod_{i=1..|n|} (1 - a q^{-i}); a vanishing factor throws.
BigComplex qpoch_n(const BigComplex& a, const QBase& q, long n);
inline BigReal qpoch_n(const BigReal& a, const QBase& q, long n) {
    return qpoch_n(BigComplex(a), q, n).real();
}

// (a;q)_inf with relative error below rel_eps.
BigComplex qpoch_inf(const BigComplex& a, const QBase& q, const BigReal& rel_eps);
inline BigReal qpoch_inf(const BigReal& a, const QBase& q, const BigReal& rel_eps) {
    return qpoch_inf(BigComplex(a), q, rel_eps).real();
}

// Upper bounds r1 >= |(a q^n;q)_inf - 1| and r2 >= |1/(a q^n;q)_inf - 1|
// for a > 0, and 0 < a q < 1 for r2.
std::pair<BigReal, BigReal> remainder_bounds(const BigReal& a, const QBase& q, long n);

// Ramanujan entire function  A_q(z) = sum_k q^{k^2} (-z)^k / (q;q)_k.
// Truncation: past the term-magnitude peak, stop once the geometric tail
// bound drops below rel_eps times the largest partial-sum magnitude seen.
// Applies the cancellation retry policy.
BigComplex aq_direct(const BigComplex& z, const QBase& q, const BigReal& rel_eps);
inline BigComplex aq_direct(const BigComplex& z, const QBase& q) {
    return aq_direct(z, q, default_rel_eps(std::max(z.precision(), q.precision())));
}

enum class ThetaMethod { series, product };

// theta(z;q) = sum_{k=-inf}^{inf} q^{k^2/2} z^k, z != 0.  The product method
// evaluates the Jacobi triple product (q, -q^{1/2} z, -q^{1/2}/z; q)_inf.
BigComplex theta(const BigComplex& z, const QBase& q, ThetaMethod method);
inline BigComplex theta(const BigComplex& z, const QBase& q) {
    return theta(z, q, ThetaMethod::series);
}

// Confluent basic hypergeometric series over complex parameter lists; the
// CBHParams overload is the theorem-facing entry point.
BigComplex cbh_direct(const std::vector<BigComplex>& a, const std::vector<BigComplex>& b,
                      const BigReal& l, const BigComplex& z, const QBase& q,
                      const BigReal& rel_eps);
BigComplex cbh_direct(const CBHParams& p, const BigComplex& z, const QBase& q,
                      const BigReal& rel_eps);
inline BigComplex cbh_direct(const CBHParams& p, const BigComplex& z, const QBase& q) {
    return cbh_direct(p, z, q, default_rel_eps(std::max(z.precision(), q.precision())));
}

// Mapping that brings an entire rφs (s+1-r > 0) onto the confluent form:
// quadratic coefficient l = (s+1-r)/2 and series argument -z q^{(s+1-r)/2}.
struct FForm {
    BigReal l;
    BigComplex argument;
};
FForm phi_to_f(long r, long s, const BigComplex& z, const QBase& q);

// c(r,s;q) = (a_1,...,a_r;q)_inf / (b_1,...,b_s;q)_inf.
BigReal c_factor(const CBHParams& p, const QBase& q);

}  // namespace qasym

#endif
