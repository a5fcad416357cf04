#include "qasym/numerics.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

namespace qasym {

BigReal BigReal::parse(const std::string& decimal, mpfr_prec_t prec) {
    BigReal r(prec);
    if (mpfr_set_str(r.raw(), decimal.c_str(), 10, MPFR_RNDN) != 0 && !decimal.empty()) {
        // mpfr_set_str returns nonzero for both inexact and invalid; re-check
        // validity with strtofr semantics.
        mpfr_t probe;
        mpfr_init2(probe, kMinPrecision);
        char* end = nullptr;
        mpfr_strtofr(probe, decimal.c_str(), &end, 10, MPFR_RNDN);
        bool ok = end != nullptr && *end == '\0' && end != decimal.c_str();
        mpfr_clear(probe);
        if (!ok) throw std::invalid_argument("not a decimal number: '" + decimal + "'");
        mpfr_strtofr(r.raw(), decimal.c_str(), &end, 10, MPFR_RNDN);
    }
    return r;
}

Rational BigReal::to_rational() const {
    if (!is_finite()) throw std::domain_error("cannot convert non-finite value to rational");
    if (is_zero()) return Rational(0);
    mpz_class mant;
    mpfr_exp_t e = mpfr_get_z_2exp(mant.get_mpz_t(), v_);
    Rational r(mant);
    if (e >= 0) {
        mpz_class sh;
        mpz_mul_2exp(sh.get_mpz_t(), r.get_num().get_mpz_t(), static_cast<mp_bitcnt_t>(e));
        return Rational(sh);
    }
    Rational d(1);
    mpz_mul_2exp(d.get_den().get_mpz_t(), d.get_den().get_mpz_t(), static_cast<mp_bitcnt_t>(-e));
    r *= d;
    r.canonicalize();
    return r;
}

std::string BigReal::str(std::size_t digits) const {
    if (digits == 0) digits = 1;
    if (!is_finite()) return mpfr_nan_p(v_) ? "nan" : (sign() > 0 ? "inf" : "-inf");
    if (is_zero()) return "0";
    mpfr_exp_t e = 0;
    char* s = mpfr_get_str(nullptr, &e, 10, digits, v_, MPFR_RNDN);
    std::string body(s);
    mpfr_free_str(s);
    std::string sgn;
    if (!body.empty() && body[0] == '-') {
        sgn = "-";
        body.erase(0, 1);
    }
    // strip trailing zeros, keep at least one digit
    std::size_t last = body.find_last_not_of('0');
    body.erase(std::min(body.size(), last + 1));
    std::string out = sgn + body.substr(0, 1);
    if (body.size() > 1) out += "." + body.substr(1);
    out += "e" + std::to_string(static_cast<long>(e) - 1);
    return out;
}

std::string BigReal::str() const {
    auto digits = static_cast<std::size_t>(
        std::ceil(static_cast<double>(precision()) * 0.30102999566398119521));
    return str(digits);
}

BigComplex pow_int(const BigComplex& base, long e) {
    mpfr_prec_t prec = base.precision();
    if (e == 0) return {BigReal::of(1L, prec), BigReal(prec)};
    bool invert = e < 0;
    unsigned long k = invert ? static_cast<unsigned long>(-(e + 1)) + 1UL
                             : static_cast<unsigned long>(e);
    BigComplex acc(BigReal::of(1L, prec), BigReal(prec));
    BigComplex sq = base;
    while (k != 0) {
        if (k & 1UL) acc = acc * sq;
        k >>= 1;
        if (k != 0) sq = sq * sq;
    }
    return invert ? acc.reciprocal() : acc;
}

LogScaled normalize_scaled(const LogScaled& v) {
    if (v.base <= 0L || v.base >= 1L) throw std::domain_error("LogScaled base must be in (0,1)");
    if (v.mantissa.is_zero()) {
        mpfr_prec_t p = v.mantissa.precision();
        return {BigComplex(p), BigReal(p), v.base};
    }
    mpfr_prec_t p = std::max(v.mantissa.precision(), v.exponent.precision());
    BigReal mag = abs(v.mantissa.with_precision(p));
    // |m| = base^x; shifting by k = -ceil(x) puts |m*base^k| into [1, 1/base).
    BigReal x = log(mag) / log(v.base.with_precision(p));
    BigReal k = -ceil(x);
    BigComplex m = v.mantissa.with_precision(p) * pow(v.base.with_precision(p), k);
    // guard against rounding on the window edges
    BigReal one = BigReal::of(1L, p);
    while (abs(m) < one) {
        m = m / v.base;
        k -= one;
    }
    while (abs(m) * v.base >= one) {
        m = m * v.base;
        k += one;
    }
    return {m, v.exponent.with_precision(p) - k, v.base};
}

BigComplex scaled_value(const LogScaled& v) {
    mpfr_prec_t p = std::max(v.mantissa.precision(), v.exponent.precision());
    return v.mantissa * pow(v.base.with_precision(p), v.exponent);
}

LogScaled to_scaled(const BigComplex& value, const BigReal& base) {
    return normalize_scaled({value, BigReal(value.precision()), base});
}

mpfr_prec_t required_precision(long long n, const BigReal& t, const BigReal& q) {
    if (q <= 0L || q >= 1L) throw std::domain_error("q must lie in (0,1)");
    if (n < 1) throw std::domain_error("n must be positive");
    if (t <= 0L) throw std::domain_error("t must be positive");
    mpfr_prec_t wp = std::max<mpfr_prec_t>(t.precision(), 128);
    BigReal nt = t.with_precision(wp) * static_cast<long>(n);
    BigReal bits = nt * nt / 4L * (-log2(q.with_precision(wp)));
    Integer main = ceil(bits).floor_integer();
    Integer guard = ceil(nt).floor_integer();
    if (guard < kGuardBits) guard = kGuardBits;
    Integer total = main + guard;
    if (!total.fits_slong_p()) throw std::domain_error("requested precision out of range");
    return std::max<mpfr_prec_t>(static_cast<mpfr_prec_t>(total.get_si()), kMinPrecision);
}

BigReal geometric_tail_bound(const BigReal& first_term_mag, const BigReal& ratio) {
    if (ratio < 0L || ratio >= 1L)
        throw std::domain_error("geometric tail bound needs 0 <= ratio < 1");
    if (first_term_mag < 0L) throw std::domain_error("first term magnitude must be >= 0");
    return first_term_mag / (1L - ratio);
}

}  // namespace qasym
