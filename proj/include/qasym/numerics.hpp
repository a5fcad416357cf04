#ifndef QASYM_NUMERICS_HPP
#define QASYM_NUMERICS_HPP

#include <mpfr.h>
#include <gmpxx.h>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

namespace qasym {

// Every value carries its own precision; arithmetic widens to the larger
// operand precision so precision is never silently reduced.
inline constexpr mpfr_prec_t kMinPrecision = 64;

// Cancellation guard policy: computations are sized with at least this many
// guard bits, and a series evaluation that cancels to within 16 bits of the
// guard floor retries at doubled precision, at most kMaxRetries times.
inline constexpr mpfr_prec_t kGuardBits = 256;
inline constexpr int kMaxRetries = 3;

using Integer = mpz_class;
using Rational = mpq_class;

struct PrecisionRetryExhausted : std::runtime_error {
    double worst_cancellation_bits;
    explicit PrecisionRetryExhausted(double bits)
        : std::runtime_error("cancellation retry budget exhausted (worst " +
                             std::to_string(bits) + " bits cancelled)"),
          worst_cancellation_bits(bits) {}
};

class BigReal {
public:
    BigReal() { mpfr_init2(v_, kMinPrecision); mpfr_set_zero(v_, 1); }
    explicit BigReal(mpfr_prec_t prec) {
        mpfr_init2(v_, clamp(prec));
        mpfr_set_zero(v_, 1);
    }
    BigReal(const BigReal& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    BigReal(BigReal&& o) noexcept { mpfr_init2(v_, kMinPrecision); mpfr_swap(v_, o.v_); }
    BigReal& operator=(const BigReal& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    BigReal& operator=(BigReal&& o) noexcept { mpfr_swap(v_, o.v_); return *this; }
    ~BigReal() { mpfr_clear(v_); }

    static BigReal of(long value, mpfr_prec_t prec) {
        BigReal r(prec);
        mpfr_set_si(r.v_, value, MPFR_RNDN);
        return r;
    }
    static BigReal of(long long value, mpfr_prec_t prec) {
        return of(static_cast<long>(value), prec);
    }
    static BigReal of(int value, mpfr_prec_t prec) { return of(static_cast<long>(value), prec); }
    static BigReal of(double value, mpfr_prec_t prec) {
        BigReal r(prec);
        mpfr_set_d(r.v_, value, MPFR_RNDN);
        return r;
    }
    static BigReal of(const Integer& value, mpfr_prec_t prec) {
        BigReal r(prec);
        mpfr_set_z(r.v_, value.get_mpz_t(), MPFR_RNDN);
        return r;
    }
    static BigReal of(const Rational& value, mpfr_prec_t prec) {
        BigReal r(prec);
        mpfr_set_q(r.v_, value.get_mpq_t(), MPFR_RNDN);
        return r;
    }
    // Decimal string, round-to-nearest at the requested precision.
    static BigReal parse(const std::string& decimal, mpfr_prec_t prec);
    // 2^e exactly.
    static BigReal pow2(long e, mpfr_prec_t prec) {
        BigReal r(prec);
        mpfr_set_ui_2exp(r.v_, 1, e, MPFR_RNDN);
        return r;
    }

    mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
    BigReal with_precision(mpfr_prec_t prec) const {
        BigReal r(prec);
        mpfr_set(r.v_, v_, MPFR_RNDN);
        return r;
    }

    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    bool is_finite() const { return mpfr_number_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    // Exact conversion; every finite BigReal is a dyadic rational.
    Rational to_rational() const;
    Integer floor_integer() const {
        mpz_class z;
        mpfr_get_z(z.get_mpz_t(), v_, MPFR_RNDD);
        return z;
    }

    BigReal operator-() const { BigReal r(*this); mpfr_neg(r.v_, r.v_, MPFR_RNDN); return r; }

    friend BigReal operator+(const BigReal& a, const BigReal& b) { return bin(mpfr_add, a, b); }
    friend BigReal operator-(const BigReal& a, const BigReal& b) { return bin(mpfr_sub, a, b); }
    friend BigReal operator*(const BigReal& a, const BigReal& b) { return bin(mpfr_mul, a, b); }
    friend BigReal operator/(const BigReal& a, const BigReal& b) { return bin(mpfr_div, a, b); }
    BigReal& operator+=(const BigReal& b) { mpfr_widen(b); mpfr_add(v_, v_, b.v_, MPFR_RNDN); return *this; }
    BigReal& operator-=(const BigReal& b) { mpfr_widen(b); mpfr_sub(v_, v_, b.v_, MPFR_RNDN); return *this; }
    BigReal& operator*=(const BigReal& b) { mpfr_widen(b); mpfr_mul(v_, v_, b.v_, MPFR_RNDN); return *this; }
    BigReal& operator/=(const BigReal& b) { mpfr_widen(b); mpfr_div(v_, v_, b.v_, MPFR_RNDN); return *this; }

    friend BigReal operator+(const BigReal& a, long b) { BigReal r(a); mpfr_add_si(r.v_, r.v_, b, MPFR_RNDN); return r; }
    friend BigReal operator-(const BigReal& a, long b) { BigReal r(a); mpfr_sub_si(r.v_, r.v_, b, MPFR_RNDN); return r; }
    friend BigReal operator*(const BigReal& a, long b) { BigReal r(a); mpfr_mul_si(r.v_, r.v_, b, MPFR_RNDN); return r; }
    friend BigReal operator/(const BigReal& a, long b) { BigReal r(a); mpfr_div_si(r.v_, r.v_, b, MPFR_RNDN); return r; }
    friend BigReal operator-(long a, const BigReal& b) { BigReal r(b.precision()); mpfr_si_sub(r.v_, a, b.v_, MPFR_RNDN); return r; }
    friend BigReal operator/(long a, const BigReal& b) { BigReal r(b.precision()); mpfr_si_div(r.v_, a, b.v_, MPFR_RNDN); return r; }

    friend bool operator==(const BigReal& a, const BigReal& b) { return mpfr_cmp(a.v_, b.v_) == 0; }
    friend bool operator!=(const BigReal& a, const BigReal& b) { return mpfr_cmp(a.v_, b.v_) != 0; }
    friend bool operator<(const BigReal& a, const BigReal& b) { return mpfr_cmp(a.v_, b.v_) < 0; }
    friend bool operator<=(const BigReal& a, const BigReal& b) { return mpfr_cmp(a.v_, b.v_) <= 0; }
    friend bool operator>(const BigReal& a, const BigReal& b) { return mpfr_cmp(a.v_, b.v_) > 0; }
    friend bool operator>=(const BigReal& a, const BigReal& b) { return mpfr_cmp(a.v_, b.v_) >= 0; }
    friend bool operator<(const BigReal& a, long b) { return mpfr_cmp_si(a.v_, b) < 0; }
    friend bool operator>(const BigReal& a, long b) { return mpfr_cmp_si(a.v_, b) > 0; }
    friend bool operator<=(const BigReal& a, long b) { return mpfr_cmp_si(a.v_, b) <= 0; }
    friend bool operator>=(const BigReal& a, long b) { return mpfr_cmp_si(a.v_, b) >= 0; }
    friend bool operator==(const BigReal& a, long b) { return mpfr_cmp_si(a.v_, b) == 0; }

    friend BigReal abs(const BigReal& a) { BigReal r(a); mpfr_abs(r.v_, r.v_, MPFR_RNDN); return r; }
    friend BigReal sqrt(const BigReal& a) { BigReal r(a); mpfr_sqrt(r.v_, r.v_, MPFR_RNDN); return r; }
    friend BigReal exp(const BigReal& a) { BigReal r(a); mpfr_exp(r.v_, r.v_, MPFR_RNDN); return r; }
    friend BigReal log(const BigReal& a) { BigReal r(a); mpfr_log(r.v_, r.v_, MPFR_RNDN); return r; }
    friend BigReal log2(const BigReal& a) { BigReal r(a); mpfr_log2(r.v_, r.v_, MPFR_RNDN); return r; }
    friend BigReal floor(const BigReal& a) { BigReal r(a); mpfr_floor(r.v_, r.v_); return r; }
    friend BigReal ceil(const BigReal& a) { BigReal r(a); mpfr_ceil(r.v_, r.v_); return r; }
    friend BigReal hypot(const BigReal& a, const BigReal& b) { return bin(mpfr_hypot, a, b); }
    friend BigReal min(const BigReal& a, const BigReal& b) { return a <= b ? a : b; }
    friend BigReal max(const BigReal& a, const BigReal& b) { return a >= b ? a : b; }
    friend BigReal pow(const BigReal& base, const BigReal& e) { return bin(mpfr_pow, base, e); }
    friend BigReal pow_int(const BigReal& base, long e) {
        BigReal r(base.precision());
        mpfr_pow_si(r.v_, base.v_, e, MPFR_RNDN);
        return r;
    }
    // Smallest representable step up, used for one-ulp-rounded bounds.
    friend BigReal next_above(const BigReal& a) { BigReal r(a); mpfr_nextabove(r.v_); return r; }

    // log2(|x|) as a double; -inf for zero. Cheap magnitude probe.
    double mag_log2() const {
        if (is_zero()) return -1e300;
        long e = static_cast<long>(mpfr_get_exp(v_));
        return static_cast<double>(e);
    }

    // Deterministic scientific form with the given number of significant digits.
    std::string str(std::size_t digits) const;
    // Digit count derived from the value's precision: ceil(P*log10(2)).
    std::string str() const;

    mpfr_srcptr raw() const { return v_; }
    mpfr_ptr raw() { return v_; }

private:
    static mpfr_prec_t clamp(mpfr_prec_t p) { return std::max(p, kMinPrecision); }
    void mpfr_widen(const BigReal& b) {
        if (mpfr_get_prec(b.v_) > mpfr_get_prec(v_)) {
            mpfr_t tmp;
            mpfr_init2(tmp, mpfr_get_prec(b.v_));
            mpfr_set(tmp, v_, MPFR_RNDN);
            mpfr_swap(tmp, v_);
            mpfr_clear(tmp);
        }
    }
    template <typename Op>
    static BigReal bin(Op op, const BigReal& a, const BigReal& b) {
        BigReal r(std::max(a.precision(), b.precision()));
        op(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    mpfr_t v_;
};

class BigComplex {
public:
    BigComplex() = default;
    explicit BigComplex(mpfr_prec_t prec) : re_(prec), im_(prec) {}
    BigComplex(BigReal re, BigReal im) : re_(std::move(re)), im_(std::move(im)) {}
    explicit BigComplex(BigReal re) : re_(std::move(re)), im_(re_.precision()) {}
    static BigComplex of(double re, double im, mpfr_prec_t prec) {
        return {BigReal::of(re, prec), BigReal::of(im, prec)};
    }

    const BigReal& real() const { return re_; }
    const BigReal& imag() const { return im_; }
    mpfr_prec_t precision() const { return std::max(re_.precision(), im_.precision()); }
    BigComplex with_precision(mpfr_prec_t prec) const {
        return {re_.with_precision(prec), im_.with_precision(prec)};
    }
    bool is_zero() const { return re_.is_zero() && im_.is_zero(); }
    bool is_real() const { return im_.is_zero(); }

    BigComplex operator-() const { return {-re_, -im_}; }
    friend BigComplex operator+(const BigComplex& a, const BigComplex& b) {
        return {a.re_ + b.re_, a.im_ + b.im_};
    }
    friend BigComplex operator-(const BigComplex& a, const BigComplex& b) {
        return {a.re_ - b.re_, a.im_ - b.im_};
    }
    friend BigComplex operator*(const BigComplex& a, const BigComplex& b) {
        return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
    }
    friend BigComplex operator*(const BigComplex& a, const BigReal& b) { return {a.re_ * b, a.im_ * b}; }
    friend BigComplex operator/(const BigComplex& a, const BigReal& b) { return {a.re_ / b, a.im_ / b}; }
    friend BigComplex operator/(const BigComplex& a, const BigComplex& b) {
        BigReal n = b.re_ * b.re_ + b.im_ * b.im_;
        return {(a.re_ * b.re_ + a.im_ * b.im_) / n, (a.im_ * b.re_ - a.re_ * b.im_) / n};
    }
    friend bool operator==(const BigComplex& a, const BigComplex& b) {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }
    BigComplex reciprocal() const {
        BigReal n = re_ * re_ + im_ * im_;
        return {re_ / n, -im_ / n};
    }
    friend BigReal abs(const BigComplex& a) { return hypot(a.re_, a.im_); }
    friend BigComplex pow_int(const BigComplex& base, long e);

private:
    BigReal re_;
    BigReal im_;
};

// value = mantissa * base^exponent, base in (0,1).  Normal form keeps
// |mantissa| in [1, 1/base) unless the value is exactly zero.
struct LogScaled {
    BigComplex mantissa;
    BigReal exponent;
    BigReal base;
};

LogScaled normalize_scaled(const LogScaled& v);
// Collapses to a plain value; may overflow the exponent range for extreme
// inputs, callers that only need magnitudes should work on the fields.
BigComplex scaled_value(const LogScaled& v);
LogScaled to_scaled(const BigComplex& value, const BigReal& base);

// Working precision for evaluating the scaled series at q^{-nt}:
// ceil((nt)^2/4 * log2(1/q)) + max(kGuardBits, ceil(nt)).
mpfr_prec_t required_precision(long long n, const BigReal& t, const BigReal& q);

// first_term_mag / (1 - ratio); upper bound for a tail whose term ratios are
// all <= ratio < 1.
BigReal geometric_tail_bound(const BigReal& first_term_mag, const BigReal& ratio);

// Runs fn(prec) -> {value, cancellation_bits}; doubles prec while the
// cancellation encroaches within 16 bits of the guard floor.
template <typename Fn>
auto run_with_cancellation_retry(mpfr_prec_t prec, Fn&& fn) {
    double worst = 0.0;
    for (int attempt = 0;; ++attempt) {
        auto [value, cancelled] = fn(prec);
        worst = std::max(worst, cancelled);
        if (cancelled < static_cast<double>(kGuardBits - 16)) return value;
        if (attempt >= kMaxRetries) throw PrecisionRetryExhausted(worst);
        prec *= 2;
    }
}

}  // namespace qasym

#endif
