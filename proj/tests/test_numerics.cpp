#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qasym/numerics.hpp"

using namespace qasym;

namespace {

BigReal rel_err(const BigComplex& a, const BigComplex& b) {
    BigReal d = abs(a - b);
    BigReal m = max(abs(a), abs(b));
    return m.is_zero() ? d : d / m;
}

}  // namespace

TEST_CASE("required_precision matches the sizing formula") {
    BigReal q_half = BigReal::of(0.5, 128);
    BigReal q_quarter = BigReal::of(0.25, 128);
    CHECK(required_precision(1, BigReal::of(1L, 128), q_half) == 257);
    CHECK(required_precision(100, BigReal::of(0.5, 128), q_half) == 881);
    CHECK(required_precision(100, BigReal::of(0.5, 128), q_quarter) == 1506);
    CHECK_THROWS_AS(required_precision(10, BigReal::of(1L, 128), BigReal::of(1.5, 128)),
                    std::domain_error);
    CHECK_THROWS_AS(required_precision(10, BigReal::of(1L, 128), BigReal::of(0L, 128)),
                    std::domain_error);
}

TEST_CASE("required_precision is monotone nondecreasing in n") {
    BigReal t = BigReal::of(0.7, 128);
    BigReal q = BigReal::of(0.3, 128);
    mpfr_prec_t prev = 0;
    for (long long n : {1, 2, 5, 17, 64, 200, 1000}) {
        mpfr_prec_t p = required_precision(n, t, q);
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("geometric_tail_bound basics") {
    CHECK(geometric_tail_bound(BigReal::of(0L, 64), BigReal::of(0.9, 64)).is_zero());
    CHECK(geometric_tail_bound(BigReal::of(1L, 64), BigReal::of(0.5, 64)) == BigReal::of(2L, 64));
    BigReal third = geometric_tail_bound(BigReal::of(0.25, 64), BigReal::of(0.25, 64));
    CHECK(abs(third - BigReal::of(1L, 128) / 3L) < BigReal::pow2(-60, 64));
    CHECK_THROWS_AS(geometric_tail_bound(BigReal::of(1L, 64), BigReal::of(1L, 64)),
                    std::domain_error);
    CHECK_THROWS_AS(geometric_tail_bound(BigReal::of(1L, 64), BigReal::of(-0.5, 64)),
                    std::domain_error);
}

TEST_CASE("geometric_tail_bound dominates exact geometric sums") {
    std::mt19937_64 rng(20240901);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double first = ud(rng) * 10.0;
        double ratio = ud(rng) * 0.999;
        BigReal bound = geometric_tail_bound(BigReal::of(first, 96), BigReal::of(ratio, 96));
        BigReal sum(96);
        BigReal term = BigReal::of(first, 96);
        BigReal r = BigReal::of(ratio, 96);
        for (int k = 0; k < 400; ++k) {
            sum += term;
            term *= r;
        }
        CHECK(sum <= bound + BigReal::pow2(-40, 64));
    }
}

TEST_CASE("normalize_scaled on the stated cases") {
    BigReal half = BigReal::of(0.5, 128);
    LogScaled a = normalize_scaled({BigComplex(BigReal::of(4L, 128)), BigReal::of(0L, 128), half});
    CHECK(a.mantissa.real() == BigReal::of(1L, 64));
    CHECK(a.exponent == BigReal::of(-2L, 64));

    LogScaled z =
        normalize_scaled({BigComplex(128), BigReal::of(17L, 128), BigReal::of(0.3, 128)});
    CHECK(z.mantissa.is_zero());
    CHECK(z.exponent.is_zero());

    LogScaled c = normalize_scaled({BigComplex(half), BigReal::of(3L, 128), half});
    CHECK(c.mantissa.real() == BigReal::of(1L, 64));
    CHECK(c.exponent == BigReal::of(4L, 64));
}

TEST_CASE("normalize_scaled window, idempotence, value round-trip") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ud(-40.0, 40.0);
    std::uniform_real_distribution<double> bd(0.05, 0.95);
    for (int i = 0; i < 200; ++i) {
        mpfr_prec_t P = 192;
        BigReal base = BigReal::of(bd(rng), P);
        BigComplex m = BigComplex::of(ud(rng), ud(rng), P);
        if (m.is_zero()) continue;
        BigReal e = BigReal::of(ud(rng), P);
        LogScaled v{m, e, base};
        LogScaled n1 = normalize_scaled(v);
        BigReal mag = abs(n1.mantissa);
        CHECK(mag >= BigReal::of(1L, 64));
        CHECK(mag * base < BigReal::of(1L, 64));
        LogScaled n2 = normalize_scaled(n1);
        CHECK(rel_err(n1.mantissa, n2.mantissa) < BigReal::pow2(-(P - 8), 64));
        CHECK(abs(scaled_value(n1).real() - scaled_value(v).real()) <=
              abs(scaled_value(v)) * BigReal::pow2(-(P - 8), 64));
        // full round trip through to_scaled
        BigComplex x = scaled_value(v);
        CHECK(rel_err(scaled_value(to_scaled(x, base)), x) < BigReal::pow2(-(P - 8), 64));
    }
}

TEST_CASE("normalize_scaled rejects bases outside (0,1)") {
    CHECK_THROWS_AS(
        normalize_scaled({BigComplex(BigReal::of(1L, 64)), BigReal(64), BigReal::of(1.5, 64)}),
        std::domain_error);
}

TEST_CASE("cancellation retry doubles precision then signals") {
    int calls = 0;
    int got = run_with_cancellation_retry(64, [&](mpfr_prec_t p) {
        ++calls;
        return std::pair<int, double>(static_cast<int>(p), calls < 3 ? 1000.0 : 0.0);
    });
    CHECK(calls == 3);
    CHECK(got == 256);  // 64 -> 128 -> 256
    CHECK_THROWS_AS(run_with_cancellation_retry(
                        64, [](mpfr_prec_t) { return std::pair<int, double>(0, 1e6); }),
                    PrecisionRetryExhausted);
}

TEST_CASE("BigReal precision widening and exact rational round trip") {
    BigReal a = BigReal::of(1L, 64) / 3L;
    BigReal b = BigReal::of(1L, 512) / 7L;
    CHECK((a + b).precision() == 512);
    CHECK((a * b).precision() == 512);
    BigReal x = BigReal::parse("2.375", 128);  // dyadic, exact
    Rational r = x.to_rational();
    CHECK(r == Rational(19, 8));
    CHECK(BigReal::of(r, 128) == x);
    CHECK_THROWS_AS(BigReal::parse("0.5q", 64), std::invalid_argument);
}

TEST_CASE("BigReal decimal serialization is deterministic scientific form") {
    BigReal x = BigReal::of(0.5, 64);
    CHECK(x.str(4) == "5e-1");
    CHECK(BigReal::of(-1536L, 64).str(4) == "-1.536e3");
    CHECK(BigReal(64).str(10) == "0");
    CHECK(BigReal::of(1L, 256).str().size() >= 1);
}

TEST_CASE("BigComplex integer powers") {
    BigComplex i(BigReal::of(0L, 128), BigReal::of(1L, 128));
    BigComplex i2 = pow_int(i, 2);
    CHECK(i2.real() == BigReal::of(-1L, 64));
    CHECK(i2.imag().is_zero());
    BigComplex z = BigComplex::of(2.0, -1.0, 128);
    BigComplex back = pow_int(z, -3) * pow_int(z, 3);
    CHECK(rel_err(back, BigComplex(BigReal::of(1L, 128))) < BigReal::pow2(-100, 64));
    CHECK(pow_int(z, 0) == BigComplex(BigReal::of(1L, 128)));
}
