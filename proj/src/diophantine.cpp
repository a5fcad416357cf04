#include "qasym/diophantine.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

namespace qasym {

namespace {

Integer factorial(unsigned k) {
    Integer f;
    mpz_fac_ui(f.get_mpz_t(), k);
    return f;
}

bool is_perfect_square(const Integer& c, Integer& root) {
    if (c < 0) return false;
    mpz_sqrt(root.get_mpz_t(), c.get_mpz_t());
    return root * root == c;
}

long long to_longlong(const Integer& z, const char* what) {
    if (!z.fits_slong_p()) throw std::overflow_error(std::string(what) + " exceeds long long range");
    return static_cast<long long>(z.get_si());
}

// mpq -> BigReal with absolute error <= 2^{-bits-8}
BigReal to_bigreal_abs(const Rational& r, mpfr_prec_t bits) {
    long magdiff = static_cast<long>(mpz_sizeinbase(r.get_num().get_mpz_t(), 2)) -
                   static_cast<long>(mpz_sizeinbase(r.get_den().get_mpz_t(), 2));
    mpfr_prec_t prec = bits + static_cast<mpfr_prec_t>(std::max(magdiff, 0L)) + 16;
    return BigReal::of(r, prec);
}

mpfr_prec_t bitlen(long long n) {
    return static_cast<mpfr_prec_t>(64 - __builtin_clzll(static_cast<unsigned long long>(n) | 1ULL));
}

}  // namespace

// ---------------------------------------------------------------------------
// ScalingParam

ScalingParam ScalingParam::rational(Integer num, Integer den) {
    if (den == 0) throw std::domain_error("ScalingParam: zero denominator");
    Rational r(num, den);
    r.canonicalize();
    if (r <= 0) throw std::domain_error("ScalingParam: t must be positive");
    ScalingParam p;
    p.kind_ = Kind::rational;
    p.rat_ = r;
    return p;
}

ScalingParam ScalingParam::quadratic_surd(Integer a, Integer b, Integer c, Integer d) {
    if (d == 0) throw std::domain_error("ScalingParam: zero denominator");
    if (c < 0) throw std::domain_error("ScalingParam: negative radicand");
    Integer root;
    if (b == 0 || is_perfect_square(c, root)) {
        // degenerates to a rational value
        return rational(a + b * root, d);
    }
    if (d < 0) {
        a = -a;
        b = -b;
        d = -d;
    }
    ScalingParam p;
    p.kind_ = Kind::quadratic_surd;
    p.a_ = a;
    p.b_ = b;
    p.c_ = c;
    p.d_ = d;
    if (p.approx(64) <= 0L) throw std::domain_error("ScalingParam: t must be positive");
    return p;
}

ScalingParam ScalingParam::liouville(unsigned base) {
    if (base < 2) throw std::domain_error("ScalingParam: liouville base must be >= 2");
    ScalingParam p;
    p.kind_ = Kind::liouville_series;
    p.base_ = base;
    return p;
}

ScalingParam ScalingParam::decimal(const std::string& digits, BigReal stated_error) {
    if (stated_error <= 0L) throw std::domain_error("ScalingParam: stated error must be positive");
    BigReal v = BigReal::parse(digits, 8 + 4 * static_cast<mpfr_prec_t>(digits.size()));
    ScalingParam p;
    p.kind_ = Kind::decimal_literal;
    p.rat_ = v.to_rational();
    if (p.rat_ <= 0) throw std::domain_error("ScalingParam: t must be positive");
    p.dec_err_ = std::move(stated_error);
    return p;
}

ScalingParam ScalingParam::parse(const std::string& text) {
    static const std::regex frac_re(R"(^\s*([0-9]+)\s*/\s*([0-9]+)\s*$)");
    static const std::regex sqrt_re(R"(^\s*sqrt\(\s*([0-9]+)\s*\)\s*$)");
    static const std::regex surd_re(
        R"(^\s*\(\s*(-?[0-9]+)\s*([+-])\s*([0-9]+)\s*\*\s*sqrt\(\s*([0-9]+)\s*\)\s*\)\s*/\s*([0-9]+)\s*$)");
    static const std::regex liou_re(R"(^\s*liouville\(\s*([0-9]+)\s*\)\s*$)");
    static const std::regex dec_re(
        R"(^\s*([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\s*(?:~\s*(\S+)\s*)?$)");
    std::smatch m;
    if (std::regex_match(text, m, frac_re))
        return rational(Integer(m[1].str()), Integer(m[2].str()));
    if (std::regex_match(text, m, sqrt_re)) return quadratic_surd(0, 1, Integer(m[1].str()), 1);
    if (std::regex_match(text, m, surd_re)) {
        Integer b(m[3].str());
        if (m[2].str() == "-") b = -b;
        return quadratic_surd(Integer(m[1].str()), b, Integer(m[4].str()), Integer(m[5].str()));
    }
    if (std::regex_match(text, m, liou_re))
        return liouville(static_cast<unsigned>(std::stoul(m[1].str())));
    if (std::regex_match(text, m, dec_re)) {
        if (m[2].matched) return decimal(m[1].str(), BigReal::parse(m[2].str(), 128));
        // a bare decimal literal is an exact rational
        BigReal v = BigReal::parse(m[1].str(), 8 + 4 * static_cast<mpfr_prec_t>(text.size()));
        Rational r = v.to_rational();
        return rational(r.get_num(), r.get_den());
    }
    throw std::invalid_argument(
        "cannot parse scaling parameter '" + text +
        "'; expected \"p/q\", \"sqrt(c)\", \"(a+b*sqrt(c))/d\", \"liouville(base)\" or a decimal "
        "literal with optional \"~err\" suffix");
}

const Rational& ScalingParam::rational_value() const {
    if (kind_ != Kind::rational) throw std::logic_error("not a rational scaling parameter");
    return rat_;
}

const Rational& ScalingParam::decimal_value() const {
    if (kind_ != Kind::decimal_literal) throw std::logic_error("not a decimal literal");
    return rat_;
}

const BigReal& ScalingParam::decimal_error() const {
    if (kind_ != Kind::decimal_literal) throw std::logic_error("not a decimal literal");
    return dec_err_;
}

void ScalingParam::surd_parts(Integer& a, Integer& b, Integer& c, Integer& d) const {
    if (kind_ != Kind::quadratic_surd) throw std::logic_error("not a quadratic surd");
    a = a_;
    b = b_;
    c = c_;
    d = d_;
}

std::string ScalingParam::str() const {
    switch (kind_) {
        case Kind::rational:
            return rat_.get_num().get_str() + "/" + rat_.get_den().get_str();
        case Kind::quadratic_surd:
            return "(" + a_.get_str() + (b_ >= 0 ? "+" : "-") + Integer(abs(b_)).get_str() + "*sqrt(" +
                   c_.get_str() + "))/" + d_.get_str();
        case Kind::liouville_series:
            return "liouville(" + std::to_string(base_) + ")";
        case Kind::decimal_literal:
            return BigReal::of(rat_, 256).str(40) + "~" + dec_err_.str(6);
    }
    return {};
}

BigReal ScalingParam::approx(mpfr_prec_t bits) const {
    switch (kind_) {
        case Kind::rational:
            return to_bigreal_abs(rat_, bits);
        case Kind::quadratic_surd: {
            // integer square-root refinement: isqrt(c * 4^K) pins sqrt(c) to
            // within 2^{-(K+1)} of the midpoint (2r+1) / 2^{K+1}
            std::size_t bb = mpz_sizeinbase(b_.get_mpz_t(), 2);
            mp_bitcnt_t K = static_cast<mp_bitcnt_t>(bits) + bb + 8;
            Integer sc;
            mpz_mul_2exp(sc.get_mpz_t(), c_.get_mpz_t(), 2 * K);
            Integer r;
            mpz_sqrt(r.get_mpz_t(), sc.get_mpz_t());
            Integer den2;
            mpz_ui_pow_ui(den2.get_mpz_t(), 2, K + 1);
            Rational mid(2 * r + 1, den2);
            mid.canonicalize();
            Rational t = (Rational(a_) + Rational(b_) * mid) / Rational(d_);
            t.canonicalize();
            return to_bigreal_abs(t, bits);
        }
        case Kind::liouville_series: {
            double lb = std::log2(static_cast<double>(base_));
            Rational sum(0);
            for (unsigned k = 1;; ++k) {
                Integer e = factorial(k);
                if (!e.fits_ulong_p()) throw std::overflow_error("liouville exponent overflow");
                Integer den;
                mpz_ui_pow_ui(den.get_mpz_t(), base_, e.get_ui());
                sum += Rational(1, den);
                // tail after k terms is < 2 * base^{-(k+1)!}
                double next_log2 = BigReal::of(factorial(k + 1), 64).to_double() * lb;
                if (next_log2 > static_cast<double>(bits) + 10) break;
            }
            return to_bigreal_abs(sum, bits);
        }
        case Kind::decimal_literal: {
            if (dec_err_ > BigReal::pow2(-static_cast<long>(bits), 64))
                throw PrecisionExhausted("decimal literal cannot deliver 2^-" +
                                         std::to_string(bits) + " (stated error too large)");
            return to_bigreal_abs(rat_, bits);
        }
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------

int chi(long long n) { return static_cast<int>(((n % 2) + 2) % 2); }

std::pair<long long, Rational> frac_floor_exact(const Rational& t, long long n) {
    Rational x = t * Rational(Integer(static_cast<long>(n)));
    x.canonicalize();
    Integer m;
    mpz_fdiv_q(m.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
    Rational frac = x - Rational(m);
    frac.canonicalize();
    return {to_longlong(m, "floor(n t)"), frac};
}

namespace {

mpfr_prec_t decimal_capability_bits(const ScalingParam& t) {
    double e = t.decimal_error().mag_log2();
    long cap = static_cast<long>(-e) - 2;
    return cap > 64 ? static_cast<mpfr_prec_t>(cap) : 64;
}

}  // namespace

std::pair<long long, BigReal> frac_floor(const ScalingParam& t, long long n,
                                         mpfr_prec_t frac_bits) {
    if (n < 1) throw std::domain_error("frac_floor: n must be positive");
    if (t.kind() == ScalingParam::Kind::rational) {
        auto [m, frac] = frac_floor_exact(t.rational_value(), n);
        return {m, to_bigreal_abs(frac, frac_bits).with_precision(frac_bits)};
    }
    mpfr_prec_t nbits = bitlen(n);
    mpfr_prec_t B = frac_bits + nbits + 16;
    for (int attempt = 0; attempt < 48; ++attempt) {
        mpfr_prec_t Breq = B;
        bool capped = false;
        if (t.kind() == ScalingParam::Kind::decimal_literal) {
            mpfr_prec_t cap = decimal_capability_bits(t);
            if (Breq > cap) {
                Breq = cap;
                capped = true;
            }
        }
        BigReal th = t.approx(Breq);
        mpfr_prec_t wp = th.precision() + nbits + 8;
        BigReal x = th.with_precision(wp) * static_cast<long>(n);
        BigReal err = BigReal::pow2(-static_cast<long>(Breq) + static_cast<long>(nbits) + 1, 64);
        Integer flo = floor(x - err).floor_integer();
        Integer fhi = floor(x + err).floor_integer();
        if (flo == fhi) {
            long long m = to_longlong(flo, "floor(n t)");
            BigReal frac = (x - BigReal::of(flo, wp)).with_precision(std::max(frac_bits, kMinPrecision));
            return {m, frac};
        }
        if (capped)
            throw UnresolvableBoundary(
                "frac_floor: oracle precision cannot separate n*t from an integer");
        B *= 2;
    }
    throw UnresolvableBoundary("frac_floor: escalation exhausted");
}

std::vector<BigReal> s_of_t(const ScalingParam& t, long long N, mpfr_prec_t bits) {
    if (N < 1) throw std::domain_error("s_of_t: N must be >= 1");
    std::vector<BigReal> out;
    if (t.kind() == ScalingParam::Kind::rational) {
        const Rational& r = t.rational_value();
        const Integer& den = r.get_den();
        Integer p_mod = r.get_num() % den;
        std::vector<Integer> residues;
        Integer cur = 0;
        long long steps = N;
        if (den.fits_slong_p()) steps = std::min<long long>(N, den.get_si());
        for (long long n = 1; n <= steps; ++n) {
            cur += p_mod;
            if (cur >= den) cur -= den;
            residues.push_back(cur);
        }
        std::sort(residues.begin(), residues.end());
        residues.erase(std::unique(residues.begin(), residues.end()), residues.end());
        out.reserve(residues.size());
        for (const auto& k : residues) {
            Rational v(k, den);
            v.canonicalize();
            out.push_back(BigReal::of(v, bits));
        }
        return out;
    }
    for (int attempt = 0; attempt < 6; ++attempt, bits *= 2) {
        mpfr_prec_t nbits = bitlen(N);
        BigReal th = t.approx(bits + nbits + 16);
        mpfr_prec_t wp = th.precision() + nbits + 8;
        BigReal tf = th.with_precision(wp);
        tf = tf - floor(tf);
        out.clear();
        out.reserve(static_cast<std::size_t>(N));
        BigReal f(wp);
        BigReal one = BigReal::of(1L, wp);
        for (long long n = 1; n <= N; ++n) {
            f += tf;
            if (f >= one) f -= one;
            out.push_back(f.with_precision(bits + 8));
        }
        std::sort(out.begin(), out.end());
        BigReal min_gap = BigReal::pow2(-static_cast<long>(bits) + 4, 64);
        bool ok = true;
        for (std::size_t i = 1; i < out.size() && ok; ++i)
            if (out[i] - out[i - 1] < min_gap) ok = false;
        if (ok) return out;
    }
    throw UnresolvableBoundary("s_of_t: could not certify distinctness");
}

// ---------------------------------------------------------------------------
// Continued fractions

namespace {

CFExpansion cf_rational(const Rational& t, int K) {
    CFExpansion cf;
    Integer num = t.get_num(), den = t.get_den();
    for (int k = 0; k < K; ++k) {
        Integer a, r;
        mpz_fdiv_qr(a.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
        cf.partial_quotients.push_back(a);
        if (r == 0) {
            cf.exact_termination = true;
            return cf;
        }
        num = den;
        den = r;
    }
    return cf;
}

// Exact expansion of (P + sqrt(D)) / Q, D not a perfect square.
CFExpansion cf_surd(Integer a, Integer b, Integer c, Integer d, int K) {
    Integer P, Q, D;
    if (b >= 0) {
        P = a;
        Q = d;
    } else {
        P = -a;
        Q = -d;
    }
    D = b * b * c;
    if ((D - P * P) % Q != 0) {
        Integer absQ = abs(Q);
        P *= absQ;
        D *= Q * Q;
        Q *= absQ;
    }
    CFExpansion cf;
    Integer s;
    for (int k = 0; k < K; ++k) {
        mpz_sqrt(s.get_mpz_t(), D.get_mpz_t());
        Integer num = P + s;
        if (Q < 0) num += 1;
        Integer ak;
        mpz_fdiv_q(ak.get_mpz_t(), num.get_mpz_t(), Q.get_mpz_t());
        cf.partial_quotients.push_back(ak);
        P = ak * Q - P;
        Q = (D - P * P) / Q;
    }
    return cf;
}

// Expansion of an exact rational enclosure lo < t < hi; quotients are emitted
// while both endpoints agree, nullopt when the enclosure is too wide.
std::optional<std::vector<Integer>> cf_interval(Rational lo, Rational hi, int K) {
    std::vector<Integer> out;
    for (int k = 0; k < K; ++k) {
        Integer alo, ahi;
        mpz_fdiv_q(alo.get_mpz_t(), lo.get_num().get_mpz_t(), lo.get_den().get_mpz_t());
        mpz_fdiv_q(ahi.get_mpz_t(), hi.get_num().get_mpz_t(), hi.get_den().get_mpz_t());
        if (alo != ahi) return std::nullopt;
        out.push_back(alo);
        Rational flo = lo - Rational(alo);
        Rational fhi = hi - Rational(alo);
        if (sgn(flo) <= 0) return std::nullopt;  // endpoint touches the integer
        lo = 1 / fhi;
        hi = 1 / flo;
    }
    return out;
}

Rational liouville_partial(unsigned base, unsigned terms) {
    Rational sum(0);
    for (unsigned k = 1; k <= terms; ++k) {
        Integer e = factorial(k);
        if (!e.fits_ulong_p()) throw std::overflow_error("liouville exponent overflow");
        Integer den;
        mpz_ui_pow_ui(den.get_mpz_t(), base, e.get_ui());
        sum += Rational(1, den);
    }
    return sum;
}

std::optional<std::vector<Integer>> cf_liouville(unsigned base, int K, unsigned max_terms = 16) {
    for (unsigned terms = 4; terms <= max_terms; ++terms) {
        Integer enext = factorial(terms + 1);
        if (!enext.fits_ulong_p()) break;
        Rational lo = liouville_partial(base, terms);
        Integer den;
        mpz_ui_pow_ui(den.get_mpz_t(), base, enext.get_ui());
        Rational hi = lo + Rational(2, den);
        if (auto got = cf_interval(lo, hi, K)) return got;
    }
    return std::nullopt;
}

}  // namespace

CFExpansion cf_expand(const ScalingParam& t, int K) {
    if (K < 1) throw std::domain_error("cf_expand: K must be >= 1");
    switch (t.kind()) {
        case ScalingParam::Kind::rational:
            return cf_rational(t.rational_value(), K);
        case ScalingParam::Kind::quadratic_surd: {
            Integer a, b, c, d;
            t.surd_parts(a, b, c, d);
            return cf_surd(a, b, c, d, K);
        }
        case ScalingParam::Kind::liouville_series: {
            if (auto got = cf_liouville(t.liouville_base(), K)) {
                CFExpansion cf;
                cf.partial_quotients = std::move(*got);
                return cf;
            }
            throw PrecisionExhausted("cf_expand: liouville enclosure too wide for requested K");
        }
        case ScalingParam::Kind::decimal_literal: {
            Rational err = t.decimal_error().to_rational();
            Rational lo = t.decimal_value() - err;
            Rational hi = t.decimal_value() + err;
            if (auto got = cf_interval(lo, hi, K)) {
                CFExpansion cf;
                cf.partial_quotients = std::move(*got);
                return cf;
            }
            throw PrecisionExhausted("cf_expand: stated error too large for " + std::to_string(K) +
                                     " quotients");
        }
    }
    throw std::logic_error("unreachable");
}

std::vector<ConvergentPQ> convergents(const CFExpansion& cf) {
    std::vector<ConvergentPQ> out;
    Integer pm2 = 0, pm1 = 1;  // p_{-2}, p_{-1}
    Integer qm2 = 1, qm1 = 0;
    for (const auto& a : cf.partial_quotients) {
        Integer p = a * pm1 + pm2;
        Integer q = a * qm1 + qm2;
        out.push_back({p, q});
        pm2 = pm1;
        pm1 = p;
        qm2 = qm1;
        qm1 = q;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Records

namespace {

void validate_beta(const BigReal& beta) {
    if (beta < 0L || beta >= 1L) throw std::domain_error("beta must lie in [0,1)");
}

// Recomputes gamma for one record straight from the oracle at >= 320 bits,
// picks m so |gamma| is the circular distance, flags eligibility m == floor(nt).
ApproxRecord finalize_record(const ScalingParam& t, const BigReal& beta, long long n) {
    mpfr_prec_t nbits = bitlen(n);
    for (mpfr_prec_t B = 320 + nbits;; B *= 2) {
        BigReal th = t.approx(B);
        mpfr_prec_t wp = th.precision() + nbits + 8;
        BigReal x = th.with_precision(wp) * static_cast<long>(n);
        BigReal v = x - beta.with_precision(wp);
        BigReal j(wp);
        mpfr_round(j.raw(), v.raw());
        BigReal gamma = v - j;
        BigReal err = BigReal::pow2(-static_cast<long>(B) + static_cast<long>(nbits) + 2, 64);
        Integer flo = floor(x - err).floor_integer();
        Integer fhi = floor(x + err).floor_integer();
        BigReal half = BigReal::of(0.5, 64);
        if (flo == fhi && abs(gamma) + err < half) {
            ApproxRecord rec;
            rec.n = n;
            rec.m = to_longlong(j.floor_integer(), "m");
            rec.gamma = gamma.with_precision(320);
            rec.gamma_bound = next_above(abs(rec.gamma));
            rec.theorem_eligible = (rec.m == to_longlong(flo, "floor(n t)"));
            return rec;
        }
        if (B > (1L << 24)) throw UnresolvableBoundary("record finalization failed to certify");
    }
}

std::vector<ApproxRecord> records_rational(const ScalingParam& t, const BigReal& beta,
                                           long long N) {
    const Rational& tr = t.rational_value();
    Rational beta_r = beta.to_rational();
    const Integer& den = tr.get_den();
    Integer p_mod = tr.get_num() % den;
    std::vector<ApproxRecord> out;
    Rational best(-1);
    Integer cur = 0;
    for (long long n = 1; n <= N; ++n) {
        cur += p_mod;
        if (cur >= den) cur -= den;
        Rational frac(cur, den);
        frac.canonicalize();
        Rational delta = frac - beta_r;
        Rational gamma = delta;
        int adj = 0;  // m = floor(n t) + adj
        for (int j : {-1, 1}) {
            Rational cand = delta + j;
            if (abs(cand) < abs(gamma)) {
                gamma = cand;
                adj = -j;
            }
        }
        Rational d = abs(gamma);
        if (best < 0 || d < best) {
            best = d;
            ApproxRecord rec;
            rec.n = n;
            auto [m0, fr] = frac_floor_exact(tr, n);
            rec.m = m0 + adj;
            rec.gamma = to_bigreal_abs(gamma, 300).with_precision(320);
            rec.gamma_bound = next_above(abs(rec.gamma));
            rec.theorem_eligible = (adj == 0);
            out.push_back(std::move(rec));
            if (sgn(d) == 0) break;  // exact hit; no later strict improvement
        }
    }
    return out;
}

std::vector<ApproxRecord> records_oracle(const ScalingParam& t, const BigReal& beta, long long N) {
    mpfr_prec_t nbits = bitlen(N);
    for (mpfr_prec_t B = 192;; B *= 2) {
        BigReal th = t.approx(B + nbits + 2);
        mpfr_prec_t wp = th.precision() + nbits + 8;
        BigReal tf = th.with_precision(wp);
        tf = tf - floor(tf);  // dyadic, accumulated exactly below
        BigReal err = BigReal::pow2(-static_cast<long>(B) - 1, 64);
        BigReal one = BigReal::of(1L, wp);
        BigReal bet = beta.with_precision(wp);
        BigReal f(wp);
        std::vector<long long> rec_ns;
        BigReal best(wp);
        bool have_best = false;
        bool ambiguous = false;
        for (long long n = 1; n <= N && !ambiguous; ++n) {
            f += tf;
            if (f >= one) f -= one;
            BigReal d = abs(f - bet);
            BigReal wrap = one - d;
            if (wrap < d) d = wrap;
            if (!have_best) {
                best = d;
                have_best = true;
                rec_ns.push_back(n);
                continue;
            }
            if (d + err < best - err) {
                best = d;
                rec_ns.push_back(n);
            } else if (d - err < best + err) {
                ambiguous = true;  // cannot certify either way at this precision
            }
        }
        if (!ambiguous) {
            std::vector<ApproxRecord> out;
            out.reserve(rec_ns.size());
            for (long long n : rec_ns) out.push_back(finalize_record(t, beta, n));
            return out;
        }
        if (B > (1L << 24)) throw UnresolvableBoundary("record scan failed to certify");
    }
}

}  // namespace

std::vector<ApproxRecord> inhom_records_bruteforce(const ScalingParam& t, const BigReal& beta,
                                                   long long N) {
    if (N < 1) throw std::domain_error("inhom_records_bruteforce: N must be >= 1");
    validate_beta(beta);
    if (t.kind() == ScalingParam::Kind::rational) return records_rational(t, beta, N);
    return records_oracle(t, beta, N);
}

// ---------------------------------------------------------------------------
// Ostrowski chain.
//
// Minimal points of |n t - beta| mod 1 form a chain whose gaps are convergent
// or intermediate-fraction denominators j q_k + q_{k-1}.  From the current
// record the next one is the smallest such step that strictly shrinks the
// recentered error; the improving digits j at each level form an interval,
// so only its ends (plus the level endpoints) need testing.

namespace {

struct ChainCandidate {
    Integer s;
    bool improving = false;
};

BigReal centered_error(const BigReal& th, const Integer& n, const BigReal& beta, mpfr_prec_t wp) {
    BigReal x(wp);
    mpfr_mul_z(x.raw(), th.with_precision(wp).raw(), n.get_mpz_t(), MPFR_RNDN);
    BigReal v = x - beta.with_precision(wp);
    BigReal j(wp);
    mpfr_round(j.raw(), v.raw());
    return v - j;
}

}  // namespace

std::vector<ApproxRecord> inhom_ostrowski(const ScalingParam& t, const BigReal& beta, int count) {
    if (count < 1) throw std::domain_error("inhom_ostrowski: count must be >= 1");
    validate_beta(beta);
    if (!t.certified_irrational())
        throw std::invalid_argument(
            "inhom_ostrowski: requires a certified-irrational parameter (the finite continued "
            "fraction of a rational has no Ostrowski tail)");

    int terms = 40;
    mpfr_prec_t B = 320;
    for (int attempt = 0; attempt < 40; ++attempt) {
        CFExpansion cf;
        try {
            cf = cf_expand(t, terms);
        } catch (const PrecisionExhausted&) {
            if (t.kind() == ScalingParam::Kind::liouville_series && terms > 8) {
                terms = std::max(8, terms / 2);
                cf = cf_expand(t, terms);
            } else {
                throw;
            }
        }
        std::vector<ConvergentPQ> conv = convergents(cf);
        std::size_t levels = conv.size() >= 1 ? conv.size() - 1 : 0;
        BigReal th = t.approx(B);
        mpfr_prec_t wp = th.precision() + 64;
        // theta_k = q_k t - p_k, with theta_{-1} = -1
        std::vector<BigReal> theta_err(levels + 1);
        std::vector<BigReal> theta(levels + 1);
        theta[0] = BigReal::of(-1L, wp);
        theta_err[0] = BigReal(64);
        for (std::size_t k = 0; k < levels; ++k) {
            BigReal x(wp);
            mpfr_mul_z(x.raw(), th.with_precision(wp).raw(), conv[k].q.get_mpz_t(), MPFR_RNDN);
            BigReal pz(wp);
            mpfr_set_z(pz.raw(), conv[k].p.get_mpz_t(), MPFR_RNDN);
            theta[k + 1] = x - pz;
            theta_err[k + 1] =
                BigReal::of(conv[k].q, 64) * BigReal::pow2(-static_cast<long>(B), 64);
        }

        std::vector<ApproxRecord> out;
        Integer n = 1;
        BigReal e = centered_error(th, n, beta, wp);
        bool need_more_bits = false, need_more_terms = false;
        while (static_cast<int>(out.size()) < count && !need_more_bits && !need_more_terms) {
            BigReal e_err = BigReal::of(n, 64) * BigReal::pow2(-static_cast<long>(B), 64);
            BigReal d_cur = abs(e);
            // Gather candidate steps: per level the improving digits form an
            // interval; test its smallest member (+1 safety) and the level
            // endpoints j = 1, a_{k+1}.
            Integer best_s = 0, best_ps = 0;
            bool undecided = false;
            for (std::size_t k = 0; k + 1 < conv.size() + 0 && k < levels; ++k) {
                const Integer& a_next = cf.partial_quotients[k + 1];
                const Integer& qk = conv[k].q;
                const Integer& pk = conv[k].p;
                Integer qk1 = (k == 0) ? Integer(0) : conv[k - 1].q;
                Integer pk1 = (k == 0) ? Integer(1) : conv[k - 1].p;
                const BigReal& thk = theta[k + 1];
                const BigReal& thk1 = theta[k];
                if (thk.is_zero()) continue;
                std::vector<Integer> js;
                js.push_back(Integer(1));
                js.push_back(a_next);
                for (int w = -1; w <= 1; ++w) {
                    // roots of |e + theta_{k-1} + j theta_k - w| = |e|
                    BigReal base = BigReal::of(static_cast<long>(w), wp) - e - thk1;
                    BigReal r1 = (base - d_cur) / thk;
                    BigReal r2 = (base + d_cur) / thk;
                    BigReal lo = min(r1, r2);
                    Integer jlo = floor(lo).floor_integer() + 1;
                    js.push_back(jlo);
                    js.push_back(jlo + 1);
                }
                for (Integer& j : js) {
                    if (j < 1) continue;
                    if (j > a_next) continue;
                    Integer s = j * qk + qk1;
                    if (best_s != 0 && s >= best_s) continue;
                    Integer n2 = n + s;
                    BigReal e2 = centered_error(th, n2, beta, wp);
                    BigReal e2_err = BigReal::of(n2, 64) * BigReal::pow2(-static_cast<long>(B), 64);
                    BigReal margin = (e_err + e2_err) * 4L;
                    BigReal d2 = abs(e2);
                    if (d2 + margin < d_cur - margin) {
                        best_s = s;
                        best_ps = j * pk + pk1;
                    } else if (d2 - margin < d_cur + margin) {
                        undecided = true;
                    }
                }
            }
            if (undecided && best_s == 0) {
                need_more_bits = true;
                break;
            }
            if (best_s == 0) {
                need_more_terms = true;
                break;
            }
            n += best_s;
            e = centered_error(th, n, beta, wp);
            if (!n.fits_slong_p()) throw std::overflow_error("inhom_ostrowski: n exceeds long long");
            ApproxRecord rec = finalize_record(t, beta, to_longlong(n, "n"));
            BigReal three_over_n = BigReal::of(3L, 320) / BigReal::of(rec.n, 320);
            if (abs(rec.gamma) <= three_over_n) out.push_back(std::move(rec));
        }
        if (static_cast<int>(out.size()) >= count) {
            out.resize(static_cast<std::size_t>(count));
            return out;
        }
        if (need_more_bits)
            B *= 2;
        else
            terms += terms / 2 + 8;
    }
    throw UnresolvableBoundary("inhom_ostrowski: escalation exhausted");
}

// ---------------------------------------------------------------------------
// Chaotic index estimator

ChaoticIndexEstimate chaotic_exponent_estimate(const ScalingParam& t, const BigReal& beta,
                                               long long N) {
    if (N < 100) throw std::domain_error("chaotic_exponent_estimate: N must be >= 100");
    validate_beta(beta);
    const mpfr_prec_t fp = 256;
    if (t.kind() == ScalingParam::Kind::rational) {
        // the distance can never drop below the gap between beta and the grid
        const Rational& tr = t.rational_value();
        Rational beta_r = beta.to_rational();
        const Integer& den = tr.get_den();
        Rational scaled = beta_r * Rational(den);
        Integer lo;
        mpz_fdiv_q(lo.get_mpz_t(), scaled.get_num().get_mpz_t(), scaled.get_den().get_mpz_t());
        Rational floor_dist(2);
        for (const Integer& k : {Integer(lo), Integer(lo + 1)}) {
            Integer km = k % den;
            if (km < 0) km += den;
            Rational d = abs(Rational(km, den) - beta_r);
            Rational wrap = 1 - d;
            if (wrap < d) d = wrap;
            if (d < floor_dist) floor_dist = d;
        }
        ChaoticIndexEstimate est;
        est.r_hat = BigReal::of(0L, fp);
        est.records_used = 0;
        est.distance_floor = true;
        est.intercept = sgn(floor_dist) > 0 ? log(to_bigreal_abs(floor_dist, fp)) : BigReal(fp);
        return est;
    }
    std::vector<ApproxRecord> recs = inhom_records_bruteforce(t, beta, N);
    std::vector<std::pair<BigReal, BigReal>> pts;
    for (const auto& r : recs) {
        if (r.n < 10 || r.gamma.is_zero()) continue;
        pts.emplace_back(log(BigReal::of(r.n, fp)), log(abs(r.gamma).with_precision(fp)));
    }
    if (pts.size() < 3)
        throw DegenerateFit("chaotic_exponent_estimate: fewer than 3 usable records");
    BigReal sx(fp), sy(fp), sxx(fp), sxy(fp);
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    long k = static_cast<long>(pts.size());
    BigReal det = sxx * k - sx * sx;
    BigReal slope = (sxy * k - sx * sy) / det;
    ChaoticIndexEstimate est;
    est.r_hat = -slope;
    est.records_used = static_cast<int>(pts.size());
    est.intercept = (sy - slope * sx) / k;
    est.distance_floor = false;
    return est;
}

}  // namespace qasym
