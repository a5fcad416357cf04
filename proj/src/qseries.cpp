#include "qasym/qseries.hpp"

#include <cmath>
#include <limits>

namespace qasym {

namespace {

// log2 upper/lower estimates from the mpfr exponent: 2^{e-1} <= |x| < 2^e.
// Everything magnitude-related runs in the log domain; series terms reach
// 2^{+-80000} and do not fit a double.
double log2_upper(const BigReal& x) { return x.mag_log2(); }
double log2_upper(const BigComplex& x) {
    return std::max(x.real().mag_log2(), x.imag().mag_log2()) + 1.0;
}
double log2_lower(const BigComplex& x) {
    return std::max(x.real().mag_log2(), x.imag().mag_log2()) - 1.0;
}

double eps_target_log2(const BigReal& rel_eps) { return rel_eps.mag_log2() - 1.0; }

struct SeriesResult {
    BigComplex sum;
    double cancellation_bits;
};

}  // namespace

BigComplex qpoch_n(const BigComplex& a, const QBase& q, long n) {
    mpfr_prec_t prec = std::max(a.precision(), q.precision());
    BigComplex one(BigReal::of(1L, prec), BigReal(prec));
    BigComplex p = one;
    if (n >= 0) {
        BigComplex x = a.with_precision(prec);
        for (long k = 0; k < n; ++k) {
            p = p * (one - x);
            x = x * q.value();
        }
        return p;
    }
    // (a;q)_{-j} = 1 / prod_{i=1..j} (1 - a q^{-i})
    BigComplex x = a.with_precision(prec);
    BigComplex denom = one;
    for (long i = 1; i <= -n; ++i) {
        x = x / q.value();
        BigComplex f = one - x;
        if (f.is_zero())
            throw std::domain_error("qpoch_n: vanishing factor at negative index");
        denom = denom * f;
    }
    return one / denom;
}

BigComplex qpoch_inf(const BigComplex& a, const QBase& q, const BigReal& rel_eps) {
    if (rel_eps <= 0L) throw std::domain_error("qpoch_inf: rel_eps must be positive");
    mpfr_prec_t prec = std::max(a.precision(), q.precision());
    BigComplex one(BigReal::of(1L, prec), BigReal(prec));
    BigComplex p = one;
    BigComplex x = a.with_precision(prec);
    double inv1mq_log2 = -std::log2(1.0 - mpfr_get_d(q.value().raw(), MPFR_RNDU)) + 1e-9;
    double target = eps_target_log2(rel_eps);
    // After the K leading factors the relative deviation of the remaining
    // product from 1 is at most exp(w) * w with w = |a| q^K / (1-q).
    for (long k = 0;; ++k) {
        BigComplex f = one - x;
        if (f.is_zero()) return BigComplex(prec);
        p = p * f;
        x = x * q.value();
        double w_log2 = log2_upper(x) + inv1mq_log2;
        if (k >= 1 && w_log2 < 5.0) {
            double w = std::exp2(w_log2);
            double bound_log2 = w * 1.4426950408889634 + w_log2;  // log2(e^w * w)
            if (bound_log2 <= target) break;
        }
        if (k > 64 * static_cast<long>(prec) + 4096)
            throw std::runtime_error("qpoch_inf: truncation failed to converge");
    }
    return p;
}

std::pair<BigReal, BigReal> remainder_bounds(const BigReal& a, const QBase& q, long n) {
    if (a <= 0L) throw std::domain_error("remainder_bounds: a must be positive");
    if (n < 1) throw std::domain_error("remainder_bounds: n must be positive");
    mpfr_prec_t prec = std::max(a.precision(), q.precision());
    BigReal aq = a * q.value();
    if (aq >= 1L) throw std::domain_error("remainder_bounds: requires a q < 1");
    BigReal eps = default_rel_eps(prec);
    BigReal qn = pow_int(q.value().with_precision(prec), n);
    BigReal one_m_q = 1L - q.value().with_precision(prec);
    BigReal r1 = qpoch_inf(-(a * pow_int(q.value(), 2)), q, eps) * a * qn / one_m_q;
    BigReal r2 = a * qn / (one_m_q * qpoch_inf(aq, q, eps));
    return {r1, r2};
}

namespace {

SeriesResult aq_series_once(const BigComplex& z, const QBase& q, const BigReal& rel_eps) {
    mpfr_prec_t prec = std::max(z.precision(), q.precision());
    BigComplex sum(prec);
    BigComplex term(BigReal::of(1L, prec), BigReal(prec));
    BigComplex neg_z = -z.with_precision(prec);
    BigReal qv = q.value().with_precision(prec);
    BigReal q2 = qv * qv;
    BigReal q_2k1 = qv;  // q^{2k+1} at k = 0
    BigReal q_k1 = qv;   // q^{k+1} at k = 0
    double z_log2 = log2_upper(abs(z));
    double inv1mq_log2 = -std::log2(1.0 - mpfr_get_d(qv.raw(), MPFR_RNDU)) + 1e-9;
    double target = eps_target_log2(rel_eps);
    double max_mag = -std::numeric_limits<double>::infinity();
    for (long k = 0;; ++k) {
        sum = sum + term;
        max_mag = std::max(max_mag, log2_upper(sum));
        term = term * neg_z * q_2k1 / (1L - q_k1);
        q_2k1 *= q2;  // now q^{2k+3}: majorant of all later step ratios
        q_k1 *= qv;
        double ratio_log2 = log2_upper(q_2k1) + z_log2 + inv1mq_log2;
        if (k >= 1 && ratio_log2 < -1.0) {
            double tail_log2 = log2_upper(term) - std::log2(1.0 - std::exp2(ratio_log2));
            if (tail_log2 <= target + max_mag) break;
        }
        if (k > 64 * static_cast<long>(prec) + 4096)
            throw std::runtime_error("aq_direct: truncation failed to converge");
    }
    double cancel = std::max(0.0, max_mag - log2_upper(sum));
    return {sum, cancel};
}

}  // namespace

BigComplex aq_direct(const BigComplex& z, const QBase& q, const BigReal& rel_eps) {
    if (rel_eps <= 0L) throw std::domain_error("aq_direct: rel_eps must be positive");
    mpfr_prec_t prec = std::max(z.precision(), q.precision());
    if (z.is_zero()) return BigComplex(BigReal::of(1L, prec), BigReal(prec));
    return run_with_cancellation_retry(prec, [&](mpfr_prec_t p) {
        SeriesResult r =
            aq_series_once(z.with_precision(p), QBase(q.value().with_precision(p)), rel_eps);
        return std::pair<BigComplex, double>(r.sum, r.cancellation_bits);
    });
}

namespace {

SeriesResult theta_series_once(const BigComplex& z, const QBase& q, const BigReal& rel_eps) {
    mpfr_prec_t prec = std::max(z.precision(), q.precision());
    BigReal s = sqrt(q.value().with_precision(prec));
    BigComplex zi = z.with_precision(prec).reciprocal();
    BigComplex sum(BigReal::of(1L, prec), BigReal(prec));  // k = 0 term
    BigComplex pos = sum, neg = sum;
    BigReal s2 = s * s;
    BigReal s_2k1 = s;  // s^{2k+1} at k = 0
    double target = eps_target_log2(rel_eps);
    double zpos_log2 = log2_upper(abs(z));
    double zneg_log2 = -log2_lower(z);  // upper bound for |1/z|
    double max_mag = log2_upper(sum);
    bool pos_done = false, neg_done = false;
    for (long k = 1;; ++k) {
        BigReal step = s_2k1;  // s^{2k-1}
        if (!pos_done) {
            pos = pos * step * z;
            sum = sum + pos;
        }
        if (!neg_done) {
            neg = neg * step * zi;
            sum = sum + neg;
        }
        max_mag = std::max(max_mag, log2_upper(sum));
        s_2k1 *= s2;  // s^{2k+1}: majorant of later step ratios on either side
        double srat = log2_upper(s_2k1);
        double rp = srat + zpos_log2;
        double rn = srat + zneg_log2;
        if (!pos_done && rp < -1.0) {
            double tail = log2_upper(pos) + rp - std::log2(1.0 - std::exp2(rp));
            if (tail <= target + max_mag) pos_done = true;
        }
        if (!neg_done && rn < -1.0) {
            double tail = log2_upper(neg) + rn - std::log2(1.0 - std::exp2(rn));
            if (tail <= target + max_mag) neg_done = true;
        }
        if (pos_done && neg_done) break;
        if (k > 64 * static_cast<long>(prec) + 4096)
            throw std::runtime_error("theta: truncation failed to converge");
    }
    double cancel = std::max(0.0, max_mag - log2_upper(sum));
    return {sum, cancel};
}

}  // namespace

BigComplex theta(const BigComplex& z, const QBase& q, ThetaMethod method) {
    if (z.is_zero()) throw std::domain_error("theta: z must be nonzero");
    mpfr_prec_t prec = std::max(z.precision(), q.precision());
    BigReal eps = default_rel_eps(prec);
    if (method == ThetaMethod::series) {
        return run_with_cancellation_retry(prec, [&](mpfr_prec_t p) {
            SeriesResult r =
                theta_series_once(z.with_precision(p), QBase(q.value().with_precision(p)), eps);
            return std::pair<BigComplex, double>(r.sum, r.cancellation_bits);
        });
    }
    // Jacobi triple product (q, -q^{1/2} z, -q^{1/2}/z; q)_inf
    BigReal s = sqrt(q.value().with_precision(prec));
    BigReal peps = eps / 4L;
    BigComplex f1 = qpoch_inf(BigComplex(q.value().with_precision(prec)), q, peps);
    BigComplex f2 = qpoch_inf(-(z.with_precision(prec) * s), q, peps);
    BigComplex f3 = qpoch_inf(-(z.with_precision(prec).reciprocal() * s), q, peps);
    return f1 * f2 * f3;
}

namespace {

SeriesResult cbh_series_once(const std::vector<BigComplex>& a, const std::vector<BigComplex>& b,
                             const BigReal& l, const BigComplex& z, const QBase& q,
                             const BigReal& rel_eps) {
    mpfr_prec_t prec = std::max(z.precision(), q.precision());
    BigComplex one(BigReal::of(1L, prec), BigReal(prec));
    BigReal qv = q.value().with_precision(prec);
    BigReal Q = pow(qv, l.with_precision(prec));  // q^l
    BigReal Q2 = Q * Q;
    BigReal Q_2k1 = Q;  // Q^{2k+1} at k = 0
    std::vector<BigComplex> apow, bpow;  // a_j q^k, b_j q^k
    apow.reserve(a.size());
    bpow.reserve(b.size());
    for (const auto& x : a) apow.push_back(x.with_precision(prec));
    for (const auto& x : b) bpow.push_back(x.with_precision(prec));
    BigComplex sum(prec);
    BigComplex term = one;
    double z_log2 = log2_upper(abs(z));
    double target = eps_target_log2(rel_eps);
    double max_mag = -std::numeric_limits<double>::infinity();
    for (long k = 0;; ++k) {
        sum = sum + term;
        max_mag = std::max(max_mag, log2_upper(sum));
        // t_{k+1} = t_k * prod(1 - a_j q^k) Q^{2k+1} z / prod(1 - b_j q^k);
        // each (a;q)_k picks up exactly one new factor per term.
        BigComplex num = one;
        for (const auto& x : apow) num = num * (one - x);
        BigComplex den = one;
        for (const auto& x : bpow) {
            BigComplex f = one - x;
            if (f.is_zero()) throw std::domain_error("cbh_direct: denominator q-factor vanished");
            den = den * f;
        }
        term = term * num * z * Q_2k1 / den;
        Q_2k1 *= Q2;  // Q^{2k+3}
        for (auto& x : apow) x = x * qv;
        for (auto& x : bpow) x = x * qv;
        // majorant of all later step ratios once every |b_j q^k| < 1/2
        double num_up = 0.0, den_dn = 0.0;
        bool major_ok = true;
        for (const auto& x : apow) num_up += std::log2(1.0 + std::exp2(log2_upper(abs(x))));
        for (const auto& x : bpow) {
            double bx_log2 = log2_upper(abs(x));
            if (bx_log2 >= -1.0) {
                major_ok = false;
                break;
            }
            den_dn += std::log2(1.0 - std::exp2(bx_log2));
        }
        double ratio_log2 = num_up - den_dn + log2_upper(Q_2k1) + z_log2;
        if (major_ok && k >= 1 && ratio_log2 < -1.0) {
            double tail_log2 = log2_upper(term) - std::log2(1.0 - std::exp2(ratio_log2));
            if (tail_log2 <= target + max_mag) break;
        }
        if (k > 64 * static_cast<long>(prec) + 4096)
            throw std::runtime_error("cbh_direct: truncation failed to converge");
    }
    double cancel = std::max(0.0, max_mag - log2_upper(sum));
    return {sum, cancel};
}

}  // namespace

BigComplex cbh_direct(const std::vector<BigComplex>& a, const std::vector<BigComplex>& b,
                      const BigReal& l, const BigComplex& z, const QBase& q,
                      const BigReal& rel_eps) {
    if (l <= 0L) throw std::domain_error("cbh_direct: l must be positive");
    if (rel_eps <= 0L) throw std::domain_error("cbh_direct: rel_eps must be positive");
    mpfr_prec_t prec = std::max(z.precision(), q.precision());
    return run_with_cancellation_retry(prec, [&](mpfr_prec_t p) {
        std::vector<BigComplex> ap, bp;
        ap.reserve(a.size());
        bp.reserve(b.size());
        for (const auto& x : a) ap.push_back(x.with_precision(p));
        for (const auto& x : b) bp.push_back(x.with_precision(p));
        SeriesResult r = cbh_series_once(ap, bp, l, z.with_precision(p),
                                         QBase(q.value().with_precision(p)), rel_eps);
        return std::pair<BigComplex, double>(r.sum, r.cancellation_bits);
    });
}

BigComplex cbh_direct(const CBHParams& p, const BigComplex& z, const QBase& q,
                      const BigReal& rel_eps) {
    std::vector<BigComplex> a, b;
    a.reserve(p.a.size());
    b.reserve(p.b.size());
    for (const auto& x : p.a) a.emplace_back(x);
    for (const auto& x : p.b) b.emplace_back(x);
    return cbh_direct(a, b, p.l, z, q, rel_eps);
}

FForm phi_to_f(long r, long s, const BigComplex& z, const QBase& q) {
    if (s + 1 - r <= 0) throw std::domain_error("phi_to_f: requires s + 1 - r > 0");
    mpfr_prec_t prec = std::max(z.precision(), q.precision());
    BigReal l = BigReal::of(s + 1 - r, prec) / 2L;
    BigComplex arg = -(z.with_precision(prec) * pow(q.value().with_precision(prec), l));
    return {l, arg};
}

BigReal c_factor(const CBHParams& p, const QBase& q) {
    mpfr_prec_t prec = q.precision();
    for (const auto& x : p.a) prec = std::max(prec, x.precision());
    for (const auto& x : p.b) prec = std::max(prec, x.precision());
    BigReal eps = default_rel_eps(prec);
    BigReal num = BigReal::of(1L, prec);
    for (const auto& x : p.a) num *= qpoch_inf(x.with_precision(prec), q, eps);
    BigReal den = BigReal::of(1L, prec);
    for (const auto& x : p.b) {
        BigReal f = qpoch_inf(x.with_precision(prec), q, eps);
        if (f.is_zero()) throw std::domain_error("c_factor: denominator product vanishes");
        den *= f;
    }
    return num / den;
}

}  // namespace qasym
