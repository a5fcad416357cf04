#include "qasym/asymptotics.hpp"

#include <cmath>

namespace qasym {

namespace {

mpfr_prec_t nbits_of(long long n) {
    return static_cast<mpfr_prec_t>(64 - __builtin_clzll(static_cast<unsigned long long>(n) | 1ULL));
}

void validate_common(Family family, const BigComplex& u, const BigReal& q,
                     const std::optional<CBHParams>& cbh) {
    if (u.is_zero()) throw std::domain_error("TheoremPoint: u must be nonzero");
    if (q <= 0L || q >= 1L) throw std::domain_error("TheoremPoint: q must lie in (0,1)");
    if (family == Family::cbh) {
        if (!cbh) throw std::domain_error("TheoremPoint: cbh family needs CBHParams");
        if (!cbh->theorem_window())
            throw std::domain_error("TheoremPoint: cbh parameters must lie in [0,1)");
    }
}

double log2_mag(const BigComplex& v) {
    return std::max(v.real().mag_log2(), v.imag().mag_log2());
}

}  // namespace

TheoremPoint TheoremPoint::rational_point(Family family, const ScalingParam& t, long long n,
                                          BigComplex u, BigReal q, std::optional<CBHParams> cbh) {
    if (t.kind() != ScalingParam::Kind::rational)
        throw std::domain_error("rational_point: t must be rational");
    if (n < 1) throw std::domain_error("rational_point: n must be positive");
    validate_common(family, u, q, cbh);
    TheoremPoint pt(family, t, std::move(u), std::move(q));
    pt.n_ = n;
    auto [m, lam] = frac_floor_exact(t.rational_value(), n);
    pt.m_ = m;
    pt.offset_exact_ = lam;
    pt.offset_ = BigReal::of(lam, 256);
    pt.gamma_ = BigReal(64);
    pt.cbh_ = std::move(cbh);
    return pt;
}

TheoremPoint TheoremPoint::record_point(Family family, const ScalingParam& t,
                                        const ApproxRecord& rec, const BigReal& beta, BigComplex u,
                                        BigReal q, std::optional<CBHParams> cbh) {
    if (t.kind() == ScalingParam::Kind::rational)
        throw std::domain_error("record_point: t must be irrational; use rational_point");
    if (!rec.theorem_eligible)
        throw std::domain_error(
            "record_point: record is not theorem-eligible (its m differs from floor(n t)); the "
            "scaled expansion only holds along the eligible subsequence");
    validate_common(family, u, q, cbh);
    TheoremPoint pt(family, t, std::move(u), std::move(q));
    pt.n_ = rec.n;
    pt.m_ = rec.m;
    pt.offset_ = beta;
    pt.gamma_ = rec.gamma;
    pt.gamma_bound_ = rec.gamma_bound;
    pt.cbh_ = std::move(cbh);
    return pt;
}

BigReal TheoremPoint::nt(mpfr_prec_t prec) const {
    if (offset_exact_) {
        Rational x = t_.rational_value() * Rational(Integer(static_cast<long>(n_)));
        x.canonicalize();
        return BigReal::of(x, prec + 16);
    }
    BigReal th = t_.approx(prec + 2 * nbits_of(n_) + 16);
    return th * static_cast<long>(n_);
}

BigReal TheoremPoint::prefactor_exponent(mpfr_prec_t prec) const {
    BigReal h = BigReal::of(static_cast<long>(half_m()), prec);
    return h * (nt(prec) - h);
}

mpfr_prec_t auto_precision(const TheoremPoint& pt) {
    return required_precision(pt.n(), pt.t().approx(192), pt.q());
}

namespace {

struct MainPieces {
    BigComplex theta_main;   // theta with the signed argument of the display
    BigReal c_norm;          // (q;q)_inf for AQ, c(r,s;q) for CBH
    BigComplex u_pow;        // (-u)^h for AQ, u^h for CBH
    BigReal exp_scale;       // L * floor(m/2) * (nt - floor(m/2))
    BigReal ell;             // 1 for AQ, l for CBH
};

MainPieces main_pieces(const TheoremPoint& pt, mpfr_prec_t prec) {
    MainPieces mp;
    BigReal q = pt.q().with_precision(prec);
    BigComplex u = pt.u().with_precision(prec);
    BigReal eps = default_rel_eps(prec);
    BigReal chi_off = pt.offset().with_precision(prec) + static_cast<long>(pt.chi_m());
    long h = static_cast<long>(pt.half_m());
    if (pt.family() == Family::aq) {
        mp.ell = BigReal::of(1L, prec);
        mp.exp_scale = pt.prefactor_exponent(prec);
        BigComplex arg = -(u.reciprocal() * pow(q, chi_off));
        mp.theta_main = theta(arg, QBase(q * q), ThetaMethod::series);
        mp.c_norm = qpoch_inf(q, QBase(q), eps);
        mp.u_pow = pow_int(-u, h);
    } else {
        const CBHParams& p = *pt.cbh();
        mp.ell = p.l.with_precision(prec);
        mp.exp_scale = mp.ell * pt.prefactor_exponent(prec);
        BigComplex arg = u.reciprocal() * pow(q, mp.ell * chi_off);
        mp.theta_main = theta(arg, QBase(pow(q, mp.ell * 2L)), ThetaMethod::series);
        CBHParams pp(p.a, p.b, p.l);
        mp.c_norm = c_factor(pp, QBase(q));
        mp.u_pow = pow_int(u, h);
    }
    return mp;
}

}  // namespace

LogScaled aq_main_term(const TheoremPoint& pt, mpfr_prec_t prec) {
    if (pt.family() != Family::aq) throw std::domain_error("aq_main_term: AQ family expected");
    if (prec == 0) prec = auto_precision(pt);
    MainPieces mp = main_pieces(pt, prec);
    BigComplex mant = mp.u_pow * mp.theta_main / mp.c_norm;
    return normalize_scaled({mant, -mp.exp_scale, pt.q().with_precision(prec)});
}

LogScaled cbh_main_term(const TheoremPoint& pt, mpfr_prec_t prec) {
    if (pt.family() != Family::cbh) throw std::domain_error("cbh_main_term: CBH family expected");
    if (prec == 0) prec = auto_precision(pt);
    MainPieces mp = main_pieces(pt, prec);
    BigComplex mant = mp.u_pow * mp.theta_main * mp.c_norm;
    return normalize_scaled({mant, -mp.exp_scale, pt.q().with_precision(prec)});
}

namespace {

// brace factor { G q^{nt/4} + q^{L m^2/16} / |u|^{floor(m/4)+1} }
BigReal bound_brace(const TheoremPoint& pt, const BigReal& G, const BigReal& L, mpfr_prec_t prec) {
    BigReal q = pt.q().with_precision(prec);
    BigReal nt = pt.nt(prec);
    BigReal uabs = abs(pt.u().with_precision(prec));
    BigReal m2 = BigReal::of(static_cast<long>(pt.m()), prec) *
                 BigReal::of(static_cast<long>(pt.m()), prec);
    long m4 = static_cast<long>(pt.m() / 4);
    return G * pow(q, nt / 4L) + pow(q, L * m2 / 16L) / pow_int(uabs, m4 + 1);
}

}  // namespace

AqBoundVariants aq_error_bound_variants(const TheoremPoint& pt, mpfr_prec_t prec) {
    if (pt.family() != Family::aq) throw std::domain_error("aq_error_bound: AQ family expected");
    if (!pt.rational_pathway())
        throw std::domain_error("aq_error_bound: explicit bound exists on the rational pathway only");
    if (prec == 0) prec = 320;
    BigReal q = pt.q().with_precision(prec);
    BigReal eps = default_rel_eps(prec);
    QBase qb(q);
    BigReal chi_off = pt.offset().with_precision(prec) + static_cast<long>(pt.chi_m());
    BigReal uabs = abs(pt.u().with_precision(prec));
    BigReal arg = pow(q, chi_off) / uabs;
    BigReal theta2 = theta(BigComplex(arg), QBase(q * q), ThetaMethod::series).real();
    BigReal theta1 = theta(BigComplex(arg), qb, ThetaMethod::series).real();
    BigReal common = BigReal::of(3L, prec) * qpoch_inf(-pow_int(q, 3), qb, eps);
    BigReal qq = qpoch_inf(q, qb, eps);
    BigReal one = BigReal::of(1L, prec);
    BigReal brace = bound_brace(pt, one, one, prec);
    AqBoundVariants v{common * theta2 / min(qq, 1L - q) * brace,
                      common * theta2 / qq * brace,
                      common * theta1 / (1L - q) * brace};
    return v;
}

BigReal aq_error_bound(const TheoremPoint& pt, mpfr_prec_t prec) {
    return aq_error_bound_variants(pt, prec).conservative;
}

BigReal cbh_error_bound(const TheoremPoint& pt, mpfr_prec_t prec) {
    if (pt.family() != Family::cbh) throw std::domain_error("cbh_error_bound: CBH family expected");
    if (!pt.rational_pathway())
        throw std::domain_error("cbh_error_bound: explicit bound exists on the rational pathway only");
    if (prec == 0) prec = 320;
    const CBHParams& p = *pt.cbh();
    BigReal q = pt.q().with_precision(prec);
    QBase qb(q);
    BigReal eps = default_rel_eps(prec);
    BigReal L = p.l.with_precision(prec);
    BigReal chi_off = pt.offset().with_precision(prec) + static_cast<long>(pt.chi_m());
    BigReal uabs = abs(pt.u().with_precision(prec));
    BigReal arg = pow(q, L * chi_off) / uabs;
    BigReal th = theta(BigComplex(arg), QBase(pow(q, L * 2L)), ThetaMethod::series).real();
    long rs = static_cast<long>(p.a.size() + p.b.size());
    BigReal front = BigReal::pow2(rs + 2, prec) * th /
                    pow_int(qpoch_inf(q, qb, eps), rs);
    BigReal G = BigReal::of(1L, prec);
    for (const auto& b : p.b) G *= qpoch_inf(-(b.with_precision(prec) * q * q), qb, eps);
    for (const auto& a : p.a) G /= qpoch_inf(a.with_precision(prec) * q, qb, eps);
    return front * bound_brace(pt, G, L, prec);
}

VerifyRow residual_row(const TheoremPoint& pt, mpfr_prec_t prec) {
    mpfr_prec_t base_prec = prec != 0 ? prec : auto_precision(pt);
    double worst_cancel = 0.0;
    for (int attempt = 0;; ++attempt) {
        mpfr_prec_t P = base_prec << attempt;
        BigReal q = pt.q().with_precision(P);
        BigComplex u = pt.u().with_precision(P);
        QBase qb(q);
        BigReal eps = default_rel_eps(P);
        MainPieces mp = main_pieces(pt, P);
        BigReal nt = pt.nt(P);
        BigComplex direct(P);
        if (pt.family() == Family::aq) {
            BigComplex z = u * pow(q, -nt);
            direct = aq_direct(z, qb, eps);
        } else {
            BigComplex z = u * pow(q, -(mp.ell * nt));
            direct = cbh_direct(*pt.cbh(), z, qb, eps);
        }
        // exact rearrangement of the theorem display
        BigComplex normalized(P);
        if (pt.family() == Family::aq)
            normalized = direct * mp.c_norm * pow(q, mp.exp_scale) / mp.u_pow;
        else
            normalized = direct * pow(q, mp.exp_scale) / (mp.u_pow * mp.c_norm);
        BigComplex res = normalized - mp.theta_main;
        double cancel = std::max(log2_mag(normalized), log2_mag(mp.theta_main)) - log2_mag(res);
        worst_cancel = std::max(worst_cancel, cancel);
        if (cancel >= static_cast<double>(kGuardBits - 16) && !res.is_zero()) {
            if (attempt >= kMaxRetries) throw PrecisionRetryExhausted(worst_cancel);
            continue;
        }
        VerifyRow row;
        row.n = pt.n();
        row.m = pt.m();
        row.offset = pt.offset();
        row.gamma = pt.gamma();
        row.lhs_scaled = to_scaled(direct, q);
        row.main_theta = mp.theta_main;
        row.residual = res;
        row.precision_bits = P;
        if (pt.rational_pathway()) {
            row.paper_bound = pt.family() == Family::aq ? aq_error_bound(pt) : cbh_error_bound(pt);
            row.bound_satisfied = abs(res) <= *row.paper_bound;
        }
        BigReal theta_abs = abs(mp.theta_main);
        if (theta_abs > BigReal::pow2(-static_cast<long>(P / 4), 64))
            row.residual_rel = abs(res) / theta_abs;
        return row;
    }
}

std::pair<BigComplex, BigComplex> residual_decomposition(const TheoremPoint& pt, mpfr_prec_t prec) {
    if (pt.family() != Family::aq || !pt.rational_pathway())
        throw std::domain_error("residual_decomposition: AQ family with rational t expected");
    mpfr_prec_t P = prec != 0 ? prec : auto_precision(pt);
    BigReal q = pt.q().with_precision(P);
    QBase qb(q);
    BigComplex u = pt.u().with_precision(P);
    BigReal eps = default_rel_eps(P);
    BigReal nt = pt.nt(P);
    BigReal qq = qpoch_inf(q, qb, eps);
    long h = static_cast<long>(pt.half_m());
    // w_k = q^{k^2 - k nt} (-u)^k / (q;q)_k; s1 = (q;q)_inf sum_{k<=h} w_k
    BigComplex one(BigReal::of(1L, P), BigReal(P));
    BigComplex w = one;
    BigComplex s1(P), s2(P);
    BigReal q_mnt = pow(q, 2L - nt);  // q^{2k+1-nt} at k=0 is q^{1-nt}
    BigReal q_2k1_nt = pow(q, 1L - nt);
    BigReal q_k1 = q;
    BigReal q2 = q * q;
    double max_mag = -1e300;
    double eps_log2 = eps.mag_log2() - 1.0;
    for (long k = 0;; ++k) {
        if (k <= h)
            s1 = s1 + w;
        else
            s2 = s2 + w;
        double cur = std::max(log2_mag(s1), log2_mag(s2));
        max_mag = std::max(max_mag, cur);
        w = w * (-u) * q_2k1_nt / (1L - q_k1);
        q_2k1_nt *= q2;
        q_k1 *= q;
        if (k > h) {
            double ratio_log2 = q_2k1_nt.mag_log2() + abs(u).mag_log2() + 2.0;
            if (ratio_log2 < -1.0) {
                double tail = (std::max(w.real().mag_log2(), w.imag().mag_log2()) + 1.0) -
                              std::log2(1.0 - std::exp2(ratio_log2));
                if (tail <= eps_log2 + max_mag) break;
            }
        }
        if (k > 64 * static_cast<long>(P) + 4096)
            throw std::runtime_error("residual_decomposition: truncation failed to converge");
    }
    BigReal scale = pow(q, pt.prefactor_exponent(P));
    BigComplex upow = pow_int(-u, h);
    return {s1 * qq * scale / upow, s2 * qq * scale / upow};
}

}  // namespace qasym
