#include <gmpxx.h>

#include <cmath>
#include <stdexcept>

#include "ojanet/oracle.hpp"

namespace ojanet::oracle {

namespace {

// Fixed-point rational: an mpz integer v denoting the exact rational
// v / 2^frac_bits. Sums are exact; each product is rounded once, to the
// nearest representable value. The recurrence map has slope below 5/4 in
// the region reached from a clean start, so s rounded steps differ from
// the exact trajectory by less than (5/4)^s * steps_per_round * 2^-frac_bits.
class Fixed {
public:
    Fixed(int frac_bits) : bits_(frac_bits) {}

    mpz_class from_ratio(const Ratio& r) const {
        mpz_class num(static_cast<long>(r.num));
        num <<= bits_;
        mpz_class den(static_cast<long>(r.den));
        mpz_class q, rem;
        mpz_fdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
        if (rem * 2 >= den) ++q;
        return q;
    }

    mpz_class mul(const mpz_class& a, const mpz_class& b) const {
        mpz_class p = a * b;
        p += half_;
        return p >> bits_;
    }

    mpz_class one() const { return mpz_class(1) << bits_; }

    double to_double(const mpz_class& v) const {
        // Scale down in two halves so the exponent stays in range.
        mpz_class hi = v >> (bits_ / 2);
        return hi.get_d() * std::ldexp(1.0, -(bits_ - bits_ / 2));
    }

    void set_half() { half_ = mpz_class(1) << (bits_ - 1); }

private:
    int bits_;
    mpz_class half_;
};

double rel_diff(double reference, double value) {
    if (reference == 0.0) return value == 0.0 ? 0.0 : HUGE_VAL;
    return std::fabs(value - reference) / std::fabs(reference);
}

}  // namespace

AuditReport audit_noise_free(int k, Ratio eta, int lmax, int steps, int frac_bits) {
    if (frac_bits < 64) throw std::invalid_argument("audit_noise_free: frac_bits too small");
    const auto float_traj = iterate_noise_free(k, eta.value(), lmax, steps);

    Fixed fx(frac_bits);
    fx.set_half();
    Ratio w0{1, 1};
    for (int i = 0; i < lmax; ++i) w0 = w0 / Ratio(k, 1);
    mpz_class wf = fx.from_ratio(w0);
    mpz_class wout = wf;
    const mpz_class eta_fp = fx.from_ratio(eta);
    const mpz_class one = fx.one();

    AuditReport rep;
    rep.steps = steps;
    rep.frac_bits = frac_bits;
    rep.max_rel_diff =
        std::max(rel_diff(fx.to_double(wf), float_traj[0].wf),
                 rel_diff(fx.to_double(wout), float_traj[0].wout));
    for (int t = 1; t <= steps; ++t) {
        const mpz_class z = wf * k;
        const mpz_class zw = fx.mul(z, wf);
        wf += fx.mul(fx.mul(eta_fp, z), one - zw);
        wout -= fx.mul(wout, fx.mul(eta_fp, fx.mul(z, z)));
        const auto& s = float_traj[static_cast<std::size_t>(t)];
        rep.max_rel_diff = std::max(rep.max_rel_diff, rel_diff(fx.to_double(wf), s.wf));
        rep.max_rel_diff = std::max(rep.max_rel_diff, rel_diff(fx.to_double(wout), s.wout));
    }
    return rep;
}

AuditReport audit_noise_free_exact(int k, Ratio eta, int lmax, int steps) {
    const auto float_traj = iterate_noise_free(k, eta.value(), lmax, steps);
    mpq_class wf(1, 1);
    for (int i = 0; i < lmax; ++i) wf /= k;
    mpq_class wout = wf;
    const mpq_class e(static_cast<long>(eta.num), static_cast<long>(eta.den));

    AuditReport rep;
    rep.steps = steps;
    rep.frac_bits = 0;
    rep.max_rel_diff = 0.0;
    for (int t = 1; t <= steps; ++t) {
        const mpq_class z = wf * k;
        wf = wf + e * z * (1 - z * wf);
        wout = wout * (1 - e * z * z);
        const auto& s = float_traj[static_cast<std::size_t>(t)];
        rep.max_rel_diff = std::max(rep.max_rel_diff, rel_diff(wf.get_d(), s.wf));
        rep.max_rel_diff = std::max(rep.max_rel_diff, rel_diff(wout.get_d(), s.wout));
    }
    return rep;
}

std::pair<std::string, std::string> exact_one_step(int k, Ratio eta, Ratio wf_in, Ratio wout_in) {
    const mpq_class e(static_cast<long>(eta.num), static_cast<long>(eta.den));
    mpq_class wf(static_cast<long>(wf_in.num), static_cast<long>(wf_in.den));
    mpq_class wout(static_cast<long>(wout_in.num), static_cast<long>(wout_in.den));
    const mpq_class z = wf * k;
    mpq_class wf2 = wf + e * z * (1 - z * wf);
    mpq_class wout2 = wout * (1 - e * z * z);
    wf2.canonicalize();
    wout2.canonicalize();
    return {wf2.get_str(), wout2.get_str()};
}

}  // namespace ojanet::oracle
