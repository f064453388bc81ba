#include "ojanet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "ojanet/training.hpp"

namespace ojanet::oracle {

std::vector<NoiseFreeStep> iterate_noise_free(int k, double eta, int lmax, int steps) {
    if (k < 2 || lmax < 1 || steps < 0) throw std::invalid_argument("iterate_noise_free: bad shape");
    if (!(eta > 0) || eta > 1.0 / (4.0 * k))
        throw std::invalid_argument("iterate_noise_free: need 0 < eta <= 1/(4k)");
    std::vector<NoiseFreeStep> traj;
    traj.reserve(static_cast<std::size_t>(steps) + 1);
    double wf = std::pow(static_cast<double>(k), -lmax);
    double wout = wf;
    traj.push_back({wf, wout, 0.0});
    for (int t = 0; t < steps; ++t) {
        const double z = k * wf;
        wf = wf + eta * z * (1.0 - z * wf);
        wout = wout * (1.0 - eta * z * z);
        traj.push_back({wf, wout, z});
    }
    return traj;
}

ConvergenceReport check_convergence(const std::vector<NoiseFreeStep>& traj, long sigma,
                                    double epsilon, int b, int k, int lmax) {
    ConvergenceReport rep;
    rep.sigma = sigma;
    rep.in_hi = 1.0 / std::sqrt(static_cast<double>(k));
    rep.in_lo = rep.in_hi / (1.0 + epsilon);
    rep.out_bound = std::pow(static_cast<double>(k), -(lmax + b));
    if (traj.empty() || sigma < 0 || sigma >= static_cast<long>(traj.size())) {
        rep.issue = "trajectory shorter than sigma";
        return rep;
    }
    auto in_bounds = [&](const NoiseFreeStep& s) {
        return s.wf >= rep.in_lo && s.wf <= rep.in_hi && s.wout <= rep.out_bound;
    };
    long first_bad_after = -1;
    for (long t = static_cast<long>(traj.size()) - 1; t >= 0; --t) {
        if (!in_bounds(traj[static_cast<std::size_t>(t)])) {
            first_bad_after = t;
            break;
        }
    }
    rep.holds_from = first_bad_after + 1;
    if (rep.holds_from >= static_cast<long>(traj.size())) {
        rep.issue = "bounds never hold";
        return rep;
    }
    rep.ok = rep.holds_from <= sigma;
    if (!rep.ok)
        rep.issue = "bounds only hold from step " + std::to_string(rep.holds_from);
    return rep;
}

double doubling_time_bound(double eta, int k) {
    if (!(eta > 0) || k < 1) throw std::invalid_argument("doubling_time_bound: bad parameters");
    return 4.0 / (3.0 * eta * k);
}

DoublingReport measure_doubling_times(const std::vector<NoiseFreeStep>& traj, int k) {
    DoublingReport rep;
    if (traj.empty()) return rep;
    const double sqrtk = std::sqrt(static_cast<double>(k));
    const double w0 = traj[0].wf;
    auto first_reaching = [&](double level) -> long {
        for (std::size_t t = 0; t < traj.size(); ++t)
            if (traj[t].wf >= level) return static_cast<long>(t);
        return -1;
    };
    for (int j = 1;; ++j) {
        const double from = 1.0 / (std::exp2(j + 1) * sqrtk);
        if (from < w0) break;
        const long ta = first_reaching(from);
        const long tb = first_reaching(1.0 / (std::exp2(j) * sqrtk));
        if (ta < 0 || tb < 0) continue;
        rep.stages.push_back({j, tb - ta});
    }
    std::reverse(rep.stages.begin(), rep.stages.end());
    return rep;
}

DecayReport decay_rate_check(const std::vector<NoiseFreeStep>& traj, int k, int lmax, int b,
                             double eta) {
    if (eta != 1.0 / (4.0 * k))
        throw std::invalid_argument("decay_rate_check: requires eta = 1/(4k)");
    DecayReport rep;
    rep.step_bound = b * std::log2(static_cast<double>(k)) / std::log2(16.0 / 15.0);
    const double half_cap = 1.0 / (2.0 * std::sqrt(static_cast<double>(k)));
    const double target = std::pow(static_cast<double>(k), -(lmax + b));
    for (std::size_t t = 0; t < traj.size(); ++t) {
        if (traj[t].wf >= half_cap) {
            rep.suffix_start = static_cast<long>(t);
            break;
        }
    }
    if (rep.suffix_start < 0) return rep;
    rep.ratio_ok = true;
    rep.positive = true;
    rep.max_ratio = 0.0;
    for (std::size_t t = static_cast<std::size_t>(rep.suffix_start); t + 1 < traj.size(); ++t) {
        const double ratio = traj[t + 1].wout / traj[t].wout;
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        if (!(ratio <= 15.0 / 16.0)) rep.ratio_ok = false;
        if (!(traj[t + 1].wout > 0.0)) rep.positive = false;
        if (rep.steps_to_target < 0 && traj[t + 1].wout <= target)
            rep.steps_to_target = static_cast<long>(t + 1) - rep.suffix_start;
    }
    return rep;
}

NoisyTrajectory iterate_noisy(int k, Ratio p, double eta, int lmax, int steps, Rng& rng) {
    if (!(Ratio(0, 1) < p) || Ratio(1, 1) < p)
        throw std::invalid_argument("iterate_noisy: p must be in (0,1]");
    if (k < 2 || lmax < 1 || steps < 0 || !(eta > 0))
        throw std::invalid_argument("iterate_noisy: bad parameters");
    NoisyTrajectory traj;
    traj.wbar = wbar(k, p.value());
    traj.fired_per_round = static_cast<int>(p.ceil_mul(k));
    const double w0 = std::pow(static_cast<double>(k), -lmax);

    std::vector<double> w(static_cast<std::size_t>(k), w0);
    double wout = w0;
    std::vector<std::uint8_t> x(static_cast<std::size_t>(k), 0);

    auto snapshot = [&](double z) {
        NoisyStep s;
        s.w = w;
        s.wout = wout;
        s.z = z;
        const auto [mn, mx] = std::minmax_element(w.begin(), w.end());
        s.psi = std::max(*mx / traj.wbar, traj.wbar / *mn);
        s.phi = 0.0;
        for (double wi : w) s.phi += wi;
        traj.steps.push_back(std::move(s));
    };
    snapshot(0.0);

    for (int t = 0; t < steps; ++t) {
        std::fill(x.begin(), x.end(), 0);
        if (traj.fired_per_round == k) {
            std::fill(x.begin(), x.end(), 1);
        } else {
            for (int i : rng.sample(k, traj.fired_per_round)) x[static_cast<std::size_t>(i)] = 1;
        }
        double z = 0.0;
        for (int i = 0; i < k; ++i)
            if (x[static_cast<std::size_t>(i)]) z += w[static_cast<std::size_t>(i)];
        for (int i = 0; i < k; ++i) {
            auto& wi = w[static_cast<std::size_t>(i)];
            wi += eta * z * (static_cast<double>(x[static_cast<std::size_t>(i)]) - z * wi);
            if (!(wi >= 0.0 && wi <= 1.0))
                throw std::logic_error("iterate_noisy: weight left [0,1]");
        }
        wout *= 1.0 - eta * z * z;
        snapshot(z);
    }
    return traj;
}

WindowStabilityReport phi_window_stability(const NoisyTrajectory& traj, long T, int b) {
    if (T < 1 || b < 1) throw std::invalid_argument("phi_window_stability: bad T or b");
    WindowStabilityReport rep;
    rep.band = 8.0 / b;
    const long total = static_cast<long>(traj.steps.size());
    for (long start = 0; start + T < total; start += T) {
        const double base = traj.steps[static_cast<std::size_t>(start)].phi;
        bool ok = true;
        for (long t = start + 1; t <= start + T; ++t) {
            const double phi = traj.steps[static_cast<std::size_t>(t)].phi;
            if (phi < base * (1.0 - rep.band) || phi > base * (1.0 + rep.band)) {
                ok = false;
                break;
            }
        }
        ++rep.windows;
        if (ok) ++rep.within;
    }
    rep.fraction = rep.windows ? static_cast<double>(rep.within) / rep.windows : 1.0;
    return rep;
}

void save_trajectory_csv(const std::vector<NoiseFreeStep>& traj,
                         const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "step,wf,wout,z\n";
    char buf[96];
    for (std::size_t t = 0; t < traj.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g", t, traj[t].wf, traj[t].wout,
                      traj[t].z);
        out << buf << "\n";
    }
}

void save_trajectory_csv(const NoisyTrajectory& traj, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "step";
    for (std::size_t i = 0; i < (traj.steps.empty() ? 0 : traj.steps[0].w.size()); ++i)
        out << ",w" << i;
    out << ",wout,z,psi,phi\n";
    char buf[64];
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
        const auto& s = traj.steps[t];
        out << t;
        for (double wi : s.w) {
            std::snprintf(buf, sizeof buf, ",%.17g", wi);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.17g", s.wout);
        out << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", s.z);
        out << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", s.psi);
        out << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", s.phi);
        out << buf << "\n";
    }
}

}  // namespace ojanet::oracle
