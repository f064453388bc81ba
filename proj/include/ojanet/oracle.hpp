#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ojanet/ratio.hpp"
#include "ojanet/rng.hpp"

namespace ojanet::oracle {

/// Scalar state of one learning neuron driven by a fixed set of k firing
/// inputs: wf is the shared in-set weight, wout the shared out-of-set
/// weight, z = k*wf the potential of the step that produced this state.
struct NoiseFreeStep {
    double wf = 0;
    double wout = 0;
    double z = 0;
};

/// Iterates wf <- wf + eta*z*(1 - z*wf), wout <- wout*(1 - eta*z^2) with
/// z = k*wf from wf = wout = 1/k^lmax. Element [t] is the state after t
/// update rounds; [0] is the initial state. Requires eta <= 1/(4k).
std::vector<NoiseFreeStep> iterate_noise_free(int k, double eta, int lmax, int steps);

struct ConvergenceReport {
    bool ok = false;
    long holds_from = -1;  ///< first t from which both bounds hold through the end
    long sigma = 0;
    double in_lo = 0, in_hi = 0, out_bound = 0;
    std::string issue;
};

/// Checks wf(t) in [1/((1+epsilon)*sqrt(k)), 1/sqrt(k)] and
/// wout(t) <= 1/k^(lmax+b) for every t >= sigma.
ConvergenceReport check_convergence(const std::vector<NoiseFreeStep>& traj, long sigma,
                                    double epsilon, int b, int k, int lmax);

/// Upper bound on the rounds needed to double wf below half its cap: 4/(3*eta*k).
double doubling_time_bound(double eta, int k);

struct DoublingMeasurement {
    int j = 0;           ///< stage from 1/(2^(j+1) sqrt k) to 1/(2^j sqrt k)
    long rounds = 0;
};
struct DoublingReport {
    std::vector<DoublingMeasurement> stages;
    double bound = 0;
    bool within = true;  ///< every stage took at most ceil(bound) rounds
};
DoublingReport measure_doubling_times(const std::vector<NoiseFreeStep>& traj, int k);

struct DecayReport {
    bool ratio_ok = false;     ///< wout shrinks by at least 15/16 per round on the suffix
    double max_ratio = 0;
    long suffix_start = -1;    ///< first t with wf >= 1/(2 sqrt k)
    long steps_to_target = -1; ///< rounds from suffix start until wout <= 1/k^(lmax+b)
    double step_bound = 0;     ///< b*log2(k)/log2(16/15)
    bool positive = false;     ///< wout stayed strictly positive
};

/// Requires eta = 1/(4k); examines the trajectory suffix where wf has
/// reached half its cap.
DecayReport decay_rate_check(const std::vector<NoiseFreeStep>& traj, int k, int lmax, int b,
                             double eta);

struct NoisyStep {
    std::vector<double> w;  ///< the k in-set weights, tracked individually
    double wout = 0;
    double z = 0;
    double psi = 0;  ///< max(w_max/wbar, wbar/w_min)
    double phi = 0;  ///< sum of the in-set weights
};

struct NoisyTrajectory {
    std::vector<NoisyStep> steps;
    double wbar = 0;
    int fired_per_round = 0;  ///< ceil(p*k)
};

/// Per-round random drive: ceil(p*k) of the k in-set inputs fire, chosen
/// uniformly; all weights update by the same rule as the network. p = 1
/// reproduces iterate_noise_free exactly.
NoisyTrajectory iterate_noisy(int k, Ratio p, double eta, int lmax, int steps, Rng& rng);

struct WindowStabilityReport {
    long windows = 0;
    long within = 0;
    double fraction = 0;
    double band = 0;  ///< 8/b
};

/// Fraction of non-overlapping length-T windows in which phi stays within
/// factors (1 -+ 8/b) of its value at the window start.
WindowStabilityReport phi_window_stability(const NoisyTrajectory& traj, long T, int b);

struct AuditReport {
    double max_rel_diff = 0;
    long steps = 0;
    int frac_bits = 0;  ///< 0 marks the exact (unrounded) mode
};

/// Re-runs the noise-free recurrence in rational arithmetic and compares
/// against the double trajectory. Exact rationals triple their size each
/// round, so the full-horizon audit rounds every value to the nearest
/// multiple of 2^-frac_bits; the rounding error admits a closed-form bound
/// far below the comparison tolerance.
AuditReport audit_noise_free(int k, Ratio eta, int lmax, int steps, int frac_bits = 384);

/// Fully exact rational audit; practical only for short prefixes.
AuditReport audit_noise_free_exact(int k, Ratio eta, int lmax, int steps);

/// Exact one-round update of (wf, wout) as decimal strings "num/den",
/// usable as an independent check of single update steps.
std::pair<std::string, std::string> exact_one_step(int k, Ratio eta, Ratio wf, Ratio wout);

void save_trajectory_csv(const std::vector<NoiseFreeStep>& traj,
                         const std::filesystem::path& file);
void save_trajectory_csv(const NoisyTrajectory& traj, const std::filesystem::path& file);

}  // namespace ojanet::oracle
