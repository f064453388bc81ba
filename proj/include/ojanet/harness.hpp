#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ojanet/ratio.hpp"
#include "ojanet/training.hpp"

namespace ojanet::harness {

inline constexpr const char* kVersion = "0.1.0";

enum class RunMode { LearnClean, LearnNoisy, Recognize, Oracle, LowerBound };

std::string mode_name(RunMode mode);
RunMode mode_from_name(const std::string& name);

/// Complete description of a run. Everything that influences the output
/// lives here; the manifest serializes this struct, and replaying the
/// manifest reproduces every artifact byte for byte.
struct RunConfig {
    RunMode mode = RunMode::LearnClean;

    int k = 4;
    int lmax = 2;
    std::int64_t n = 0;  ///< 0: default k^(lmax+1)

    Ratio r1{51, 100};
    Ratio r2{4, 5};
    double eta = 0;   ///< 0: mode default (1/(4k) in the clean mode)
    long sigma = 0;   ///< 0: formula value (clean); noisy mode requires it explicitly
    int b = 0;        ///< 0: minimal b meeting the gap condition

    SchedulePolicy policy = SchedulePolicy::Interleaved;
    bool level0_showings = true;  ///< give level-0 concepts the sigma quota too
    std::uint64_t seed = 0;
    int trials = 1;

    bool noisy = false;  ///< oracle mode: simulate the subsampled drive
    Ratio p{4, 5};       ///< noisy subsampling fraction
    double delta = -1;   ///< <0: default ((r2-r1)/r2)/50
    double cprime = 1;   ///< constant of the noisy showing-count formula

    int budget = 8;  ///< random recognition inputs per concept
    int spacing = 1;
    long snapshot_every = 0;  ///< 0: sigma/10

    long oracle_steps = 0;  ///< 0: sigma + margin
    int lb_trials = 1000;

    std::string weights_from;  ///< recognize mode: run directory of a trained net

    std::string to_json() const;
    static RunConfig from_json(const std::string& text);

    /// Cross-field validation; throws with the violated rule by name.
    void validate() const;

    std::int64_t effective_n() const;
    long effective_sigma() const;
    double effective_eta() const;
    int effective_b() const;
};

struct RunOutcome {
    bool pass = false;
    std::string summary;
};

/// Executes the configured mode end to end, writing the manifest and every
/// artifact under `out_dir`. Returns 0 on success (all trials passed).
int run(const RunConfig& config, const std::filesystem::path& out_dir);

struct ReplayResult {
    bool identical = false;
    std::string first_divergence;
};

/// Re-runs a manifest into a scratch directory and compares every artifact
/// byte for byte against the original run directory.
ReplayResult replay(const std::filesystem::path& manifest_file);

}  // namespace ojanet::harness
