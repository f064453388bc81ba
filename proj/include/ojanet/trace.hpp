#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

namespace ojanet {

struct EngagedRecord {
    int layer = 0;
    int neuron = 0;
    double potential = 0.0;
};

struct TraceStep {
    std::int64_t t = 0;
    int shown_level = -1;  ///< -1 when no showing this step
    int shown_index = -1;
    int input_ones = 0;
    std::vector<std::vector<int>> fired;  ///< per layer >= 1, sorted neuron indices
    std::vector<EngagedRecord> engaged;
};

/// Time-indexed record of a run: firings, engagements, and the times at
/// which full weight snapshots were taken. Replaying the run manifest
/// reproduces the trace byte for byte.
struct SimulationTrace {
    std::vector<TraceStep> steps;
    std::vector<std::int64_t> snapshot_times;

    void save_csv(const std::filesystem::path& file) const;
};

/// Incremental CSV writer for traces too long to keep in memory.
class TraceCsvWriter {
public:
    TraceCsvWriter(const std::filesystem::path& file, int layers);
    void row(const TraceStep& s);
    void finish(const std::vector<std::int64_t>& snapshot_times);

private:
    std::ofstream out_;
};

}  // namespace ojanet
