#include "ojanet/trace.hpp"

#include <cstdio>
#include <stdexcept>

namespace ojanet {

TraceCsvWriter::TraceCsvWriter(const std::filesystem::path& file, int layers)
    : out_(file) {
    if (!out_) throw std::runtime_error("cannot write " + file.string());
    out_ << "t,shown_level,shown_index,input_ones,engaged";
    for (int l = 1; l <= layers; ++l) out_ << ",fired_l" << l;
    out_ << "\n";
}

void TraceCsvWriter::row(const TraceStep& s) {
    out_ << s.t << "," << s.shown_level << "," << s.shown_index << "," << s.input_ones << ",";
    char buf[64];
    for (std::size_t i = 0; i < s.engaged.size(); ++i) {
        const auto& e = s.engaged[i];
        std::snprintf(buf, sizeof buf, "%s%d:%d:%.17g", i ? "|" : "", e.layer, e.neuron,
                      e.potential);
        out_ << buf;
    }
    for (const auto& layer : s.fired) {
        out_ << ",";
        for (std::size_t i = 0; i < layer.size(); ++i) out_ << (i ? "|" : "") << layer[i];
    }
    out_ << "\n";
}

void TraceCsvWriter::finish(const std::vector<std::int64_t>& snapshot_times) {
    out_ << "# snapshots at:";
    for (auto t : snapshot_times) out_ << " " << t;
    out_ << "\n";
    out_.flush();
}

void SimulationTrace::save_csv(const std::filesystem::path& file) const {
    TraceCsvWriter writer(file, steps.empty() ? 0 : static_cast<int>(steps.front().fired.size()));
    for (const auto& s : steps) writer.row(s);
    writer.finish(snapshot_times);
}

}  // namespace ojanet
