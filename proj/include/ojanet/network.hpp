#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ojanet {

struct NetworkParams {
    int layers = 1;   ///< highest layer number; layer 0 is the input layer
    int n = 1;        ///< neurons per layer
    double tau = 1;   ///< firing threshold, shared by all non-input neurons
    double eta = 0;   ///< learning rate of the weight update
};

struct EngageDirective {
    int layer = 0;
    int neuron = 0;
};

/// Synchronous layered feed-forward network with binary firing, full
/// connectivity between consecutive layers, and a local multiplicative
/// weight update applied only to neurons flagged as engaged.
///
/// One step moves the whole network from time t to t+1:
///   - layer-0 firing is replaced by the externally supplied input,
///   - every non-input neuron fires iff the dot product of its weight row
///     with the previous firing of the layer below reaches tau (inclusive),
///   - each engaged neuron v (at most one per layer per step) updates its
///     row by w += eta*z*(x - z*w), where x is the previous firing of its
///     input layer and z is v's potential this step; z = 0 leaves w as is.
///
/// Steps are deterministic. A state is exclusively owned by one run;
/// distinct states may step in parallel threads.
class NetworkState {
public:
    /// Clean state: every weight 1/k^lmax, nothing firing, time 0.
    static NetworkState init(const NetworkParams& params, int k, int lmax);

    int layers() const { return params_.layers; }
    int n() const { return params_.n; }
    double tau() const { return params_.tau; }
    double eta() const { return params_.eta; }
    void set_tau(double tau) { params_.tau = tau; }
    std::int64_t time() const { return time_; }

    const std::vector<std::uint8_t>& firing(int layer) const;
    bool engaged(int layer, int neuron) const;

    std::span<const double> weight_row(int layer, int neuron) const;
    std::span<double> mutable_weight_row(int layer, int neuron);
    double weight(int layer, int to, int from) const {
        return weight_row(layer, to)[static_cast<std::size_t>(from)];
    }

    /// Potentials of one layer against the current firing of the layer
    /// below; what the next step will compare against tau.
    std::vector<double> layer_potentials(int layer) const;

    /// Overwrite layer-0 firing at the current time.
    void present(const std::vector<std::uint8_t>& input);

    void step(const std::vector<std::uint8_t>& next_input,
              std::span<const EngageDirective> directives = {});

    void zero_firing();

    /// FNV-1a over the raw weight bytes; used by read-only checks.
    std::uint64_t weights_digest() const;

    void save_weights_binary(const std::filesystem::path& file) const;
    void save_weights_csv(const std::filesystem::path& file) const;
    static NetworkState load_weights_binary(const std::filesystem::path& file,
                                            const NetworkParams& params);

private:
    NetworkParams params_;
    std::int64_t time_ = 0;
    std::vector<std::vector<double>> weights_;        // [layer-1], n*n row-major
    std::vector<std::vector<std::uint8_t>> firing_;   // [layer]
    std::vector<std::vector<std::uint8_t>> engaged_;  // [layer-1]
    std::vector<double> pot_scratch_;
};

/// Dot product of a weight row with a binary input vector.
double potential(std::span<const double> w, std::span<const std::uint8_t> x);

/// Threshold activation, boundary inclusive.
inline bool activation(double pot, double tau) { return pot >= tau; }

/// w += eta*z*(x - z*w) with z = potential(w, x); exact no-op when z = 0.
void oja_update(std::span<double> w, std::span<const std::uint8_t> x, double eta);

}  // namespace ojanet
