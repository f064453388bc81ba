#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ojanet/hierarchy.hpp"
#include "ojanet/network.hpp"
#include "ojanet/ratio.hpp"
#include "ojanet/rng.hpp"
#include "ojanet/trace.hpp"

namespace ojanet {

struct Showing {
    ConceptId concept_id;
    bool noisy = false;
    Ratio p{1, 1};  ///< subsampling fraction, meaningful only when noisy
};

struct PresentationSchedule {
    std::vector<Showing> items;
    int sigma = 1;
    /// Whether level-0 concepts carry the sigma quota. Their reps are fixed
    /// up front, so their showings only drive the input layer; the default
    /// keeps them in the schedule, the knob drops them.
    bool count_level0 = true;
};

enum class SchedulePolicy { Sequential, Interleaved };

/// The dynamic one-to-one binding from concepts to neurons. Level-0
/// concepts are fixed to the input neurons with the same index; bindings
/// at layers >= 1 are established during training and never change.
class RepMap {
public:
    RepMap(int layers, int n);

    std::optional<std::pair<int, int>> lookup(ConceptId c) const;
    std::optional<ConceptId> concept_at(int layer, int neuron) const;
    bool bound(ConceptId c) const { return lookup(c).has_value(); }

    /// Extends the map; rejects rebinding, occupied neurons, and a layer
    /// different from the concept's level.
    void bind(ConceptId c, int layer, int neuron);

    /// Like bind but without the layer rule: lower-bound experiments place
    /// deep concepts in shallow layers on purpose. Injectivity still holds.
    void place(ConceptId c, int layer, int neuron);

    /// Bound concepts at layers >= 1, in binding order.
    const std::vector<std::pair<ConceptId, std::pair<int, int>>>& bindings() const {
        return bindings_;
    }
    int layers() const { return layers_; }
    int n() const { return n_; }

    void save(const std::filesystem::path& file) const;
    static RepMap load(const std::filesystem::path& file);

private:
    int layers_;
    int n_;
    std::map<ConceptId, std::pair<int, int>> forward_;
    // [layer-1][neuron] -> occupying concept; level -1 marks a free neuron
    std::vector<std::vector<ConceptId>> reverse_;
    std::vector<std::pair<ConceptId, std::pair<int, int>>> bindings_;
};

struct LearnParams {
    Ratio r1{0, 1};
    Ratio r2{1, 1};
    double eta = 0;
    double tau = 0;
    int b = 1;
    bool noisy = false;
    Ratio p{1, 1};
    double delta = 0;

    double epsilon() const { return ((r2 - r1) / (r1 + r2)).value(); }

    /// eta = 1/(4k), tau = (r1+r2)*sqrt(k)/2, minimal b meeting the
    /// r1*k gap condition.
    static LearnParams noise_free(int k, Ratio r1, Ratio r2);

    /// tau = r2*k*wbar/(1+10*delta); delta defaults to ((r2-r1)/r2)/50.
    static LearnParams noisy_mode(int k, Ratio r1, Ratio r2, Ratio p, double eta,
                                  double delta = -1);

    /// Throws with the violated condition by name.
    void validate(int k) const;
};

/// In-set weight scale the noisy update drives toward: 1/sqrt(p*k+1-p).
double wbar(int k, double p);

/// Smallest b >= 1 with r1*k - floor(r1*k) >= sqrt(k)/k^b; requires
/// r1*k non-integral.
int minimal_gap_b(Ratio r1, int k);
bool gap_condition_holds(Ratio r1, int k, int b);

/// Rounds sufficient per concept in the noise-free mode: whole rounds for
/// the in-set weights to rise into the epsilon band (two phases: doubling
/// up to half the target, then closing the band) plus whole rounds for the
/// out-set decay to 1/k^(lmax+b). Logs base 2.
long sigma_noise_free(int k, double eta, int lmax, double epsilon, int b);

/// Noisy-mode showing count: cprime*(1/(eta*k))*(lmax*log2(k)
/// + (r2*k+1-r2)/(eta*r2^1.5*(r2-r1))) + log2(k), rounded up.
long sigma_noisy(int k, double eta, int lmax, Ratio r1, Ratio r2, double cprime);

PresentationSchedule generate_schedule(const ConceptHierarchy& h, int sigma,
                                       SchedulePolicy policy, Rng& rng, bool noisy = false,
                                       Ratio p = Ratio{1, 1}, bool include_level0 = true);

struct ScheduleCheck {
    bool ok = true;
    std::string message;
    std::size_t position = 0;  ///< index of the offending showing, when ordering fails
};
ScheduleCheck validate_schedule(const ConceptHierarchy& h, const PresentationSchedule& s);

/// Input vector for one showing: ones at the reps of leaves(c), or of
/// mark(c, p) in the noisy case.
std::vector<std::uint8_t> encode_showing(const ConceptHierarchy& h, const RepMap& reps,
                                         const Showing& s, int n, Rng& mark_rng);

/// Winner-take-all engagement: when a level-l concept (l >= 1) was shown at
/// t_shown and current_t = t_shown + l, selects the layer-l neuron with the
/// highest potential against the current firing of layer l-1, ties broken
/// toward the lowest index. Otherwise returns nothing.
std::optional<EngageDirective> engage_controller(const NetworkState& net, int shown_level,
                                                 std::int64_t t_shown, std::int64_t current_t);

struct TrainOptions {
    int spacing = 1;               ///< steps between consecutive showings
    bool check_invariants = true;  ///< always-on trace checks; throws on violation
    bool record_trace = true;      ///< keep the trace in memory on the result
    /// Streaming consumer for trace rows; useful when record_trace is off.
    std::function<void(const TraceStep&)> on_step;
    /// Weight snapshot cadence in showings; 0 disables periodic snapshots.
    long snapshot_every = 0;
    std::function<void(const NetworkState&, const RepMap&, std::int64_t)> on_snapshot;
};

struct TrainResult {
    RepMap reps;
    SimulationTrace trace;
    std::int64_t engaged_updates = 0;
};

/// Runs the synchronous learning loop over a sigma-bottom-up schedule:
/// each showing drives the input layer for one step, engagement follows
/// the winner-take-all rule at the shown concept's layer, and first-time
/// engagements bind representatives. An empty schedule is a no-op.
TrainResult train(const ConceptHierarchy& h, NetworkState& net,
                  const PresentationSchedule& schedule, const LearnParams& params,
                  Rng& mark_rng, const TrainOptions& options = {});

void save_schedule(const PresentationSchedule& s, const std::filesystem::path& file);
PresentationSchedule load_schedule(const std::filesystem::path& file);

}  // namespace ojanet
