#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ojanet/hierarchy.hpp"
#include "ojanet/network.hpp"
#include "ojanet/ratio.hpp"
#include "ojanet/training.hpp"

namespace ojanet::lb {

/// Ratio pair with its rounded counterparts r1'*k = floor(r1*k),
/// r2'*k = ceil(r2*k), constrained so that no firing threshold can separate
/// the two scenario bounds: (r2')^2 <= 2*r1' - (r1')^2.
struct RatioParams {
    Ratio r1, r2;
    int k = 0;
    Ratio r1p, r2p;
    std::int64_t m1 = 0;  ///< floor(r1*k)
    std::int64_t m2 = 0;  ///< ceil(r2*k)
};

/// Validates all four constraints, each rejected by name.
RatioParams derive_r_primes(Ratio r1, Ratio r2, int k);

struct Scenario {
    std::vector<int> b0;  ///< presented level-0 set, sorted
    double bound = 0;     ///< potential bound the construction guarantees
};

/// Must-fire input for a level >= 2 concept: the r2'k children with the
/// smallest subtree weight, and within each the r2'k lightest leaf groups.
/// The observed potential is at most (r2')^2 * W while B still r2-supports
/// the concept.
Scenario scenario_must_fire(const ConceptHierarchy& h, ConceptId c,
                            const std::function<double(int)>& leaf_weight,
                            const RatioParams& params);

/// Can't-fire input: the r1'k heaviest children in full plus the r1'k
/// heaviest leaves of every remaining child. The potential is at least
/// (2*r1' - r1'^2) * W while the concept stays below r1 support.
Scenario scenario_cant_fire(const ConceptHierarchy& h, ConceptId c,
                            const std::function<double(int)>& leaf_weight,
                            const RatioParams& params);

struct InfeasibilityCertificate {
    double w_total = 0;
    double must_fire_bound = 0;  ///< (r2')^2 * W, ceiling for any workable tau
    double cant_fire_bound = 0;  ///< (2r1' - r1'^2) * W, floor for any workable tau
    bool valid = false;          ///< cant_fire_bound >= must_fire_bound
    std::vector<int> witness_a;  ///< constructed must-fire input, when available
    std::vector<int> witness_b;  ///< constructed can't-fire input, when available
};

InfeasibilityCertificate check_infeasibility(const RatioParams& params, double w_total);

enum class ViolatedClause { MustFire, MustNotFire };

struct CounterexampleWitness {
    ConceptId concept_id;
    std::vector<int> b0;
    ViolatedClause clause = ViolatedClause::MustFire;
    double potential = 0;
    double tau = 0;
    InfeasibilityCertificate certificate;
};

/// Searches a single-layer network over a 2-level hierarchy for an input on
/// which the network violates the recognition contract for some top-level
/// concept: its rep must fire on the must-fire scenario and must stay
/// silent on the can't-fire one, but the two bounds leave no room for tau.
std::optional<CounterexampleWitness> empirical_counterexample(NetworkState& net,
                                                              const ConceptHierarchy& h,
                                                              const RepMap& reps,
                                                              const RatioParams& params);

struct LayerFloorReport {
    bool ok = true;
    std::vector<std::pair<ConceptId, std::pair<int, int>>> violations;
};

/// Every bound rep must sit at a layer >= the concept's level; the trainer
/// achieves equality. The list overload grades placements from any source,
/// not only maps built through RepMap::bind.
LayerFloorReport layer_floor_check(
    const std::vector<std::pair<ConceptId, std::pair<int, int>>>& placements);
LayerFloorReport layer_floor_check(const RepMap& reps);

void write_witness(const CounterexampleWitness& w, std::ostream& out);

}  // namespace ojanet::lb
