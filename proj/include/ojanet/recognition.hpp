#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ojanet/hierarchy.hpp"
#include "ojanet/network.hpp"
#include "ojanet/ratio.hpp"
#include "ojanet/rng.hpp"
#include "ojanet/training.hpp"

namespace ojanet {

enum class Requirement { MustFire, MustNotFire, Unconstrained };

struct EvalVerdict {
    Requirement requirement = Requirement::Unconstrained;
    bool fired_on_time = false;      ///< rep fired exactly layer(rep) steps after presentation
    std::vector<int> other_offsets;  ///< offsets != layer at which the rep also fired
    bool pass = true;                ///< always true for Unconstrained
};

struct RecognitionRow {
    ConceptId concept_id;
    std::string family;
    std::size_t b_size = 0;
    EvalVerdict verdict;
};

struct RecognitionReport {
    std::vector<RecognitionRow> rows;
    long must_fire_checks = 0;
    long must_not_fire_checks = 0;
    long unconstrained = 0;
    long failures = 0;
    bool pass = false;

    void save_csv(const std::filesystem::path& file) const;
    void save_text(const std::filesystem::path& file) const;
};

struct StaticRecognizer {
    NetworkState net;
    RepMap reps;
};

/// Embeds the hierarchy digraph directly: unit weights on rep(child) ->
/// rep(parent) edges, zero elsewhere, threshold (r1+r2)*k/2. Level-l
/// concepts take the layer-l neurons in index order.
StaticRecognizer build_static_recognizer(const ConceptHierarchy& h, Ratio r1, Ratio r2, int n);

/// Presents B once with all engaged flags off, runs lmax steps, and grades
/// the firing of rep(c) at exactly layer(rep(c)) steps later against the
/// supported_r2 / supported_r1 classification of B. Firing at other offsets
/// is reported but not graded. Weights are untouched.
EvalVerdict evaluate_concept(NetworkState& net, const RepMap& reps, const ConceptHierarchy& h,
                             ConceptId c, const std::vector<int>& b0, Ratio r1, Ratio r2);

/// Grades every concept on four input families: full leaves, a minimal
/// r2-supporting set, a maximal non-r1-supporting set, and `budget` random
/// sets drawn per-level so all three bands actually occur. Verifies the
/// evaluation left the weights bit-identical.
RecognitionReport recognition_suite(NetworkState& net, const RepMap& reps,
                                    const ConceptHierarchy& h, Ratio r1, Ratio r2, int budget,
                                    Rng& sampler);

}  // namespace ojanet
