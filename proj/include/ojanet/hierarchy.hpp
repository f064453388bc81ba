#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ojanet/ratio.hpp"
#include "ojanet/rng.hpp"

namespace ojanet {

/// A concept is addressed by (level, index). Level 0 indices are positions
/// in the size-n universe of basic concepts; at level l >= 1 indices run
/// over the concepts of that level, 0 .. k^(lmax-l+1) - 1.
struct ConceptId {
    int level = 0;
    int index = 0;
    friend bool operator==(const ConceptId&, const ConceptId&) = default;
    friend auto operator<=>(const ConceptId&, const ConceptId&) = default;
};

/// A k-ary forest of concepts over levels 0..lmax.
///
/// Structural rules, enforced on construction and on load:
///   - exactly k concepts at the top level,
///   - every internal concept has exactly k children, one level down,
///   - children of distinct same-level concepts are disjoint,
///   - the level-0 concepts in use number k^(lmax+1), drawn from a
///     universe of n >= k^(lmax+1) basic concepts.
///
/// Immutable after construction; safe to share across threads.
class ConceptHierarchy {
public:
    /// Canonical tree: concept (l, i) has children (l-1, i*k+j), so the
    /// level-0 concepts in use are exactly indices 0..k^(lmax+1)-1.
    static ConceptHierarchy build(int k, int lmax, std::int64_t n);

    /// Assemble from explicit child tables (children[l-1][i] lists the
    /// child indices of concept (l, i)). Validates all structural rules.
    static ConceptHierarchy assemble(int k, int lmax, std::int64_t n,
                                     std::vector<std::vector<std::vector<int>>> children);

    int k() const { return k_; }
    int lmax() const { return lmax_; }
    std::int64_t n() const { return n_; }

    /// |C_l|: number of concepts of the hierarchy at a level.
    std::int64_t level_count(int level) const;

    bool contains(ConceptId c) const;
    const std::vector<int>& children_of(ConceptId c) const;
    /// Parent of a member concept below the top level; {-1,-1} for roots.
    ConceptId parent_of(ConceptId c) const;
    bool is_ancestor(ConceptId a, ConceptId c) const;

    /// Level-0 descendants, sorted. A level-0 concept's only leaf is itself.
    std::vector<int> leaves(ConceptId c) const;

    /// All member concepts, level-major (level 0 first).
    std::vector<ConceptId> all_concepts() const;

    /// Sorted universe indices of the level-0 concepts in use.
    const std::vector<int>& level0_members() const { return level0_members_; }
    bool level0_member(int index) const;

    void save(std::ostream& out) const;
    void save(const std::filesystem::path& file) const;
    static ConceptHierarchy load(std::istream& in);
    static ConceptHierarchy load(const std::filesystem::path& file);

private:
    ConceptHierarchy() = default;
    void validate() const;
    void index_members();

    int k_ = 0;
    int lmax_ = 0;
    std::int64_t n_ = 0;
    // children_[l-1][i] = child indices of concept (l, i)
    std::vector<std::vector<std::vector<int>>> children_;
    // parent_[l][i] = index of the level-(l+1) parent of concept (l, i)
    std::vector<std::vector<int>> parent_;
    std::vector<int> level0_members_;
    std::vector<std::uint8_t> level0_bitmap_;
};

/// supported_r(B) with its per-level slices.
class SupportSet {
public:
    bool contains(ConceptId c) const;
    /// Sorted indices of the supported concepts at one level.
    std::vector<int> slice(int level) const;
    std::vector<ConceptId> all() const;

    // levels[l] is a bitmap over the index space of level l
    // (the universe for level 0, |C_l| above).
    std::vector<std::vector<std::uint8_t>> levels;
};

/// The recursive support computation: a concept is supported when at
/// least r*k of its children are, starting from B intersected with the
/// level-0 members. The r*k comparison is exact (>= with cross
/// multiplication), so the boundary count r*k itself qualifies.
SupportSet supported(const ConceptHierarchy& h, const std::vector<int>& b0, Ratio r);

/// Noisy subsample of leaves(c): at every internal node pick ceil(p*k)
/// children uniformly at random and recurse. Result is sorted and has
/// exactly ceil(p*k)^level(c) entries; p = 1 reproduces leaves(c).
std::vector<int> mark(const ConceptHierarchy& h, ConceptId c, Ratio p, Rng& rng);

}  // namespace ojanet
