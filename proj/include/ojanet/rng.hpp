#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ojanet {

/// Deterministic random stream.
///
/// All draws go through our own helpers rather than <random> distributions,
/// whose byte-level output is implementation-defined. A run is reproduced
/// from its master seed; independent consumers (schedule generation, mark
/// subsampling, the recognition sampler) each get a named substream so a
/// change in one consumer's draw count cannot shift another's sequence.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static std::uint64_t derive_seed(std::uint64_t master, std::string_view label);
    static Rng substream(std::uint64_t master, std::string_view label) {
        return Rng(derive_seed(master, label));
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, bound), bound > 0. Unbiased via rejection.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// The first m entries of a uniform random permutation of 0..n-1.
    std::vector<int> sample(int n, int m);

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ojanet
