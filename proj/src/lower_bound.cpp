#include "ojanet/lower_bound.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace ojanet::lb {

RatioParams derive_r_primes(Ratio r1, Ratio r2, int k) {
    if (k < 2) throw std::invalid_argument("derive_r_primes: k must be >= 2");
    if (!(Ratio(0, 1) <= r1) || !(r1 <= r2) || Ratio(1, 1) < r2)
        throw std::invalid_argument("derive_r_primes: constraint 1 fails: need 0 <= r1 <= r2 <= 1");
    if (r1.integer_mul(k))
        throw std::invalid_argument("derive_r_primes: constraint 2 fails: r1*k is an integer");
    RatioParams p;
    p.r1 = r1;
    p.r2 = r2;
    p.k = k;
    p.m1 = r1.floor_mul(k);
    p.m2 = r2.ceil_mul(k);
    p.r1p = Ratio(p.m1, k);
    p.r2p = Ratio(p.m2, k);
    // (r2')^2 <= 2 r1' - (r1')^2, scaled by k^2 to stay in integers.
    const std::int64_t lhs = p.m2 * p.m2;
    const std::int64_t rhs = 2 * p.m1 * k - p.m1 * p.m1;
    if (lhs > rhs)
        throw std::invalid_argument(
            "derive_r_primes: constraint 4 fails: (r2')^2 > 2*r1' - (r1')^2");
    return p;
}

namespace {

struct ChildWeights {
    int child_index = 0;                           // index within children_of(c)
    double total = 0;                              // W(b)
    std::vector<std::pair<double, int>> leaves;    // (weight, leaf id)
};

std::vector<ChildWeights> gather(const ConceptHierarchy& h, ConceptId c,
                                 const std::function<double(int)>& leaf_weight) {
    if (c.level < 2) throw std::invalid_argument("scenario: concept must be at level >= 2");
    std::vector<ChildWeights> out;
    const auto& ch = h.children_of(c);
    for (std::size_t i = 0; i < ch.size(); ++i) {
        ChildWeights cw;
        cw.child_index = static_cast<int>(i);
        for (int leaf : h.leaves({c.level - 1, ch[i]})) {
            const double w = leaf_weight(leaf);
            if (w < 0) throw std::invalid_argument("scenario: negative leaf weight");
            cw.total += w;
            cw.leaves.push_back({w, leaf});
        }
        out.push_back(std::move(cw));
    }
    return out;
}

double total_weight(const std::vector<ChildWeights>& cws) {
    double w = 0;
    for (const auto& cw : cws) w += cw.total;
    return w;
}

}  // namespace

Scenario scenario_must_fire(const ConceptHierarchy& h, ConceptId c,
                            const std::function<double(int)>& leaf_weight,
                            const RatioParams& params) {
    auto cws = gather(h, c, leaf_weight);
    Scenario s;
    s.bound = params.r2p.value() * params.r2p.value() * total_weight(cws);
    std::stable_sort(cws.begin(), cws.end(),
                     [](const ChildWeights& a, const ChildWeights& b) { return a.total < b.total; });
    for (std::int64_t i = 0; i < params.m2 && i < static_cast<std::int64_t>(cws.size()); ++i) {
        auto& cw = cws[static_cast<std::size_t>(i)];
        std::stable_sort(cw.leaves.begin(), cw.leaves.end());
        for (std::int64_t j = 0; j < params.m2 && j < static_cast<std::int64_t>(cw.leaves.size());
             ++j)
            s.b0.push_back(cw.leaves[static_cast<std::size_t>(j)].second);
    }
    std::sort(s.b0.begin(), s.b0.end());
    if (!supported(h, s.b0, params.r2).contains(c))
        throw std::logic_error("scenario_must_fire: constructed input does not r2-support c");
    return s;
}

Scenario scenario_cant_fire(const ConceptHierarchy& h, ConceptId c,
                            const std::function<double(int)>& leaf_weight,
                            const RatioParams& params) {
    auto cws = gather(h, c, leaf_weight);
    Scenario s;
    const double r1p = params.r1p.value();
    s.bound = (2.0 * r1p - r1p * r1p) * total_weight(cws);
    std::stable_sort(cws.begin(), cws.end(),
                     [](const ChildWeights& a, const ChildWeights& b) { return a.total > b.total; });
    for (std::size_t i = 0; i < cws.size(); ++i) {
        auto& cw = cws[i];
        if (static_cast<std::int64_t>(i) < params.m1) {
            for (const auto& [w, leaf] : cw.leaves) s.b0.push_back(leaf);
        } else {
            std::stable_sort(cw.leaves.begin(), cw.leaves.end(),
                             [](const auto& a, const auto& b) { return a.first > b.first; });
            for (std::int64_t j = 0;
                 j < params.m1 && j < static_cast<std::int64_t>(cw.leaves.size()); ++j)
                s.b0.push_back(cw.leaves[static_cast<std::size_t>(j)].second);
        }
    }
    std::sort(s.b0.begin(), s.b0.end());
    if (supported(h, s.b0, params.r1).contains(c))
        throw std::logic_error("scenario_cant_fire: constructed input r1-supports c");
    return s;
}

InfeasibilityCertificate check_infeasibility(const RatioParams& params, double w_total) {
    if (!(w_total > 0)) throw std::invalid_argument("check_infeasibility: W must be positive");
    InfeasibilityCertificate cert;
    cert.w_total = w_total;
    const double r1p = params.r1p.value();
    const double r2p = params.r2p.value();
    cert.must_fire_bound = r2p * r2p * w_total;
    cert.cant_fire_bound = (2.0 * r1p - r1p * r1p) * w_total;
    cert.valid = cert.cant_fire_bound >= cert.must_fire_bound;
    return cert;
}

std::optional<CounterexampleWitness> empirical_counterexample(NetworkState& net,
                                                              const ConceptHierarchy& h,
                                                              const RepMap& reps,
                                                              const RatioParams& params) {
    if (h.lmax() != 2) throw std::invalid_argument("empirical_counterexample: needs a 2-level hierarchy");
    if (net.layers() != 1)
        throw std::invalid_argument("empirical_counterexample: needs a single-layer network");

    const std::vector<std::uint8_t> zeros(static_cast<std::size_t>(net.n()), 0);
    auto present_and_probe = [&](const std::vector<int>& b0, int neuron) {
        std::vector<std::uint8_t> input(static_cast<std::size_t>(net.n()), 0);
        for (int leaf : b0) {
            const auto lrep = reps.lookup({0, leaf});
            if (lrep) input[static_cast<std::size_t>(lrep->second)] = 1;
        }
        net.zero_firing();
        net.present(input);
        const double pot = net.layer_potentials(1)[static_cast<std::size_t>(neuron)];
        net.step(zeros);
        const bool fired = net.firing(1)[static_cast<std::size_t>(neuron)] != 0;
        net.zero_firing();
        return std::make_pair(fired, pot);
    };

    for (std::int64_t i = 0; i < h.level_count(2); ++i) {
        const ConceptId c{2, static_cast<int>(i)};
        const auto rep = reps.lookup(c);
        if (!rep || rep->first != 1)
            throw std::invalid_argument("empirical_counterexample: top concept without a layer-1 rep");
        const auto row = net.weight_row(1, rep->second);
        auto leaf_weight = [&](int leaf) {
            const auto lrep = reps.lookup({0, leaf});
            return row[static_cast<std::size_t>(lrep->second)];
        };
        double w_total = 0;
        for (int leaf : h.leaves(c)) w_total += leaf_weight(leaf);

        const auto must = scenario_must_fire(h, c, leaf_weight, params);
        const auto cant = scenario_cant_fire(h, c, leaf_weight, params);

        CounterexampleWitness w;
        w.concept_id = c;
        w.tau = net.tau();
        if (w_total > 0) w.certificate = check_infeasibility(params, w_total);
        w.certificate.witness_a = must.b0;
        w.certificate.witness_b = cant.b0;

        auto [fired_must, pot_must] = present_and_probe(must.b0, rep->second);
        if (!fired_must) {
            w.b0 = must.b0;
            w.clause = ViolatedClause::MustFire;
            w.potential = pot_must;
            return w;
        }
        auto [fired_cant, pot_cant] = present_and_probe(cant.b0, rep->second);
        if (fired_cant) {
            w.b0 = cant.b0;
            w.clause = ViolatedClause::MustNotFire;
            w.potential = pot_cant;
            return w;
        }
    }
    return std::nullopt;
}

LayerFloorReport layer_floor_check(
    const std::vector<std::pair<ConceptId, std::pair<int, int>>>& placements) {
    LayerFloorReport rep;
    for (const auto& [c, loc] : placements) {
        if (loc.first < c.level) {
            rep.ok = false;
            rep.violations.push_back({c, loc});
        }
    }
    return rep;
}

LayerFloorReport layer_floor_check(const RepMap& reps) {
    return layer_floor_check(reps.bindings());
}

void write_witness(const CounterexampleWitness& w, std::ostream& out) {
    out << "witness concept (" << w.concept_id.level << "," << w.concept_id.index << ")\n";
    out << "  violated: "
        << (w.clause == ViolatedClause::MustFire ? "must-fire (rep silent on an r2-supporting input)"
                                                 : "must-not-fire (rep fired below r1 support)")
        << "\n";
    out << "  tau " << w.tau << " observed potential " << w.potential << "\n";
    out << "  bounds: must-fire <= " << w.certificate.must_fire_bound << ", can't-fire >= "
        << w.certificate.cant_fire_bound << " (W = " << w.certificate.w_total << ")\n";
    out << "  |B| = " << w.b0.size() << " B =";
    for (int leaf : w.b0) out << " " << leaf;
    out << "\n";
    out << "  |B_A| = " << w.certificate.witness_a.size()
        << " |B_B| = " << w.certificate.witness_b.size() << "\n";
}

}  // namespace ojanet::lb
