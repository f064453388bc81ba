#include "ojanet/recognition.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace ojanet {

StaticRecognizer build_static_recognizer(const ConceptHierarchy& h, Ratio r1, Ratio r2, int n) {
    if (!(Ratio(0, 1) <= r1) || !(r1 <= r2) || Ratio(1, 1) < r2)
        throw std::invalid_argument("static recognizer: need 0 <= r1 <= r2 <= 1");
    if (n < h.n()) throw std::invalid_argument("static recognizer: fewer neurons than inputs");
    for (int l = 1; l <= h.lmax(); ++l)
        if (h.level_count(l) > n)
            throw std::invalid_argument("static recognizer: layer " + std::to_string(l) +
                                        " too small to host all reps");
    NetworkParams params;
    params.layers = h.lmax();
    params.n = n;
    params.tau = (r1 + r2).value() * h.k() / 2.0;
    params.eta = 1.0 / (4.0 * h.k());  // never applied: recognition keeps engaged flags off
    StaticRecognizer rec{NetworkState::init(params, h.k(), h.lmax()), RepMap(h.lmax(), n)};
    for (int l = 1; l <= h.lmax(); ++l) {
        for (int v = 0; v < n; ++v) {
            auto row = rec.net.mutable_weight_row(l, v);
            std::fill(row.begin(), row.end(), 0.0);
        }
        for (std::int64_t i = 0; i < h.level_count(l); ++i)
            rec.reps.bind({l, static_cast<int>(i)}, l, static_cast<int>(i));
    }
    for (int l = 1; l <= h.lmax(); ++l) {
        for (std::int64_t i = 0; i < h.level_count(l); ++i) {
            const auto parent = rec.reps.lookup({l, static_cast<int>(i)});
            auto row = rec.net.mutable_weight_row(l, parent->second);
            for (int ch : h.children_of({l, static_cast<int>(i)})) {
                const auto child = rec.reps.lookup({l - 1, ch});
                row[static_cast<std::size_t>(child->second)] = 1.0;
            }
        }
    }
    return rec;
}

EvalVerdict evaluate_concept(NetworkState& net, const RepMap& reps, const ConceptHierarchy& h,
                             ConceptId c, const std::vector<int>& b0, Ratio r1, Ratio r2) {
    const auto rep = reps.lookup(c);
    if (!rep) throw std::invalid_argument("evaluate_concept: concept has no rep");
    const auto sup2 = supported(h, b0, r2);
    const auto sup1 = supported(h, b0, r1);

    EvalVerdict v;
    if (sup2.contains(c))
        v.requirement = Requirement::MustFire;
    else if (!sup1.contains(c))
        v.requirement = Requirement::MustNotFire;
    else
        v.requirement = Requirement::Unconstrained;

    std::vector<std::uint8_t> input(static_cast<std::size_t>(net.n()), 0);
    for (int leaf : b0) {
        const auto lrep = reps.lookup({0, leaf});
        if (lrep) input[static_cast<std::size_t>(lrep->second)] = 1;
    }
    const std::vector<std::uint8_t> zeros(static_cast<std::size_t>(net.n()), 0);

    net.zero_firing();
    net.present(input);
    const int layer = rep->first;
    bool fired_on_time = layer == 0 && net.firing(0)[static_cast<std::size_t>(rep->second)];
    for (int offset = 1; offset <= h.lmax(); ++offset) {
        net.step(zeros);
        const bool fired = net.firing(rep->first)[static_cast<std::size_t>(rep->second)] != 0;
        if (offset == layer)
            fired_on_time = fired;
        else if (fired)
            v.other_offsets.push_back(offset);
    }
    net.zero_firing();

    v.fired_on_time = fired_on_time;
    switch (v.requirement) {
        case Requirement::MustFire: v.pass = fired_on_time; break;
        case Requirement::MustNotFire: v.pass = !fired_on_time; break;
        case Requirement::Unconstrained: v.pass = true; break;
    }
    return v;
}

namespace {

void minimal_r2_set(const ConceptHierarchy& h, ConceptId c, std::int64_t want,
                    std::vector<int>& out) {
    if (c.level == 0) {
        out.push_back(c.index);
        return;
    }
    const auto& ch = h.children_of(c);
    for (std::int64_t j = 0; j < want && j < static_cast<std::int64_t>(ch.size()); ++j)
        minimal_r2_set(h, {c.level - 1, ch[static_cast<std::size_t>(j)]}, want, out);
}

std::vector<int> max_non_r1_set(const ConceptHierarchy& h, ConceptId c, std::int64_t take) {
    std::vector<int> out;
    if (c.level == 0) return out;
    const auto& ch = h.children_of(c);
    for (std::int64_t j = 0; j < take && j < static_cast<std::int64_t>(ch.size()); ++j) {
        const auto sub = h.leaves({c.level - 1, ch[static_cast<std::size_t>(j)]});
        out.insert(out.end(), sub.begin(), sub.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

void random_band_set(const ConceptHierarchy& h, ConceptId c, std::int64_t m1, std::int64_t m2,
                     Rng& rng, std::vector<int>& out) {
    if (c.level == 0) {
        out.push_back(c.index);
        return;
    }
    const int k = h.k();
    std::int64_t count;
    switch (rng.below(5)) {
        case 0: count = 0; break;
        case 1: count = m1; break;
        case 2: count = m2; break;
        case 3: count = k; break;
        default: count = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(k) + 1));
    }
    const auto& ch = h.children_of(c);
    for (int j : rng.sample(k, static_cast<int>(count)))
        random_band_set(h, {c.level - 1, ch[static_cast<std::size_t>(j)]}, m1, m2, rng, out);
}

}  // namespace

RecognitionReport recognition_suite(NetworkState& net, const RepMap& reps,
                                    const ConceptHierarchy& h, Ratio r1, Ratio r2, int budget,
                                    Rng& sampler) {
    RecognitionReport report;
    const std::uint64_t digest_before = net.weights_digest();
    const std::int64_t m1 = r1.floor_mul(h.k());
    const std::int64_t m2 = r2.ceil_mul(h.k());

    auto grade = [&](ConceptId c, const char* family, const std::vector<int>& b0) {
        RecognitionRow row;
        row.concept_id = c;
        row.family = family;
        row.b_size = b0.size();
        row.verdict = evaluate_concept(net, reps, h, c, b0, r1, r2);
        switch (row.verdict.requirement) {
            case Requirement::MustFire: ++report.must_fire_checks; break;
            case Requirement::MustNotFire: ++report.must_not_fire_checks; break;
            case Requirement::Unconstrained: ++report.unconstrained; break;
        }
        if (!row.verdict.pass) ++report.failures;
        report.rows.push_back(std::move(row));
    };

    for (const auto& c : h.all_concepts()) {
        grade(c, "leaves", h.leaves(c));
        std::vector<int> minimal;
        minimal_r2_set(h, c, m2, minimal);
        std::sort(minimal.begin(), minimal.end());
        grade(c, "minimal_r2", minimal);
        grade(c, "max_non_r1", max_non_r1_set(h, c, m1));
        for (int i = 0; i < budget; ++i) {
            std::vector<int> b0;
            if (sampler.below(4) == 0) {
                // Dense draw over the leaves; hits the upper bands at depth 1.
                const double keep = 0.4 + 0.6 * sampler.unit();
                for (int leaf : h.leaves(c))
                    if (sampler.unit() < keep) b0.push_back(leaf);
            } else {
                random_band_set(h, c, m1, m2, sampler, b0);
                std::sort(b0.begin(), b0.end());
            }
            grade(c, "random", b0);
        }
    }

    if (net.weights_digest() != digest_before)
        throw std::logic_error("recognition_suite: weights changed during evaluation");
    report.pass = report.failures == 0;
    return report;
}

void RecognitionReport::save_csv(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "level,index,family,b_size,requirement,fired_on_time,other_offsets,pass\n";
    for (const auto& row : rows) {
        const char* req = row.verdict.requirement == Requirement::MustFire ? "must_fire"
                          : row.verdict.requirement == Requirement::MustNotFire
                              ? "must_not_fire"
                              : "unconstrained";
        out << row.concept_id.level << "," << row.concept_id.index << "," << row.family << ","
            << row.b_size << "," << req << "," << (row.verdict.fired_on_time ? 1 : 0) << ",";
        for (std::size_t i = 0; i < row.verdict.other_offsets.size(); ++i)
            out << (i ? "|" : "") << row.verdict.other_offsets[i];
        out << "," << (row.verdict.pass ? 1 : 0) << "\n";
    }
}

void RecognitionReport::save_text(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "recognition report\n";
    out << "  rows: " << rows.size() << "\n";
    out << "  must-fire checks: " << must_fire_checks << "\n";
    out << "  must-not-fire checks: " << must_not_fire_checks << "\n";
    out << "  unconstrained (logged only): " << unconstrained << "\n";
    out << "  failures: " << failures << "\n";
    out << "  verdict: " << (pass ? "PASS" : "FAIL") << "\n";
    for (const auto& row : rows) {
        if (row.verdict.pass) continue;
        out << "  FAIL concept (" << row.concept_id.level << "," << row.concept_id.index << ") family "
            << row.family << " |B|=" << row.b_size << "\n";
    }
}

}  // namespace ojanet
