// Acceptance suite: every criterion prints one PASS/FAIL line with its
// measured evidence. The process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ojanet/harness.hpp"
#include "ojanet/hierarchy.hpp"
#include "ojanet/lower_bound.hpp"
#include "ojanet/network.hpp"
#include "ojanet/oracle.hpp"
#include "ojanet/recognition.hpp"
#include "ojanet/training.hpp"

using namespace ojanet;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct TrainedNet {
    NetworkState net;
    RepMap reps;
};

struct Context {
    // acceptance-scale configuration
    const int k = 4;
    const int lmax = 2;
    const int n = 64;
    const Ratio r1{51, 100};
    const Ratio r2{4, 5};
    LearnParams params = LearnParams::noise_free(4, Ratio(51, 100), Ratio(4, 5));
    long sigma = 0;
    ConceptHierarchy h = ConceptHierarchy::build(4, 2, 64);
    std::vector<TrainedNet> trained;  // one per criterion-1 seed
};

TrainedNet train_clean(const Context& ctx, std::uint64_t seed, int spacing) {
    Rng sched_rng = Rng::substream(seed, "schedule");
    Rng mark_rng = Rng::substream(seed, "mark");
    const auto schedule = generate_schedule(ctx.h, static_cast<int>(ctx.sigma),
                                            SchedulePolicy::Interleaved, sched_rng);
    auto net = NetworkState::init(NetworkParams{ctx.lmax, ctx.n, ctx.params.tau, ctx.params.eta},
                                  ctx.k, ctx.lmax);
    TrainOptions opt;
    opt.spacing = spacing;
    opt.record_trace = false;
    auto result = train(ctx.h, net, schedule, ctx.params, mark_rng, opt);
    return {std::move(net), std::move(result.reps)};
}

Criterion criterion1(Context& ctx) {
    Criterion c;
    const auto start = std::chrono::steady_clock::now();
    if (ctx.sigma != 141) {
        c.detail = "sigma formula produced " + std::to_string(ctx.sigma) + ", expected 141";
        return c;
    }
    long failures = 0, internal_rows = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto tn = train_clean(ctx, seed, 1);
        Rng sampler = Rng::substream(seed, "sampler");
        const auto report =
            recognition_suite(tn.net, tn.reps, ctx.h, ctx.r1, ctx.r2, 8, sampler);
        failures += report.failures;
        for (const auto& row : report.rows)
            if (row.concept_id.level >= 1) ++internal_rows;
        ctx.trained.push_back(std::move(tn));
    }
    const double elapsed = seconds_since(start);
    std::ostringstream detail;
    detail << "sigma=141, 5 seeds, " << internal_rows << " internal-concept checks, " << failures
           << " failures, " << std::fixed << elapsed << "s";
    c.pass = failures == 0 && elapsed < 10.0;
    c.detail = detail.str();
    return c;
}

Criterion criterion2(const Context& ctx) {
    Criterion c;
    const double lo = 1.0 / ((1.0 + ctx.params.epsilon()) * 2.0);
    const double hi = 0.5;
    const double out_cap = 1.0 / 1024.0;
    long in_checked = 0, out_checked = 0;
    bool ok = true;
    for (const auto& tn : ctx.trained) {
        for (const auto& [concept_id, loc] : tn.reps.bindings()) {
            const auto row = tn.net.weight_row(loc.first, loc.second);
            std::set<int> in_set;
            for (int ch : ctx.h.children_of(concept_id))
                in_set.insert(tn.reps.lookup({concept_id.level - 1, ch})->second);
            for (int u = 0; u < ctx.n; ++u) {
                const double w = row[static_cast<std::size_t>(u)];
                if (in_set.count(u)) {
                    ok = ok && w >= lo && w <= hi;
                    ++in_checked;
                } else {
                    ok = ok && w <= out_cap;
                    ++out_checked;
                }
            }
        }
    }
    std::ostringstream detail;
    detail << "in-band [" << lo << ", " << hi << "]: " << in_checked
           << " weights, out-cap 1/1024: " << out_checked << " weights, all "
           << (ok ? "inside" : "VIOLATED");
    c.pass = ok && in_checked == 5 * 20 * 4;
    c.detail = detail.str();
    return c;
}

Criterion criterion3(const Context& ctx) {
    Criterion c;
    const auto traj = oracle::iterate_noise_free(ctx.k, ctx.params.eta, ctx.lmax, 212);
    bool mono = true;
    const double cap = 1.0 / std::sqrt(4.0);
    for (std::size_t t = 1; t < traj.size(); ++t) {
        mono = mono && traj[t].wf >= traj[t - 1].wf && traj[t].wf <= cap;
        mono = mono && traj[t].wout <= traj[t - 1].wout && traj[t].wout > 0.0;
        mono = mono && traj[t].z < 2.0;
    }
    const auto doubling = oracle::measure_doubling_times(traj, ctx.k);
    bool doubling_ok = !doubling.stages.empty();
    long worst_stage = 0;
    for (const auto& st : doubling.stages) {
        worst_stage = std::max(worst_stage, st.rounds);
        doubling_ok = doubling_ok && st.rounds <= 6;
    }
    const auto decay = oracle::decay_rate_check(traj, ctx.k, ctx.lmax, 3, ctx.params.eta);
    const auto conv = oracle::check_convergence(traj, 141, ctx.params.epsilon(), 3, ctx.k, ctx.lmax);
    const auto audit = oracle::audit_noise_free(ctx.k, Ratio(1, 16), ctx.lmax, 212);
    c.pass = mono && doubling_ok && decay.ratio_ok && decay.positive &&
             decay.steps_to_target >= 0 &&
             static_cast<double>(decay.steps_to_target) <= decay.step_bound && conv.ok &&
             audit.max_rel_diff <= 1e-9;
    std::ostringstream detail;
    detail << "monotone " << (mono ? "ok" : "VIOLATED") << ", doubling worst " << worst_stage
           << " <= 6, decay max ratio " << decay.max_ratio << " <= 0.9375, bounds from step "
           << conv.holds_from << " <= 141, audit rel diff " << audit.max_rel_diff << " <= 1e-9";
    c.detail = detail.str();
    return c;
}

Criterion criterion4(const Context& ctx) {
    Criterion c;
    long deviations = 0, checks = 0;
    auto grade = [&](NetworkState& net, const RepMap& reps) {
        for (const auto& concept_id : ctx.h.all_concepts()) {
            const auto v =
                evaluate_concept(net, reps, ctx.h, concept_id, ctx.h.leaves(concept_id), ctx.r1, ctx.r2);
            ++checks;
            if (!v.fired_on_time || !v.other_offsets.empty()) ++deviations;
        }
    };
    auto rec = build_static_recognizer(ctx.h, ctx.r1, ctx.r2, ctx.n);
    grade(rec.net, rec.reps);
    auto trained = ctx.trained.front();  // copy: evaluation mutates firing only
    grade(trained.net, trained.reps);
    c.pass = deviations == 0;
    std::ostringstream detail;
    detail << checks << " presentations on static + trained nets, " << deviations
           << " timing deviations";
    c.detail = detail.str();
    return c;
}

Criterion criterion5(Criterion* replay_probe, const fs::path& scratch) {
    Criterion c;
    const auto start = std::chrono::steady_clock::now();
    const int k = 4, lmax = 1, n = 16;
    const Ratio r1{51, 100}, r2{4, 5}, p{4, 5};
    const double delta_prime = 0.05;
    const double eta = 1e-3;
    const long showings = 50000;
    const auto h = ConceptHierarchy::build(k, lmax, n);
    const auto params = LearnParams::noisy_mode(k, r1, r2, p, eta, delta_prime);
    const double target = wbar(k, p.value());
    const double lo = target * (1.0 - 0.1), hi = target * (1.0 + 0.1);

    // The analysis constants are far outside desk scale; report them.
    const double paper_delta = ((r2 - r1) / r2).value() / 50.0;
    const double paper_T = 1024.0 * std::pow(k, 4) * std::log2(static_cast<double>(n)) /
                           (std::pow(p.value(), 6) * paper_delta * paper_delta);
    const double paper_eta = 1.0 / (4.0 * paper_T * std::pow(k, 4));

    int good_seeds = 0;
    const int seeds = 20;
    for (int seed = 0; seed < seeds; ++seed) {
        const std::uint64_t master = 0x5000 + static_cast<std::uint64_t>(seed);
        Rng sched_rng = Rng::substream(master, "schedule");
        Rng mark_rng = Rng::substream(master, "mark");
        Rng sampler = Rng::substream(master, "sampler");
        const auto schedule = generate_schedule(h, static_cast<int>(showings),
                                                SchedulePolicy::Interleaved, sched_rng, true, p);
        auto net = NetworkState::init(NetworkParams{lmax, n, params.tau, params.eta}, k, lmax);
        TrainOptions opt;
        opt.record_trace = false;
        const auto result = train(h, net, schedule, params, mark_rng, opt);
        bool in_band = true;
        for (const auto& [concept_id, loc] : result.reps.bindings()) {
            const auto row = net.weight_row(loc.first, loc.second);
            for (int ch : h.children_of(concept_id)) {
                const double w = row[static_cast<std::size_t>(ch)];
                in_band = in_band && w >= lo && w <= hi;
            }
        }
        const auto report = recognition_suite(net, result.reps, h, r1, r2, 6, sampler);
        if (in_band && report.pass) ++good_seeds;
    }
    const double elapsed = seconds_since(start);
    c.pass = good_seeds >= 19 && elapsed < 120.0;
    std::ostringstream detail;
    detail << "paper constants not desk-reproducible (T ~ " << std::scientific << paper_T
           << ", eta ~ " << paper_eta << "); tuned eta=1e-3, tau=" << std::defaultfloat
           << params.tau << ", band [" << lo << ", " << hi << "], " << good_seeds << "/" << seeds
           << " seeds in-band and recognized, " << std::fixed << elapsed << "s";
    c.detail = detail.str();

    // harness-level run of this configuration for the replay criterion
    if (replay_probe) {
        harness::RunConfig rc;
        rc.mode = harness::RunMode::LearnNoisy;
        rc.k = k;
        rc.lmax = lmax;
        rc.n = n;
        rc.r1 = r1;
        rc.r2 = r2;
        rc.p = p;
        rc.eta = eta;
        rc.delta = delta_prime;
        rc.sigma = showings;
        rc.seed = 0x5000;
        rc.budget = 4;
        const int status = harness::run(rc, scratch / "noisy");
        const auto rep = harness::replay(scratch / "noisy" / "manifest.json");
        replay_probe->pass = status == 0 && rep.identical;
        replay_probe->detail = "learn-noisy: " + std::string(rep.identical ? "identical" : rep.first_divergence);
    }
    return c;
}

Criterion criterion6(const fs::path& scratch, Criterion* replay_probe) {
    Criterion c;
    const auto start = std::chrono::steady_clock::now();
    harness::RunConfig rc;
    rc.mode = harness::RunMode::LowerBound;
    rc.k = 10;
    rc.lmax = 2;
    rc.r1 = Ratio(51, 100);
    rc.r2 = Ratio(4, 5);
    rc.lb_trials = 1000;
    rc.seed = 99;
    const int status = harness::run(rc, scratch / "lowerbound");

    // the certificate ordering, checked exactly at the reference ratios
    const auto params = lb::derive_r_primes(rc.r1, rc.r2, rc.k);
    bool exact_ok = params.m1 == 5 && params.m2 == 8;
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const auto cert = lb::check_infeasibility(params, 1e-6 + rng.unit() * 100.0);
        exact_ok = exact_ok && cert.valid && cert.cant_fire_bound >= cert.must_fire_bound;
    }
    const double elapsed = seconds_since(start);
    c.pass = status == 0 && exact_ok && elapsed < 30.0;
    std::ostringstream detail;
    detail << "r1'k=5 r2'k=8, 0.64 <= 0.75, harness 1000/1000 witnesses "
           << (status == 0 ? "ok" : "FAIL") << ", certificate ordering exact over 1000 draws, "
           << std::fixed << elapsed << "s";
    c.detail = detail.str();

    if (replay_probe) {
        const auto rep = harness::replay(scratch / "lowerbound" / "manifest.json");
        replay_probe->pass = rep.identical;
        replay_probe->detail =
            "lowerbound: " + std::string(rep.identical ? "identical" : rep.first_divergence);
    }
    return c;
}

Criterion criterion7(Context& ctx) {
    Criterion c;
    // The per-step checks (rep injectivity, unbound-weight lanes, firing
    // soundness, binding stability, [0,1] weights) ran throughout every
    // training above and throw on violation, so reaching this point means
    // zero violations. Verify the remaining cross-run properties here.
    bool floor_ok = true;
    for (const auto& tn : ctx.trained)
        for (const auto& [concept_id, loc] : tn.reps.bindings())
            floor_ok = floor_ok && loc.first == concept_id.level;

    // unbound rows still at the initial weight in the first trained net
    bool unbound_ok = true;
    const auto& tn0 = ctx.trained.front();
    for (int l = 1; l <= ctx.lmax; ++l)
        for (int v = 0; v < ctx.n; ++v) {
            if (tn0.reps.concept_at(l, v)) continue;
            for (double w : tn0.net.weight_row(l, v)) unbound_ok = unbound_ok && w == 0.0625;
        }

    // recognition is read-only
    auto probe = ctx.trained.front();
    const auto digest = probe.net.weights_digest();
    Rng sampler(4242);
    recognition_suite(probe.net, probe.reps, ctx.h, ctx.r1, ctx.r2, 4, sampler);
    const bool read_only = probe.net.weights_digest() == digest;

    // pipelined vs spaced presentations agree to 1e-12
    auto pipelined = train_clean(ctx, 0, 1);
    auto spaced = train_clean(ctx, 0, ctx.lmax + 1);
    bool spacing_ok = pipelined.reps.bindings() == spaced.reps.bindings();
    double max_diff = 0;
    for (int l = 1; l <= ctx.lmax; ++l)
        for (int v = 0; v < ctx.n; ++v) {
            const auto a = pipelined.net.weight_row(l, v);
            const auto b = spaced.net.weight_row(l, v);
            for (int u = 0; u < ctx.n; ++u)
                max_diff = std::max(
                    max_diff, std::abs(a[static_cast<std::size_t>(u)] -
                                       b[static_cast<std::size_t>(u)]));
        }
    spacing_ok = spacing_ok && max_diff <= 1e-12;

    c.pass = floor_ok && unbound_ok && read_only && spacing_ok;
    std::ostringstream detail;
    detail << "in-run checks clean; layer floor " << (floor_ok ? "equal" : "VIOLATED")
           << ", unbound rows pristine " << (unbound_ok ? "yes" : "no") << ", recognition read-only "
           << (read_only ? "yes" : "no") << ", pipelined-vs-spaced max diff " << max_diff;
    c.detail = detail.str();
    return c;
}

Criterion criterion8(const Context& ctx, const fs::path& scratch,
                     const std::vector<Criterion>& probes) {
    Criterion c;
    // learn-clean at the acceptance configuration
    harness::RunConfig rc;
    rc.mode = harness::RunMode::LearnClean;
    rc.k = ctx.k;
    rc.lmax = ctx.lmax;
    rc.n = ctx.n;
    rc.r1 = ctx.r1;
    rc.r2 = ctx.r2;
    rc.seed = 0;
    rc.budget = 4;
    const int clean_status = harness::run(rc, scratch / "clean");
    const auto clean_rep = harness::replay(scratch / "clean" / "manifest.json");

    harness::RunConfig oc;
    oc.mode = harness::RunMode::Oracle;
    oc.k = ctx.k;
    oc.lmax = ctx.lmax;
    oc.r1 = ctx.r1;
    oc.r2 = ctx.r2;
    oc.seed = 3;
    const int oracle_status = harness::run(oc, scratch / "oracle");
    const auto oracle_rep = harness::replay(scratch / "oracle" / "manifest.json");

    bool all = clean_status == 0 && clean_rep.identical && oracle_status == 0 &&
               oracle_rep.identical;
    std::ostringstream detail;
    detail << "learn-clean " << (clean_rep.identical ? "identical" : clean_rep.first_divergence)
           << "; oracle " << (oracle_rep.identical ? "identical" : oracle_rep.first_divergence);
    for (const auto& probe : probes) {
        all = all && probe.pass;
        detail << "; " << probe.detail;
    }
    c.pass = all;
    c.detail = detail.str();
    return c;
}

}  // namespace

int main() {
    Context ctx;
    ctx.sigma = sigma_noise_free(ctx.k, ctx.params.eta, ctx.lmax, ctx.params.epsilon(),
                                 ctx.params.b);
    const fs::path scratch = fs::temp_directory_path() / "ojanet_acceptance";
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    std::vector<std::pair<std::string, Criterion>> results;
    Criterion noisy_replay, lb_replay;
    try {
        results.push_back({"criterion-1 noise-free end-to-end learning", criterion1(ctx)});
        results.push_back({"criterion-2 weight targets", criterion2(ctx)});
        results.push_back({"criterion-3 single-neuron oracle bounds", criterion3(ctx)});
        results.push_back({"criterion-4 recognition timing", criterion4(ctx)});
        results.push_back({"criterion-5 noisy learning (substituted scale)",
                           criterion5(&noisy_replay, scratch)});
        results.push_back({"criterion-6 lower-bound certificate", criterion6(scratch, &lb_replay)});
        results.push_back({"criterion-7 structural invariants", criterion7(ctx)});
        results.push_back(
            {"criterion-8 reproducibility", criterion8(ctx, scratch, {noisy_replay, lb_replay})});
    } catch (const std::exception& e) {
        std::printf("FAIL exception during acceptance: %s\n", e.what());
        fs::remove_all(scratch);
        return 1;
    }

    int failures = 0;
    for (const auto& [name, criterion] : results) {
        std::printf("%s %s: %s\n", criterion.pass ? "PASS" : "FAIL", name.c_str(),
                    criterion.detail.c_str());
        if (!criterion.pass) ++failures;
    }
    fs::remove_all(scratch);
    return failures == 0 ? 0 : 1;
}
