#include "ojanet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "ojanet/hierarchy.hpp"
#include "ojanet/lower_bound.hpp"
#include "ojanet/network.hpp"
#include "ojanet/oracle.hpp"
#include "ojanet/recognition.hpp"
#include "ojanet/trace.hpp"

namespace ojanet::harness {

namespace fs = std::filesystem;
using nlohmann::json;

std::string mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::LearnClean: return "learn-clean";
        case RunMode::LearnNoisy: return "learn-noisy";
        case RunMode::Recognize: return "recognize";
        case RunMode::Oracle: return "oracle";
        case RunMode::LowerBound: return "lowerbound";
    }
    throw std::logic_error("mode_name: bad mode");
}

RunMode mode_from_name(const std::string& name) {
    if (name == "learn-clean") return RunMode::LearnClean;
    if (name == "learn-noisy") return RunMode::LearnNoisy;
    if (name == "recognize") return RunMode::Recognize;
    if (name == "oracle") return RunMode::Oracle;
    if (name == "lowerbound") return RunMode::LowerBound;
    throw std::invalid_argument("unknown run mode: " + name);
}

std::int64_t RunConfig::effective_n() const {
    if (n > 0) return n;
    std::int64_t v = 1;
    for (int i = 0; i <= lmax; ++i) v *= k;
    return v;
}

double RunConfig::effective_eta() const {
    if (eta > 0) return eta;
    if (mode == RunMode::LearnNoisy) return 0;  // must be explicit
    return 1.0 / (4.0 * k);
}

int RunConfig::effective_b() const { return b > 0 ? b : minimal_gap_b(r1, k); }

long RunConfig::effective_sigma() const {
    if (sigma > 0) return sigma;
    const Ratio eps = (r2 - r1) / (r1 + r2);
    return sigma_noise_free(k, effective_eta(), lmax, eps.value(), effective_b());
}

void RunConfig::validate() const {
    if (k < 2) throw std::invalid_argument("config: k must be >= 2");
    if (lmax < 1) throw std::invalid_argument("config: lmax must be >= 1");
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (spacing < 1) throw std::invalid_argument("config: spacing must be >= 1");
    if (budget < 0) throw std::invalid_argument("config: budget must be >= 0");
    std::int64_t need = 1;
    for (int i = 0; i <= lmax; ++i) need *= k;
    if (effective_n() < need)
        throw std::invalid_argument("config: n below k^(lmax+1) = " + std::to_string(need));
    switch (mode) {
        case RunMode::LearnClean: {
            if (eta > 0 && eta != 1.0 / (4.0 * k))
                throw std::invalid_argument("config: clean mode requires eta = 1/(4k)");
            LearnParams::noise_free(k, r1, r2);
            break;
        }
        case RunMode::LearnNoisy: {
            if (!(eta > 0)) throw std::invalid_argument("config: noisy mode requires explicit eta");
            if (sigma <= 0)
                throw std::invalid_argument(
                    "config: noisy mode requires explicit sigma (the analytic value is reported "
                    "in the manifest)");
            if (p < r2) throw std::invalid_argument("config: noisy mode requires p >= r2");
            LearnParams::noisy_mode(k, r1, r2, p, eta, delta);
            break;
        }
        case RunMode::Recognize:
            break;
        case RunMode::Oracle: {
            const double e = effective_eta();
            if (!(e > 0) || e > 1.0 / (4.0 * k))
                throw std::invalid_argument("config: oracle eta must be in (0, 1/(4k)]");
            break;
        }
        case RunMode::LowerBound: {
            if (lb_trials < 1) throw std::invalid_argument("config: lb_trials must be >= 1");
            lb::derive_r_primes(r1, r2, k);
            break;
        }
    }
}

std::string RunConfig::to_json() const {
    json j;
    j["format"] = "ojanet-run-manifest";
    j["version"] = kVersion;
    j["mode"] = mode_name(mode);
    j["k"] = k;
    j["lmax"] = lmax;
    j["n"] = n;
    j["r1"] = r1.str();
    j["r2"] = r2.str();
    j["eta"] = eta;
    j["sigma"] = sigma;
    j["b"] = b;
    j["policy"] = policy == SchedulePolicy::Interleaved ? "interleaved" : "sequential";
    j["level0_showings"] = level0_showings;
    j["seed"] = seed;
    j["trials"] = trials;
    j["noisy"] = noisy;
    j["p"] = p.str();
    j["delta"] = delta;
    j["cprime"] = cprime;
    j["budget"] = budget;
    j["spacing"] = spacing;
    j["snapshot_every"] = snapshot_every;
    j["oracle_steps"] = oracle_steps;
    j["lb_trials"] = lb_trials;
    j["weights_from"] = weights_from;
    json derived;
    derived["n"] = effective_n();
    derived["b"] = effective_b();
    derived["eta"] = effective_eta();
    derived["epsilon"] = ((r2 - r1) / (r1 + r2)).value();
    if (mode == RunMode::LearnClean || mode == RunMode::Oracle)
        derived["sigma"] = effective_sigma();
    if (mode == RunMode::LearnClean)
        derived["tau"] = LearnParams::noise_free(k, r1, r2).tau;
    if (mode == RunMode::LearnNoisy) {
        const auto lp = LearnParams::noisy_mode(k, r1, r2, p, eta, delta);
        derived["tau"] = lp.tau;
        derived["delta"] = lp.delta;
        derived["wbar"] = wbar(k, p.value());
        derived["sigma_noisy_reference"] = sigma_noisy(k, eta, lmax, r1, r2, cprime);
    }
    j["derived"] = derived;
    return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "ojanet-run-manifest")
        throw std::invalid_argument("manifest: unexpected format tag");
    RunConfig c;
    c.mode = mode_from_name(j.at("mode").get<std::string>());
    c.k = j.at("k").get<int>();
    c.lmax = j.at("lmax").get<int>();
    c.n = j.at("n").get<std::int64_t>();
    c.r1 = Ratio::parse(j.at("r1").get<std::string>());
    c.r2 = Ratio::parse(j.at("r2").get<std::string>());
    c.eta = j.at("eta").get<double>();
    c.sigma = j.at("sigma").get<long>();
    c.b = j.at("b").get<int>();
    c.policy = j.at("policy").get<std::string>() == "sequential" ? SchedulePolicy::Sequential
                                                                 : SchedulePolicy::Interleaved;
    c.level0_showings = j.at("level0_showings").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.trials = j.at("trials").get<int>();
    c.noisy = j.at("noisy").get<bool>();
    c.p = Ratio::parse(j.at("p").get<std::string>());
    c.delta = j.at("delta").get<double>();
    c.cprime = j.at("cprime").get<double>();
    c.budget = j.at("budget").get<int>();
    c.spacing = j.at("spacing").get<int>();
    c.snapshot_every = j.at("snapshot_every").get<long>();
    c.oracle_steps = j.at("oracle_steps").get<long>();
    c.lb_trials = j.at("lb_trials").get<int>();
    c.weights_from = j.at("weights_from").get<std::string>();
    return c;
}

namespace {

struct PlotWriters {
    std::ofstream weights_vs_time;
    std::ofstream psi_phi;
};

void write_snapshot_rows(PlotWriters& plots, const NetworkState& net, const RepMap& reps,
                         std::int64_t t, bool noisy, double wbar_value,
                         const ConceptHierarchy& h) {
    char buf[128];
    for (const auto& [c, loc] : reps.bindings()) {
        const auto row = net.weight_row(loc.first, loc.second);
        std::vector<std::uint8_t> in_set(row.size(), 0);
        for (int ch : h.children_of(c)) {
            const auto child = reps.lookup({c.level - 1, ch});
            if (child) in_set[static_cast<std::size_t>(child->second)] = 1;
        }
        double min_in = 1.0, max_in = 0.0, max_out = 0.0, phi = 0.0;
        for (std::size_t u = 0; u < row.size(); ++u) {
            if (in_set[u]) {
                min_in = std::min(min_in, row[u]);
                max_in = std::max(max_in, row[u]);
                phi += row[u];
            } else {
                max_out = std::max(max_out, row[u]);
            }
        }
        std::snprintf(buf, sizeof buf, "%lld,%d,%d,%d,%d,%.17g,%.17g,%.17g",
                      static_cast<long long>(t), loc.first, loc.second, c.level, c.index, min_in,
                      max_in, max_out);
        plots.weights_vs_time << buf << "\n";
        if (noisy) {
            const double psi = std::max(max_in / wbar_value, wbar_value / min_in);
            std::snprintf(buf, sizeof buf, "%lld,%d,%d,%.17g,%.17g",
                          static_cast<long long>(t), loc.first, loc.second, psi, phi);
            plots.psi_phi << buf << "\n";
        }
    }
}

struct TrialResult {
    bool pass = false;
    std::string note;
};

TrialResult run_learn_trial(const RunConfig& config, const fs::path& dir, int trial) {
    fs::create_directories(dir / "snapshots");
    const bool noisy = config.mode == RunMode::LearnNoisy;
    const auto h = ConceptHierarchy::build(config.k, config.lmax,
                                           config.effective_n());
    const LearnParams params =
        noisy ? LearnParams::noisy_mode(config.k, config.r1, config.r2, config.p, config.eta,
                                        config.delta)
              : LearnParams::noise_free(config.k, config.r1, config.r2);
    const long sig = noisy ? config.sigma : config.effective_sigma();

    const std::uint64_t trial_seed =
        Rng::derive_seed(config.seed, "trial-" + std::to_string(trial));
    Rng schedule_rng = Rng::substream(trial_seed, "schedule");
    Rng mark_rng = Rng::substream(trial_seed, "mark");
    Rng sampler_rng = Rng::substream(trial_seed, "sampler");

    auto schedule = generate_schedule(h, static_cast<int>(sig), config.policy, schedule_rng,
                                      noisy, config.p, config.level0_showings);
    save_schedule(schedule, dir / "schedule.txt");

    NetworkParams net_params{config.lmax, static_cast<int>(config.effective_n()), params.tau,
                             params.eta};
    auto net = NetworkState::init(net_params, config.k, config.lmax);

    PlotWriters plots;
    plots.weights_vs_time.open(dir / "weights_vs_time.csv");
    plots.weights_vs_time << "t,layer,neuron,level,index,min_in,max_in,max_out\n";
    if (noisy) {
        plots.psi_phi.open(dir / "psi_phi.csv");
        plots.psi_phi << "t,layer,neuron,psi,phi\n";
    }
    const double wbar_value = wbar(config.k, config.p.value());

    TraceCsvWriter trace_writer(dir / "trace.csv", config.lmax);
    TrainOptions options;
    options.spacing = config.spacing;
    options.check_invariants = true;
    options.snapshot_every =
        config.snapshot_every > 0 ? config.snapshot_every : std::max<long>(1, sig / 10);
    options.record_trace = false;
    options.on_step = [&](const TraceStep& row) { trace_writer.row(row); };
    options.on_snapshot = [&](const NetworkState& state, const RepMap& reps, std::int64_t t) {
        char name[48];
        std::snprintf(name, sizeof name, "weights_%012lld.bin", static_cast<long long>(t));
        state.save_weights_binary(dir / "snapshots" / name);
        write_snapshot_rows(plots, state, reps, t, noisy, wbar_value, h);
    };

    auto result = train(h, net, schedule, params, mark_rng, options);
    trace_writer.finish(result.trace.snapshot_times);
    net.save_weights_binary(dir / "weights_final.bin");
    net.save_weights_csv(dir / "weights_final.csv");
    result.reps.save(dir / "repmap.txt");

    const auto floor_check = lb::layer_floor_check(result.reps);
    auto report =
        recognition_suite(net, result.reps, h, config.r1, config.r2, config.budget, sampler_rng);
    report.save_csv(dir / "report.csv");
    report.save_text(dir / "report.txt");

    TrialResult out;
    out.pass = report.pass && floor_check.ok;
    std::ostringstream note;
    note << "trial " << trial << ": " << (out.pass ? "pass" : "FAIL") << " (must-fire "
         << report.must_fire_checks << ", must-not-fire " << report.must_not_fire_checks
         << ", unconstrained " << report.unconstrained << ", failures " << report.failures
         << ", layer-floor " << (floor_check.ok ? "ok" : "VIOLATED") << ")";
    out.note = note.str();
    return out;
}

TrialResult run_recognize_trial(const RunConfig& config, const fs::path& dir, int trial) {
    fs::create_directories(dir);
    const auto h = ConceptHierarchy::build(config.k, config.lmax, config.effective_n());
    const std::uint64_t trial_seed =
        Rng::derive_seed(config.seed, "trial-" + std::to_string(trial));
    Rng sampler_rng = Rng::substream(trial_seed, "sampler");

    TrialResult out;
    RecognitionReport report;
    if (config.weights_from.empty()) {
        auto rec = build_static_recognizer(h, config.r1, config.r2,
                                           static_cast<int>(config.effective_n()));
        report = recognition_suite(rec.net, rec.reps, h, config.r1, config.r2, config.budget,
                                   sampler_rng);
    } else {
        const fs::path source(config.weights_from);
        std::ifstream mf(source / "manifest.json");
        if (!mf) throw std::runtime_error("recognize: no manifest under " + source.string());
        std::stringstream buffer;
        buffer << mf.rdbuf();
        const RunConfig trained = RunConfig::from_json(buffer.str());
        const LearnParams params =
            trained.mode == RunMode::LearnNoisy
                ? LearnParams::noisy_mode(trained.k, trained.r1, trained.r2, trained.p,
                                          trained.eta, trained.delta)
                : LearnParams::noise_free(trained.k, trained.r1, trained.r2);
        const fs::path tdir = trained.trials > 1 ? source / "trial_000" : source;
        NetworkParams net_params{trained.lmax, static_cast<int>(trained.effective_n()),
                                 params.tau, params.eta};
        auto net = NetworkState::load_weights_binary(tdir / "weights_final.bin", net_params);
        auto reps = RepMap::load(tdir / "repmap.txt");
        const auto th = ConceptHierarchy::build(trained.k, trained.lmax, trained.effective_n());
        report = recognition_suite(net, reps, th, config.r1, config.r2, config.budget,
                                   sampler_rng);
    }
    report.save_csv(dir / "report.csv");
    report.save_text(dir / "report.txt");
    out.pass = report.pass;
    std::ostringstream note;
    note << "trial " << trial << ": " << (out.pass ? "pass" : "FAIL") << " (failures "
         << report.failures << ")";
    out.note = note.str();
    return out;
}

TrialResult run_oracle_trial(const RunConfig& config, const fs::path& dir, int trial) {
    fs::create_directories(dir);
    const std::uint64_t trial_seed =
        Rng::derive_seed(config.seed, "trial-" + std::to_string(trial));
    const double eta = config.effective_eta();
    TrialResult out;
    std::ofstream report(dir / "report.txt");

    if (!config.noisy) {
        const long sig = config.effective_sigma();
        const long steps = config.oracle_steps > 0 ? config.oracle_steps : sig + sig / 2;
        const auto traj = oracle::iterate_noise_free(config.k, eta, config.lmax,
                                                     static_cast<int>(steps));
        oracle::save_trajectory_csv(traj, dir / "trajectory.csv");
        const double eps = ((config.r2 - config.r1) / (config.r1 + config.r2)).value();
        const auto conv =
            oracle::check_convergence(traj, sig, eps, config.effective_b(), config.k, config.lmax);
        const auto doubling = oracle::measure_doubling_times(traj, config.k);
        const auto audit = oracle::audit_noise_free(config.k, Ratio::from_double_exact(eta),
                                                    config.lmax, static_cast<int>(steps));
        const double bound = oracle::doubling_time_bound(eta, config.k);
        report << "oracle (noise-free), k=" << config.k << " eta=" << eta
               << " lmax=" << config.lmax << " steps=" << steps << "\n";
        report << "  sigma " << sig << ", bounds hold from step " << conv.holds_from << ": "
               << (conv.ok ? "ok" : "FAIL") << "\n";
        report << "  doubling bound " << bound << "; stages:";
        bool doubling_ok = true;
        for (const auto& st : doubling.stages) {
            report << " j=" << st.j << ":" << st.rounds;
            if (st.rounds > static_cast<long>(std::ceil(bound))) doubling_ok = false;
        }
        report << " => " << (doubling_ok ? "ok" : "FAIL") << "\n";
        bool decay_ok = true;
        if (eta == 1.0 / (4.0 * config.k)) {
            const auto decay =
                oracle::decay_rate_check(traj, config.k, config.lmax, config.effective_b(), eta);
            decay_ok = decay.ratio_ok && decay.positive && decay.steps_to_target >= 0 &&
                       decay.steps_to_target <= static_cast<long>(decay.step_bound);
            report << "  decay max ratio " << decay.max_ratio << " (<= 15/16: "
                   << (decay.ratio_ok ? "ok" : "FAIL") << "), steps to floor "
                   << decay.steps_to_target << " <= " << decay.step_bound << "\n";
        } else {
            report << "  decay rate check skipped (needs eta = 1/(4k))\n";
        }
        report << "  precision audit: max rel diff " << audit.max_rel_diff << " over "
               << audit.steps << " steps at " << audit.frac_bits << " fractional bits\n";
        out.pass = conv.ok && doubling_ok && decay_ok && audit.max_rel_diff <= 1e-9;
    } else {
        const long steps = config.oracle_steps > 0 ? config.oracle_steps : 200000;
        Rng rng = Rng::substream(trial_seed, "oracle");
        const auto traj = oracle::iterate_noisy(config.k, config.p, eta, config.lmax,
                                                static_cast<int>(steps), rng);
        oracle::save_trajectory_csv(traj, dir / "trajectory.csv");
        const auto& last = traj.steps.back();
        report << "oracle (noisy), k=" << config.k << " p=" << config.p.str() << " eta=" << eta
               << " steps=" << steps << "\n";
        report << "  wbar " << traj.wbar << ", fired per round " << traj.fired_per_round << "\n";
        report << "  final psi " << last.psi << ", final phi " << last.phi << "\n";
        const double delta =
            config.delta >= 0 ? config.delta : ((config.r2 - config.r1) / config.r2).value() / 50;
        out.pass = last.psi <= 1.0 + 20.0 * delta;
        report << "  psi <= 1+20*delta (" << 1.0 + 20.0 * delta << "): "
               << (out.pass ? "ok" : "FAIL") << "\n";
    }
    std::ostringstream note;
    note << "trial " << trial << ": " << (out.pass ? "pass" : "FAIL");
    out.note = note.str();
    return out;
}

TrialResult run_lowerbound_trial(const RunConfig& config, const fs::path& dir, int trial) {
    fs::create_directories(dir);
    const auto params = lb::derive_r_primes(config.r1, config.r2, config.k);
    std::int64_t n = 1;
    for (int i = 0; i < 3; ++i) n *= config.k;
    const auto h = ConceptHierarchy::build(config.k, 2, n);

    const std::uint64_t trial_seed =
        Rng::derive_seed(config.seed, "trial-" + std::to_string(trial));
    Rng weights_rng = Rng::substream(trial_seed, "weights");

    NetworkParams net_params{1, static_cast<int>(n), 1.0, 1e-3};
    auto net = NetworkState::init(net_params, config.k, 1);
    for (int v = 0; v < net.n(); ++v) {
        auto row = net.mutable_weight_row(1, v);
        std::fill(row.begin(), row.end(), 0.0);
    }
    RepMap reps(1, static_cast<int>(n));
    for (std::int64_t i = 0; i < h.level_count(2); ++i)
        reps.place({2, static_cast<int>(i)}, 1, static_cast<int>(i));

    std::ofstream certs(dir / "certificates.txt");
    long found = 0, valid_certs = 0;
    long must_fire_witnesses = 0, must_not_witnesses = 0;
    for (int t = 0; t < config.lb_trials; ++t) {
        double max_row = 0;
        for (std::int64_t i = 0; i < h.level_count(2); ++i) {
            auto row = net.mutable_weight_row(1, static_cast<int>(i));
            double sum = 0;
            for (int leaf : h.leaves({2, static_cast<int>(i)})) {
                row[static_cast<std::size_t>(leaf)] = weights_rng.unit();
                sum += row[static_cast<std::size_t>(leaf)];
            }
            max_row = std::max(max_row, sum);
        }
        net.set_tau(std::max(1e-9, weights_rng.unit() * 1.2 * max_row));
        auto witness = lb::empirical_counterexample(net, h, reps, params);
        if (witness) {
            ++found;
            if (witness->certificate.valid) ++valid_certs;
            if (witness->clause == lb::ViolatedClause::MustFire)
                ++must_fire_witnesses;
            else
                ++must_not_witnesses;
            if (t < 5) lb::write_witness(*witness, certs);
        }
    }
    const auto cert = lb::check_infeasibility(params, 1.0);
    certs << "reference certificate at W=1: must-fire <= " << cert.must_fire_bound
          << ", can't-fire >= " << cert.cant_fire_bound << ", valid "
          << (cert.valid ? "yes" : "no") << "\n";

    std::ofstream report(dir / "report.txt");
    report << "lower bound search, k=" << config.k << " r1=" << config.r1.str()
           << " r2=" << config.r2.str() << " (r1'k=" << params.m1 << ", r2'k=" << params.m2
           << ")\n";
    report << "  witnesses found: " << found << "/" << config.lb_trials << " (must-fire "
           << must_fire_witnesses << ", must-not-fire " << must_not_witnesses << ")\n";
    report << "  certificates valid: " << valid_certs << "/" << found << "\n";

    TrialResult out;
    out.pass = found == config.lb_trials && valid_certs == found && cert.valid;
    std::ostringstream note;
    note << "trial " << trial << ": " << (out.pass ? "pass" : "FAIL") << " (" << found << "/"
         << config.lb_trials << " witnesses)";
    out.note = note.str();
    return out;
}

TrialResult run_trial(const RunConfig& config, const fs::path& dir, int trial) {
    switch (config.mode) {
        case RunMode::LearnClean:
        case RunMode::LearnNoisy: return run_learn_trial(config, dir, trial);
        case RunMode::Recognize: return run_recognize_trial(config, dir, trial);
        case RunMode::Oracle: return run_oracle_trial(config, dir, trial);
        case RunMode::LowerBound: return run_lowerbound_trial(config, dir, trial);
    }
    throw std::logic_error("run_trial: bad mode");
}

}  // namespace

int run(const RunConfig& config, const fs::path& out_dir) {
    config.validate();
    fs::create_directories(out_dir);
    {
        std::ofstream mf(out_dir / "manifest.json");
        if (!mf) throw std::runtime_error("cannot write manifest under " + out_dir.string());
        mf << config.to_json();
    }

    std::vector<TrialResult> results(static_cast<std::size_t>(config.trials));
    if (config.trials == 1) {
        results[0] = run_trial(config, out_dir, 0);
    } else {
        std::vector<std::future<TrialResult>> futures;
        for (int t = 0; t < config.trials; ++t) {
            char name[32];
            std::snprintf(name, sizeof name, "trial_%03d", t);
            const fs::path dir = out_dir / name;
            futures.push_back(std::async(std::launch::async,
                                         [&config, dir, t] { return run_trial(config, dir, t); }));
        }
        for (int t = 0; t < config.trials; ++t) results[static_cast<std::size_t>(t)] = futures[static_cast<std::size_t>(t)].get();
    }

    bool all_pass = true;
    std::ofstream summary(out_dir / "summary.txt");
    for (const auto& r : results) {
        summary << r.note << "\n";
        all_pass = all_pass && r.pass;
    }
    summary << (all_pass ? "ALL PASS" : "FAILURES PRESENT") << "\n";
    return all_pass ? 0 : 1;
}

namespace {

bool same_file_bytes(const fs::path& a, const fs::path& b, std::string& why) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) {
        why = "missing file: " + (fa ? b.string() : a.string());
        return false;
    }
    std::istreambuf_iterator<char> ia(fa), ib(fb), end;
    std::size_t offset = 0;
    while (ia != end && ib != end) {
        if (*ia != *ib) {
            why = a.string() + " differs at byte " + std::to_string(offset);
            return false;
        }
        ++ia, ++ib, ++offset;
    }
    if (ia != end || ib != end) {
        why = a.string() + " differs in length";
        return false;
    }
    return true;
}

}  // namespace

ReplayResult replay(const fs::path& manifest_file) {
    ReplayResult result;
    std::ifstream mf(manifest_file);
    if (!mf) {
        result.first_divergence = "manifest not readable: " + manifest_file.string();
        return result;
    }
    std::stringstream buffer;
    buffer << mf.rdbuf();
    RunConfig config;
    try {
        config = RunConfig::from_json(buffer.str());
    } catch (const std::exception& e) {
        result.first_divergence = std::string("manifest corrupt: ") + e.what();
        return result;
    }
    const fs::path original = manifest_file.parent_path();
    const fs::path scratch = original / ".replay_tmp";
    fs::remove_all(scratch);
    run(config, scratch);

    // Every artifact of the original run must be reproduced byte for byte,
    // and the rerun must not produce anything beyond them.
    result.identical = true;
    for (auto it = fs::recursive_directory_iterator(original);
         it != fs::recursive_directory_iterator(); ++it) {
        const fs::path rel = fs::relative(it->path(), original);
        if (rel.begin()->string() == ".replay_tmp") continue;
        if (!it->is_regular_file()) continue;
        std::string why;
        if (!same_file_bytes(it->path(), scratch / rel, why)) {
            result.identical = false;
            result.first_divergence = why;
            break;
        }
    }
    if (result.identical) {
        for (auto it = fs::recursive_directory_iterator(scratch);
             it != fs::recursive_directory_iterator(); ++it) {
            if (!it->is_regular_file()) continue;
            const fs::path rel = fs::relative(it->path(), scratch);
            if (!fs::exists(original / rel)) {
                result.identical = false;
                result.first_divergence = "rerun produced extra artifact " + rel.string();
                break;
            }
        }
    }
    fs::remove_all(scratch);
    return result;
}

}  // namespace ojanet::harness
