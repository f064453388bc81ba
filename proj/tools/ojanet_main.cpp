#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ojanet/harness.hpp"

namespace {

using ojanet::Ratio;
using namespace ojanet::harness;

struct CliOptions {
    RunConfig config;
    std::string out_dir = "run";
    std::string r1 = "0.51";
    std::string r2 = "0.8";
    std::string p = "0.8";
    std::string policy = "interleaved";
    std::string config_file;
};

void add_common(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--k", opt.config.k, "children per concept");
    cmd->add_option("--lmax", opt.config.lmax, "hierarchy depth");
    cmd->add_option("--n", opt.config.n, "basic concepts / neurons per layer (0: k^(lmax+1))");
    cmd->add_option("--r1", opt.r1, "lower recognition ratio");
    cmd->add_option("--r2", opt.r2, "upper recognition ratio");
    cmd->add_option("--seed", opt.config.seed, "master seed");
    cmd->add_option("--trials", opt.config.trials, "independent trials");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--config", opt.config_file,
                    "JSON config file (run-manifest schema, used verbatim; other flags ignored)");
}

int finish(CliOptions& opt, RunMode mode) {
    if (!opt.config_file.empty()) {
        // The file is taken verbatim (it has the same schema as a run
        // manifest); only --out applies on top.
        std::ifstream in(opt.config_file);
        if (!in) {
            std::cerr << "cannot read config file " << opt.config_file << "\n";
            return 2;
        }
        std::stringstream buf;
        buf << in.rdbuf();
        opt.config = RunConfig::from_json(buf.str());
        return run(opt.config, opt.out_dir);
    }
    opt.config.mode = mode;
    opt.config.r1 = Ratio::parse(opt.r1);
    opt.config.r2 = Ratio::parse(opt.r2);
    opt.config.p = Ratio::parse(opt.p);
    opt.config.policy = opt.policy == "sequential" ? ojanet::SchedulePolicy::Sequential
                                                   : ojanet::SchedulePolicy::Interleaved;
    return run(opt.config, opt.out_dir);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"layered threshold-network simulator for hierarchical concept learning"};
    app.require_subcommand(1);
    CliOptions opt;

    auto* learn = app.add_subcommand("learn", "train a network on a generated hierarchy");
    add_common(learn, opt);
    bool noisy = false;
    learn->add_flag("--noisy", noisy, "subsampled showings");
    learn->add_option("--p", opt.p, "noisy subsampling fraction");
    learn->add_option("--eta", opt.config.eta, "learning rate (clean default: 1/(4k))");
    learn->add_option("--sigma", opt.config.sigma, "showings per concept (clean default: formula)");
    learn->add_option("--b", opt.config.b, "decay exponent (default: minimal feasible)");
    learn->add_option("--delta", opt.config.delta, "noisy tolerance (default: ((r2-r1)/r2)/50)");
    learn->add_option("--policy", opt.policy, "schedule policy: interleaved | sequential");
    learn->add_option("--spacing", opt.config.spacing, "steps between showings (1 = pipelined)");
    learn->add_option("--budget", opt.config.budget, "random recognition inputs per concept");
    learn->add_option("--snapshot-every", opt.config.snapshot_every,
                      "weight snapshot cadence in showings (0: sigma/10)");
    bool skip_level0 = false;
    learn->add_flag("--skip-level0", skip_level0,
                    "drop level-0 concepts from the schedule quota");

    auto* recognize = app.add_subcommand("recognize", "grade recognition of a network");
    add_common(recognize, opt);
    recognize->add_option("--budget", opt.config.budget, "random inputs per concept");
    recognize->add_option("--weights", opt.config.weights_from,
                          "run directory of a trained network (default: static embedding)");

    auto* oracle = app.add_subcommand("oracle", "single-neuron weight dynamics");
    add_common(oracle, opt);
    oracle->add_flag("--noisy", opt.config.noisy, "subsampled drive");
    oracle->add_option("--p", opt.p, "noisy subsampling fraction");
    oracle->add_option("--eta", opt.config.eta, "learning rate");
    oracle->add_option("--steps", opt.config.oracle_steps, "iteration count");
    oracle->add_option("--b", opt.config.b, "decay exponent");
    oracle->add_option("--delta", opt.config.delta, "noisy tolerance");

    auto* lower = app.add_subcommand("lowerbound", "threshold-window infeasibility search");
    add_common(lower, opt);
    lower->add_option("--lb-trials", opt.config.lb_trials, "random weight assignments to test");

    auto* replay_cmd = app.add_subcommand("replay", "re-run a manifest and compare artifacts");
    std::string manifest;
    replay_cmd->add_option("manifest", manifest, "path to manifest.json")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(learn)) {
            opt.config.level0_showings = !skip_level0;
            return finish(opt, noisy ? RunMode::LearnNoisy : RunMode::LearnClean);
        }
        if (app.got_subcommand(recognize)) return finish(opt, RunMode::Recognize);
        if (app.got_subcommand(oracle)) return finish(opt, RunMode::Oracle);
        if (app.got_subcommand(lower)) return finish(opt, RunMode::LowerBound);
        if (app.got_subcommand(replay_cmd)) {
            const auto result = replay(manifest);
            if (result.identical) {
                std::cout << "replay identical\n";
                return 0;
            }
            std::cout << "replay diverged: " << result.first_divergence << "\n";
            return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
