#include <cmath>

#include "doctest.h"
#include "ojanet/oracle.hpp"
#include "ojanet/training.hpp"

using namespace ojanet;
using namespace ojanet::oracle;

TEST_SUITE_BEGIN("oracle");

TEST_CASE("noise-free iteration: exact first step") {
    // k=4, eta=1/16, lmax=1: from wf=wout=1/4, z=1, one round lands on
    // 19/64 and 15/64 exactly (all dyadic).
    const auto traj = iterate_noise_free(4, 1.0 / 16.0, 1, 1);
    CHECK(traj[0].wf == 0.25);
    CHECK(traj[1].wf == 19.0 / 64.0);
    CHECK(traj[1].wout == 15.0 / 64.0);
    CHECK(traj[1].z == 1.0);

    const auto [wf, wout] = exact_one_step(4, Ratio(1, 16), Ratio(1, 4), Ratio(1, 4));
    CHECK(wf == "19/64");
    CHECK(wout == "15/64");
}

TEST_CASE("noise-free iteration: monotone lanes and the sqrt(k) potential cap") {
    const auto traj = iterate_noise_free(4, 1.0 / 16.0, 2, 200);
    const double cap = 1.0 / std::sqrt(4.0);
    for (std::size_t t = 1; t < traj.size(); ++t) {
        CHECK(traj[t].wf >= traj[t - 1].wf);
        CHECK(traj[t].wf < cap + 1e-15);
        CHECK(traj[t].wout <= traj[t - 1].wout);
        CHECK(traj[t].wout > 0.0);
        CHECK(traj[t].z < std::sqrt(4.0));
        // strict movement while increments are representable
        if (t < 50) {
            CHECK(traj[t].wf > traj[t - 1].wf);
            CHECK(traj[t].wout < traj[t - 1].wout);
        }
    }
    CHECK_THROWS(iterate_noise_free(4, 0.5, 2, 10));  // eta above 1/(4k)
}

TEST_CASE("convergence: acceptance-scale bounds hold from sigma on") {
    const auto traj = iterate_noise_free(4, 1.0 / 16.0, 2, 220);
    const double eps = 29.0 / 131.0;
    const auto rep = check_convergence(traj, 141, eps, 3, 4, 2);
    CHECK(rep.ok);
    CHECK(rep.holds_from <= 141);
    CHECK(rep.in_lo == doctest::Approx(0.409375).epsilon(1e-12));
    CHECK(rep.in_hi == 0.5);
    CHECK(rep.out_bound == doctest::Approx(1.0 / 1024.0).epsilon(1e-15));

    SUBCASE("a wider epsilon band is reached no later") {
        const auto relaxed = check_convergence(traj, 141, 1.0, 3, 4, 2);
        CHECK(relaxed.ok);
        CHECK(relaxed.holds_from <= rep.holds_from);
    }
}

TEST_CASE("doubling times: bound value and measured stages") {
    CHECK(doubling_time_bound(1.0 / 16.0, 4) == doctest::Approx(16.0 / 3.0).epsilon(1e-12));
    CHECK(doubling_time_bound(1.0 / 8.0, 4) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));

    const auto traj = iterate_noise_free(4, 1.0 / 16.0, 2, 200);
    const auto rep = measure_doubling_times(traj, 4);
    REQUIRE(rep.stages.size() == 2);  // 1/16 -> 1/8 -> 1/4 with sqrt(k)=2
    for (const auto& st : rep.stages) CHECK(st.rounds <= 6);  // ceil(16/3)
}

TEST_CASE("decay: per-round factor and total rounds on the engaged suffix") {
    const auto traj = iterate_noise_free(4, 1.0 / 16.0, 2, 200);
    const auto rep = decay_rate_check(traj, 4, 2, 3, 1.0 / 16.0);
    CHECK(rep.suffix_start >= 0);
    CHECK(rep.ratio_ok);
    CHECK(rep.max_ratio <= 15.0 / 16.0);
    CHECK(rep.positive);
    CHECK(rep.steps_to_target >= 0);
    CHECK(static_cast<double>(rep.steps_to_target) <= rep.step_bound);
    CHECK(rep.step_bound == doctest::Approx(6.0 / std::log2(16.0 / 15.0)).epsilon(1e-12));
    CHECK_THROWS(decay_rate_check(traj, 4, 2, 3, 1.0 / 32.0));
}

TEST_CASE("noisy iteration: p=1 reduces exactly to the noise-free recurrence") {
    Rng rng(5);
    const auto noisy = iterate_noisy(4, Ratio(1, 1), 1.0 / 16.0, 2, 100, rng);
    const auto clean = iterate_noise_free(4, 1.0 / 16.0, 2, 100);
    REQUIRE(noisy.steps.size() == clean.size());
    for (std::size_t t = 0; t < clean.size(); ++t) {
        for (double wi : noisy.steps[t].w) CHECK(wi == clean[t].wf);
        CHECK(noisy.steps[t].wout == clean[t].wout);
    }
}

TEST_CASE("noisy iteration: wbar values and the psi anchor") {
    CHECK(wbar(4, 0.8) == doctest::Approx(0.5423261445466404).epsilon(1e-12));
    CHECK(wbar(10, 0.8) == doctest::Approx(0.34921514788478913).epsilon(1e-12));
    Rng rng(1);
    auto traj = iterate_noisy(10, Ratio(4, 5), 1e-3, 1, 0, rng);
    CHECK(traj.fired_per_round == 8);
    // psi equals 1 exactly when every in-set weight sits at wbar
    NoisyStep s;
    s.w.assign(10, traj.wbar);
    const double psi = std::max(traj.wbar / traj.wbar, traj.wbar / traj.wbar);
    CHECK(psi == 1.0);
    CHECK(traj.steps[0].psi > 1.0);  // initial weights are far from wbar
}

TEST_CASE("noisy iteration: long-run psi settles near 1 (statistical, 20 seeds)") {
    // Genuinely noisy drive: k=10, p=0.8 fires 8 of 10 in-set inputs.
    const double delta_prime = 0.05;
    int ok = 0;
    const int seeds = 20;
    for (int seed = 0; seed < seeds; ++seed) {
        Rng rng(static_cast<std::uint64_t>(1000 + seed));
        const auto traj = iterate_noisy(10, Ratio(4, 5), 1e-3, 1, 50000, rng);
        if (traj.steps.back().psi <= 1.0 + 20.0 * delta_prime) ++ok;
    }
    CHECK(ok >= 19);
}

TEST_CASE("noisy iteration: phi window stability (statistical)") {
    Rng rng(77);
    const auto traj = iterate_noisy(10, Ratio(4, 5), 2e-4, 1, 100000, rng);
    const auto rep = phi_window_stability(traj, 500, 1000);
    CHECK(rep.windows >= 190);
    CHECK(rep.fraction >= 0.95);
}

TEST_CASE("precision audit: exact prefix and rounded full horizon") {
    const auto exact = audit_noise_free_exact(4, Ratio(1, 16), 2, 12);
    CHECK(exact.max_rel_diff <= 1e-14);  // float vs true rationals, short prefix
    const auto full = audit_noise_free(4, Ratio(1, 16), 2, 212);
    CHECK(full.max_rel_diff <= 1e-9);
    CHECK(full.frac_bits == 384);
    // the double trajectory is in fact much closer than the required 1e-9
    CHECK(full.max_rel_diff <= 1e-12);
}

TEST_SUITE_END();
