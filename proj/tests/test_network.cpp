#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "ojanet/network.hpp"
#include "ojanet/rng.hpp"

using namespace ojanet;

TEST_SUITE_BEGIN("network");

namespace {

NetworkState small_net(int k = 4, int lmax = 2, int n = 64, double tau = 1.31,
                       double eta = 1.0 / 16.0) {
    return NetworkState::init(NetworkParams{lmax, n, tau, eta}, k, lmax);
}

}  // namespace

TEST_CASE("init: clean state has uniform weights and no firing") {
    auto net = small_net();
    CHECK(net.weight(1, 0, 0) == 0.0625);
    CHECK(net.weight(2, 63, 63) == 0.0625);
    auto net2 = NetworkState::init(NetworkParams{1, 4, 0.9, 1.0 / 8.0}, 2, 1);
    CHECK(net2.weight(1, 3, 1) == 0.5);
    for (int l = 0; l <= net.layers(); ++l)
        for (auto f : net.firing(l)) CHECK(f == 0);
    CHECK(net.time() == 0);

    // no input, no firing
    std::vector<std::uint8_t> zeros(64, 0);
    net.step(zeros);
    for (int l = 1; l <= net.layers(); ++l)
        for (auto f : net.firing(l)) CHECK(f == 0);
}

TEST_CASE("potential: dot product with length check") {
    std::vector<double> w{0.5, 0.5};
    std::vector<std::uint8_t> x{1, 0};
    CHECK(potential(w, x) == 0.5);
    CHECK(potential(w, std::vector<std::uint8_t>{0, 0}) == 0.0);
    std::vector<double> uniform(64, 1.0 / 16.0);
    std::vector<std::uint8_t> ones16(64, 0);
    for (int i = 0; i < 16; ++i) ones16[static_cast<std::size_t>(i * 4)] = 1;
    CHECK(potential(uniform, ones16) == 1.0);
    CHECK_THROWS(potential(w, ones16));
}

TEST_CASE("activation: threshold is inclusive") {
    const double tau = 1.31;
    CHECK(activation(tau, tau));
    CHECK_FALSE(activation(0.0, tau));
    CHECK_FALSE(activation(tau - 1e-12, tau));
}

TEST_CASE("oja update: exact one-step values") {
    // k = 4 firing inputs at weight 1/4, eta = 1/16: z = 1, firing weights
    // move to 19/64 and a silent 1/4 entry to 15/64. All dyadic, so the
    // doubles are exact.
    std::vector<double> w(8, 0.0);
    std::vector<std::uint8_t> x(8, 0);
    for (int i = 0; i < 4; ++i) {
        w[static_cast<std::size_t>(i)] = 0.25;
        x[static_cast<std::size_t>(i)] = 1;
    }
    w[4] = 0.25;
    oja_update(w, x, 1.0 / 16.0);
    for (int i = 0; i < 4; ++i) CHECK(w[static_cast<std::size_t>(i)] == 19.0 / 64.0);
    CHECK(w[4] == 15.0 / 64.0);
    for (int i = 5; i < 8; ++i) CHECK(w[static_cast<std::size_t>(i)] == 0.0);

    SUBCASE("zero input leaves weights untouched") {
        std::vector<double> w2{0.1, 0.9, 0.4};
        const auto before = w2;
        oja_update(w2, std::vector<std::uint8_t>{0, 0, 0}, 0.25);
        CHECK(w2 == before);
    }
}

TEST_CASE("step: zero input with no directive is a weight fixpoint") {
    auto net = small_net();
    const auto digest = net.weights_digest();
    std::vector<std::uint8_t> zeros(64, 0);
    for (int t = 0; t < 5; ++t) net.step(zeros);
    CHECK(net.weights_digest() == digest);
    CHECK(net.time() == 5);
}

TEST_CASE("step: weights stay constant without directives even under input") {
    auto net = small_net();
    const auto digest = net.weights_digest();
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        std::vector<std::uint8_t> input(64, 0);
        for (int i : rng.sample(64, 16)) input[static_cast<std::size_t>(i)] = 1;
        net.step(input);
    }
    CHECK(net.weights_digest() == digest);
}

TEST_CASE("step: directive validation") {
    auto net = small_net();
    std::vector<std::uint8_t> zeros(64, 0);
    EngageDirective bad_layer{0, 3};
    CHECK_THROWS_AS(net.step(zeros, std::vector<EngageDirective>{bad_layer}),
                    std::invalid_argument);
    EngageDirective a{1, 0}, b{1, 1};
    CHECK_THROWS_AS(net.step(zeros, std::vector<EngageDirective>{a, b}), std::invalid_argument);
    EngageDirective far{3, 0};
    CHECK_THROWS_AS(net.step(zeros, std::vector<EngageDirective>{far}), std::invalid_argument);
}

TEST_CASE("step: engaged neuron learns from the previous firing of its input layer") {
    auto net = small_net(4, 1, 8, 0.9, 1.0 / 16.0);
    // start weights at 1/4 to reproduce the hand-computed update
    for (int v = 0; v < 8; ++v) {
        auto row = net.mutable_weight_row(1, v);
        std::fill(row.begin(), row.end(), 0.25);
    }
    std::vector<std::uint8_t> input(8, 0);
    for (int i = 0; i < 4; ++i) input[static_cast<std::size_t>(i)] = 1;
    net.present(input);
    std::vector<std::uint8_t> zeros(8, 0);
    net.step(zeros, std::vector<EngageDirective>{{1, 2}});
    CHECK(net.engaged(1, 2));
    CHECK_FALSE(net.engaged(1, 0));
    const auto row = net.weight_row(1, 2);
    for (int i = 0; i < 4; ++i) CHECK(row[static_cast<std::size_t>(i)] == 19.0 / 64.0);
    for (int i = 4; i < 8; ++i) CHECK(row[static_cast<std::size_t>(i)] == 15.0 / 64.0);
    // z = 1 >= tau: the engaged neuron also fired
    CHECK(net.firing(1)[2] == 1);
    // other rows untouched
    for (int v = 0; v < 8; ++v) {
        if (v == 2) continue;
        for (double w : net.weight_row(1, v)) CHECK(w == 0.25);
    }
}

TEST_CASE("layer locality: firing depends only on the previous layer one step back") {
    Rng rng(17);
    auto net = small_net(2, 2, 8, 0.6, 1.0 / 8.0);
    // randomize weights within [0,1]
    for (int l = 1; l <= 2; ++l)
        for (int v = 0; v < 8; ++v)
            for (auto& w : net.mutable_weight_row(l, v)) w = rng.unit();
    std::vector<std::vector<std::uint8_t>> inputs;
    for (int t = 0; t < 6; ++t) {
        std::vector<std::uint8_t> input(8, 0);
        for (int i : rng.sample(8, 3)) input[static_cast<std::size_t>(i)] = 1;
        inputs.push_back(input);
    }
    std::vector<std::vector<std::uint8_t>> fire0{inputs[0]}, fire1, fire2;
    net.present(inputs[0]);
    fire1.push_back(net.firing(1));
    fire2.push_back(net.firing(2));
    for (std::size_t t = 1; t < inputs.size(); ++t) {
        net.step(inputs[t]);
        fire0.push_back(net.firing(0));
        fire1.push_back(net.firing(1));
        fire2.push_back(net.firing(2));
    }
    for (std::size_t t = 1; t < inputs.size(); ++t) {
        for (int v = 0; v < 8; ++v) {
            const double p1 = potential(net.weight_row(1, v), fire0[t - 1]);
            CHECK(static_cast<bool>(fire1[t][static_cast<std::size_t>(v)]) ==
                  activation(p1, net.tau()));
            const double p2 = potential(net.weight_row(2, v), fire1[t - 1]);
            CHECK(static_cast<bool>(fire2[t][static_cast<std::size_t>(v)]) ==
                  activation(p2, net.tau()));
        }
    }
}

TEST_CASE("determinism: identical runs are bit-identical") {
    auto run_once = [] {
        auto net = small_net();
        Rng rng(123);
        std::vector<std::uint8_t> input(64, 0);
        for (int t = 0; t < 30; ++t) {
            std::fill(input.begin(), input.end(), 0);
            for (int i : rng.sample(64, 4)) input[static_cast<std::size_t>(i)] = 1;
            std::vector<EngageDirective> ds;
            if (t % 3 == 0) ds.push_back({1, static_cast<int>(rng.below(64))});
            net.step(input, ds);
        }
        return net.weights_digest();
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("weights stay in [0,1] under in-model engaged updates") {
    // regime of the learning runs: k firing in-set inputs, in-set weights
    // below 1/sqrt(k), out-set at or below the initial value
    Rng rng(31);
    const int k = 4, n = 32;
    for (int trial = 0; trial < 200; ++trial) {
        auto net = NetworkState::init(NetworkParams{1, n, 1.0, 1.0 / (4.0 * k)}, k, 2);
        const auto in_set = rng.sample(n, k);
        for (int v = 0; v < n; ++v) {
            auto row = net.mutable_weight_row(1, v);
            for (int u = 0; u < n; ++u) row[static_cast<std::size_t>(u)] = rng.unit() / 16.0;
            for (int u : in_set)
                row[static_cast<std::size_t>(u)] = rng.unit() / std::sqrt(static_cast<double>(k));
        }
        std::vector<std::uint8_t> input(n, 0);
        for (int u : in_set) input[static_cast<std::size_t>(u)] = 1;
        net.present(input);
        std::vector<std::uint8_t> zeros(n, 0);
        // throws from inside step if a weight ever leaves [0,1]
        CHECK_NOTHROW(net.step(zeros, std::vector<EngageDirective>{{1, 5}}));
    }
}

TEST_CASE("weight snapshots round-trip through the binary format") {
    auto net = small_net(2, 1, 6, 0.7, 1.0 / 8.0);
    Rng rng(9);
    for (int v = 0; v < 6; ++v)
        for (auto& w : net.mutable_weight_row(1, v)) w = rng.unit();
    const auto dir = std::filesystem::temp_directory_path() / "ojanet_test_net";
    std::filesystem::create_directories(dir);
    net.save_weights_binary(dir / "w.bin");
    net.save_weights_csv(dir / "w.csv");
    const auto loaded =
        NetworkState::load_weights_binary(dir / "w.bin", NetworkParams{1, 6, 0.7, 1.0 / 8.0});
    CHECK(loaded.weights_digest() == net.weights_digest());
    CHECK_THROWS(NetworkState::load_weights_binary(dir / "w.bin", NetworkParams{1, 7, 0.7, 0.1}));
    std::filesystem::remove_all(dir);
}

TEST_SUITE_END();
