#include "ojanet/network.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ojanet {

double potential(std::span<const double> w, std::span<const std::uint8_t> x) {
    if (w.size() != x.size()) throw std::invalid_argument("potential: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (x[i]) acc += w[i];
    return acc;
}

void oja_update(std::span<double> w, std::span<const std::uint8_t> x, double eta) {
    const double z = potential(w, x);
    if (z == 0.0) return;
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] += eta * z * (static_cast<double>(x[i]) - z * w[i]);
}

NetworkState NetworkState::init(const NetworkParams& params, int k, int lmax) {
    if (params.layers < 1 || params.n < 1)
        throw std::invalid_argument("init_network: layers >= 1 and n >= 1 required");
    if (!(params.tau > 0)) throw std::invalid_argument("init_network: tau must be positive");
    if (!(params.eta > 0)) throw std::invalid_argument("init_network: eta must be positive");
    if (k < 2 || lmax < 1) throw std::invalid_argument("init_network: bad k or lmax");
    NetworkState s;
    s.params_ = params;
    const double w0 = std::pow(static_cast<double>(k), -lmax);
    const std::size_t n = static_cast<std::size_t>(params.n);
    s.weights_.assign(static_cast<std::size_t>(params.layers), std::vector<double>(n * n, w0));
    s.firing_.assign(static_cast<std::size_t>(params.layers) + 1, std::vector<std::uint8_t>(n, 0));
    s.engaged_.assign(static_cast<std::size_t>(params.layers), std::vector<std::uint8_t>(n, 0));
    s.pot_scratch_.assign(n, 0.0);
    return s;
}

const std::vector<std::uint8_t>& NetworkState::firing(int layer) const {
    if (layer < 0 || layer > params_.layers) throw std::out_of_range("firing: bad layer");
    return firing_[static_cast<std::size_t>(layer)];
}

bool NetworkState::engaged(int layer, int neuron) const {
    if (layer < 1 || layer > params_.layers) throw std::out_of_range("engaged: bad layer");
    return engaged_[static_cast<std::size_t>(layer - 1)][static_cast<std::size_t>(neuron)] != 0;
}

std::span<const double> NetworkState::weight_row(int layer, int neuron) const {
    if (layer < 1 || layer > params_.layers) throw std::out_of_range("weight_row: bad layer");
    if (neuron < 0 || neuron >= params_.n) throw std::out_of_range("weight_row: bad neuron");
    const auto& m = weights_[static_cast<std::size_t>(layer - 1)];
    const std::size_t n = static_cast<std::size_t>(params_.n);
    return {m.data() + static_cast<std::size_t>(neuron) * n, n};
}

std::span<double> NetworkState::mutable_weight_row(int layer, int neuron) {
    auto row = static_cast<const NetworkState*>(this)->weight_row(layer, neuron);
    return {const_cast<double*>(row.data()), row.size()};
}

std::vector<double> NetworkState::layer_potentials(int layer) const {
    if (layer < 1 || layer > params_.layers) throw std::out_of_range("layer_potentials: bad layer");
    const auto& x = firing_[static_cast<std::size_t>(layer - 1)];
    std::vector<double> pots(static_cast<std::size_t>(params_.n));
    for (int v = 0; v < params_.n; ++v)
        pots[static_cast<std::size_t>(v)] = potential(weight_row(layer, v), x);
    return pots;
}

void NetworkState::present(const std::vector<std::uint8_t>& input) {
    if (static_cast<int>(input.size()) != params_.n)
        throw std::invalid_argument("present: input length != n");
    firing_[0] = input;
}

void NetworkState::step(const std::vector<std::uint8_t>& next_input,
                        std::span<const EngageDirective> directives) {
    if (static_cast<int>(next_input.size()) != params_.n)
        throw std::invalid_argument("step: input length != n");
    for (const auto& d : directives) {
        if (d.layer < 1 || d.layer > params_.layers)
            throw std::invalid_argument("step: engage directive must name a layer >= 1");
        if (d.neuron < 0 || d.neuron >= params_.n)
            throw std::invalid_argument("step: engage directive neuron out of range");
        for (const auto& other : directives)
            if (&other != &d && other.layer == d.layer)
                throw std::invalid_argument("step: two directives for one layer");
    }

    const std::size_t n = static_cast<std::size_t>(params_.n);
    std::vector<std::vector<std::uint8_t>> next_firing(firing_.size());
    next_firing[0] = next_input;
    for (auto& e : engaged_) std::fill(e.begin(), e.end(), 0);

    for (int l = 1; l <= params_.layers; ++l) {
        const auto& x = firing_[static_cast<std::size_t>(l - 1)];
        auto& fired = next_firing[static_cast<std::size_t>(l)];
        fired.assign(n, 0);
        auto& pots = pot_scratch_;
        for (int v = 0; v < params_.n; ++v) {
            const double p = potential(weight_row(l, v), x);
            pots[static_cast<std::size_t>(v)] = p;
            fired[static_cast<std::size_t>(v)] = activation(p, params_.tau) ? 1 : 0;
        }
        for (const auto& d : directives) {
            if (d.layer != l) continue;
            engaged_[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(d.neuron)] = 1;
            auto row = mutable_weight_row(l, d.neuron);
            const double z = pots[static_cast<std::size_t>(d.neuron)];
            if (z != 0.0) {
                for (std::size_t i = 0; i < n; ++i)
                    row[i] += params_.eta * z * (static_cast<double>(x[i]) - z * row[i]);
            }
            for (double w : row)
                if (!(w >= 0.0 && w <= 1.0))
                    throw std::logic_error("step: weight left [0,1] after update");
        }
    }
    firing_ = std::move(next_firing);
    ++time_;
}

void NetworkState::zero_firing() {
    for (auto& f : firing_) std::fill(f.begin(), f.end(), 0);
}

std::uint64_t NetworkState::weights_digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& m : weights_) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
        for (std::size_t i = 0; i < m.size() * sizeof(double); ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

namespace {
constexpr char kWeightsMagic[4] = {'O', 'J', 'W', 'T'};
constexpr std::uint32_t kWeightsVersion = 1;
}  // namespace

void NetworkState::save_weights_binary(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out.write(kWeightsMagic, 4);
    const std::uint32_t version = kWeightsVersion;
    const std::uint32_t layers = static_cast<std::uint32_t>(params_.layers);
    const std::uint32_t n = static_cast<std::uint32_t>(params_.n);
    const std::uint64_t t = static_cast<std::uint64_t>(time_);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&layers), sizeof layers);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&t), sizeof t);
    for (std::uint32_t l = 1; l <= layers; ++l) {
        out.write(reinterpret_cast<const char*>(&l), sizeof l);
        const auto& m = weights_[l - 1];
        out.write(reinterpret_cast<const char*>(m.data()),
                  static_cast<std::streamsize>(m.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("short write to " + file.string());
}

void NetworkState::save_weights_csv(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "layer,n,time,format\n";
    out << params_.layers << "," << params_.n << "," << time_ << "," << kWeightsVersion << "\n";
    char buf[32];
    for (int l = 1; l <= params_.layers; ++l) {
        for (int v = 0; v < params_.n; ++v) {
            out << l << "," << v;
            for (double w : weight_row(l, v)) {
                std::snprintf(buf, sizeof buf, "%.17g", w);
                out << "," << buf;
            }
            out << "\n";
        }
    }
}

NetworkState NetworkState::load_weights_binary(const std::filesystem::path& file,
                                               const NetworkParams& params) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    char magic[4];
    std::uint32_t version = 0, layers = 0, n = 0;
    std::uint64_t t = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&layers), sizeof layers);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&t), sizeof t);
    if (!in || std::memcmp(magic, kWeightsMagic, 4) != 0 || version != kWeightsVersion)
        throw std::runtime_error("bad weight snapshot: " + file.string());
    if (static_cast<int>(layers) != params.layers || static_cast<int>(n) != params.n)
        throw std::runtime_error("weight snapshot shape mismatch: " + file.string());
    NetworkState s;
    s.params_ = params;
    s.time_ = static_cast<std::int64_t>(t);
    s.weights_.assign(layers, std::vector<double>(static_cast<std::size_t>(n) * n));
    s.firing_.assign(layers + 1, std::vector<std::uint8_t>(n, 0));
    s.engaged_.assign(layers, std::vector<std::uint8_t>(n, 0));
    s.pot_scratch_.assign(n, 0.0);
    for (std::uint32_t l = 1; l <= layers; ++l) {
        std::uint32_t idx = 0;
        in.read(reinterpret_cast<char*>(&idx), sizeof idx);
        if (!in || idx != l) throw std::runtime_error("bad layer record in " + file.string());
        auto& m = s.weights_[l - 1];
        in.read(reinterpret_cast<char*>(m.data()),
                static_cast<std::streamsize>(m.size() * sizeof(double)));
    }
    if (!in) throw std::runtime_error("truncated weight snapshot: " + file.string());
    for (const auto& m : s.weights_)
        for (double w : m)
            if (!(w >= 0.0 && w <= 1.0))
                throw std::runtime_error("weight snapshot has out-of-range weight");
    return s;
}

}  // namespace ojanet
