#include "ojanet/training.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ojanet {

RepMap::RepMap(int layers, int n) : layers_(layers), n_(n) {
    if (layers < 1 || n < 1) throw std::invalid_argument("RepMap: bad shape");
    reverse_.assign(static_cast<std::size_t>(layers),
                    std::vector<ConceptId>(static_cast<std::size_t>(n), ConceptId{-1, -1}));
}

std::optional<std::pair<int, int>> RepMap::lookup(ConceptId c) const {
    if (c.level == 0) {
        if (c.index < 0 || c.index >= n_) return std::nullopt;
        return std::make_pair(0, c.index);
    }
    auto it = forward_.find(c);
    if (it == forward_.end()) return std::nullopt;
    return it->second;
}

std::optional<ConceptId> RepMap::concept_at(int layer, int neuron) const {
    if (neuron < 0 || neuron >= n_) return std::nullopt;
    if (layer == 0) return ConceptId{0, neuron};
    if (layer < 1 || layer > layers_) return std::nullopt;
    const ConceptId c = reverse_[static_cast<std::size_t>(layer - 1)][static_cast<std::size_t>(neuron)];
    if (c.level < 0) return std::nullopt;
    return c;
}

void RepMap::bind(ConceptId c, int layer, int neuron) {
    if (layer != c.level) throw std::invalid_argument("bind: layer must equal the concept's level");
    place(c, layer, neuron);
}

void RepMap::place(ConceptId c, int layer, int neuron) {
    if (c.level < 1) throw std::invalid_argument("bind: level-0 reps are fixed");
    if (layer < 1 || layer > layers_ || neuron < 0 || neuron >= n_)
        throw std::invalid_argument("bind: bad neuron");
    if (forward_.count(c)) throw std::invalid_argument("bind: concept already bound");
    auto& slot = reverse_[static_cast<std::size_t>(layer - 1)][static_cast<std::size_t>(neuron)];
    if (slot.level >= 0) throw std::invalid_argument("bind: neuron already bound");
    slot = c;
    forward_[c] = {layer, neuron};
    bindings_.push_back({c, {layer, neuron}});
}

void RepMap::save(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "repmap v1\n";
    out << "layers " << layers_ << " n " << n_ << "\n";
    for (const auto& [c, loc] : bindings_)
        out << c.level << " " << c.index << " " << loc.first << " " << loc.second << "\n";
}

RepMap RepMap::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::string line;
    if (!std::getline(in, line) || line != "repmap v1")
        throw std::runtime_error("repmap load: bad header");
    std::string tagl, tagn;
    int layers = 0, n = 0;
    in >> tagl >> layers >> tagn >> n;
    if (tagl != "layers" || tagn != "n") throw std::runtime_error("repmap load: bad shape line");
    RepMap r(layers, n);
    int level, index, layer, neuron;
    while (in >> level >> index >> layer >> neuron) r.place({level, index}, layer, neuron);
    return r;
}

double wbar(int k, double p) { return 1.0 / std::sqrt(p * k + 1.0 - p); }

bool gap_condition_holds(Ratio r1, int k, int b) {
    if (r1.integer_mul(k)) return false;
    // gap = r1*k - floor(r1*k) = a/q; require (a/q)^2 * k^(2b) >= k,
    // checked in integers with saturation.
    const std::int64_t a = r1.num * k - r1.floor_mul(k) * r1.den;
    const std::int64_t q = r1.den;
    __int128 lhs = static_cast<__int128>(a) * a;
    const __int128 rhs = static_cast<__int128>(k) * q * q;
    for (int i = 0; i < 2 * b; ++i) {
        if (lhs >= rhs) return true;
        lhs *= k;
    }
    return lhs >= rhs;
}

int minimal_gap_b(Ratio r1, int k) {
    if (r1.integer_mul(k)) throw std::invalid_argument("minimal_gap_b: r1*k is an integer");
    for (int b = 1; b <= 62; ++b)
        if (gap_condition_holds(r1, k, b)) return b;
    throw std::invalid_argument("minimal_gap_b: no b <= 62 satisfies the gap condition");
}

LearnParams LearnParams::noise_free(int k, Ratio r1, Ratio r2) {
    LearnParams p;
    p.r1 = r1;
    p.r2 = r2;
    p.eta = 1.0 / (4.0 * k);
    p.tau = (r1 + r2).value() * std::sqrt(static_cast<double>(k)) / 2.0;
    p.b = minimal_gap_b(r1, k);
    p.noisy = false;
    p.validate(k);
    return p;
}

LearnParams LearnParams::noisy_mode(int k, Ratio r1, Ratio r2, Ratio p, double eta,
                                    double delta) {
    LearnParams lp;
    lp.r1 = r1;
    lp.r2 = r2;
    lp.eta = eta;
    lp.noisy = true;
    lp.p = p;
    lp.delta = delta >= 0 ? delta : ((r2 - r1) / r2).value() / 50.0;
    lp.b = minimal_gap_b(r1, k);
    lp.tau = r2.value() * k * wbar(k, p.value()) / (1.0 + 10.0 * lp.delta);
    lp.validate(k);
    return lp;
}

void LearnParams::validate(int k) const {
    if (!(Ratio(0, 1) < r1) || !(r1 < r2) || Ratio(1, 1) < r2)
        throw std::invalid_argument("learn params: need 0 < r1 < r2 <= 1");
    if (!(eta > 0)) throw std::invalid_argument("learn params: eta must be positive");
    if (eta > 1.0 / (4.0 * k))
        throw std::invalid_argument("learn params: eta exceeds 1/(4k)");
    if (!noisy && eta != 1.0 / (4.0 * k))
        throw std::invalid_argument("learn params: noise-free mode requires eta = 1/(4k)");
    if (!(tau > 0)) throw std::invalid_argument("learn params: tau must be positive");
    if (r1.integer_mul(k))
        throw std::invalid_argument("learn params: r1*k must not be an integer");
    if (b < 1) throw std::invalid_argument("learn params: b must be a positive integer");
    if (!gap_condition_holds(r1, k, b))
        throw std::invalid_argument(
            "learn params: gap condition r1*k - floor(r1*k) >= sqrt(k)/k^b fails; minimal b is " +
            std::to_string(minimal_gap_b(r1, k)));
    if (noisy) {
        if (!(Ratio(0, 1) < p) || Ratio(1, 1) < p)
            throw std::invalid_argument("learn params: p must be in (0,1]");
        if (!(delta > 0)) throw std::invalid_argument("learn params: delta must be positive");
    }
}

long sigma_noise_free(int k, double eta, int lmax, double epsilon, int b) {
    if (!(eta > 0) || k < 2 || lmax < 1 || !(epsilon > 0) || b < 1)
        throw std::invalid_argument("sigma_noise_free: bad parameters");
    const long double log2k = std::log2(static_cast<long double>(k));
    const long double rise = (4.0L / (3.0L * eta * k)) * lmax * log2k +
                             3.0L / (eta * k * static_cast<long double>(epsilon));
    const long double decay = b * log2k / std::log2(16.0L / 15.0L);
    return static_cast<long>(std::ceil(rise)) + static_cast<long>(std::ceil(decay));
}

long sigma_noisy(int k, double eta, int lmax, Ratio r1, Ratio r2, double cprime) {
    if (!(eta > 0) || k < 2 || lmax < 1 || !(cprime > 0))
        throw std::invalid_argument("sigma_noisy: bad parameters");
    if (!(r1 < r2)) throw std::invalid_argument("sigma_noisy: need r1 < r2");
    const long double log2k = std::log2(static_cast<long double>(k));
    const long double rr2 = static_cast<long double>(r2.value());
    const long double gap = static_cast<long double>((r2 - r1).value());
    const long double inner =
        lmax * log2k + (rr2 * k + 1.0L - rr2) / (eta * std::pow(rr2, 1.5L) * gap);
    const long double value = cprime * (1.0L / (eta * k)) * inner + log2k;
    return static_cast<long>(std::ceil(value));
}

PresentationSchedule generate_schedule(const ConceptHierarchy& h, int sigma,
                                       SchedulePolicy policy, Rng& rng, bool noisy, Ratio p,
                                       bool include_level0) {
    if (sigma < 1) throw std::invalid_argument("generate_schedule: sigma must be >= 1");
    PresentationSchedule s;
    s.sigma = sigma;
    s.count_level0 = include_level0;
    auto mk = [&](ConceptId c) {
        Showing sh;
        sh.concept_id = c;
        sh.noisy = noisy && c.level >= 1;
        sh.p = p;
        return sh;
    };
    auto concepts = h.all_concepts();
    if (!include_level0)
        std::erase_if(concepts, [](const ConceptId& c) { return c.level == 0; });
    if (policy == SchedulePolicy::Sequential) {
        for (const auto& c : concepts)
            for (int r = 0; r < sigma; ++r) s.items.push_back(mk(c));
        return s;
    }
    // Interleaved: uniform over the remaining showings whose concept is
    // already eligible (all children shown sigma times).
    std::vector<std::int64_t> shown(concepts.size(), 0);
    std::vector<std::int64_t> remaining(concepts.size(), sigma);
    std::vector<std::size_t> eligible;  // indices into `concepts`
    std::int64_t pool = 0;
    const std::size_t level0_here = include_level0 ? h.level0_members().size() : 0;
    auto concept_pos = [&](ConceptId c) -> std::size_t {
        if (c.level == 0) {
            auto it = std::lower_bound(h.level0_members().begin(), h.level0_members().end(), c.index);
            return static_cast<std::size_t>(it - h.level0_members().begin());
        }
        std::size_t base = level0_here;
        for (int l = 1; l < c.level; ++l) base += static_cast<std::size_t>(h.level_count(l));
        return base + static_cast<std::size_t>(c.index);
    };
    auto is_eligible = [&](std::size_t i) {
        const ConceptId c = concepts[i];
        if (c.level == 0) return true;
        if (c.level == 1 && !include_level0) return true;
        for (int ch : h.children_of(c))
            if (shown[concept_pos({c.level - 1, ch})] < sigma) return false;
        return true;
    };
    for (std::size_t i = 0; i < concepts.size(); ++i)
        if (is_eligible(i)) {
            eligible.push_back(i);
            pool += sigma;
        }
    while (pool > 0) {
        std::int64_t pick = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(pool)));
        std::size_t chosen = 0;
        for (std::size_t e = 0; e < eligible.size(); ++e) {
            if (pick < remaining[eligible[e]]) {
                chosen = e;
                break;
            }
            pick -= remaining[eligible[e]];
        }
        const std::size_t ci = eligible[chosen];
        const ConceptId c = concepts[ci];
        s.items.push_back(mk(c));
        --remaining[ci];
        ++shown[ci];
        --pool;
        if (remaining[ci] == 0)
            eligible.erase(eligible.begin() + static_cast<std::ptrdiff_t>(chosen));
        if (shown[ci] == sigma && c.level < h.lmax()) {
            // The parent may have just become eligible.
            const ConceptId par = h.parent_of(c);
            if (par.level >= 1) {
                const std::size_t pi = concept_pos(par);
                if (shown[pi] == 0 && remaining[pi] > 0 && is_eligible(pi) &&
                    std::find(eligible.begin(), eligible.end(), pi) == eligible.end()) {
                    eligible.push_back(pi);
                    pool += remaining[pi];
                }
            }
        }
    }
    return s;
}

ScheduleCheck validate_schedule(const ConceptHierarchy& h, const PresentationSchedule& s) {
    ScheduleCheck check;
    const auto concepts = h.all_concepts();
    std::map<ConceptId, std::int64_t> shown;
    for (const auto& c : concepts) shown[c] = 0;
    for (std::size_t i = 0; i < s.items.size(); ++i) {
        const ConceptId c = s.items[i].concept_id;
        if (!h.contains(c)) {
            check.ok = false;
            check.position = i;
            check.message = "showing " + std::to_string(i) + " names a concept outside the hierarchy";
            return check;
        }
        if (c.level >= 1) {
            for (int ch : h.children_of(c)) {
                if (c.level == 1 && !s.count_level0) continue;
                if (shown[{c.level - 1, ch}] < s.sigma) {
                    check.ok = false;
                    check.position = i;
                    check.message = "showing " + std::to_string(i) + " of concept (" +
                                    std::to_string(c.level) + "," + std::to_string(c.index) +
                                    ") precedes sigma showings of child (" +
                                    std::to_string(c.level - 1) + "," + std::to_string(ch) + ")";
                    return check;
                }
            }
        }
        ++shown[c];
    }
    for (const auto& [c, count] : shown) {
        if (c.level == 0 && !s.count_level0) continue;
        if (count < s.sigma) {
            check.ok = false;
            check.position = s.items.size();
            check.message = "concept (" + std::to_string(c.level) + "," + std::to_string(c.index) +
                            ") shown " + std::to_string(count) + " < sigma = " +
                            std::to_string(s.sigma) + " times";
            return check;
        }
    }
    return check;
}

std::vector<std::uint8_t> encode_showing(const ConceptHierarchy& h, const RepMap& reps,
                                         const Showing& s, int n, Rng& mark_rng) {
    std::vector<std::uint8_t> input(static_cast<std::size_t>(n), 0);
    const std::vector<int> b0 =
        s.noisy ? mark(h, s.concept_id, s.p, mark_rng) : h.leaves(s.concept_id);
    for (int leaf : b0) {
        auto rep = reps.lookup({0, leaf});
        if (!rep) throw std::logic_error("encode_showing: leaf without a rep");
        input[static_cast<std::size_t>(rep->second)] = 1;
    }
    return input;
}

std::optional<EngageDirective> engage_controller(const NetworkState& net, int shown_level,
                                                 std::int64_t t_shown, std::int64_t current_t) {
    if (shown_level < 1) return std::nullopt;
    if (current_t != t_shown + shown_level) return std::nullopt;
    const auto pots = net.layer_potentials(shown_level);
    std::size_t best = 0;
    for (std::size_t v = 1; v < pots.size(); ++v)
        if (pots[v] > pots[best]) best = v;
    return EngageDirective{shown_level, static_cast<int>(best)};
}

namespace {

struct PendingShowing {
    std::int64_t t_shown;
    ConceptId concept_id;
    bool first_time;
};

}  // namespace

TrainResult train(const ConceptHierarchy& h, NetworkState& net,
                  const PresentationSchedule& schedule, const LearnParams& params,
                  Rng& mark_rng, const TrainOptions& options) {
    TrainResult result{RepMap(net.layers(), net.n()), {}, 0};
    if (schedule.items.empty()) return result;
    if (options.spacing < 1) throw std::invalid_argument("train: spacing must be >= 1");
    if (net.layers() < h.lmax())
        throw std::invalid_argument("train: network has fewer layers than hierarchy levels");
    const auto check = validate_schedule(h, schedule);
    if (!check.ok) throw std::invalid_argument("train: invalid schedule: " + check.message);

    RepMap& reps = result.reps;
    const int lmax = h.lmax();
    const std::int64_t m = static_cast<std::int64_t>(schedule.items.size());
    const std::int64_t spacing = options.spacing;
    const std::int64_t t_end = (m - 1) * spacing + lmax;
    const double w_init = std::pow(static_cast<double>(h.k()), -lmax);
    const double in_cap = 1.0 / std::sqrt(static_cast<double>(h.k()));

    std::map<ConceptId, std::int64_t> times_shown;
    std::deque<PendingShowing> pending;
    // shown_at[t]: the concept whose showing drives the wavefront born at t.
    std::vector<std::optional<ConceptId>> shown_at(static_cast<std::size_t>(t_end) + 1);
    std::vector<std::uint8_t> zeros(static_cast<std::size_t>(net.n()), 0);

    long showings_done = 0;
    auto take_snapshot = [&](std::int64_t t) {
        result.trace.snapshot_times.push_back(t);
        if (options.on_snapshot) options.on_snapshot(net, reps, t);
    };

    auto record_step = [&](std::int64_t t, const Showing* shown, int input_ones,
                           const std::vector<EngagedRecord>& engaged) {
        TraceStep row;
        row.t = t;
        if (shown) {
            row.shown_level = shown->concept_id.level;
            row.shown_index = shown->concept_id.index;
        }
        row.input_ones = input_ones;
        row.fired.resize(static_cast<std::size_t>(net.layers()));
        for (int l = 1; l <= net.layers(); ++l) {
            const auto& f = net.firing(l);
            for (int v = 0; v < net.n(); ++v)
                if (f[static_cast<std::size_t>(v)])
                    row.fired[static_cast<std::size_t>(l - 1)].push_back(v);
        }
        row.engaged = engaged;
        if (options.on_step) options.on_step(row);
        if (options.record_trace) result.trace.steps.push_back(std::move(row));
    };

    auto start_showing = [&](std::int64_t t, std::int64_t idx) {
        const Showing& sh = schedule.items[static_cast<std::size_t>(idx)];
        shown_at[static_cast<std::size_t>(t)] = sh.concept_id;
        if (sh.concept_id.level >= 1) {
            const bool first = times_shown[sh.concept_id] == 0;
            pending.push_back({t, sh.concept_id, first});
        }
        ++times_shown[sh.concept_id];
        return encode_showing(h, reps, sh, net.n(), mark_rng);
    };

    // Time 0 carries the first showing.
    {
        auto input = start_showing(0, 0);
        int ones = 0;
        for (auto v : input) ones += v;
        net.present(input);
        record_step(0, &schedule.items[0], ones, {});
        ++showings_done;
    }

    for (std::int64_t t = 1; t <= t_end; ++t) {
        const Showing* shown = nullptr;
        std::vector<std::uint8_t> input = zeros;
        if (t % spacing == 0 && t / spacing < m) {
            const std::int64_t idx = t / spacing;
            input = start_showing(t, idx);
            shown = &schedule.items[static_cast<std::size_t>(idx)];
            ++showings_done;
        }

        // Engagements due this step, selected against the firing of the
        // previous step (the state the step call will read from).
        std::vector<EngageDirective> directives;
        std::vector<EngagedRecord> engaged_records;
        struct SplitCheck {
            int layer, neuron;
            std::vector<double> before;
            std::vector<std::uint8_t> in_set;
        };
        std::vector<SplitCheck> split_checks;
        // Due times are not monotone in queue order when levels mix (a
        // level-1 showing can fall due before an earlier level-3 one), so
        // scan the whole queue; it never holds more than lmax entries.
        std::vector<PendingShowing> due;
        for (std::size_t i = 0; i < pending.size();) {
            if (pending[i].t_shown + pending[i].concept_id.level == t) {
                due.push_back(pending[i]);
                pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(i));
            } else {
                ++i;
            }
        }
        for (const PendingShowing& ps : due) {
            const int level = ps.concept_id.level;
            bool wavefront = false;
            for (auto f : net.firing(level - 1))
                if (f) { wavefront = true; break; }
            if (!wavefront)
                throw std::logic_error("train: engagement due but no wavefront at layer " +
                                       std::to_string(level - 1));
            auto directive = engage_controller(net, level, ps.t_shown, t);
            if (!directive) throw std::logic_error("train: controller returned no directive");
            const auto pots = net.layer_potentials(level);
            if (ps.first_time) {
                if (reps.concept_at(level, directive->neuron))
                    throw std::logic_error("train: winner for a first showing is already bound");
                reps.bind(ps.concept_id, level, directive->neuron);
            } else {
                const auto rep = reps.lookup(ps.concept_id);
                if (!rep || rep->second != directive->neuron)
                    throw std::logic_error("train: re-shown concept engaged a different neuron");
            }
            if (options.check_invariants && !params.noisy) {
                SplitCheck sc;
                sc.layer = level;
                sc.neuron = directive->neuron;
                const auto row = net.weight_row(level, directive->neuron);
                sc.before.assign(row.begin(), row.end());
                sc.in_set.assign(static_cast<std::size_t>(net.n()), 0);
                for (int ch : h.children_of(ps.concept_id)) {
                    const auto child_rep = reps.lookup({level - 1, ch});
                    if (!child_rep)
                        throw std::logic_error("train: engaged concept has an unbound child");
                    sc.in_set[static_cast<std::size_t>(child_rep->second)] = 1;
                }
                split_checks.push_back(std::move(sc));
            }
            directives.push_back(*directive);
            engaged_records.push_back(
                {directive->layer, directive->neuron,
                 pots[static_cast<std::size_t>(directive->neuron)]});
            ++result.engaged_updates;
        }

        net.step(input, directives);

        if (options.check_invariants) {
            for (const auto& sc : split_checks) {
                const auto row = net.weight_row(sc.layer, sc.neuron);
                for (int u = 0; u < net.n(); ++u) {
                    const double before = sc.before[static_cast<std::size_t>(u)];
                    const double after = row[static_cast<std::size_t>(u)];
                    if (sc.in_set[static_cast<std::size_t>(u)]) {
                        if (after < before || after > in_cap)
                            throw std::logic_error("train: in-set weight left its lane");
                    } else {
                        if (after > before || !(after > 0.0))
                            throw std::logic_error("train: out-set weight left its lane");
                    }
                }
            }
            // Firing soundness: a layer-l neuron firing now must be the rep
            // of a concept whose ancestor was shown l steps ago.
            for (int l = 1; l <= net.layers(); ++l) {
                const auto& f = net.firing(l);
                bool any = false;
                for (auto v : f)
                    if (v) { any = true; break; }
                if (!any) continue;
                const std::int64_t born = t - l;
                const std::optional<ConceptId> source =
                    born >= 0 ? shown_at[static_cast<std::size_t>(born)] : std::nullopt;
                for (int v = 0; v < net.n(); ++v) {
                    if (!f[static_cast<std::size_t>(v)]) continue;
                    const auto c = reps.concept_at(l, v);
                    if (!c) throw std::logic_error("train: unbound neuron fired");
                    if (!source || !h.is_ancestor(*source, *c))
                        throw std::logic_error("train: firing without an ancestor showing");
                }
            }
        }

        int ones = 0;
        for (auto v : input) ones += v;
        record_step(t, shown, ones, engaged_records);

        if (options.snapshot_every > 0 && shown &&
            showings_done % options.snapshot_every == 0)
            take_snapshot(t);
    }
    if (options.snapshot_every > 0 || options.on_snapshot) take_snapshot(t_end);

    if (options.check_invariants) {
        for (const auto& c : h.all_concepts())
            if (c.level >= 1 && !reps.bound(c))
                throw std::logic_error("train: concept left unbound after the schedule");
        for (int l = 1; l <= net.layers(); ++l) {
            for (int v = 0; v < net.n(); ++v) {
                if (reps.concept_at(l, v)) continue;
                for (double w : net.weight_row(l, v))
                    if (w != w_init)
                        throw std::logic_error("train: unbound neuron's weights changed");
            }
        }
    }
    return result;
}

void save_schedule(const PresentationSchedule& s, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "schedule v1\n";
    out << "sigma " << s.sigma << "\n";
    out << "count_level0 " << (s.count_level0 ? 1 : 0) << "\n";
    for (const auto& item : s.items)
        out << item.concept_id.level << " " << item.concept_id.index << " " << (item.noisy ? 1 : 0)
            << " " << item.p.num << "/" << item.p.den << "\n";
}

PresentationSchedule load_schedule(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::string line;
    if (!std::getline(in, line) || line != "schedule v1")
        throw std::runtime_error("schedule load: bad header");
    PresentationSchedule s;
    std::string tag;
    in >> tag >> s.sigma;
    if (tag != "sigma") throw std::runtime_error("schedule load: bad sigma line");
    int lvl0 = 1;
    in >> tag >> lvl0;
    if (tag != "count_level0") throw std::runtime_error("schedule load: bad count_level0 line");
    s.count_level0 = lvl0 != 0;
    int level, index, noisy;
    std::string frac;
    while (in >> level >> index >> noisy >> frac) {
        Showing sh;
        sh.concept_id = {level, index};
        sh.noisy = noisy != 0;
        sh.p = Ratio::parse(frac);
        s.items.push_back(sh);
    }
    return s;
}

}  // namespace ojanet
