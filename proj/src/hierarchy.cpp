#include "ojanet/hierarchy.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ojanet {

namespace {

std::int64_t ipow(std::int64_t base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > INT64_MAX / base) throw std::overflow_error("hierarchy size overflow");
        r *= base;
    }
    return r;
}

}  // namespace

ConceptHierarchy ConceptHierarchy::build(int k, int lmax, std::int64_t n) {
    if (k < 2) throw std::invalid_argument("build_hierarchy: k must be >= 2");
    if (lmax < 1) throw std::invalid_argument("build_hierarchy: lmax must be >= 1");
    const std::int64_t need = ipow(k, lmax + 1);
    if (n < need)
        throw std::invalid_argument("build_hierarchy: n=" + std::to_string(n) +
                                    " below required k^(lmax+1)=" + std::to_string(need));
    std::vector<std::vector<std::vector<int>>> children(static_cast<std::size_t>(lmax));
    for (int l = 1; l <= lmax; ++l) {
        const std::int64_t count = ipow(k, lmax - l + 1);
        auto& table = children[static_cast<std::size_t>(l - 1)];
        table.resize(static_cast<std::size_t>(count));
        for (std::int64_t i = 0; i < count; ++i) {
            auto& ch = table[static_cast<std::size_t>(i)];
            ch.reserve(static_cast<std::size_t>(k));
            for (int j = 0; j < k; ++j) ch.push_back(static_cast<int>(i * k + j));
        }
    }
    return assemble(k, lmax, n, std::move(children));
}

ConceptHierarchy ConceptHierarchy::assemble(int k, int lmax, std::int64_t n,
                                            std::vector<std::vector<std::vector<int>>> children) {
    ConceptHierarchy h;
    h.k_ = k;
    h.lmax_ = lmax;
    h.n_ = n;
    h.children_ = std::move(children);
    h.validate();
    h.index_members();
    return h;
}

void ConceptHierarchy::validate() const {
    if (k_ < 2 || lmax_ < 1) throw std::invalid_argument("hierarchy: k >= 2 and lmax >= 1 required");
    if (n_ < ipow(k_, lmax_ + 1))
        throw std::invalid_argument("hierarchy: n below k^(lmax+1)");
    if (children_.size() != static_cast<std::size_t>(lmax_))
        throw std::invalid_argument("hierarchy: child table has wrong number of levels");
    for (int l = lmax_; l >= 1; --l) {
        const auto& table = children_[static_cast<std::size_t>(l - 1)];
        const std::int64_t expect = ipow(k_, lmax_ - l + 1);
        if (static_cast<std::int64_t>(table.size()) != expect)
            throw std::invalid_argument("hierarchy: |C_" + std::to_string(l) + "| != k^(lmax-l+1)");
        const std::int64_t below =
            l == 1 ? n_ : static_cast<std::int64_t>(children_[static_cast<std::size_t>(l - 2)].size());
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(below), 0);
        for (const auto& ch : table) {
            if (static_cast<int>(ch.size()) != k_)
                throw std::invalid_argument("hierarchy: internal concept degree != k");
            for (int c : ch) {
                if (c < 0 || c >= below)
                    throw std::invalid_argument("hierarchy: child index out of range");
                if (seen[static_cast<std::size_t>(c)])
                    throw std::invalid_argument("hierarchy: overlapping children at level " +
                                                std::to_string(l - 1));
                seen[static_cast<std::size_t>(c)] = 1;
            }
        }
    }
}

void ConceptHierarchy::index_members() {
    parent_.assign(static_cast<std::size_t>(lmax_), {});
    for (int l = 1; l <= lmax_; ++l) {
        const auto& table = children_[static_cast<std::size_t>(l - 1)];
        const std::int64_t below =
            l == 1 ? n_ : static_cast<std::int64_t>(children_[static_cast<std::size_t>(l - 2)].size());
        auto& par = parent_[static_cast<std::size_t>(l - 1)];
        par.assign(static_cast<std::size_t>(below), -1);
        for (std::size_t i = 0; i < table.size(); ++i)
            for (int c : table[i]) par[static_cast<std::size_t>(c)] = static_cast<int>(i);
    }
    level0_bitmap_.assign(static_cast<std::size_t>(n_), 0);
    for (const auto& ch : children_[0])
        for (int c : ch) level0_bitmap_[static_cast<std::size_t>(c)] = 1;
    level0_members_.clear();
    for (std::int64_t i = 0; i < n_; ++i)
        if (level0_bitmap_[static_cast<std::size_t>(i)]) level0_members_.push_back(static_cast<int>(i));
}

std::int64_t ConceptHierarchy::level_count(int level) const {
    if (level < 0 || level > lmax_) throw std::out_of_range("level_count: bad level");
    if (level == 0) return ipow(k_, lmax_ + 1);
    return static_cast<std::int64_t>(children_[static_cast<std::size_t>(level - 1)].size());
}

bool ConceptHierarchy::contains(ConceptId c) const {
    if (c.level < 0 || c.level > lmax_ || c.index < 0) return false;
    if (c.level == 0)
        return c.index < n_ && level0_bitmap_[static_cast<std::size_t>(c.index)] != 0;
    return c.index < level_count(c.level);
}

const std::vector<int>& ConceptHierarchy::children_of(ConceptId c) const {
    if (!contains(c) || c.level == 0)
        throw std::out_of_range("children_of: unknown or level-0 concept");
    return children_[static_cast<std::size_t>(c.level - 1)][static_cast<std::size_t>(c.index)];
}

ConceptId ConceptHierarchy::parent_of(ConceptId c) const {
    if (!contains(c)) throw std::out_of_range("parent_of: unknown concept");
    if (c.level == lmax_) return {-1, -1};
    int p = parent_[static_cast<std::size_t>(c.level)][static_cast<std::size_t>(c.index)];
    return {c.level + 1, p};
}

bool ConceptHierarchy::is_ancestor(ConceptId a, ConceptId c) const {
    if (!contains(a) || !contains(c)) return false;
    while (c.level < a.level) c = parent_of(c);
    return c == a;
}

std::vector<int> ConceptHierarchy::leaves(ConceptId c) const {
    if (!contains(c)) throw std::out_of_range("leaves: unknown concept");
    if (c.level == 0) return {c.index};
    std::vector<int> out;
    std::vector<ConceptId> stack{c};
    while (!stack.empty()) {
        ConceptId cur = stack.back();
        stack.pop_back();
        if (cur.level == 0) {
            out.push_back(cur.index);
            continue;
        }
        for (int ch : children_of(cur)) stack.push_back({cur.level - 1, ch});
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<ConceptId> ConceptHierarchy::all_concepts() const {
    std::vector<ConceptId> out;
    for (int i : level0_members_) out.push_back({0, i});
    for (int l = 1; l <= lmax_; ++l)
        for (std::int64_t i = 0; i < level_count(l); ++i) out.push_back({l, static_cast<int>(i)});
    return out;
}

bool ConceptHierarchy::level0_member(int index) const {
    return index >= 0 && index < n_ && level0_bitmap_[static_cast<std::size_t>(index)] != 0;
}

void ConceptHierarchy::save(std::ostream& out) const {
    out << "hierarchy v1\n";
    out << "k " << k_ << "\n";
    out << "lmax " << lmax_ << "\n";
    out << "n " << n_ << "\n";
    for (int l = 1; l <= lmax_; ++l) {
        const auto& table = children_[static_cast<std::size_t>(l - 1)];
        for (std::size_t i = 0; i < table.size(); ++i) {
            out << "concept " << l << " " << i << " :";
            for (int c : table[i]) out << " " << c;
            out << "\n";
        }
    }
}

void ConceptHierarchy::save(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    save(out);
}

ConceptHierarchy ConceptHierarchy::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "hierarchy v1")
        throw std::runtime_error("hierarchy load: bad header");
    int k = 0, lmax = 0;
    std::int64_t n = 0;
    std::vector<std::vector<std::vector<int>>> children;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "k") ls >> k;
        else if (tag == "lmax") { ls >> lmax; children.resize(static_cast<std::size_t>(lmax)); }
        else if (tag == "n") ls >> n;
        else if (tag == "concept") {
            int l = 0;
            std::size_t i = 0;
            std::string colon;
            ls >> l >> i >> colon;
            if (l < 1 || l > lmax || colon != ":")
                throw std::runtime_error("hierarchy load: bad concept record: " + line);
            auto& table = children[static_cast<std::size_t>(l - 1)];
            if (table.size() <= i) table.resize(i + 1);
            int c;
            while (ls >> c) table[i].push_back(c);
        } else {
            throw std::runtime_error("hierarchy load: unknown record: " + line);
        }
    }
    return assemble(k, lmax, n, std::move(children));
}

ConceptHierarchy ConceptHierarchy::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    return load(in);
}

bool SupportSet::contains(ConceptId c) const {
    if (c.level < 0 || c.level >= static_cast<int>(levels.size())) return false;
    const auto& bm = levels[static_cast<std::size_t>(c.level)];
    return c.index >= 0 && c.index < static_cast<int>(bm.size()) &&
           bm[static_cast<std::size_t>(c.index)] != 0;
}

std::vector<int> SupportSet::slice(int level) const {
    std::vector<int> out;
    if (level < 0 || level >= static_cast<int>(levels.size())) return out;
    const auto& bm = levels[static_cast<std::size_t>(level)];
    for (std::size_t i = 0; i < bm.size(); ++i)
        if (bm[i]) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<ConceptId> SupportSet::all() const {
    std::vector<ConceptId> out;
    for (int l = 0; l < static_cast<int>(levels.size()); ++l)
        for (int i : slice(l)) out.push_back({l, i});
    return out;
}

SupportSet supported(const ConceptHierarchy& h, const std::vector<int>& b0, Ratio r) {
    SupportSet s;
    s.levels.resize(static_cast<std::size_t>(h.lmax() + 1));
    auto& base = s.levels[0];
    base.assign(static_cast<std::size_t>(h.n()), 0);
    for (int i : b0) {
        if (i < 0 || i >= h.n()) throw std::invalid_argument("supported: B not within the universe");
        if (h.level0_member(i)) base[static_cast<std::size_t>(i)] = 1;
    }
    for (int l = 1; l <= h.lmax(); ++l) {
        const auto& prev = s.levels[static_cast<std::size_t>(l - 1)];
        auto& cur = s.levels[static_cast<std::size_t>(l)];
        cur.assign(static_cast<std::size_t>(h.level_count(l)), 0);
        for (std::int64_t i = 0; i < h.level_count(l); ++i) {
            std::int64_t hits = 0;
            for (int ch : h.children_of({l, static_cast<int>(i)}))
                hits += prev[static_cast<std::size_t>(ch)];
            if (r.count_at_least(hits, h.k())) cur[static_cast<std::size_t>(i)] = 1;
        }
    }
    return s;
}

namespace {

void mark_rec(const ConceptHierarchy& h, ConceptId c, std::int64_t m, Rng& rng,
              std::vector<int>& out) {
    if (c.level == 0) {
        out.push_back(c.index);
        return;
    }
    const auto& ch = h.children_of(c);
    std::vector<int> picked = rng.sample(static_cast<int>(ch.size()), static_cast<int>(m));
    std::sort(picked.begin(), picked.end());
    for (int j : picked) mark_rec(h, {c.level - 1, ch[static_cast<std::size_t>(j)]}, m, rng, out);
}

}  // namespace

std::vector<int> mark(const ConceptHierarchy& h, ConceptId c, Ratio p, Rng& rng) {
    if (!(Ratio(0, 1) < p) || Ratio(1, 1) < p)
        throw std::invalid_argument("mark: p must be in (0,1]");
    if (!h.contains(c)) throw std::out_of_range("mark: unknown concept");
    const std::int64_t m = p.ceil_mul(h.k());
    std::vector<int> out;
    mark_rec(h, c, m, rng, out);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace ojanet
