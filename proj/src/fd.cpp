#include "vdx/fd.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "vdx/kernels.hpp"

namespace vdx {

namespace {

std::size_t cardinality(const Table& t, std::size_t col) {
    std::unordered_set<std::string> seen;
    for (const auto& v : t.column(col)) seen.insert(v.key());
    return seen.size();
}

// Calls fn(indices) for every k-combination of 0..n-1 in lexicographic order.
template <class Fn>
void for_each_combination(std::size_t n, std::size_t k, Fn&& fn) {
    if (k == 0 || k > n) return;
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        fn(std::as_const(idx));
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

std::vector<std::vector<std::size_t>> minimal_sets_by_agree(const Table& t, std::span<const Value> goal,
                                                            std::size_t max_size) {
    const std::size_t ncols = t.num_cols();
    std::vector<std::vector<std::uint32_t>> codes;
    codes.reserve(ncols);
    for (std::size_t c = 0; c < ncols; ++c) codes.push_back(kernels::encode_column(t.column(c)));
    auto goal_codes = kernels::encode_column(goal);

    // Identical (row, goal) combinations contribute nothing new; keep one of each.
    std::unordered_set<std::string> seen;
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
        std::string sig;
        for (std::size_t c = 0; c < ncols; ++c) sig += std::to_string(codes[c][r]) + ",";
        sig += std::to_string(goal_codes[r]);
        if (seen.insert(sig).second) keep.push_back(r);
    }
    std::vector<std::vector<std::uint32_t>> cols(ncols);
    for (std::size_t c = 0; c < ncols; ++c) {
        for (auto r : keep) cols[c].push_back(codes[c][r]);
    }
    std::vector<std::uint32_t> g;
    for (auto r : keep) g.push_back(goal_codes[r]);

    auto negative = kernels::maximal_agree_sets(cols, g, kernels::default_exec());

    std::vector<std::uint64_t> found;
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t k = 1; k <= max_size; ++k) {
        for_each_combination(ncols, k, [&](const std::vector<std::size_t>& idx) {
            std::uint64_t mask = 0;
            for (auto i : idx) mask |= std::uint64_t{1} << i;
            for (auto f : found) {
                if ((f & mask) == f) return;
            }
            for (auto neg : negative) {
                if ((mask & neg) == mask) return;
            }
            found.push_back(mask);
            out.push_back(idx);
        });
    }
    return out;
}

std::vector<std::vector<std::size_t>> minimal_sets_direct(const Table& t, std::span<const Value> goal,
                                                          std::size_t max_size) {
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t k = 1; k <= max_size; ++k) {
        for_each_combination(t.num_cols(), k, [&](const std::vector<std::size_t>& idx) {
            for (const auto& f : out) {
                if (std::includes(idx.begin(), idx.end(), f.begin(), f.end())) return;
            }
            if (fd_holds(t, idx, goal)) out.push_back(idx);
        });
    }
    return out;
}

}  // namespace

bool fd_holds(const Table& t, std::span<const std::size_t> attrs, std::span<const Value> goal) {
    if (goal.size() != t.num_rows()) throw Error("goal column misaligned with table '" + t.name() + "'");
    std::unordered_map<std::string, std::string> seen;
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
        std::string key;
        for (auto c : attrs) {
            key += t.at(r, c).key();
            key.push_back('\x1f');
        }
        auto [it, inserted] = seen.emplace(key, goal[r].key());
        if (!inserted && it->second != goal[r].key()) return false;
    }
    return true;
}

OriginCandidate make_candidate(const Table& t, std::span<const std::size_t> attrs) {
    OriginCandidate c;
    for (auto a : attrs) {
        c.attrs.push_back(t.attribute(a).id);
        c.max_cardinality = std::max(c.max_cardinality, cardinality(t, a));
    }
    c.size = c.attrs.size();
    return c;
}

std::vector<OriginCandidate> discover_determinants(const Table& t, std::span<const Value> goal,
                                                   const FdConfig& cfg) {
    if (goal.size() != t.num_rows()) {
        throw Error("goal column has " + std::to_string(goal.size()) + " values but table '" + t.name() +
                    "' has " + std::to_string(t.num_rows()) + " tuples");
    }
    if (cfg.max_size == 0) throw Error("max determinant size must be at least 1");
    std::vector<std::vector<std::size_t>> sets;
    bool sampled = t.num_rows() > cfg.sample_threshold && cfg.sample_rows < t.num_rows();
    if (sampled) {
        std::vector<std::size_t> rows(t.num_rows());
        std::iota(rows.begin(), rows.end(), 0);
        std::mt19937_64 rng(cfg.sample_seed);
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(cfg.sample_rows);
        std::sort(rows.begin(), rows.end());
        Table sample = t.select_rows(rows);
        std::vector<Value> g;
        for (auto r : rows) g.push_back(goal[r]);
        sets = t.num_cols() <= 64 ? minimal_sets_by_agree(sample, g, cfg.max_size)
                                  : minimal_sets_direct(sample, g, cfg.max_size);
        std::erase_if(sets, [&](const auto& s) { return !fd_holds(t, s, goal); });
    } else {
        sets = t.num_cols() <= 64 ? minimal_sets_by_agree(t, goal, cfg.max_size)
                                  : minimal_sets_direct(t, goal, cfg.max_size);
    }
    std::vector<OriginCandidate> out;
    out.reserve(sets.size());
    for (const auto& s : sets) out.push_back(make_candidate(t, s));
    return out;
}

std::vector<OriginCandidate> rank_origins(std::vector<OriginCandidate> cands) {
    std::stable_sort(cands.begin(), cands.end(), [](const OriginCandidate& a, const OriginCandidate& b) {
        if (a.size != b.size) return a.size < b.size;
        if (a.max_cardinality != b.max_cardinality) return a.max_cardinality < b.max_cardinality;
        return a.attrs < b.attrs;
    });
    return cands;
}

}  // namespace vdx
