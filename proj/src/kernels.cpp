#include "vdx/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vdx::kernels {

namespace {
std::atomic<Exec> g_default{Exec::Parallel};

// Drops masks contained in another mask; input must be deduplicated.
std::vector<std::uint64_t> keep_maximal(std::vector<std::uint64_t> masks) {
    std::sort(masks.begin(), masks.end());
    masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
    // Larger popcount first so that supersets are seen before their subsets.
    std::vector<std::uint64_t> order = masks;
    std::stable_sort(order.begin(), order.end(), [](std::uint64_t a, std::uint64_t b) {
        return std::popcount(a) > std::popcount(b);
    });
    std::vector<std::uint64_t> kept;
    for (auto m : order) {
        bool covered = false;
        for (auto k : kept) {
            if ((m & k) == m) {
                covered = true;
                break;
            }
        }
        if (!covered) kept.push_back(m);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

std::uint64_t agree_mask(const std::vector<std::vector<std::uint32_t>>& columns, std::size_t i, std::size_t j) {
    std::uint64_t mask = 0;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c][i] == columns[c][j]) mask |= (std::uint64_t{1} << c);
    }
    return mask;
}

}  // namespace

void set_default_exec(Exec e) { g_default.store(e); }
Exec default_exec() { return g_default.load(); }

std::vector<std::uint32_t> encode_column(std::span<const Value> col) {
    std::unordered_map<std::string, std::uint32_t> codes;
    std::vector<std::uint32_t> out;
    out.reserve(col.size());
    for (const auto& v : col) {
        auto [it, inserted] = codes.emplace(v.key(), static_cast<std::uint32_t>(codes.size()));
        out.push_back(it->second);
    }
    return out;
}

std::vector<std::uint64_t> maximal_agree_sets(const std::vector<std::vector<std::uint32_t>>& columns,
                                              std::span<const std::uint32_t> goal, Exec exec) {
    if (columns.size() > 64) throw Error("agree-set kernel supports at most 64 columns");
    const std::size_t n = goal.size();
    for (const auto& c : columns) {
        if (c.size() != n) throw Error("agree-set kernel: column length mismatch");
    }
    if (exec == Exec::Serial) {
        std::unordered_set<std::uint64_t> seen;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (goal[i] != goal[j]) seen.insert(agree_mask(columns, i, j));
            }
        }
        return keep_maximal(std::vector<std::uint64_t>(seen.begin(), seen.end()));
    }
    std::vector<std::uint64_t> merged;
#pragma omp parallel
    {
        std::unordered_set<std::uint64_t> local;
#pragma omp for schedule(dynamic, 16) nowait
        for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
            auto i = static_cast<std::size_t>(ii);
            for (std::size_t j = i + 1; j < n; ++j) {
                if (goal[i] != goal[j]) local.insert(agree_mask(columns, i, j));
            }
        }
#pragma omp critical
        merged.insert(merged.end(), local.begin(), local.end());
    }
    return keep_maximal(std::move(merged));
}

std::size_t count_matches(std::span<const Value> predicted, std::span<const Value> truth, Exec exec) {
    if (predicted.size() != truth.size()) throw Error("count_matches: length mismatch");
    const auto n = static_cast<std::ptrdiff_t>(predicted.size());
    std::size_t hits = 0;
    if (exec == Exec::Serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) hits += values_match(predicted[i], truth[i]) ? 1 : 0;
        return hits;
    }
#pragma omp parallel for reduction(+ : hits) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) hits += values_match(predicted[i], truth[i]) ? 1 : 0;
    return hits;
}

std::vector<GroupStats> group_stats(std::span<const std::uint32_t> groups, std::span<const double> values,
                                    std::size_t num_groups, Exec exec) {
    if (groups.size() != values.size()) throw Error("group_stats: length mismatch");
    auto add = [](GroupStats& g, double v) {
        if (std::isnan(v)) return;
        if (g.count == 0) {
            g.min = g.max = v;
        } else {
            g.min = std::min(g.min, v);
            g.max = std::max(g.max, v);
        }
        g.sum += v;
        ++g.count;
    };
    std::vector<GroupStats> out(num_groups);
    if (exec == Exec::Serial) {
        for (std::size_t i = 0; i < groups.size(); ++i) add(out[groups[i]], values[i]);
        return out;
    }
    // Each thread owns a contiguous range of groups, so every group's values are
    // accumulated in row order and sums match the serial result bit-for-bit.
#pragma omp parallel
    {
        std::size_t tid = 0, nth = 1;
#ifdef _OPENMP
        tid = static_cast<std::size_t>(omp_get_thread_num());
        nth = static_cast<std::size_t>(omp_get_num_threads());
#endif
        std::size_t lo = num_groups * tid / nth;
        std::size_t hi = num_groups * (tid + 1) / nth;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            auto g = groups[i];
            if (g >= lo && g < hi) add(out[g], values[i]);
        }
    }
    return out;
}

}  // namespace vdx::kernels
