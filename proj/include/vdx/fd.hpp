#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vdx/table.hpp"

namespace vdx {

struct OriginCandidate {
    std::vector<std::string> attrs;  // in table column order
    std::size_t size = 0;
    std::size_t max_cardinality = 0;

    bool operator==(const OriginCandidate&) const = default;
};

struct FdConfig {
    std::size_t max_size = 3;
    std::size_t sample_threshold = 50000;  // tables above this are sampled
    std::size_t sample_rows = 10000;
    std::uint64_t sample_seed = 7;
};

// Minimal non-empty attribute sets S (|S| <= max_size) of `t` such that no two
// tuples agree on S but disagree on `goal`.
std::vector<OriginCandidate> discover_determinants(const Table& t, std::span<const Value> goal,
                                                   const FdConfig& cfg = {});

// Direct check of S -> goal on every tuple of t.
bool fd_holds(const Table& t, std::span<const std::size_t> attrs, std::span<const Value> goal);

OriginCandidate make_candidate(const Table& t, std::span<const std::size_t> attrs);

// Ascending size, then ascending max cardinality, then attribute ids.
std::vector<OriginCandidate> rank_origins(std::vector<OriginCandidate> cands);

}  // namespace vdx
