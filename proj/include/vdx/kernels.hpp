#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vdx/table.hpp"

// Hot loops shared by the explainers. Every kernel has a serial reference
// and an OpenMP version; both must return identical results.
namespace vdx::kernels {

enum class Exec { Serial, Parallel };

// Process-wide default used by callers that do not pick explicitly.
void set_default_exec(Exec e);
Exec default_exec();

// Dense codes for a column: equal Values (Missing included) get equal codes,
// assigned in first-occurrence order.
std::vector<std::uint32_t> encode_column(std::span<const Value> col);

// Maximal agree sets over all tuple pairs whose goal codes differ. Bit c of a
// mask is set when the pair agrees on column c (at most 64 columns).
// Result is sorted ascending and contains no mask that is a subset of another.
std::vector<std::uint64_t> maximal_agree_sets(const std::vector<std::vector<std::uint32_t>>& columns,
                                              std::span<const std::uint32_t> goal, Exec exec);

// Number of positions where values_match(predicted[i], truth[i]).
std::size_t count_matches(std::span<const Value> predicted, std::span<const Value> truth, Exec exec);

struct GroupStats {
    double sum = 0;
    double min = 0;
    double max = 0;
    std::size_t count = 0;  // non-missing values
    double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

// Per-group statistics of `values` (NaN = missing) for groups 0..num_groups-1.
std::vector<GroupStats> group_stats(std::span<const std::uint32_t> groups, std::span<const double> values,
                                    std::size_t num_groups, Exec exec);

}  // namespace vdx::kernels
