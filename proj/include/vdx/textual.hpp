#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vdx/expr.hpp"
#include "vdx/numeric.hpp"
#include "vdx/tree.hpp"

namespace vdx {

struct TextConfig {
    double timeout_s = 60.0;
    std::size_t max_program_length = 6;
    std::size_t sample_rows = 50;
    std::size_t max_expansions = 200000;
    double heuristic_weight = 2.0;
};

struct ProgCandidate {
    StringProg prog;
    double validity = 0.0;  // over every tuple
    bool timed_out = false;
    std::size_t expansions = 0;
};

// A* over string programs. States are the transformed example fields; the
// cost of a state is its program length and the heuristic is the mean
// normalized edit distance between the closest field and the goal, plus the
// number of surplus fields. States already seen are pruned. Returns the first
// program that reproduces every tuple, or else the best partial program found
// before the deadline or expansion budget ran out.
ProgCandidate synthesize_text_to_text(const Table& t, std::span<const std::string> origin,
                                      std::span<const Value> goal, const TextConfig& cfg = {},
                                      std::optional<Clock::time_point> deadline = {});

// Split delimiters tried by the search: punctuation and spaces present in the
// origin, plus the text around goal values inside origin values.
std::vector<std::string> mine_delimiters(std::span<const std::string> origin_values,
                                         std::span<const std::string> goal_values);

// len and count_pat features of a text attribute.
FeatureSet text_numeric_features(const Table& t, const std::string& attr);
// contains_pat features of a text attribute.
FeatureSet text_indicator_features(const Table& t, const std::string& attr);

// Direct and linearly adjusted pattern features (e.g. count_' '(x) + 1).
std::vector<NumericCandidate> synthesize_text_to_numeric(const Table& t, const std::string& attr,
                                                         std::span<const Value> goal);

// Single contains_pat splits, then trees over the pattern features.
std::vector<TreeCandidate> synthesize_text_to_categorical(const Table& t, const std::string& attr,
                                                          std::span<const Value> goal, const TreeConfig& cfg = {});

}  // namespace vdx
