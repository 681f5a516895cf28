#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vdx/expr.hpp"
#include "vdx/numeric.hpp"

namespace vdx {

struct TreeConfig {
    std::size_t max_depth = 4;
    std::size_t min_leaf = 1;
    std::size_t max_categories = 20;  // one-hot bound for categorical origins
};

// CART with Gini impurity over numeric (or 0/1) features. Tuples whose label
// is Missing do not take part in the fit. A feature is considered at a node
// only if none of the node's tuples has it Missing. Split thresholds are the
// roundest number in [left value, right value).
TreeExpr fit_tree(const FeatureSet& features, std::span<const Value> labels, const TreeConfig& cfg = {});

// Roundest decimal in [lo, hi): a multiple of the largest power of ten that
// has one in range, the one closest to the midpoint.
double round_threshold(double lo, double hi);

struct TreeCandidate {
    TreeExpr expr;
    std::string producer;
    double validity = 0.0;
};

// Decision trees over the origin's numeric attributes and one-hot indicators of
// its categorical attributes, then over interaction features when the plain
// tree is imperfect.
std::vector<TreeCandidate> explain_categorical(const Table& t, std::span<const std::string> origin,
                                               std::span<const Value> goal, const TreeConfig& cfg = {},
                                               double early_stop_validity = 0.95);

double tree_validity(const TreeExpr& e, const Table& t, std::span<const Value> goal);

}  // namespace vdx
