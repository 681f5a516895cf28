#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vdx/expr.hpp"
#include "vdx/numeric.hpp"
#include "vdx/table.hpp"

namespace vdx {

// One 0/1 indicator per distinct non-Missing category, in Value order.
// Throws Error for numeric attributes or more than `max_categories` values.
FeatureSet one_hot(const Table& t, const std::string& attr, std::size_t max_categories = 20);

// sum/mean/max/min/count of every `of` attribute per group of `by`, broadcast
// back to the tuples.
FeatureSet groupby_features(const Table& t, std::span<const std::string> by, std::span<const std::string> of);

// goal ~ sum_c k_c * onehot(attr, c) with no intercept: k_c is the mean goal
// value of category c, which is the least-squares solution for disjoint
// indicators.
LinearExpr onehot_linear(const Table& t, const std::string& attr, std::span<const Value> goal,
                         std::size_t max_categories = 20);

struct ReshapeConfig {
    double early_stop_validity = 0.95;
    std::size_t max_key_size = 2;
    std::size_t max_categories = 20;
};

// One explained column of the reshaped table.
struct ReshapeColumn {
    std::string goal;                  // attribute of t2
    std::vector<std::string> origin;   // attributes of t
    Expr expr;                         // over the grouped relation
    double validity = 0.0;
};

struct ReshapeResult {
    std::vector<std::string> key;      // grouping attributes of t
    std::vector<ReshapeColumn> columns;
    double validity = 0.0;             // mean over explained columns
};

// Rows of `t` grouped by `key`, one tuple per group whose id is the rendered
// key. Key attributes are kept; every numeric attribute contributes its
// aggregates as attributes named like "mean(a3)".
Table group_table(const Table& t, std::span<const std::string> key);

// For each candidate key (categorical attributes, singly then in pairs) the
// grouped relation is aligned with t2 on the matched key attribute and every
// numeric attribute of t2 is fitted from the aggregates. Results are ordered by
// validity, best first. Throws Error when t has no categorical key candidates.
std::vector<ReshapeResult> explain_reshape(const Table& t, const Table& t2, const AttributeMatch& m,
                                           const ReshapeConfig& cfg = {});

}  // namespace vdx
