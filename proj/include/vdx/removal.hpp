#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vdx/evaluator.hpp"
#include "vdx/expr.hpp"
#include "vdx/table.hpp"

namespace vdx {

struct RemovalConfig {
    double alpha = 0.5;          // Missing ratio above which a column is "mostly missing"
    double overlap = 0.9;        // multiset Jaccard threshold
    std::size_t max_determinant = 3;
};

// Markers for a removed attribute of t, in check order: contains-missing,
// duplicate-of, overlaps-with, determined-by. An empty result means the
// removal is idiopathic. Marker refs name attributes of t2 (contains-missing
// names the removed attribute itself). Throws Error if the attribute is
// matched or absent from t.
std::vector<Explanation> explain_attr_removal(const std::string& goal_attr, const Table& t, const Table& t2,
                                              const AttributeMatch& m, const RemovalConfig& cfg = {});

// Whether the marker's rule holds for goal_attr on the pair (t, t2).
bool removal_holds(const MarkerExpr& marker, const std::string& goal_attr, const Table& t, const Table& t2,
                   const AttributeMatch& m, const RemovalConfig& cfg = {});

// Multiset Jaccard similarity of two columns.
double multiset_jaccard(std::span<const Value> a, std::span<const Value> b);

}  // namespace vdx
