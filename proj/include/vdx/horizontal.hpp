#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vdx/evaluator.hpp"
#include "vdx/expr.hpp"
#include "vdx/table.hpp"
#include "vdx/tree.hpp"

namespace vdx {

struct HorizontalConfig {
    double z_threshold = 3.0;
    double iqr_factor = 1.5;
    TreeConfig tree;
};

struct TupleRemovalResult {
    // One explanation per rule: markers first, then the predicate. Each lists
    // the removed tuple ids it accounts for in `covers`.
    std::vector<Explanation> rules;
    std::vector<std::string> idiopathic;
    double validity = 0.0;
    std::size_t false_removals = 0;
};

// Rules are evaluated on t projected to its matched attributes. A marker rule
// (contains-missing, duplicate-of keeping the first copy, outlier-z or
// outlier-iqr per numeric attribute) is kept only if it flags no surviving
// tuple; the removed tuples it flags are assigned to it. The rest are
// labelled remove, the survivors maintain, and a predicate tree over numeric
// and one-hot features is fitted to them.
TupleRemovalResult explain_tuple_removal(const ChangeSets& cs, const Table& t, const Table& t2,
                                         const AttributeMatch& m, const HorizontalConfig& cfg = {});

struct TupleAdditionResult {
    std::vector<Explanation> rules;  // a single bootstrapped-from rule covering the copies
    std::vector<std::string> idiopathic;
    double validity = 0.0;           // fraction of added tuples explained
};

TupleAdditionResult explain_tuple_addition(const ChangeSets& cs, const Table& t, const Table& t2,
                                           const AttributeMatch& m);

struct Reconstruction {
    double validity = 0.0;           // |correctly removed| / |removed|, 1 when none were removed
    std::size_t false_removals = 0;  // surviving tuples a rule would remove
    std::vector<std::string> removed;
};

// Applies every rule to t and compares the removed set with the tuples of t
// missing from t2.
Reconstruction reconstruct_and_score(std::span<const Explanation> rules, const Table& t, const Table& t2,
                                     const AttributeMatch& m);

// Tuples of t flagged by one removal rule.
std::vector<bool> rule_flags(const Explanation& rule, const Table& t, const AttributeMatch& m);

// Fraction of the tuples added in t2 that equal some tuple of t on the matched
// attributes; absent when nothing was added.
std::optional<double> bootstrap_score(const Table& t, const Table& t2, const AttributeMatch& m);

}  // namespace vdx
