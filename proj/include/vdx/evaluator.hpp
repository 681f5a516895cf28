#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vdx/expr.hpp"
#include "vdx/table.hpp"

namespace vdx {

enum class GoalKind { AttrAdd, AttrRemove, TupleRemove, TupleAdd };

std::string_view to_string(GoalKind k);

struct Goal {
    std::string name;     // attribute id, or the covered tuple ids joined by ","
    std::string side;     // "right" for additions, "left" for removals
    GoalKind kind = GoalKind::AttrAdd;

    bool operator==(const Goal&) const = default;
};

struct ScoreCard {
    double validity = 0.0;
    std::optional<double> generalizability;
    std::size_t n_components = 1;
    std::size_t n_chunks = 1;
    double conciseness = 1.0;
    double concentration = 1.0;
    double total_explainability = 1.0;
};

struct Explanation {
    Goal goal;
    std::vector<std::string> origin;  // attributes of T
    Expr expr;
    std::string producer;
    ScoreCard scores;
    // Reshaping: the expression reads the relation grouped by these attributes.
    std::vector<std::string> group_by;
    // Tuple goals: ids the explanation accounts for.
    std::vector<std::string> covers;
    std::string note;
};

// Explainability fields of a card for an expression.
ScoreCard score_card(const Expr& e, double validity, std::optional<double> generalizability = {});

// Mean of values_match over aligned pairs; 1 when empty.
double match_fraction(std::span<const Value> predicted, std::span<const Value> truth);

// Fraction of matching values over the tuples present in both tables (paired by id):
// attribute additions evaluate the expression on T and compare with the goal
// column of T'. Throws Error if the goal or an origin attribute is absent.
double addition_validity(const Explanation& e, const Table& t, const Table& t2, const AttributeMatch& m);

// Validity of any explanation kind on a version pair. Removal markers score
// 1 when the marker rule still holds for the pair and 0 otherwise; tuple rules
// score the fraction of their goal's tuples they reproduce.
double validity(const Explanation& e, const Table& t, const Table& t2, const AttributeMatch& m);

// validity() on the hold-out pair; absent when the hold-out lacks the columns
// the explanation needs, or the tuple goal has nothing to reproduce there.
std::optional<double> generalizability(const Explanation& e, const Table& hold_t, const Table& hold_t2,
                                       const AttributeMatch& m);

}  // namespace vdx
