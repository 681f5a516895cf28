#include "vdx/evaluator.hpp"

#include <unordered_map>

#include "vdx/encode.hpp"
#include "vdx/horizontal.hpp"
#include "vdx/kernels.hpp"
#include "vdx/removal.hpp"

namespace vdx {

std::string_view to_string(GoalKind k) {
    switch (k) {
        case GoalKind::AttrAdd: return "attr-add";
        case GoalKind::AttrRemove: return "attr-remove";
        case GoalKind::TupleRemove: return "tuple-remove";
        case GoalKind::TupleAdd: return "tuple-add";
    }
    return "?";
}

ScoreCard score_card(const Expr& e, double validity, std::optional<double> generalizability) {
    auto x = explainability(e);
    ScoreCard s;
    s.validity = validity;
    s.generalizability = generalizability;
    s.n_components = x.n_components;
    s.n_chunks = x.n_chunks;
    s.conciseness = x.conciseness;
    s.concentration = x.concentration;
    s.total_explainability = x.total;
    return s;
}

double match_fraction(std::span<const Value> predicted, std::span<const Value> truth) {
    if (truth.empty()) return 1.0;
    return static_cast<double>(kernels::count_matches(predicted, truth, kernels::default_exec())) /
           static_cast<double>(truth.size());
}

namespace {

std::string key_of(const Table& t, std::size_t row, std::span<const std::size_t> cols) {
    std::string k;
    for (auto c : cols) {
        k += t.at(row, c).key();
        k.push_back('\x1f');
    }
    return k;
}

double grouped_validity(const Explanation& e, const Table& t, const Table& t2, const AttributeMatch& m) {
    Table g = group_table(t, e.group_by);
    std::vector<std::size_t> gcols, rcols;
    for (std::size_t i = 0; i < e.group_by.size(); ++i) {
        gcols.push_back(i);
        auto r = m.right_of(e.group_by[i]);
        if (!r) throw Error("group key '" + e.group_by[i] + "' has no match in " + t2.name());
        rcols.push_back(t2.attr_index(*r));
    }
    std::unordered_map<std::string, std::size_t> rows;
    for (std::size_t r = 0; r < g.num_rows(); ++r) rows.emplace(key_of(g, r, gcols), r);
    auto pred = eval_expr(e.expr, g);
    const auto& truth = t2.column(t2.attr_index(e.goal.name));
    std::vector<Value> aligned;
    for (std::size_t r = 0; r < t2.num_rows(); ++r) {
        auto it = rows.find(key_of(t2, r, rcols));
        aligned.push_back(it == rows.end() ? Value(Missing{}) : pred[it->second]);
    }
    return match_fraction(aligned, truth);
}

}  // namespace

double addition_validity(const Explanation& e, const Table& t, const Table& t2, const AttributeMatch& m) {
    if (!t2.has_attr(e.goal.name)) throw Error("goal '" + e.goal.name + "' is not in " + t2.name());
    if (!e.group_by.empty()) return grouped_validity(e, t, t2, m);
    std::vector<std::string> ids;
    std::vector<Value> truth;
    const auto& goal = t2.column(t2.attr_index(e.goal.name));
    for (std::size_t r = 0; r < t2.num_rows(); ++r) {
        if (t.find_row(t2.tuple_ids()[r])) {
            ids.push_back(t2.tuple_ids()[r]);
            truth.push_back(goal[r]);
        }
    }
    Table sub = t.select_ids(ids);
    auto pred = eval_expr(e.expr, sub);
    return match_fraction(pred, truth);
}

double validity(const Explanation& e, const Table& t, const Table& t2, const AttributeMatch& m) {
    switch (e.goal.kind) {
        case GoalKind::AttrAdd: return addition_validity(e, t, t2, m);
        case GoalKind::AttrRemove: {
            const auto* mk = std::get_if<MarkerExpr>(&e.expr.node);
            return mk && removal_holds(*mk, e.goal.name, t, t2, m) ? 1.0 : 0.0;
        }
        case GoalKind::TupleRemove: {
            auto flags = rule_flags(e, t, m);
            std::vector<std::string> targets = e.covers;
            if (targets.empty()) targets = compute_change_sets(t, t2, m).left_delta_tuples;
            if (targets.empty()) return 1.0;
            std::size_t ok = 0;
            for (const auto& id : targets) {
                auto r = t.find_row(id);
                if (r && !t2.find_row(id) && flags[*r]) ++ok;
            }
            return static_cast<double>(ok) / static_cast<double>(targets.size());
        }
        case GoalKind::TupleAdd: return bootstrap_score(t, t2, m).value_or(1.0);
    }
    return 0.0;
}

std::optional<double> generalizability(const Explanation& e, const Table& hold_t, const Table& hold_t2,
                                       const AttributeMatch& m) {
    try {
        switch (e.goal.kind) {
            case GoalKind::AttrAdd:
                if (!hold_t2.has_attr(e.goal.name)) return std::nullopt;
                return addition_validity(e, hold_t, hold_t2, m);
            case GoalKind::AttrRemove: {
                if (!hold_t.has_attr(e.goal.name)) return std::nullopt;
                const auto* mk = std::get_if<MarkerExpr>(&e.expr.node);
                return mk && removal_holds(*mk, e.goal.name, hold_t, hold_t2, m) ? 1.0 : 0.0;
            }
            case GoalKind::TupleRemove: {
                auto cs = compute_change_sets(hold_t, hold_t2, m);
                if (cs.left_delta_tuples.empty()) return std::nullopt;
                Explanation probe = e;
                probe.covers.clear();
                return validity(probe, hold_t, hold_t2, m);
            }
            case GoalKind::TupleAdd: return bootstrap_score(hold_t, hold_t2, m);
        }
    } catch (const Error&) {
        return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace vdx
