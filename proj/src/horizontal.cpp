#include "vdx/horizontal.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "vdx/encode.hpp"
#include "vdx/numeric.hpp"

namespace vdx {

namespace {

std::vector<std::string> matched_left(const Table& t, const AttributeMatch& m) {
    std::vector<std::string> out;
    for (const auto& a : t.attributes()) {
        if (m.right_of(a.id)) out.push_back(a.id);
    }
    return out;
}

Table matched_projection(const Table& t, const AttributeMatch& m) {
    auto attrs = matched_left(t, m);
    return project(t, attrs);
}

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + ids[i];
    return out;
}

Explanation tuple_rule(Expr expr, std::string producer, std::vector<std::string> covers, GoalKind kind,
                       double validity) {
    Explanation e;
    e.goal = {join_ids(covers), kind == GoalKind::TupleRemove ? "left" : "right", kind};
    e.expr = std::move(expr);
    e.origin = expr_attrs(e.expr);
    if (const auto* mk = std::get_if<MarkerExpr>(&e.expr.node)) {
        e.origin.clear();
        if (mk->kind == MarkerKind::OutlierZ || mk->kind == MarkerKind::OutlierIqr) e.origin = {mk->refs.at(0)};
    }
    e.producer = std::move(producer);
    e.covers = std::move(covers);
    e.scores = score_card(e.expr, validity);
    return e;
}

std::string projected_key(const Table& t, std::size_t row, std::span<const std::size_t> cols) {
    std::string k;
    for (auto c : cols) {
        k += t.at(row, c).key();
        k.push_back('\x1f');
    }
    return k;
}

}  // namespace

std::vector<bool> rule_flags(const Explanation& rule, const Table& t, const AttributeMatch& m) {
    Table tp = matched_projection(t, m);
    auto vals = eval_expr(rule.expr, tp);
    std::vector<bool> out(vals.size(), false);
    const bool predicate = std::holds_alternative<PredicateExpr>(rule.expr.node);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (predicate) {
            out[i] = vals[i].is_text() && vals[i].text() == kRemove;
        } else {
            out[i] = vals[i].is_bool() && vals[i].boolean();
        }
    }
    return out;
}

TupleRemovalResult explain_tuple_removal(const ChangeSets& cs, const Table& t, const Table& t2,
                                         const AttributeMatch& m, const HorizontalConfig& cfg) {
    TupleRemovalResult res;
    if (cs.left_delta_tuples.empty()) {
        res.validity = 1.0;
        return res;
    }
    Table tp = matched_projection(t, m);
    const std::size_t n = tp.num_rows();
    std::vector<char> removed(n, 0), pending(n, 0);
    for (const auto& id : cs.left_delta_tuples) {
        auto r = tp.find_row(id);
        if (!r) continue;
        removed[*r] = 1;
        pending[*r] = 1;
    }

    auto try_rule = [&](Expr expr, const std::string& producer) {
        auto vals = eval_expr(expr, tp);
        std::vector<std::string> covers;
        for (std::size_t i = 0; i < n; ++i) {
            bool flag = vals[i].is_bool() && vals[i].boolean();
            if (!flag) continue;
            if (!removed[i]) return;  // would remove a surviving tuple
            if (pending[i]) covers.push_back(tp.tuple_ids()[i]);
        }
        if (covers.empty()) return;
        for (const auto& id : covers) pending[*tp.find_row(id)] = 0;
        res.rules.push_back(tuple_rule(std::move(expr), producer, std::move(covers), GoalKind::TupleRemove, 1.0));
    };

    try_rule(Expr{MarkerExpr{MarkerKind::ContainsMissing, {}}}, "horizontal:contains-missing");
    try_rule(Expr{MarkerExpr{MarkerKind::DuplicateOf, {}}}, "horizontal:duplicate-of");
    for (const auto& a : tp.attributes()) {
        if (a.type != SemanticType::Numeric) continue;
        try_rule(Expr{MarkerExpr{MarkerKind::OutlierZ, {a.id, format_number(cfg.z_threshold)}}}, "horizontal:outlier-z");
    }
    for (const auto& a : tp.attributes()) {
        if (a.type != SemanticType::Numeric) continue;
        try_rule(Expr{MarkerExpr{MarkerKind::OutlierIqr, {a.id, format_number(cfg.iqr_factor)}}},
                 "horizontal:outlier-iqr");
    }

    std::vector<std::string> remaining;
    for (std::size_t i = 0; i < n; ++i) {
        if (pending[i]) remaining.push_back(tp.tuple_ids()[i]);
    }
    if (!remaining.empty()) {
        std::vector<std::string> numeric;
        for (const auto& a : tp.attributes()) {
            if (a.type == SemanticType::Numeric) numeric.push_back(a.id);
        }
        FeatureSet fs = base_features(tp, numeric);
        for (const auto& a : tp.attributes()) {
            if (a.type == SemanticType::Numeric) continue;
            try {
                auto oh = one_hot(tp, a.id, cfg.tree.max_categories);
                fs.insert(fs.end(), oh.begin(), oh.end());
            } catch (const Error&) {
            }
        }
        if (!fs.empty()) {
            std::vector<Value> labels(n);
            for (std::size_t i = 0; i < n; ++i) {
                if (pending[i]) {
                    labels[i] = Value(std::string(kRemove));
                } else if (!removed[i]) {
                    labels[i] = Value(std::string(kMaintain));
                }
            }
            auto tree = fit_tree(fs, labels, cfg.tree);
            PredicateExpr pred{tree.root};
            auto vals = eval_expr(Expr{pred}, tp);
            std::vector<std::string> covers;
            std::size_t false_flags = 0;
            for (std::size_t i = 0; i < n; ++i) {
                bool flag = vals[i].is_text() && vals[i].text() == kRemove;
                if (!flag) continue;
                if (pending[i]) {
                    covers.push_back(tp.tuple_ids()[i]);
                    pending[i] = 0;
                } else if (!removed[i]) {
                    ++false_flags;
                }
            }
            if (!covers.empty()) {
                double v = static_cast<double>(covers.size()) / static_cast<double>(covers.size() + false_flags);
                res.rules.push_back(
                    tuple_rule(Expr{pred}, "horizontal:predicate", std::move(covers), GoalKind::TupleRemove, v));
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (pending[i]) res.idiopathic.push_back(tp.tuple_ids()[i]);
    }
    auto rec = reconstruct_and_score(res.rules, t, t2, m);
    res.validity = rec.validity;
    res.false_removals = rec.false_removals;
    return res;
}

Reconstruction reconstruct_and_score(std::span<const Explanation> rules, const Table& t, const Table& t2,
                                     const AttributeMatch& m) {
    Reconstruction rec;
    const std::size_t n = t.num_rows();
    std::vector<bool> flagged(n, false);
    for (const auto& r : rules) {
        auto f = rule_flags(r, t, m);
        for (std::size_t i = 0; i < n; ++i) flagged[i] = flagged[i] || f[i];
    }
    std::size_t gone = 0, hit = 0;
    for (std::size_t i = 0; i < n; ++i) {
        bool truly = !t2.find_row(t.tuple_ids()[i]).has_value();
        gone += truly ? 1 : 0;
        if (flagged[i]) {
            rec.removed.push_back(t.tuple_ids()[i]);
            if (truly) {
                ++hit;
            } else {
                ++rec.false_removals;
            }
        }
    }
    rec.validity = gone == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(gone);
    return rec;
}

TupleAdditionResult explain_tuple_addition(const ChangeSets& cs, const Table& t, const Table& t2,
                                           const AttributeMatch& m) {
    TupleAdditionResult res;
    if (cs.right_delta_tuples.empty()) {
        res.validity = 1.0;
        return res;
    }
    std::vector<std::size_t> lcols, rcols;
    for (const auto& [l, r] : m.pairs) {
        lcols.push_back(t.attr_index(l));
        rcols.push_back(t2.attr_index(r));
    }
    std::unordered_map<std::string, std::size_t> first;
    for (std::size_t r = 0; r < t.num_rows(); ++r) first.emplace(projected_key(t, r, lcols), r);
    std::vector<std::string> covered;
    std::vector<std::string> sources;
    for (const auto& id : cs.right_delta_tuples) {
        auto row2 = t2.find_row(id);
        if (!row2) continue;
        auto it = first.find(projected_key(t2, *row2, rcols));
        if (it == first.end()) {
            res.idiopathic.push_back(id);
            continue;
        }
        covered.push_back(id);
        sources.push_back(t.tuple_ids()[it->second]);
    }
    if (!covered.empty()) {
        auto e = tuple_rule(Expr{MarkerExpr{MarkerKind::BootstrappedFrom, {}}}, "horizontal:bootstrapped-from",
                            covered, GoalKind::TupleAdd, 1.0);
        std::set<std::string> uniq(sources.begin(), sources.end());
        e.note = "copies of " + std::to_string(uniq.size()) + " tuple(s) of " + t.name();
        res.rules.push_back(std::move(e));
    }
    res.validity = static_cast<double>(covered.size()) / static_cast<double>(cs.right_delta_tuples.size());
    return res;
}

std::optional<double> bootstrap_score(const Table& t, const Table& t2, const AttributeMatch& m) {
    auto cs = compute_change_sets(t, t2, m);
    if (cs.right_delta_tuples.empty()) return std::nullopt;
    return explain_tuple_addition(cs, t, t2, m).validity;
}

}  // namespace vdx
