#include "vdx/removal.hpp"

#include <algorithm>
#include <map>

#include "vdx/fd.hpp"

namespace vdx {

namespace {

struct Aligned {
    std::vector<std::size_t> left, right;  // rows of t and t2 sharing an id
};

Aligned align(const Table& t, const Table& t2) {
    Aligned a;
    for (std::size_t r = 0; r < t2.num_rows(); ++r) {
        if (auto l = t.find_row(t2.tuple_ids()[r])) {
            a.left.push_back(*l);
            a.right.push_back(r);
        }
    }
    return a;
}

std::vector<Value> gather(const Table& t, std::size_t col, std::span<const std::size_t> rows) {
    std::vector<Value> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(t.at(r, col));
    return out;
}

double missing_ratio(const Table& t, std::size_t col) {
    if (t.num_rows() == 0) return 0.0;
    const auto& c = t.column(col);
    auto n = std::count_if(c.begin(), c.end(), [](const Value& v) { return v.is_missing(); });
    return static_cast<double>(n) / static_cast<double>(t.num_rows());
}

bool all_match(std::span<const Value> a, std::span<const Value> b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!values_match(a[i], b[i])) return false;
    }
    return true;
}

bool is_superkey(const Table& t, std::span<const std::size_t> attrs) {
    std::vector<Value> ids(t.tuple_ids().begin(), t.tuple_ids().end());
    return fd_holds(t, attrs, ids);
}

Explanation make(const std::string& goal, MarkerKind kind, std::vector<std::string> refs) {
    Explanation e;
    e.goal = {goal, "left", GoalKind::AttrRemove};
    MarkerExpr mk{kind, refs};
    if (kind != MarkerKind::ContainsMissing) e.origin = refs;
    e.expr = Expr{mk};
    e.producer = "removal:" + std::string(to_string(kind));
    e.scores = score_card(e.expr, 1.0);
    return e;
}

}  // namespace

double multiset_jaccard(std::span<const Value> a, std::span<const Value> b) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& v : a) ++counts[v.key()].first;
    for (const auto& v : b) ++counts[v.key()].second;
    std::size_t inter = 0, uni = 0;
    for (const auto& [k, c] : counts) {
        inter += std::min(c.first, c.second);
        uni += std::max(c.first, c.second);
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

bool removal_holds(const MarkerExpr& marker, const std::string& goal_attr, const Table& t, const Table& t2,
                   const AttributeMatch& m, const RemovalConfig& cfg) {
    (void)m;
    auto gcol = t.find_attr(goal_attr);
    if (!gcol) return false;
    if (marker.kind == MarkerKind::ContainsMissing) return missing_ratio(t, *gcol) > cfg.alpha;
    for (const auto& r : marker.refs) {
        if (!t2.has_attr(r)) return false;
    }
    auto al = align(t, t2);
    auto goal = gather(t, *gcol, al.left);
    switch (marker.kind) {
        case MarkerKind::DuplicateOf: {
            if (marker.refs.size() != 1) return false;
            return all_match(gather(t2, t2.attr_index(marker.refs[0]), al.right), goal);
        }
        case MarkerKind::OverlapsWith: {
            if (marker.refs.size() != 1) return false;
            return multiset_jaccard(gather(t2, t2.attr_index(marker.refs[0]), al.right), goal) >= cfg.overlap;
        }
        case MarkerKind::DeterminedBy: {
            if (marker.refs.empty()) return false;
            Table sub = t2.select_rows(al.right);
            std::vector<std::size_t> idx;
            for (const auto& r : marker.refs) idx.push_back(sub.attr_index(r));
            return fd_holds(sub, idx, goal) && !is_superkey(sub, idx);
        }
        default: return false;
    }
}

std::vector<Explanation> explain_attr_removal(const std::string& goal_attr, const Table& t, const Table& t2,
                                              const AttributeMatch& m, const RemovalConfig& cfg) {
    auto gcol = t.find_attr(goal_attr);
    if (!gcol) throw Error("attribute '" + goal_attr + "' is not in " + t.name());
    if (m.right_of(goal_attr)) throw Error("attribute '" + goal_attr + "' was not removed");

    std::vector<Explanation> out;
    if (missing_ratio(t, *gcol) > cfg.alpha) out.push_back(make(goal_attr, MarkerKind::ContainsMissing, {goal_attr}));

    auto al = align(t, t2);
    auto goal = gather(t, *gcol, al.left);
    std::vector<std::string> duplicates;
    for (std::size_t c = 0; c < t2.num_cols(); ++c) {
        const auto& id = t2.attribute(c).id;
        if (!al.left.empty() && all_match(gather(t2, c, al.right), goal)) {
            duplicates.push_back(id);
            out.push_back(make(goal_attr, MarkerKind::DuplicateOf, {id}));
        }
    }
    for (std::size_t c = 0; c < t2.num_cols(); ++c) {
        const auto& id = t2.attribute(c).id;
        if (std::find(duplicates.begin(), duplicates.end(), id) != duplicates.end()) continue;
        if (al.left.empty()) break;
        if (multiset_jaccard(gather(t2, c, al.right), goal) >= cfg.overlap) {
            out.push_back(make(goal_attr, MarkerKind::OverlapsWith, {id}));
        }
    }
    if (!al.left.empty()) {
        Table sub = t2.select_rows(al.right);
        FdConfig fc;
        fc.max_size = cfg.max_determinant;
        auto cands = rank_origins(discover_determinants(sub, goal, fc));
        for (const auto& cand : cands) {
            std::vector<std::size_t> idx;
            for (const auto& a : cand.attrs) idx.push_back(sub.attr_index(a));
            if (is_superkey(sub, idx)) continue;
            if (cand.attrs.size() == 1 &&
                std::find(duplicates.begin(), duplicates.end(), cand.attrs[0]) != duplicates.end()) {
                continue;
            }
            out.push_back(make(goal_attr, MarkerKind::DeterminedBy, cand.attrs));
            break;
        }
    }
    return out;
}

}  // namespace vdx
