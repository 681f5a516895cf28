#include "vdx/encode.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <map>
#include <set>
#include <unordered_map>

#include "vdx/kernels.hpp"

namespace vdx {

namespace {

bool usable_key(const Attribute& a) {
    return a.type == SemanticType::Categorical || a.categorical_compatible;
}

std::string row_key(const Table& t, std::size_t row, std::span<const std::size_t> cols) {
    std::string k;
    for (auto c : cols) {
        k += t.at(row, c).key();
        k.push_back('\x1f');
    }
    return k;
}

}  // namespace

FeatureSet one_hot(const Table& t, const std::string& attr, std::size_t max_categories) {
    const auto& a = t.attribute(t.attr_index(attr));
    if (a.type == SemanticType::Numeric && !a.categorical_compatible) {
        throw Error("one-hot encoding of numeric attribute '" + attr + "'");
    }
    std::set<Value> cats;
    for (const auto& v : t.column(attr)) {
        if (!v.is_missing()) cats.insert(v);
    }
    if (cats.size() > max_categories) {
        throw Error("attribute '" + attr + "' has " + std::to_string(cats.size()) + " categories, more than " +
                    std::to_string(max_categories));
    }
    std::vector<FeaturePtr> feats;
    for (const auto& c : cats) feats.push_back(onehot_feature(attr, c));
    return make_feature_set(t, feats);
}

LinearExpr onehot_linear(const Table& t, const std::string& attr, std::span<const Value> goal,
                         std::size_t max_categories) {
    auto fs = one_hot(t, attr, max_categories);
    LinearExpr e;
    for (const auto& c : fs) {
        double sum = 0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < goal.size(); ++i) {
            auto y = goal[i].as_number();
            if (c.values[i] == 1.0 && y) {
                sum += *y;
                ++n;
            }
        }
        if (n == 0) continue;
        double k = sum / static_cast<double>(n);
        if (std::abs(k) < 1e-12) continue;
        e.terms.push_back({k, c.feature});
    }
    return e;
}

FeatureSet groupby_features(const Table& t, std::span<const std::string> by, std::span<const std::string> of) {
    if (by.empty()) throw Error("group-by needs at least one key attribute");
    for (const auto& b : by) t.attr_index(b);
    std::vector<FeaturePtr> feats;
    std::vector<std::string> keys(by.begin(), by.end());
    for (const auto& o : of) {
        if (t.attribute(t.attr_index(o)).type != SemanticType::Numeric) {
            throw Error("group-by aggregate over non-numeric attribute '" + o + "'");
        }
        for (auto op : {AggOp::Sum, AggOp::Mean, AggOp::Max, AggOp::Min, AggOp::Count}) {
            feats.push_back(group_feature(op, attr_feature(o), keys));
        }
    }
    return make_feature_set(t, feats);
}

Table group_table(const Table& t, std::span<const std::string> key) {
    std::vector<std::size_t> kcols;
    for (const auto& k : key) kcols.push_back(t.attr_index(k));
    std::map<std::vector<Value>, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
        std::vector<Value> k;
        for (auto c : kcols) k.push_back(t.at(r, c));
        groups[k].push_back(r);
    }
    std::vector<Attribute> attrs;
    std::vector<std::vector<Value>> cols;
    for (auto c : kcols) {
        attrs.push_back(t.attribute(c));
        cols.emplace_back();
    }
    std::vector<std::uint32_t> gid(t.num_rows(), 0);
    std::vector<std::string> ids;
    std::uint32_t g = 0;
    for (const auto& [k, rows] : groups) {
        std::string id;
        for (std::size_t i = 0; i < k.size(); ++i) {
            id += (i ? "|" : "") + k[i].to_string();
            cols[i].push_back(k[i]);
        }
        ids.push_back(id);
        for (auto r : rows) gid[r] = g;
        ++g;
    }
    for (std::size_t c = 0; c < t.num_cols(); ++c) {
        const auto& a = t.attribute(c);
        if (a.type != SemanticType::Numeric) continue;
        if (std::find(kcols.begin(), kcols.end(), c) != kcols.end()) continue;
        std::vector<double> x;
        for (const auto& v : t.column(c)) x.push_back(v.as_number().value_or(std::nan("")));
        auto stats = kernels::group_stats(gid, x, groups.size(), kernels::default_exec());
        for (auto op : {AggOp::Sum, AggOp::Mean, AggOp::Max, AggOp::Min, AggOp::Count}) {
            std::vector<Value> col;
            for (const auto& s : stats) {
                if (s.count == 0 && op != AggOp::Count) {
                    col.emplace_back();
                    continue;
                }
                switch (op) {
                    case AggOp::Sum: col.emplace_back(s.sum); break;
                    case AggOp::Mean: col.emplace_back(s.mean()); break;
                    case AggOp::Max: col.emplace_back(s.max); break;
                    case AggOp::Min: col.emplace_back(s.min); break;
                    case AggOp::Count: col.emplace_back(static_cast<double>(s.count)); break;
                }
            }
            attrs.push_back({std::string(to_string(op)) + "(" + a.id + ")", SemanticType::Numeric, false});
            cols.push_back(std::move(col));
        }
    }
    Table out(t.name() + "/grouped", std::move(attrs), std::move(ids), std::move(cols));
    return infer_types(out);
}

std::vector<ReshapeResult> explain_reshape(const Table& t, const Table& t2, const AttributeMatch& m,
                                           const ReshapeConfig& cfg) {
    std::vector<std::string> singles;
    for (const auto& a : t.attributes()) {
        if (usable_key(a) && m.right_of(a.id)) singles.push_back(a.id);
    }
    if (singles.empty()) throw Error("no categorical key candidates for reshaping '" + t.name() + "'");
    std::vector<std::vector<std::string>> keys;
    for (const auto& s : singles) keys.push_back({s});
    if (cfg.max_key_size >= 2) {
        for (std::size_t i = 0; i < singles.size(); ++i) {
            for (std::size_t j = i + 1; j < singles.size(); ++j) keys.push_back({singles[i], singles[j]});
        }
    }

    std::vector<ReshapeResult> out;
    for (const auto& key : keys) {
        Table g = group_table(t, key);
        std::vector<std::size_t> gcols, t2cols;
        std::vector<std::string> key2;
        for (std::size_t i = 0; i < key.size(); ++i) {
            gcols.push_back(i);
            key2.push_back(*m.right_of(key[i]));
            t2cols.push_back(t2.attr_index(key2.back()));
        }
        std::unordered_map<std::string, std::size_t> by_key;
        for (std::size_t r = 0; r < g.num_rows(); ++r) by_key.emplace(row_key(g, r, gcols), r);
        std::vector<std::size_t> aligned;
        std::vector<std::size_t> t2rows;
        for (std::size_t r = 0; r < t2.num_rows(); ++r) {
            auto it = by_key.find(row_key(t2, r, t2cols));
            if (it == by_key.end()) continue;
            aligned.push_back(it->second);
            t2rows.push_back(r);
        }
        if (t2.num_rows() == 0 || aligned.size() * 2 < t2.num_rows()) continue;
        if (std::set<std::size_t>(aligned.begin(), aligned.end()).size() != aligned.size()) continue;
        const double coverage = static_cast<double>(aligned.size()) / static_cast<double>(t2.num_rows());
        Table ga = g.select_rows(aligned);

        ReshapeResult res;
        res.key = key;
        std::vector<std::string> agg_attrs;
        for (std::size_t c = key.size(); c < ga.num_cols(); ++c) agg_attrs.push_back(ga.attribute(c).id);
        for (const auto& a2 : t2.attributes()) {
            if (std::find(key2.begin(), key2.end(), a2.id) != key2.end()) continue;
            if (a2.type != SemanticType::Numeric) continue;
            std::vector<Value> goal;
            for (auto r : t2rows) goal.push_back(t2.at(r, t2.attr_index(a2.id)));
            std::optional<ReshapeColumn> best;
            auto offer = [&](const LinearExpr& e, double v) {
                double scaled = v * coverage;
                if (!best || scaled > best->validity + 1e-12 ||
                    (std::abs(scaled - best->validity) <= 1e-12 &&
                     explainability(Expr{e}).total > explainability(best->expr).total)) {
                    best = ReshapeColumn{a2.id, {}, Expr{e}, scaled};
                }
            };
            auto fs = base_features(ga, agg_attrs);
            for (const auto& c : single_feature_fits(ga, fs, goal, "reshape")) offer(c.expr, c.validity);
            if (!best || best->validity < cfg.early_stop_validity) {
                NumericConfig nc;
                for (const auto& c : explain_numeric(ga, agg_attrs, goal, nc).candidates) offer(c.expr, c.validity);
            }
            if (!best) continue;
            std::set<std::string> origin(key.begin(), key.end());
            for (const auto& a : expr_attrs(best->expr)) {
                auto open = a.find('('), close = a.rfind(')');
                origin.insert(open != std::string::npos && close != std::string::npos
                                  ? a.substr(open + 1, close - open - 1)
                                  : a);
            }
            best->origin.assign(origin.begin(), origin.end());
            res.columns.push_back(std::move(*best));
        }
        if (res.columns.empty()) {
            res.validity = coverage;
        } else {
            double s = 0;
            for (const auto& c : res.columns) s += c.validity;
            res.validity = s / static_cast<double>(res.columns.size());
        }
        out.push_back(std::move(res));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ReshapeResult& a, const ReshapeResult& b) { return a.validity > b.validity; });
    return out;
}

}  // namespace vdx
