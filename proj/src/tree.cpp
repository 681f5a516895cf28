#include "vdx/tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "vdx/encode.hpp"
#include "vdx/kernels.hpp"

namespace vdx {

double round_threshold(double lo, double hi) {
    if (!(lo < hi)) return lo;
    double mid = lo + (hi - lo) / 2;
    double top = std::floor(std::log10(std::max(std::abs(lo), std::abs(hi)))) + 1;
    for (int p = static_cast<int>(top); p >= -12; --p) {
        double step = std::pow(10.0, p);
        double first = std::ceil(lo / step);
        double last = std::ceil(hi / step) - 1;  // largest multiple strictly below hi
        if (first > last) continue;
        double k = std::clamp(std::round(mid / step), first, last);
        double v = k * step;
        // Clean up representation error, e.g. 0.30000000000000004.
        double cleaned = std::stod(format_sig(v, 12));
        if (cleaned >= lo && cleaned < hi) return cleaned;
        if (v >= lo && v < hi) return v;
    }
    return mid;
}

namespace {

struct Builder {
    const FeatureSet& fs;
    const std::vector<std::size_t>& label_of;  // class index per row
    const std::vector<Value>& classes;
    const TreeConfig& cfg;

    double gini(const std::vector<std::size_t>& counts, std::size_t n) const {
        if (n == 0) return 0;
        double s = 0;
        for (auto c : counts) {
            double p = static_cast<double>(c) / static_cast<double>(n);
            s += p * p;
        }
        return 1 - s;
    }

    std::vector<std::size_t> count(const std::vector<std::size_t>& rows) const {
        std::vector<std::size_t> c(classes.size(), 0);
        for (auto r : rows) ++c[label_of[r]];
        return c;
    }

    Value majority(const std::vector<std::size_t>& counts) const {
        std::size_t best = 0;
        for (std::size_t k = 1; k < counts.size(); ++k) {
            if (counts[k] > counts[best]) best = k;
        }
        return classes[best];
    }

    TreeNodePtr build(const std::vector<std::size_t>& rows, std::size_t depth) const {
        auto counts = count(rows);
        Value label = majority(counts);
        std::size_t nonzero = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
        if (nonzero <= 1 || depth >= cfg.max_depth || rows.size() < 2 * cfg.min_leaf) return make_leaf(label);

        const double parent = gini(counts, rows.size());
        double best_score = parent - 1e-12;
        std::optional<std::size_t> best_f;
        double best_thr = 0;
        std::vector<std::pair<double, std::size_t>> vals;
        for (std::size_t f = 0; f < fs.size(); ++f) {
            vals.clear();
            bool missing = false;
            for (auto r : rows) {
                double v = fs[f].values[r];
                if (std::isnan(v)) {
                    missing = true;
                    break;
                }
                vals.emplace_back(v, label_of[r]);
            }
            if (missing) continue;
            std::sort(vals.begin(), vals.end());
            std::vector<std::size_t> left(classes.size(), 0);
            std::vector<std::size_t> right = counts;
            const std::size_t n = vals.size();
            for (std::size_t i = 0; i + 1 < n; ++i) {
                ++left[vals[i].second];
                --right[vals[i].second];
                if (vals[i].first == vals[i + 1].first) continue;
                std::size_t nl = i + 1, nr = n - nl;
                if (nl < cfg.min_leaf || nr < cfg.min_leaf) continue;
                double score = (static_cast<double>(nl) * gini(left, nl) + static_cast<double>(nr) * gini(right, nr)) /
                               static_cast<double>(n);
                double thr = round_threshold(vals[i].first, vals[i + 1].first);
                // Strictly better wins; equal scores keep the earlier feature
                // and, within a feature, the lower threshold.
                if (score < best_score - 1e-12) {
                    best_score = score;
                    best_f = f;
                    best_thr = thr;
                }
            }
        }
        if (!best_f) return make_leaf(label);
        std::vector<std::size_t> yes, no;
        for (auto r : rows) (fs[*best_f].values[r] <= best_thr ? yes : no).push_back(r);
        auto y = build(yes, depth + 1);
        auto n = build(no, depth + 1);
        if (y->leaf && n->leaf && y->label == n->label) return make_leaf(y->label);
        return make_le(fs[*best_f].feature, best_thr, std::move(y), std::move(n));
    }
};

}  // namespace

TreeExpr fit_tree(const FeatureSet& features, std::span<const Value> labels, const TreeConfig& cfg) {
    if (features.empty()) throw Error("decision tree needs at least one feature");
    for (const auto& f : features) {
        if (f.values.size() != labels.size()) throw Error("feature column misaligned with goal");
    }
    std::map<Value, std::size_t> index;
    for (const auto& v : labels) {
        if (!v.is_missing()) index.emplace(v, 0);
    }
    std::vector<Value> classes;
    for (auto& [v, k] : index) {
        k = classes.size();
        classes.push_back(v);
    }
    if (classes.empty()) return {make_leaf(Value())};
    std::vector<std::size_t> label_of(labels.size(), 0);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].is_missing()) continue;
        label_of[i] = index.at(labels[i]);
        rows.push_back(i);
    }
    Builder b{features, label_of, classes, cfg};
    return {b.build(rows, 0)};
}

double tree_validity(const TreeExpr& e, const Table& t, std::span<const Value> goal) {
    if (goal.empty()) return 1.0;
    auto pred = eval_expr(Expr{e}, t);
    return static_cast<double>(kernels::count_matches(pred, goal, kernels::default_exec())) /
           static_cast<double>(goal.size());
}

std::vector<TreeCandidate> explain_categorical(const Table& t, std::span<const std::string> origin,
                                               std::span<const Value> goal, const TreeConfig& cfg,
                                               double early_stop_validity) {
    if (goal.size() != t.num_rows()) throw Error("goal column misaligned with table '" + t.name() + "'");
    FeatureSet fs = base_features(t, origin);
    for (const auto& a : origin) {
        if (t.attribute(t.attr_index(a)).type == SemanticType::Numeric) continue;
        try {
            auto oh = one_hot(t, a, cfg.max_categories);
            fs.insert(fs.end(), oh.begin(), oh.end());
        } catch (const Error&) {
        }
    }
    std::vector<TreeCandidate> out;
    if (fs.empty()) return out;
    auto tree = fit_tree(fs, goal, cfg);
    out.push_back({tree, "categorical:tree", tree_validity(tree, t, goal)});
    if (out.back().validity >= early_stop_validity) return out;

    std::vector<std::string> numeric;
    for (const auto& a : origin) {
        if (t.attribute(t.attr_index(a)).type == SemanticType::Numeric) numeric.push_back(a);
    }
    if (numeric.size() >= 2) {
        auto ext = extend_features(t, numeric, {Extension::Inter});
        auto t2 = fit_tree(ext, goal, cfg);
        out.push_back({t2, "categorical:tree:inter", tree_validity(t2, t, goal)});
    }
    return out;
}

}  // namespace vdx
