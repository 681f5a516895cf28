#include "vdx/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include <omp.h>

#include "vdx/encode.hpp"
#include "vdx/fd.hpp"
#include "vdx/horizontal.hpp"
#include "vdx/removal.hpp"
#include "vdx/textual.hpp"
#include "vdx/tree.hpp"

namespace vdx {

void EngineConfig::validate() const {
    auto unit = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw Error(std::string(name) + " must be in [0, 1]");
    };
    unit(early_stop_validity, "early_stop_validity");
    unit(early_stop_explainability, "early_stop_explainability");
    unit(idiopathic_threshold, "idiopathic_threshold");
    unit(alpha, "alpha");
    unit(categorical_ratio, "categorical_ratio");
    unit(overlap, "overlap");
    if (poly_degree < 2 || poly_degree > 6) throw Error("poly_degree must be in [2, 6]");
    if (!(timeout_per_goal_s > 0)) throw Error("timeout_per_goal_s must be positive");
    if (!(z_threshold > 0)) throw Error("z_threshold must be positive");
    if (!(iqr_factor > 0)) throw Error("iqr_factor must be positive");
    if (max_determinant < 1 || max_determinant > 6) throw Error("max_determinant must be in [1, 6]");
    if (max_origins < 1) throw Error("max_origins must be at least 1");
    if (tree_max_depth < 1) throw Error("tree_max_depth must be at least 1");
    if (tree_min_leaf < 1) throw Error("tree_min_leaf must be at least 1");
    if (text_sample_rows < 1) throw Error("text_sample_rows must be at least 1");
    if (categorical_max < 1) throw Error("categorical_max must be at least 1");
}

bool Report::partial() const {
    return std::any_of(goals.begin(), goals.end(), [](const GoalReport& g) { return !g.error.empty(); });
}

namespace {

// Coefficients other than 1 and a nonzero intercept, i.e. constants fitted to the data.
std::size_t fitted_constants(const Expr& e) {
    const auto* l = std::get_if<LinearExpr>(&e.node);
    if (!l) return 0;
    std::size_t n = l->intercept != 0.0 ? 1 : 0;
    for (const auto& term : l->terms) n += term.coef != 1.0 ? 1 : 0;
    return n;
}

}  // namespace

std::size_t select_explanation(std::span<const Explanation> cands) {
    if (cands.empty()) throw Error("no candidate explanations to select from");
    std::vector<std::string> keys;
    keys.reserve(cands.size());
    for (const auto& c : cands) keys.push_back(serialize_expr(c.expr));
    std::size_t best = 0;
    for (std::size_t i = 1; i < cands.size(); ++i) {
        const auto& a = cands[i].scores;
        const auto& b = cands[best].scores;
        if (a.validity != b.validity) {
            if (a.validity > b.validity) best = i;
            continue;
        }
        if (a.total_explainability != b.total_explainability) {
            if (a.total_explainability > b.total_explainability) best = i;
            continue;
        }
        if (a.conciseness != b.conciseness) {
            if (a.conciseness > b.conciseness) best = i;
            continue;
        }
        if (cands[i].origin.size() != cands[best].origin.size()) {
            if (cands[i].origin.size() < cands[best].origin.size()) best = i;
            continue;
        }
        std::size_t ki = fitted_constants(cands[i].expr), kb = fitted_constants(cands[best].expr);
        if (ki != kb) {
            if (ki < kb) best = i;
            continue;
        }
        if (keys[i] != keys[best]) {
            if (keys[i] < keys[best]) best = i;
            continue;
        }
        if (cands[i].producer < cands[best].producer) best = i;
    }
    return best;
}

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Grouping by a key that identifies every tuple only copies values around.
bool key_repeats(const Table& t, std::span<const std::string> key) {
    std::vector<std::size_t> idx;
    for (const auto& a : key) idx.push_back(t.attr_index(a));
    std::vector<Value> ids(t.tuple_ids().begin(), t.tuple_ids().end());
    return !fd_holds(t, idx, ids);
}

bool is_constant(std::span<const Value> goal) {
    if (goal.empty()) return false;
    for (const auto& v : goal) {
        if (!(v == goal[0])) return false;
    }
    return !goal[0].is_missing();
}

void finalize(GoalReport& g, const EngineConfig& cfg, bool first_wins = false) {
    if (g.candidates.empty()) {
        g.idiopathic = true;
        return;
    }
    g.winner = first_wins ? 0 : select_explanation(g.candidates);
    g.idiopathic = g.candidates[*g.winner].scores.validity < cfg.idiopathic_threshold;
}

}  // namespace

GoalReport explain_added_attribute(const Table& t, const std::string& goal_name, std::span<const Value> goal,
                                   const EngineConfig& cfg) {
    const auto t0 = Clock::now();
    const auto deadline =
        t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.timeout_per_goal_s));
    GoalReport rep;
    rep.goal = {goal_name, "right", GoalKind::AttrAdd};
    if (goal.size() != t.num_rows()) throw Error("goal '" + goal_name + "' misaligned with " + t.name());

    std::set<std::string> seen;
    bool stop = false;
    auto add = [&](const Expr& e, const std::string& producer, const std::string& note = {}) {
        if (stop) return;
        auto key = serialize_expr(e);
        if (!seen.insert(key).second) return;
        Explanation x;
        x.goal = rep.goal;
        x.expr = e;
        x.origin = expr_attrs(e);
        x.producer = producer;
        x.note = note;
        x.scores = score_card(e, match_fraction(eval_expr(e, t), goal));
        if (x.scores.validity >= cfg.early_stop_validity &&
            x.scores.total_explainability >= cfg.early_stop_explainability) {
            stop = true;
        }
        rep.candidates.push_back(std::move(x));
    };
    auto timed_out = [&] { return Clock::now() > deadline; };

    TypeInferenceConfig tc{cfg.categorical_ratio, cfg.categorical_max};
    bool compat = false;
    const SemanticType gtype = infer_column_type(goal, tc, &compat);

    if (is_constant(goal)) {
        if (gtype == SemanticType::Numeric) {
            LinearExpr e;
            e.intercept = *goal[0].as_number();
            add(Expr{e}, "constant");
        } else {
            add(Expr{TreeExpr{make_leaf(goal[0])}}, "constant");
        }
    }

    NumericConfig nc;
    nc.poly_degree = cfg.poly_degree;
    nc.early_stop_validity = cfg.early_stop_validity;
    nc.early_stop_explainability = cfg.early_stop_explainability;
    TreeConfig tcfg{cfg.tree_max_depth, cfg.tree_min_leaf, cfg.categorical_max};
    TextConfig xc;
    xc.sample_rows = cfg.text_sample_rows;

    auto try_origin = [&](const std::vector<std::string>& origin) {
        std::vector<std::string> nums, cats, texts, cats_any;
        for (const auto& a : origin) {
            const auto& at = t.attribute(t.attr_index(a));
            switch (at.type) {
                case SemanticType::Numeric:
                    nums.push_back(a);
                    if (at.categorical_compatible) cats_any.push_back(a);
                    break;
                case SemanticType::Categorical:
                    cats.push_back(a);
                    cats_any.push_back(a);
                    break;
                case SemanticType::Textual: texts.push_back(a); break;
            }
        }
        const bool numeric_goal = gtype == SemanticType::Numeric;
        const bool categorical_goal = gtype == SemanticType::Categorical || compat;
        if (numeric_goal && !nums.empty() && !stop && !timed_out()) {
            auto run = explain_numeric(t, nums, goal, nc, deadline);
            for (const auto& c : run.candidates) add(Expr{c.expr}, c.producer);
        }
        if (numeric_goal && !cats_any.empty() && key_repeats(t, cats_any) && !stop && !timed_out()) {
            std::vector<std::string> of;
            for (const auto& a : t.attributes()) {
                if (a.type == SemanticType::Numeric &&
                    std::find(cats_any.begin(), cats_any.end(), a.id) == cats_any.end()) {
                    of.push_back(a.id);
                }
            }
            if (!of.empty()) {
                auto fs = groupby_features(t, cats_any, of);
                for (const auto& c : single_feature_fits(t, fs, goal, "encode:groupby")) add(Expr{c.expr}, c.producer);
            }
            if (cats_any.size() == 1 && !stop) {
                try {
                    add(Expr{onehot_linear(t, cats_any[0], goal, cfg.categorical_max)}, "encode:onehot");
                } catch (const Error&) {
                }
            } else if (!stop) {
                FeatureSet fs = base_features(t, nums);
                for (const auto& a : cats_any) {
                    try {
                        auto oh = one_hot(t, a, cfg.categorical_max);
                        fs.insert(fs.end(), oh.begin(), oh.end());
                    } catch (const Error&) {
                    }
                }
                try {
                    add(Expr{fit_regressor(t, fs, goal, nc).first}, "encode:onehot");
                } catch (const Error&) {
                }
            }
        }
        if (numeric_goal && !texts.empty()) {
            for (const auto& x : texts) {
                if (stop || timed_out()) break;
                for (const auto& c : synthesize_text_to_numeric(t, x, goal)) add(Expr{c.expr}, c.producer);
            }
        }
        if (categorical_goal && (!nums.empty() || !cats.empty()) && !stop && !timed_out()) {
            std::vector<std::string> feats = nums;
            feats.insert(feats.end(), cats.begin(), cats.end());
            for (const auto& c : explain_categorical(t, feats, goal, tcfg, cfg.early_stop_validity)) {
                add(Expr{c.expr}, c.producer);
            }
        }
        if (categorical_goal && !texts.empty()) {
            for (const auto& x : texts) {
                if (stop || timed_out()) break;
                for (const auto& c : synthesize_text_to_categorical(t, x, goal, tcfg)) add(Expr{c.expr}, c.producer);
            }
        }
        // Text labels may come straight out of a string program even when
        // there are few of them.
        const bool text_labels =
            std::any_of(goal.begin(), goal.end(), [](const Value& v) { return v.is_text(); });
        const bool perfect = std::any_of(rep.candidates.begin(), rep.candidates.end(),
                                         [](const Explanation& e) { return e.scores.validity >= 1.0; });
        if (gtype == SemanticType::Categorical && text_labels && !texts.empty() && !perfect && !stop &&
            !timed_out()) {
            auto r = synthesize_text_to_text(t, texts, goal, xc, deadline);
            add(Expr{r.prog}, "textual:program", r.timed_out ? "timed out" : "");
        }
        if (gtype == SemanticType::Textual) {
            if (!texts.empty() && !stop && !timed_out()) {
                auto r = synthesize_text_to_text(t, texts, goal, xc, deadline);
                add(Expr{r.prog}, "textual:program", r.timed_out ? "timed out" : "");
            } else if (texts.empty() && !stop && !timed_out()) {
                std::vector<std::string> feats = nums;
                feats.insert(feats.end(), cats.begin(), cats.end());
                for (const auto& c : explain_categorical(t, feats, goal, tcfg, cfg.early_stop_validity)) {
                    add(Expr{c.expr}, c.producer);
                }
            }
        }
    };

    FdConfig fc;
    fc.max_size = cfg.max_determinant;
    auto ranked = rank_origins(discover_determinants(t, goal, fc));
    std::set<std::vector<std::string>> tried;
    for (const auto& cand : ranked) {
        if (stop || timed_out() || rep.origins_tried >= cfg.max_origins) break;
        ++rep.origins_tried;
        tried.insert(cand.attrs);
        try_origin(cand.attrs);
    }
    // Superset fallback: every attribute at once when no ranked origin gave a
    // fully valid candidate.
    bool perfect = std::any_of(rep.candidates.begin(), rep.candidates.end(),
                               [](const Explanation& e) { return e.scores.validity >= 1.0; });
    if (!stop && !perfect && !timed_out()) {
        std::vector<std::string> all = t.attr_ids();
        if (!all.empty() && !tried.contains(all)) {
            ++rep.origins_tried;
            try_origin(all);
        }
    }
    rep.early_stopped = stop;
    finalize(rep, cfg);
    rep.seconds = seconds_since(t0);
    return rep;
}

Report explain_versions(const Table& t, const Table& t2, const AttributeMatch& m, const EngineConfig& cfg,
                        std::optional<Holdout> holdout) {
    cfg.validate();
    validate_match(m, t, t2);
    const auto t0 = Clock::now();
    Report rep;
    rep.left_name = t.name();
    rep.right_name = t2.name();
    rep.changes = compute_change_sets(t, t2, m);
    const auto& cs = rep.changes;

    auto gen_of = [&](const Explanation& e) -> std::optional<double> {
        if (!holdout) return std::nullopt;
        return generalizability(e, holdout->left, holdout->right, m);
    };
    const int threads = cfg.workers > 0 ? static_cast<int>(cfg.workers) : omp_get_max_threads();

    rep.reshape = cs.left_nabla_tuples.empty() && t.num_rows() > 0 && t2.num_rows() > 0 &&
                  t.num_rows() != t2.num_rows();
    if (rep.reshape) {
        std::vector<ReshapeResult> results;
        std::string error;
        try {
            ReshapeConfig rc;
            rc.early_stop_validity = cfg.early_stop_validity;
            rc.max_categories = cfg.categorical_max;
            results = explain_reshape(t, t2, m, rc);
        } catch (const Error& e) {
            error = e.what();
        }
        for (const auto& goal : cs.right_delta_attrs) {
            GoalReport g;
            g.goal = {goal, "right", GoalKind::AttrAdd};
            g.error = error;
            for (const auto& r : results) {
                for (const auto& c : r.columns) {
                    if (c.goal != goal) continue;
                    Explanation x;
                    x.goal = g.goal;
                    x.origin = c.origin;
                    x.expr = c.expr;
                    x.producer = "reshape";
                    x.group_by = r.key;
                    std::string by;
                    for (std::size_t i = 0; i < r.key.size(); ++i) by += (i ? ", " : "") + r.key[i];
                    x.note = "group by " + by;
                    x.scores = score_card(c.expr, c.validity);
                    g.candidates.push_back(std::move(x));
                }
            }
            ++g.origins_tried;
            for (auto& c : g.candidates) c.scores.generalizability = gen_of(c);
            finalize(g, cfg);
            rep.goals.push_back(std::move(g));
        }
        rep.seconds = seconds_since(t0);
        return rep;
    }

    // Matched tuples, in T order, with the new columns aligned to them.
    Table tm = t.select_ids(cs.left_nabla_tuples);
    Table t2m = t2.select_ids(cs.left_nabla_tuples);
    Table tm_matched = project(tm, [&] {
        std::vector<std::string> a;
        for (const auto& attr : tm.attributes()) {
            if (m.right_of(attr.id)) a.push_back(attr.id);
        }
        return a;
    }());

    std::vector<GoalReport> adds(cs.right_delta_attrs.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::size_t i = 0; i < adds.size(); ++i) {
        const auto& name = cs.right_delta_attrs[i];
        try {
            const auto& goal = t2m.column(t2m.attr_index(name));
            adds[i] = explain_added_attribute(tm_matched, name, goal, cfg);
            for (auto& c : adds[i].candidates) c.scores.generalizability = gen_of(c);
        } catch (const std::exception& e) {
            adds[i].goal = {name, "right", GoalKind::AttrAdd};
            adds[i].error = e.what();
            adds[i].idiopathic = true;
        }
    }
    for (auto& g : adds) rep.goals.push_back(std::move(g));

    RemovalConfig rc{cfg.alpha, cfg.overlap, cfg.max_determinant};
    for (const auto& name : cs.left_delta_attrs) {
        GoalReport g;
        g.goal = {name, "left", GoalKind::AttrRemove};
        const auto g0 = Clock::now();
        try {
            g.candidates = explain_attr_removal(name, t, t2, m, rc);
            for (auto& c : g.candidates) c.scores.generalizability = gen_of(c);
        } catch (const std::exception& e) {
            g.error = e.what();
        }
        finalize(g, cfg, true);
        g.seconds = seconds_since(g0);
        rep.goals.push_back(std::move(g));
    }

    if (!cs.left_delta_tuples.empty()) {
        const auto g0 = Clock::now();
        HorizontalConfig hc;
        hc.z_threshold = cfg.z_threshold;
        hc.iqr_factor = cfg.iqr_factor;
        hc.tree = TreeConfig{cfg.tree_max_depth, cfg.tree_min_leaf, cfg.categorical_max};
        auto res = explain_tuple_removal(cs, t, t2, m, hc);
        TupleSummary sum;
        sum.validity = res.validity;
        sum.false_removals = res.false_removals;
        sum.idiopathic = res.idiopathic;
        if (holdout) {
            auto hcs = compute_change_sets(holdout->left, holdout->right, m);
            if (!hcs.left_delta_tuples.empty()) {
                sum.generalizability = reconstruct_and_score(res.rules, holdout->left, holdout->right, m).validity;
            }
        }
        for (auto& rule : res.rules) {
            GoalReport g;
            g.goal = rule.goal;
            rule.scores.generalizability = sum.generalizability;
            g.candidates.push_back(rule);
            finalize(g, cfg, true);
            g.seconds = seconds_since(g0);
            rep.goals.push_back(std::move(g));
        }
        if (!res.idiopathic.empty()) {
            GoalReport g;
            std::string ids;
            for (std::size_t i = 0; i < res.idiopathic.size(); ++i) ids += (i ? "," : "") + res.idiopathic[i];
            g.goal = {ids, "left", GoalKind::TupleRemove};
            g.idiopathic = true;
            rep.goals.push_back(std::move(g));
        }
        rep.tuple_removal = sum;
    }

    if (!cs.right_delta_tuples.empty()) {
        auto res = explain_tuple_addition(cs, t, t2, m);
        TupleSummary sum;
        sum.validity = res.validity;
        sum.idiopathic = res.idiopathic;
        if (holdout) sum.generalizability = bootstrap_score(holdout->left, holdout->right, m);
        for (auto& rule : res.rules) {
            GoalReport g;
            g.goal = rule.goal;
            rule.scores.generalizability = sum.generalizability;
            g.candidates.push_back(rule);
            finalize(g, cfg, true);
            rep.goals.push_back(std::move(g));
        }
        if (!res.idiopathic.empty()) {
            GoalReport g;
            std::string ids;
            for (std::size_t i = 0; i < res.idiopathic.size(); ++i) ids += (i ? "," : "") + res.idiopathic[i];
            g.goal = {ids, "right", GoalKind::TupleAdd};
            g.idiopathic = true;
            rep.goals.push_back(std::move(g));
        }
        rep.tuple_addition = sum;
    }
    rep.seconds = seconds_since(t0);
    return rep;
}

}  // namespace vdx
