#include "vdx/textual.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <unordered_set>

#include "vdx/kernels.hpp"
#include "vdx/textops.hpp"

namespace vdx {

namespace {

using text::Field;
using text::Fields;

struct State {
    std::vector<Fields> rows;
    std::vector<StringOp> prog;
    double h = 0;
};

struct Node {
    double f;
    std::size_t order;
    std::size_t state;
    bool operator>(const Node& o) const { return f != o.f ? f > o.f : order > o.order; }
};

std::string state_key(const std::vector<Fields>& rows) {
    std::string k;
    for (const auto& r : rows) {
        for (const auto& f : r) {
            if (f) {
                k += *f;
            } else {
                k.push_back('\x1c');
            }
            k.push_back('\x1e');
        }
        k.push_back('\x1d');
    }
    return k;
}

double field_distance(const Field& f, const Field& g) {
    if (!f || !g) return f.has_value() == g.has_value() ? 0.0 : 1.0;
    std::size_t denom = std::max<std::size_t>({f->size(), g->size(), 1});
    return static_cast<double>(text::edit_distance(*f, *g)) / static_cast<double>(denom);
}

double heuristic(const std::vector<Fields>& rows, const std::vector<Field>& goal) {
    if (rows.empty()) return 0;
    const std::size_t nf = rows[0].size();
    double best = 1e300;
    for (std::size_t c = 0; c < nf; ++c) {
        double s = 0;
        for (std::size_t r = 0; r < rows.size(); ++r) s += field_distance(rows[r][c], goal[r]);
        best = std::min(best, s / static_cast<double>(rows.size()));
    }
    return static_cast<double>(nf - 1) + best;
}

double sample_agreement(const std::vector<Fields>& rows, const std::vector<Field>& goal) {
    if (rows.empty()) return 1.0;
    if (rows[0].size() != 1) return 0.0;
    std::size_t ok = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) ok += rows[r][0] == goal[r] ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(rows.size());
}

Field as_field(const Value& v) { return v.is_missing() ? Field{} : Field{v.to_string()}; }

double prog_validity(const StringProg& p, const Table& t, std::span<const Value> goal) {
    if (goal.empty()) return 1.0;
    auto pred = eval_expr(Expr{p}, t);
    return static_cast<double>(kernels::count_matches(pred, goal, kernels::default_exec())) /
           static_cast<double>(goal.size());
}

const std::vector<StrOpKind>& unary_ops() {
    static const std::vector<StrOpKind> ops = {
        StrOpKind::Lower,     StrOpKind::Upper,           StrOpKind::StripPunct, StrOpKind::StripDigits,
        StrOpKind::StripHtml, StrOpKind::RemoveStopwords, StrOpKind::Stem,       StrOpKind::Trim,
    };
    return ops;
}

// Fixed-position substrings that cut the goal out of the first field.
std::vector<std::pair<std::size_t, std::size_t>> mine_substrings(const std::vector<Fields>& rows,
                                                                 const std::vector<Field>& goal) {
    std::optional<std::pair<std::size_t, std::size_t>> common;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].empty() || !rows[r][0] || !goal[r] || goal[r]->empty()) continue;
        auto pos = rows[r][0]->find(*goal[r]);
        if (pos == std::string::npos) return {};
        std::pair<std::size_t, std::size_t> span{pos, pos + goal[r]->size()};
        if (common && *common != span) return {};
        common = span;
    }
    if (!common) return {};
    return {*common};
}

}  // namespace

std::vector<std::string> mine_delimiters(std::span<const std::string> origin_values,
                                         std::span<const std::string> goal_values) {
    std::vector<std::string> out;
    auto add = [&](std::string d) {
        if (d.empty()) return;
        if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(std::move(d));
    };
    for (std::size_t i = 0; i < origin_values.size() && i < goal_values.size(); ++i) {
        const auto& o = origin_values[i];
        const auto& g = goal_values[i];
        if (g.empty()) continue;
        auto pos = o.find(g);
        if (pos == std::string::npos) continue;
        if (pos >= 1) add(o.substr(pos - 1, 1));
        if (pos + g.size() < o.size()) add(o.substr(pos + g.size(), 1));
        if (pos >= 2) add(o.substr(pos - 2, 2));
        if (pos + g.size() + 1 < o.size()) add(o.substr(pos + g.size(), 2));
    }
    std::set<char> present;
    for (const auto& o : origin_values) {
        for (char c : o) {
            if (c == ' ' || text::is_punct(c)) present.insert(c);
        }
    }
    for (char c : present) add(std::string(1, c));
    if (out.size() > 16) out.resize(16);
    return out;
}

ProgCandidate synthesize_text_to_text(const Table& t, std::span<const std::string> origin,
                                      std::span<const Value> goal, const TextConfig& cfg,
                                      std::optional<Clock::time_point> deadline) {
    if (origin.empty()) throw Error("string program needs at least one input attribute");
    if (goal.size() != t.num_rows()) throw Error("goal column misaligned with table '" + t.name() + "'");
    const auto start = Clock::now();
    auto limit = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.timeout_s));
    if (deadline && *deadline < limit) limit = *deadline;

    std::vector<std::size_t> cols;
    for (const auto& a : origin) cols.push_back(t.attr_index(a));

    // Sample: rows spread evenly over the table.
    std::vector<std::size_t> sample;
    const std::size_t n = t.num_rows();
    if (n <= cfg.sample_rows) {
        for (std::size_t i = 0; i < n; ++i) sample.push_back(i);
    } else {
        for (std::size_t k = 0; k < cfg.sample_rows; ++k) sample.push_back(k * n / cfg.sample_rows);
    }

    State init;
    std::vector<Field> goal_s;
    std::vector<std::string> origin_text, goal_text;
    for (auto r : sample) {
        Fields f;
        for (auto c : cols) f.push_back(as_field(t.at(r, c)));
        if (f[0]) origin_text.push_back(*f[0]);
        goal_s.push_back(as_field(goal[r]));
        goal_text.push_back(goal_s.back().value_or(""));
        if (!f[0]) origin_text.push_back("");
        init.rows.push_back(std::move(f));
    }
    auto delims = mine_delimiters(origin_text, goal_text);
    auto substrings = mine_substrings(init.rows, goal_s);

    StringProg base;
    base.inputs.assign(origin.begin(), origin.end());

    ProgCandidate best;
    best.prog = base;
    best.validity = -1;
    double best_sample = -1;
    std::size_t best_len = 0;

    std::vector<State> states;
    std::priority_queue<Node, std::vector<Node>, std::greater<>> open;
    std::unordered_set<std::string> seen;
    std::size_t order = 0;

    auto push = [&](State s) {
        auto key = state_key(s.rows);
        if (!seen.insert(std::move(key)).second) return;
        s.h = heuristic(s.rows, goal_s);
        double f = static_cast<double>(s.prog.size()) + cfg.heuristic_weight * s.h;
        states.push_back(std::move(s));
        open.push({f, order++, states.size() - 1});
    };
    push(init);

    std::size_t expansions = 0;
    bool timed_out = false;
    while (!open.empty()) {
        if (expansions >= cfg.max_expansions || Clock::now() > limit) {
            timed_out = true;
            break;
        }
        Node node = open.top();
        open.pop();
        ++expansions;
        const State cur = states[node.state];
        double agree = sample_agreement(cur.rows, goal_s);
        if (agree > best_sample || (agree == best_sample && agree >= 0 && cur.prog.size() < best_len)) {
            best_sample = agree;
            best_len = cur.prog.size();
            StringProg p = base;
            p.steps = cur.prog;
            best.prog = p;
        }
        if (agree == 1.0) {
            StringProg p = base;
            p.steps = cur.prog;
            double v = prog_validity(p, t, goal);
            if (v == 1.0) {
                best.prog = p;
                best.validity = 1.0;
                best.expansions = expansions;
                return best;
            }
        }
        if (cur.prog.size() >= cfg.max_program_length) continue;

        const std::size_t nf = cur.rows.empty() ? 0 : cur.rows[0].size();
        auto expand = [&](const StringOp& op) {
            State next;
            next.rows = cur.rows;
            for (auto& r : next.rows) {
                if (!text::apply_op(op, r)) return;
            }
            next.prog = cur.prog;
            next.prog.push_back(op);
            push(std::move(next));
        };
        for (std::size_t c = 0; nf >= 2 && c < nf; ++c) {
            StringOp op;
            op.kind = StrOpKind::Drop;
            op.col = c;
            expand(op);
        }
        for (std::size_t c = 0; c < nf; ++c) {
            if (nf < 6) {
                for (const auto& d : delims) {
                    bool occurs = std::any_of(cur.rows.begin(), cur.rows.end(), [&](const Fields& r) {
                        return r[c] && r[c]->find(d) != std::string::npos;
                    });
                    if (!occurs) continue;
                    StringOp op;
                    op.kind = StrOpKind::Split;
                    op.col = c;
                    op.arg = d;
                    expand(op);
                }
            }
            for (auto k : unary_ops()) {
                StringOp op;
                op.kind = k;
                op.col = c;
                expand(op);
            }
            if (c + 1 < nf) {
                for (const char* sep : {"", " "}) {
                    for (bool swapped : {false, true}) {
                        StringOp op;
                        op.kind = StrOpKind::Merge;
                        op.col = swapped ? c + 1 : c;
                        op.col2 = swapped ? c : c + 1;
                        op.arg = sep;
                        expand(op);
                    }
                }
            }
            if (c == 0 && cur.prog.empty()) {
                for (auto [i, j] : substrings) {
                    StringOp op;
                    op.kind = StrOpKind::Substring;
                    op.col = 0;
                    op.i = i;
                    op.j = j;
                    expand(op);
                }
            }
        }
    }
    if (!open.empty()) timed_out = true;
    best.validity = prog_validity(best.prog, t, goal);
    best.timed_out = timed_out;
    best.expansions = expansions;
    return best;
}

FeatureSet text_numeric_features(const Table& t, const std::string& attr) {
    std::vector<FeaturePtr> feats = {text_feature(TextOp::Len, attr)};
    for (const auto& p : text::pattern_library()) feats.push_back(text_feature(TextOp::CountPat, attr, p));
    return make_feature_set(t, feats);
}

FeatureSet text_indicator_features(const Table& t, const std::string& attr) {
    std::vector<FeaturePtr> feats;
    for (const auto& p : text::pattern_library()) feats.push_back(text_feature(TextOp::ContainsPat, attr, p));
    return make_feature_set(t, feats);
}

std::vector<NumericCandidate> synthesize_text_to_numeric(const Table& t, const std::string& attr,
                                                         std::span<const Value> goal) {
    auto fs = text_numeric_features(t, attr);
    FeatureSet varying;
    for (auto& c : fs) {
        bool constant = std::all_of(c.values.begin(), c.values.end(), [&](double v) {
            return v == c.values[0] || (std::isnan(v) && std::isnan(c.values[0]));
        });
        // Keep len even when constant so that degenerate goals still get an answer.
        if (!constant || c.feature->text == TextOp::Len) varying.push_back(std::move(c));
    }
    return single_feature_fits(t, varying, goal, "textual:pattern");
}

std::vector<TreeCandidate> synthesize_text_to_categorical(const Table& t, const std::string& attr,
                                                          std::span<const Value> goal, const TreeConfig& cfg) {
    std::vector<TreeCandidate> out;
    auto ind = text_indicator_features(t, attr);
    FeatureSet useful;
    for (auto& c : ind) {
        bool constant = std::all_of(c.values.begin(), c.values.end(), [&](double v) { return v == c.values[0]; });
        if (!constant) useful.push_back(std::move(c));
    }
    // A single indicator used directly, in either polarity.
    std::set<Value> classes;
    for (const auto& v : goal) {
        if (!v.is_missing()) classes.insert(v);
    }
    if (classes.size() == 2) {
        std::optional<TreeCandidate> best;
        for (const auto& c : useful) {
            for (int flip = 0; flip < 2; ++flip) {
                auto lo = *classes.begin(), hi = *classes.rbegin();
                if (flip) std::swap(lo, hi);
                TreeExpr e{make_le(c.feature, 0.5, make_leaf(lo), make_leaf(hi))};
                double v = tree_validity(e, t, goal);
                if (!best || v > best->validity) best = TreeCandidate{e, "textual:contains", v};
            }
        }
        if (best) out.push_back(*best);
        if (best && best->validity == 1.0) return out;
    }
    auto numeric = text_numeric_features(t, attr);
    FeatureSet all = useful;
    for (auto& c : numeric) all.push_back(std::move(c));
    if (all.empty()) {
        all = text_numeric_features(t, attr);
        all.resize(1);
    }
    auto tree = fit_tree(all, goal, cfg);
    out.push_back({tree, "textual:tree", tree_validity(tree, t, goal)});
    return out;
}

}  // namespace vdx
