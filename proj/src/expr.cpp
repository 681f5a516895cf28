#include "vdx/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "vdx/kernels.hpp"
#include "vdx/textops.hpp"

namespace vdx {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::shared_ptr<Feature> blank(FeatureKind k) {
    auto f = std::make_shared<Feature>();
    f->kind = k;
    return f;
}
}  // namespace

// --- construction ----------------------------------------------------------

FeaturePtr attr_feature(std::string attr) {
    auto f = blank(FeatureKind::Attr);
    f->attr = std::move(attr);
    return f;
}

FeaturePtr pow_feature(FeaturePtr x, int exponent) {
    auto f = blank(FeatureKind::Unary);
    f->unary = UnaryOp::Pow;
    f->exponent = exponent;
    f->args = {std::move(x)};
    return f;
}

FeaturePtr unary_feature(UnaryOp op, FeaturePtr x) {
    auto f = blank(FeatureKind::Unary);
    f->unary = op;
    f->args = {std::move(x)};
    return f;
}

FeaturePtr binary_feature(BinaryOp op, FeaturePtr a, FeaturePtr b) {
    auto f = blank(FeatureKind::Binary);
    f->binary = op;
    f->args = {std::move(a), std::move(b)};
    return f;
}

FeaturePtr agg_feature(AggOp op, FeaturePtr x) {
    auto f = blank(FeatureKind::Agg);
    f->agg = op;
    f->args = {std::move(x)};
    return f;
}

FeaturePtr group_feature(AggOp op, FeaturePtr of, std::vector<std::string> by) {
    auto f = blank(FeatureKind::GroupAgg);
    f->agg = op;
    f->args = {std::move(of)};
    f->by = std::move(by);
    return f;
}

FeaturePtr onehot_feature(std::string attr, Value category) {
    auto f = blank(FeatureKind::OneHot);
    f->attr = std::move(attr);
    f->category = std::move(category);
    return f;
}

FeaturePtr text_feature(TextOp op, std::string attr, std::string pattern) {
    auto f = blank(FeatureKind::Text);
    f->text = op;
    f->attr = std::move(attr);
    f->pattern = std::move(pattern);
    return f;
}

TreeNodePtr make_leaf(Value label) {
    auto n = std::make_shared<TreeNode>();
    n->leaf = true;
    n->label = std::move(label);
    return n;
}

TreeNodePtr make_le(FeaturePtr feature, double threshold, TreeNodePtr yes, TreeNodePtr no) {
    auto n = std::make_shared<TreeNode>();
    n->leaf = false;
    n->test = TreeNode::Test::Le;
    n->feature = std::move(feature);
    n->threshold = threshold;
    n->yes = std::move(yes);
    n->no = std::move(no);
    return n;
}

TreeNodePtr make_eq(std::string attr, Value category, TreeNodePtr yes, TreeNodePtr no) {
    auto n = std::make_shared<TreeNode>();
    n->leaf = false;
    n->test = TreeNode::Test::Eq;
    n->attr = std::move(attr);
    n->category = std::move(category);
    n->yes = std::move(yes);
    n->no = std::move(no);
    return n;
}

std::string_view to_string(UnaryOp op) {
    switch (op) {
        case UnaryOp::Pow: return "pow";
        case UnaryOp::Log: return "log";
        case UnaryOp::Sqrt: return "sqrt";
        case UnaryOp::Recip: return "recip";
        case UnaryOp::Exp: return "exp";
    }
    return "?";
}

std::string_view to_string(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "add";
        case BinaryOp::Sub: return "sub";
        case BinaryOp::Mul: return "mul";
        case BinaryOp::Div: return "div";
    }
    return "?";
}

std::string_view to_string(AggOp op) {
    switch (op) {
        case AggOp::Sum: return "sum";
        case AggOp::Mean: return "mean";
        case AggOp::Max: return "max";
        case AggOp::Min: return "min";
        case AggOp::Count: return "count";
    }
    return "?";
}

std::string_view to_string(StrOpKind k) {
    switch (k) {
        case StrOpKind::Split: return "split";
        case StrOpKind::Merge: return "merge";
        case StrOpKind::Drop: return "drop";
        case StrOpKind::Substring: return "substring";
        case StrOpKind::Lower: return "lower";
        case StrOpKind::Upper: return "upper";
        case StrOpKind::StripPunct: return "strip_punct";
        case StrOpKind::StripDigits: return "strip_digits";
        case StrOpKind::StripHtml: return "strip_html";
        case StrOpKind::RemoveStopwords: return "remove_stopwords";
        case StrOpKind::Stem: return "stem";
        case StrOpKind::Trim: return "trim";
    }
    return "?";
}

std::string_view to_string(MarkerKind k) {
    switch (k) {
        case MarkerKind::ContainsMissing: return "contains-missing";
        case MarkerKind::DuplicateOf: return "duplicate-of";
        case MarkerKind::OverlapsWith: return "overlaps-with";
        case MarkerKind::DeterminedBy: return "determined-by";
        case MarkerKind::OutlierZ: return "outlier-z";
        case MarkerKind::OutlierIqr: return "outlier-iqr";
        case MarkerKind::BootstrappedFrom: return "bootstrapped-from";
    }
    return "?";
}

MarkerKind marker_kind_from(std::string_view s) {
    for (auto k : {MarkerKind::ContainsMissing, MarkerKind::DuplicateOf, MarkerKind::OverlapsWith,
                   MarkerKind::DeterminedBy, MarkerKind::OutlierZ, MarkerKind::OutlierIqr,
                   MarkerKind::BootstrappedFrom}) {
        if (to_string(k) == s) return k;
    }
    throw Error("unknown marker kind '" + std::string(s) + "'");
}

bool feature_equal(const Feature& a, const Feature& b) { return serialize_feature(a) == serialize_feature(b); }

namespace {
void collect_attrs(const Feature& f, std::set<std::string>& out) {
    if (!f.attr.empty()) out.insert(f.attr);
    for (const auto& b : f.by) out.insert(b);
    for (const auto& a : f.args) collect_attrs(*a, out);
}

void collect_tree_attrs(const TreeNode& n, std::set<std::string>& out) {
    if (n.leaf) return;
    if (n.test == TreeNode::Test::Le) {
        collect_attrs(*n.feature, out);
    } else {
        out.insert(n.attr);
    }
    collect_tree_attrs(*n.yes, out);
    collect_tree_attrs(*n.no, out);
}
}  // namespace

std::vector<std::string> feature_attrs(const Feature& f) {
    std::set<std::string> s;
    collect_attrs(f, s);
    return {s.begin(), s.end()};
}

std::size_t feature_depth(const Feature& f) {
    std::size_t d = 0;
    for (const auto& a : f.args) d = std::max(d, feature_depth(*a));
    return f.kind == FeatureKind::Attr ? 0 : d + 1;
}

std::vector<std::string> expr_attrs(const Expr& e) {
    std::set<std::string> s;
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, LinearExpr>) {
                for (const auto& t : x.terms) collect_attrs(*t.feature, s);
            } else if constexpr (std::is_same_v<T, TreeExpr> || std::is_same_v<T, PredicateExpr>) {
                if (x.root) collect_tree_attrs(*x.root, s);
            } else if constexpr (std::is_same_v<T, StringProg>) {
                s.insert(x.inputs.begin(), x.inputs.end());
            } else {
                s.insert(x.refs.begin(), x.refs.end());
            }
        },
        e.node);
    return {s.begin(), s.end()};
}

bool expr_equal(const Expr& a, const Expr& b) { return serialize_expr(a) == serialize_expr(b); }

// --- evaluation ------------------------------------------------------------

namespace {

double apply_unary(const Feature& f, double x) {
    if (std::isnan(x)) return kNaN;
    double y = kNaN;
    switch (f.unary) {
        case UnaryOp::Pow: y = std::pow(x, f.exponent); break;
        case UnaryOp::Log: y = x > 0 ? std::log(x) : kNaN; break;
        case UnaryOp::Sqrt: y = x >= 0 ? std::sqrt(x) : kNaN; break;
        case UnaryOp::Recip: y = x != 0 ? 1.0 / x : kNaN; break;
        case UnaryOp::Exp: y = std::exp(x); break;
    }
    return std::isfinite(y) ? y : kNaN;
}

double apply_binary(BinaryOp op, double a, double b) {
    if (std::isnan(a) || std::isnan(b)) return kNaN;
    double y = kNaN;
    switch (op) {
        case BinaryOp::Add: y = a + b; break;
        case BinaryOp::Sub: y = a - b; break;
        case BinaryOp::Mul: y = a * b; break;
        case BinaryOp::Div: y = b != 0 ? a / b : kNaN; break;
    }
    return std::isfinite(y) ? y : kNaN;
}

double pick(const kernels::GroupStats& g, AggOp op) {
    if (op == AggOp::Count) return static_cast<double>(g.count);
    if (g.count == 0) return kNaN;
    switch (op) {
        case AggOp::Sum: return g.sum;
        case AggOp::Mean: return g.mean();
        case AggOp::Max: return g.max;
        case AggOp::Min: return g.min;
        case AggOp::Count: break;
    }
    return kNaN;
}

}  // namespace

std::vector<double> eval_feature(const Feature& f, const Table& t) {
    const std::size_t n = t.num_rows();
    std::vector<double> out(n, kNaN);
    switch (f.kind) {
        case FeatureKind::Attr: {
            const auto& col = t.column(t.attr_index(f.attr));
            for (std::size_t i = 0; i < n; ++i) {
                if (auto v = col[i].as_number()) out[i] = *v;
            }
            break;
        }
        case FeatureKind::Unary: {
            auto x = eval_feature(*f.args.at(0), t);
            for (std::size_t i = 0; i < n; ++i) out[i] = apply_unary(f, x[i]);
            break;
        }
        case FeatureKind::Binary: {
            auto a = eval_feature(*f.args.at(0), t);
            auto b = eval_feature(*f.args.at(1), t);
            for (std::size_t i = 0; i < n; ++i) out[i] = apply_binary(f.binary, a[i], b[i]);
            break;
        }
        case FeatureKind::Agg: {
            auto x = eval_feature(*f.args.at(0), t);
            std::vector<std::uint32_t> one(n, 0);
            auto stats = kernels::group_stats(one, x, 1, kernels::default_exec());
            std::fill(out.begin(), out.end(), pick(stats[0], f.agg));
            break;
        }
        case FeatureKind::GroupAgg: {
            auto x = eval_feature(*f.args.at(0), t);
            std::vector<std::size_t> keys;
            for (const auto& b : f.by) keys.push_back(t.attr_index(b));
            std::unordered_map<std::string, std::uint32_t> codes;
            std::vector<std::uint32_t> groups(n);
            for (std::size_t i = 0; i < n; ++i) {
                std::string k;
                for (auto c : keys) {
                    k += t.at(i, c).key();
                    k.push_back('\x1f');
                }
                groups[i] = codes.emplace(k, static_cast<std::uint32_t>(codes.size())).first->second;
            }
            auto stats = kernels::group_stats(groups, x, codes.size(), kernels::default_exec());
            for (std::size_t i = 0; i < n; ++i) out[i] = pick(stats[groups[i]], f.agg);
            break;
        }
        case FeatureKind::OneHot: {
            const auto& col = t.column(t.attr_index(f.attr));
            auto key = f.category.key();
            for (std::size_t i = 0; i < n; ++i) {
                if (!col[i].is_missing()) out[i] = col[i].key() == key ? 1.0 : 0.0;
            }
            break;
        }
        case FeatureKind::Text: {
            const auto& col = t.column(t.attr_index(f.attr));
            for (std::size_t i = 0; i < n; ++i) {
                if (col[i].is_missing()) continue;
                auto s = col[i].to_string();
                switch (f.text) {
                    case TextOp::Len: out[i] = static_cast<double>(s.size()); break;
                    case TextOp::CountPat:
                        out[i] = static_cast<double>(text::count_feature_pattern(s, f.pattern));
                        break;
                    case TextOp::ContainsPat:
                        out[i] = text::count_feature_pattern(s, f.pattern) > 0 ? 1.0 : 0.0;
                        break;
                }
            }
            break;
        }
    }
    return out;
}

namespace {

Value eval_node(const TreeNode& n, const Table& t, std::size_t row,
                std::unordered_map<const Feature*, std::vector<double>>& cache, bool predicate) {
    const TreeNode* cur = &n;
    while (!cur->leaf) {
        bool yes = false;
        if (cur->test == TreeNode::Test::Le) {
            auto it = cache.find(cur->feature.get());
            if (it == cache.end()) it = cache.emplace(cur->feature.get(), eval_feature(*cur->feature, t)).first;
            double x = it->second[row];
            if (std::isnan(x)) return predicate ? Value(std::string(kMaintain)) : Value(Missing{});
            yes = x <= cur->threshold;
        } else {
            const auto& v = t.at(row, t.attr_index(cur->attr));
            if (v.is_missing() && !cur->category.is_missing()) {
                return predicate ? Value(std::string(kMaintain)) : Value(Missing{});
            }
            yes = v.key() == cur->category.key();
        }
        cur = yes ? cur->yes.get() : cur->no.get();
    }
    return cur->label;
}

std::vector<Value> eval_tree(const TreeNodePtr& root, const Table& t, bool predicate) {
    if (!root) throw Error("tree expression without a root");
    std::unordered_map<const Feature*, std::vector<double>> cache;
    std::vector<Value> out;
    out.reserve(t.num_rows());
    for (std::size_t r = 0; r < t.num_rows(); ++r) out.push_back(eval_node(*root, t, r, cache, predicate));
    return out;
}

std::vector<std::size_t> ref_columns(const MarkerExpr& m, const Table& t, std::size_t count) {
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < std::min(count, m.refs.size()); ++i) cols.push_back(t.attr_index(m.refs[i]));
    return cols;
}

double marker_param(const MarkerExpr& m, std::size_t idx, double fallback) {
    if (m.refs.size() <= idx) return fallback;
    auto v = parse_number(m.refs[idx]);
    if (!v) throw Error("marker " + std::string(to_string(m.kind)) + ": bad parameter '" + m.refs[idx] + "'");
    return *v;
}

}  // namespace

std::vector<std::optional<std::string>> run_program(const StringProg& p,
                                                    std::vector<std::optional<std::string>> fields) {
    for (const auto& op : p.steps) {
        if (!text::apply_op(op, fields)) {
            throw Error("string op " + std::string(to_string(op.kind)) + " not applicable to " +
                        std::to_string(fields.size()) + " fields");
        }
    }
    return fields;
}

std::vector<bool> outlier_flags(std::span<const double> x, bool iqr, double param);

std::vector<Value> eval_expr(const Expr& e, const Table& t) {
    const std::size_t n = t.num_rows();
    return std::visit(
        [&](const auto& x) -> std::vector<Value> {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, LinearExpr>) {
                std::vector<double> acc(n, x.intercept);
                for (const auto& term : x.terms) {
                    auto f = eval_feature(*term.feature, t);
                    for (std::size_t i = 0; i < n; ++i) acc[i] += term.coef * f[i];
                }
                std::vector<Value> out;
                out.reserve(n);
                for (double v : acc) out.emplace_back(v);  // NaN becomes Missing
                return out;
            } else if constexpr (std::is_same_v<T, TreeExpr>) {
                return eval_tree(x.root, t, false);
            } else if constexpr (std::is_same_v<T, PredicateExpr>) {
                return eval_tree(x.root, t, true);
            } else if constexpr (std::is_same_v<T, StringProg>) {
                std::vector<std::size_t> cols;
                for (const auto& a : x.inputs) cols.push_back(t.attr_index(a));
                std::vector<Value> out;
                out.reserve(n);
                for (std::size_t r = 0; r < n; ++r) {
                    text::Fields fields;
                    for (auto c : cols) {
                        const auto& v = t.at(r, c);
                        fields.push_back(v.is_missing() ? text::Field{} : text::Field{v.to_string()});
                    }
                    bool ok = true;
                    for (const auto& op : x.steps) {
                        if (!text::apply_op(op, fields)) {
                            ok = false;
                            break;
                        }
                    }
                    if (!ok || fields.size() != 1 || !fields[0]) {
                        out.emplace_back(Missing{});
                    } else {
                        out.emplace_back(*fields[0]);
                    }
                }
                return out;
            } else {
                std::vector<Value> out;
                out.reserve(n);
                switch (x.kind) {
                    case MarkerKind::ContainsMissing: {
                        std::vector<std::size_t> cols = ref_columns(x, t, x.refs.size());
                        if (cols.empty()) {
                            for (std::size_t c = 0; c < t.num_cols(); ++c) cols.push_back(c);
                        }
                        for (std::size_t r = 0; r < n; ++r) {
                            bool any = std::any_of(cols.begin(), cols.end(),
                                                   [&](std::size_t c) { return t.at(r, c).is_missing(); });
                            out.emplace_back(any);
                        }
                        return out;
                    }
                    case MarkerKind::DuplicateOf: {
                        std::vector<std::size_t> cols = ref_columns(x, t, x.refs.size());
                        if (cols.empty()) {
                            for (std::size_t c = 0; c < t.num_cols(); ++c) cols.push_back(c);
                        }
                        std::set<std::string> seen;
                        for (std::size_t r = 0; r < n; ++r) {
                            std::string k;
                            for (auto c : cols) {
                                k += t.at(r, c).key();
                                k.push_back('\x1f');
                            }
                            out.emplace_back(!seen.insert(k).second);
                        }
                        return out;
                    }
                    case MarkerKind::OutlierZ:
                    case MarkerKind::OutlierIqr: {
                        if (x.refs.empty()) throw Error("outlier marker needs a column");
                        bool iqr = x.kind == MarkerKind::OutlierIqr;
                        double param = marker_param(x, 1, iqr ? 1.5 : 3.0);
                        auto vals = eval_feature(*attr_feature(x.refs[0]), t);
                        auto flags = outlier_flags(vals, iqr, param);
                        for (bool b : flags) out.emplace_back(b);
                        return out;
                    }
                    default:
                        throw Error("marker " + std::string(to_string(x.kind)) + " cannot be evaluated per tuple");
                }
            }
        },
        e.node);
}

// Population z-score or Tukey fences over the non-missing values.
std::vector<bool> outlier_flags(std::span<const double> x, bool iqr, double param) {
    std::vector<double> vals;
    for (double v : x) {
        if (!std::isnan(v)) vals.push_back(v);
    }
    std::vector<bool> out(x.size(), false);
    if (vals.size() < 2) return out;
    if (!iqr) {
        double mean = 0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double var = 0;
        for (double v : vals) var += (v - mean) * (v - mean);
        double sd = std::sqrt(var / static_cast<double>(vals.size()));
        if (sd == 0) return out;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!std::isnan(x[i])) out[i] = std::abs((x[i] - mean) / sd) > param;
        }
        return out;
    }
    std::sort(vals.begin(), vals.end());
    auto quantile = [&](double q) {
        double pos = q * static_cast<double>(vals.size() - 1);
        auto lo = static_cast<std::size_t>(std::floor(pos));
        auto hi = static_cast<std::size_t>(std::ceil(pos));
        return vals[lo] + (vals[hi] - vals[lo]) * (pos - static_cast<double>(lo));
    };
    double q1 = quantile(0.25), q3 = quantile(0.75);
    double spread = q3 - q1;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isnan(x[i])) out[i] = x[i] < q1 - param * spread || x[i] > q3 + param * spread;
    }
    return out;
}

// --- explainability --------------------------------------------------------

std::size_t tree_node_count(const TreeNode& n) {
    if (n.leaf) return 1;
    return 1 + tree_node_count(*n.yes) + tree_node_count(*n.no);
}

std::size_t tree_internal_count(const TreeNode& n) {
    if (n.leaf) return 0;
    return 1 + tree_internal_count(*n.yes) + tree_internal_count(*n.no);
}

namespace {
void families(const Feature& f, std::set<std::string>& out) {
    switch (f.kind) {
        case FeatureKind::Attr: break;
        case FeatureKind::Unary: out.insert(f.unary == UnaryOp::Pow ? "poly" : "math"); break;
        case FeatureKind::Binary: out.insert(f.binary == BinaryOp::Mul ? "poly" : "inter"); break;
        case FeatureKind::Agg: out.insert("agg"); break;
        case FeatureKind::GroupAgg: out.insert("groupby"); break;
        case FeatureKind::OneHot: out.insert("onehot"); break;
        case FeatureKind::Text: out.insert("text"); break;
    }
    for (const auto& a : f.args) families(*a, out);
}
}  // namespace

Explainability explainability(const Expr& e) {
    Explainability x;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, LinearExpr>) {
                x.n_components = v.terms.size() + (v.intercept != 0.0 ? 1 : 0);
                std::set<std::string> fam;
                for (const auto& t : v.terms) families(*t.feature, fam);
                x.n_chunks = 1 + fam.size();
            } else if constexpr (std::is_same_v<T, TreeExpr> || std::is_same_v<T, PredicateExpr>) {
                x.n_components = v.root ? tree_node_count(*v.root) : 1;
                x.n_chunks = v.root ? tree_internal_count(*v.root) : 1;
            } else if constexpr (std::is_same_v<T, StringProg>) {
                x.n_components = v.steps.size();
                x.n_chunks = v.steps.size() > 0 ? v.steps.size() - 1 : 1;
            }
        },
        e.node);
    x.n_components = std::max<std::size_t>(1, x.n_components);
    x.n_chunks = std::max<std::size_t>(1, x.n_chunks);
    x.conciseness = 1.0 / static_cast<double>(x.n_components);
    x.concentration = 1.0 / static_cast<double>(x.n_chunks);
    x.total = 0.5 * x.conciseness + 0.5 * x.concentration;
    return x;
}

// --- rendering -------------------------------------------------------------

std::string format_sig(double v, int digits) {
    if (v == 0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

std::string quote_string(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

namespace {

std::string pattern_label(const std::string& p) {
    if (p == text::kDigitPattern) return "digit";
    if (p.starts_with("w:")) return "'" + p.substr(2) + "'";
    return "'" + p + "'";
}

bool is_sum_like(const Feature& f) {
    return f.kind == FeatureKind::Binary && (f.binary == BinaryOp::Add || f.binary == BinaryOp::Sub);
}

std::string render_operand(const Feature& f) {
    auto s = render_feature(f);
    bool compound = f.kind == FeatureKind::Binary || (f.kind == FeatureKind::Unary && f.unary == UnaryOp::Recip);
    return compound ? "(" + s + ")" : s;
}

std::string render_value(const Value& v) {
    if (v.is_missing()) return "NaN";
    if (v.is_number()) return format_sig(v.number());
    return v.to_string();
}

}  // namespace

std::string render_feature(const Feature& f) {
    switch (f.kind) {
        case FeatureKind::Attr: return f.attr;
        case FeatureKind::Unary: {
            const auto& a = *f.args[0];
            switch (f.unary) {
                case UnaryOp::Pow:
                    if (f.exponent == 2) return render_operand(a) + "²";
                    if (f.exponent == 3) return render_operand(a) + "³";
                    return render_operand(a) + "^" + std::to_string(f.exponent);
                case UnaryOp::Recip: return "1 ÷ " + render_operand(a);
                default: return std::string(to_string(f.unary)) + "(" + render_feature(a) + ")";
            }
        }
        case FeatureKind::Binary: {
            const auto& a = *f.args[0];
            const auto& b = *f.args[1];
            switch (f.binary) {
                case BinaryOp::Add: return render_feature(a) + " + " + render_feature(b);
                case BinaryOp::Sub: return render_feature(a) + " - " + (is_sum_like(b) ? render_operand(b) : render_feature(b));
                case BinaryOp::Mul: return render_operand(a) + "·" + render_operand(b);
                case BinaryOp::Div: return render_operand(a) + " ÷ " + render_operand(b);
            }
            return "?";
        }
        case FeatureKind::Agg: return std::string(to_string(f.agg)) + "(" + render_feature(*f.args[0]) + ")";
        case FeatureKind::GroupAgg: {
            std::string by;
            for (std::size_t i = 0; i < f.by.size(); ++i) by += (i ? ", " : "") + f.by[i];
            return "(" + std::string(to_string(f.agg)) + "(" + render_feature(*f.args[0]) + ") by " + by + ")";
        }
        case FeatureKind::OneHot: return "is_" + f.category.to_string() + "?";
        case FeatureKind::Text:
            switch (f.text) {
                case TextOp::Len: return "len(" + f.attr + ")";
                case TextOp::CountPat: return "count_" + pattern_label(f.pattern) + "(" + f.attr + ")";
                case TextOp::ContainsPat: return "contains_" + pattern_label(f.pattern) + "(" + f.attr + ")";
            }
    }
    return "?";
}

namespace {

bool indicator_feature(const Feature& f) {
    return f.kind == FeatureKind::OneHot || (f.kind == FeatureKind::Text && f.text == TextOp::ContainsPat);
}

std::string render_linear(const LinearExpr& e) {
    std::string out;
    bool first = true;
    for (const auto& t : e.terms) {
        double c = t.coef;
        bool neg = c < 0;
        double a = std::abs(c);
        std::string body;
        const auto& f = *t.feature;
        double inv = a != 0 ? 1.0 / a : 0.0;
        double inv_round = std::round(inv);
        bool one = std::abs(a - 1.0) < 1e-12;
        if (one) {
            body = (f.kind == FeatureKind::GroupAgg || f.kind == FeatureKind::OneHot) ? "1·" + render_feature(f)
                                                                                      : render_feature(f);
        } else if (a < 1 && inv_round >= 2 && std::abs(inv - inv_round) <= 1e-9 * inv) {
            body = (is_sum_like(f) ? render_operand(f) : render_feature(f)) + " ÷ " + format_sig(inv_round);
        } else {
            body = format_sig(a) + "·" + (is_sum_like(f) ? render_operand(f) : render_feature(f));
        }
        if (first) {
            out += (neg ? "-" : "") + body;
        } else {
            out += (neg ? " - " : " + ") + body;
        }
        first = false;
    }
    if (e.intercept != 0 || first) {
        if (first) {
            out += format_sig(e.intercept);
        } else {
            out += (e.intercept < 0 ? " - " : " + ") + format_sig(std::abs(e.intercept));
        }
    }
    return out;
}

struct Bound {
    std::optional<double> le, gt;  // f <= le, f > gt
};

struct PathCond {
    std::vector<std::string> order;
    std::map<std::string, Bound> bounds;
    std::map<std::string, const Feature*> feats;
    std::vector<std::string> eqs;
};

std::string render_conditions(const PathCond& p) {
    std::vector<std::string> parts;
    for (const auto& key : p.order) {
        if (!p.bounds.contains(key)) {
            parts.push_back(key);
            continue;
        }
        const auto& b = p.bounds.at(key);
        const Feature* f = p.feats.at(key);
        if (indicator_feature(*f)) {
            if (b.le && *b.le < 1 && *b.le >= 0) parts.push_back("not " + key);
            if (b.gt && *b.gt >= 0 && *b.gt < 1) parts.push_back(key);
            continue;
        }
        if (b.gt && b.le) {
            parts.push_back(format_sig(*b.gt) + " < " + key + " ≤ " + format_sig(*b.le));
        } else if (b.le) {
            parts.push_back(key + " ≤ " + format_sig(*b.le));
        } else if (b.gt) {
            parts.push_back(key + " > " + format_sig(*b.gt));
        }
    }
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? " ∧ " : "") + parts[i];
    return out;
}

void collect_rules(const TreeNode& n, PathCond path, std::vector<std::pair<Value, std::string>>& rules) {
    if (n.leaf) {
        rules.emplace_back(n.label, render_conditions(path));
        return;
    }
    if (n.test == TreeNode::Test::Le) {
        auto key = render_feature(*n.feature);
        if (!path.bounds.contains(key)) path.order.push_back(key);
        path.feats[key] = n.feature.get();
        PathCond yes = path, no = path;
        auto& by = yes.bounds[key];
        by.le = by.le ? std::min(*by.le, n.threshold) : n.threshold;
        auto& bn = no.bounds[key];
        bn.gt = bn.gt ? std::max(*bn.gt, n.threshold) : n.threshold;
        collect_rules(*n.yes, std::move(yes), rules);
        collect_rules(*n.no, std::move(no), rules);
    } else {
        PathCond yes = path, no = path;
        yes.order.push_back(n.attr + " = " + render_value(n.category));
        no.order.push_back(n.attr + " ≠ " + render_value(n.category));
        collect_rules(*n.yes, std::move(yes), rules);
        collect_rules(*n.no, std::move(no), rules);
    }
}

std::string render_tree(const TreeNodePtr& root, bool predicate) {
    if (!root) return "?";
    std::vector<std::pair<Value, std::string>> rules;
    collect_rules(*root, {}, rules);
    std::string out;
    for (const auto& [label, cond] : rules) {
        if (predicate && label.to_string() != kRemove) continue;
        if (!out.empty()) out += "; ";
        out += render_value(label);
        if (!cond.empty()) out += " if " + cond;
    }
    if (out.empty()) out = predicate ? "maintain all" : "?";
    return out;
}

std::string render_step(const StringOp& op) {
    auto q = [](const std::string& s) { return "'" + s + "'"; };
    std::string c = std::to_string(op.col);
    switch (op.kind) {
        case StrOpKind::Split: return "t = split(t, " + c + ", " + q(op.arg) + ")";
        case StrOpKind::Merge:
            return "t = merge(t, " + c + ", " + std::to_string(op.col2) + ", " + q(op.arg) + ")";
        case StrOpKind::Drop: return "t = drop(t, " + c + ")";
        case StrOpKind::Substring:
            return "t = substring(t, " + c + ", " + std::to_string(op.i) + ", " + std::to_string(op.j) + ")";
        default: return "t = " + std::string(to_string(op.kind)) + "(t, " + c + ")";
    }
}

}  // namespace

std::string render_expr(const Expr& e) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, LinearExpr>) {
                return render_linear(x);
            } else if constexpr (std::is_same_v<T, TreeExpr>) {
                return render_tree(x.root, false);
            } else if constexpr (std::is_same_v<T, PredicateExpr>) {
                return render_tree(x.root, true);
            } else if constexpr (std::is_same_v<T, StringProg>) {
                if (x.steps.empty()) return "t";
                std::string out;
                for (std::size_t i = 0; i < x.steps.size(); ++i) out += (i ? "\n" : "") + render_step(x.steps[i]);
                return out;
            } else {
                std::string refs;
                for (std::size_t i = 0; i < x.refs.size(); ++i) refs += (i ? ", " : "") + x.refs[i];
                switch (x.kind) {
                    case MarkerKind::ContainsMissing: return refs.empty() ? "has_NaN" : "has_NaN(" + refs + ")";
                    case MarkerKind::DuplicateOf: return refs.empty() ? "duplicate" : "duplicate_of(" + refs + ")";
                    case MarkerKind::OverlapsWith: return "overlaps_with(" + refs + ")";
                    case MarkerKind::DeterminedBy: return "determined_by(" + refs + ")";
                    case MarkerKind::OutlierZ: return "outlier_z(" + refs + ")";
                    case MarkerKind::OutlierIqr: return "outlier_iqr(" + refs + ")";
                    case MarkerKind::BootstrappedFrom:
                        return refs.empty() ? "bootstrapped" : "bootstrapped_from(" + refs + ")";
                }
                return "?";
            }
        },
        e.node);
}

// --- canonical serialization -----------------------------------------------

namespace {

bool plain_ident(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    });
}

std::string ident(std::string_view s) {
    if (plain_ident(s)) return std::string(s);
    std::string out = "`";
    for (char c : s) {
        if (c == '`') out.push_back('`');
        out.push_back(c);
    }
    out.push_back('`');
    return out;
}

std::string num(double v) { return format_number(v); }

std::string ser_value(const Value& v) {
    if (v.is_missing()) return "null";
    if (v.is_bool()) return v.boolean() ? "true" : "false";
    if (v.is_number()) return num(v.number());
    return quote_string(v.text());
}

std::string ser_node(const TreeNode& n) {
    if (n.leaf) return "leaf(" + ser_value(n.label) + ")";
    if (n.test == TreeNode::Test::Le) {
        return "le(" + serialize_feature(*n.feature) + ", " + num(n.threshold) + ", " + ser_node(*n.yes) + ", " +
               ser_node(*n.no) + ")";
    }
    return "eq(" + ident(n.attr) + ", " + ser_value(n.category) + ", " + ser_node(*n.yes) + ", " +
           ser_node(*n.no) + ")";
}

std::string ser_step(const StringOp& op) {
    std::string name(to_string(op.kind));
    switch (op.kind) {
        case StrOpKind::Split: return name + "(" + std::to_string(op.col) + ", " + quote_string(op.arg) + ")";
        case StrOpKind::Merge:
            return name + "(" + std::to_string(op.col) + ", " + std::to_string(op.col2) + ", " + quote_string(op.arg) +
                   ")";
        case StrOpKind::Substring:
            return name + "(" + std::to_string(op.col) + ", " + std::to_string(op.i) + ", " + std::to_string(op.j) +
                   ")";
        default: return name + "(" + std::to_string(op.col) + ")";
    }
}

}  // namespace

std::string serialize_feature(const Feature& f) {
    switch (f.kind) {
        case FeatureKind::Attr: return ident(f.attr);
        case FeatureKind::Unary:
            if (f.unary == UnaryOp::Pow) {
                return "pow(" + serialize_feature(*f.args[0]) + ", " + std::to_string(f.exponent) + ")";
            }
            return std::string(to_string(f.unary)) + "(" + serialize_feature(*f.args[0]) + ")";
        case FeatureKind::Binary:
            return std::string(to_string(f.binary)) + "(" + serialize_feature(*f.args[0]) + ", " +
                   serialize_feature(*f.args[1]) + ")";
        case FeatureKind::Agg: return std::string(to_string(f.agg)) + "(" + serialize_feature(*f.args[0]) + ")";
        case FeatureKind::GroupAgg: {
            std::string out = "group(" + std::string(to_string(f.agg)) + ", " + serialize_feature(*f.args[0]);
            for (const auto& b : f.by) out += ", " + ident(b);
            return out + ")";
        }
        case FeatureKind::OneHot: return "onehot(" + ident(f.attr) + ", " + ser_value(f.category) + ")";
        case FeatureKind::Text:
            switch (f.text) {
                case TextOp::Len: return "len(" + ident(f.attr) + ")";
                case TextOp::CountPat: return "count_pat(" + ident(f.attr) + ", " + quote_string(f.pattern) + ")";
                case TextOp::ContainsPat: return "contains(" + ident(f.attr) + ", " + quote_string(f.pattern) + ")";
            }
    }
    return "?";
}

std::string serialize_expr(const Expr& e) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, LinearExpr>) {
                std::string out = "linear(";
                for (std::size_t i = 0; i < x.terms.size(); ++i) {
                    out += (i ? ", " : "") + num(x.terms[i].coef) + " * " + serialize_feature(*x.terms[i].feature);
                }
                return out + "; " + num(x.intercept) + ")";
            } else if constexpr (std::is_same_v<T, TreeExpr>) {
                return "tree(" + (x.root ? ser_node(*x.root) : std::string("leaf(null)")) + ")";
            } else if constexpr (std::is_same_v<T, PredicateExpr>) {
                return "pred(" + (x.root ? ser_node(*x.root) : std::string("leaf(null)")) + ")";
            } else if constexpr (std::is_same_v<T, StringProg>) {
                std::string out = "prog([";
                for (std::size_t i = 0; i < x.inputs.size(); ++i) out += (i ? ", " : "") + ident(x.inputs[i]);
                out += "]";
                for (const auto& s : x.steps) out += "; " + ser_step(s);
                return out + ")";
            } else {
                std::string out = "marker(" + std::string(to_string(x.kind));
                for (std::size_t i = 0; i < x.refs.size(); ++i) out += (i ? ", " : "; ") + quote_string(x.refs[i]);
                return out + ")";
            }
        },
        e.node);
}

// --- parsing ---------------------------------------------------------------

namespace {

struct Node;
using NodePtr = std::unique_ptr<Node>;

// Infix arithmetic tree before it is folded into features and coefficients.
struct Node {
    enum class Kind { Num, Feat, Bin, Neg };
    Kind kind = Kind::Num;
    double value = 0;
    FeaturePtr feat;
    char op = 0;
    NodePtr l, r;
    std::size_t pos = 0;
};

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        throw Error("expression parse error at offset " + std::to_string(at) + ": " + msg);
    }
    [[noreturn]] void fail(const std::string& msg) const { fail(msg, i_); }

    void ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool at_end() {
        ws();
        return i_ >= s_.size();
    }
    // Single-character operator, mapping the rendered symbols ÷ · − onto / * -.
    char peek_op() {
        ws();
        if (i_ >= s_.size()) return 0;
        auto rest = s_.substr(i_);
        if (rest.starts_with("÷")) return '/';
        if (rest.starts_with("·")) return '*';
        if (rest.starts_with("−")) return '-';
        return s_[i_];
    }
    void take_op() {
        auto rest = s_.substr(i_);
        if (rest.starts_with("÷") || rest.starts_with("·")) {
            i_ += 2;
        } else if (rest.starts_with("−")) {
            i_ += 3;
        } else {
            ++i_;
        }
    }
    bool accept(char c) {
        if (peek_op() == c) {
            take_op();
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    bool peek_ident_start() {
        ws();
        if (i_ >= s_.size()) return false;
        char c = s_[i_];
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '`';
    }

    std::string ident() {
        ws();
        if (i_ < s_.size() && s_[i_] == '`') {
            ++i_;
            std::string out;
            while (true) {
                if (i_ >= s_.size()) fail("unterminated quoted identifier");
                char c = s_[i_++];
                if (c == '`') {
                    if (i_ < s_.size() && s_[i_] == '`') {
                        out.push_back('`');
                        ++i_;
                        continue;
                    }
                    break;
                }
                out.push_back(c);
            }
            return out;
        }
        std::size_t start = i_;
        while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_' || s_[i_] == '.')) {
            ++i_;
        }
        if (start == i_) fail("expected identifier");
        return std::string(s_.substr(start, i_ - start));
    }

    std::string word() {
        ws();
        std::size_t start = i_;
        while (i_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[i_])) || s_[i_] == '-' || s_[i_] == '_')) {
            ++i_;
        }
        if (start == i_) fail("expected keyword");
        return std::string(s_.substr(start, i_ - start));
    }

    bool peek_number() {
        ws();
        return i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.');
    }

    double number() {
        ws();
        std::size_t start = i_;
        bool neg = false;
        if (i_ < s_.size() && (s_[i_] == '-' || s_[i_] == '+')) {
            neg = s_[i_] == '-';
            ++i_;
            ws();
            start = i_;
        }
        while (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) ++i_;
        if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
            std::size_t save = i_;
            ++i_;
            if (i_ < s_.size() && (s_[i_] == '+' || s_[i_] == '-')) ++i_;
            if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
                while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
            } else {
                i_ = save;
            }
        }
        auto v = parse_number(s_.substr(start, i_ - start));
        if (!v) fail("invalid number", start);
        return neg ? -*v : *v;
    }

    std::size_t count() {
        std::size_t at = i_;
        double v = number();
        if (v < 0 || std::floor(v) != v) fail("expected a non-negative integer", at);
        return static_cast<std::size_t>(v);
    }

    std::string string_lit() {
        ws();
        if (i_ >= s_.size() || s_[i_] != '"') fail("expected string literal");
        ++i_;
        std::string out;
        while (true) {
            if (i_ >= s_.size()) fail("unterminated string");
            char c = s_[i_++];
            if (c == '"') break;
            if (c == '\\') {
                if (i_ >= s_.size()) fail("bad escape");
                char e = s_[i_++];
                switch (e) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case 'r': out.push_back('\r'); break;
                    default: out.push_back(e);
                }
                continue;
            }
            out.push_back(c);
        }
        return out;
    }

    Value value() {
        ws();
        if (i_ < s_.size() && s_[i_] == '"') return Value(string_lit());
        if (peek_number() || peek_op() == '-') return Value(number());
        std::size_t at = i_;
        auto w = ident();
        if (w == "null") return Value(Missing{});
        if (w == "true") return Value(true);
        if (w == "false") return Value(false);
        fail("expected value", at);
    }

    // --- infix arithmetic ---

    NodePtr sum() {
        auto l = product();
        while (true) {
            char op = peek_op();
            if (op != '+' && op != '-') break;
            std::size_t at = i_;
            take_op();
            auto n = std::make_unique<Node>();
            n->kind = Node::Kind::Bin;
            n->op = op;
            n->pos = at;
            n->l = std::move(l);
            n->r = product();
            l = std::move(n);
        }
        return l;
    }

    NodePtr product() {
        auto l = unary();
        while (true) {
            char op = peek_op();
            if (op != '*' && op != '/') break;
            std::size_t at = i_;
            take_op();
            auto n = std::make_unique<Node>();
            n->kind = Node::Kind::Bin;
            n->op = op;
            n->pos = at;
            n->l = std::move(l);
            n->r = unary();
            l = std::move(n);
        }
        return l;
    }

    NodePtr unary() {
        if (peek_op() == '-') {
            std::size_t at = i_;
            take_op();
            auto n = std::make_unique<Node>();
            n->kind = Node::Kind::Neg;
            n->pos = at;
            n->l = unary();
            return n;
        }
        return power();
    }

    NodePtr power() {
        auto base = primary();
        if (peek_op() == '^') {
            std::size_t at = i_;
            take_op();
            double e = number();
            if (std::floor(e) != e || e < 2 || e > 16) fail("exponent must be an integer in [2, 16]", at);
            auto n = std::make_unique<Node>();
            n->kind = Node::Kind::Feat;
            n->pos = at;
            n->feat = pow_feature(to_feature(*base), static_cast<int>(e));
            return n;
        }
        return base;
    }

    NodePtr primary() {
        ws();
        auto n = std::make_unique<Node>();
        n->pos = i_;
        if (peek_number()) {
            n->kind = Node::Kind::Num;
            n->value = number();
            return n;
        }
        if (accept('(')) {
            auto inner = sum();
            expect(')');
            return inner;
        }
        if (!peek_ident_start()) fail("expected operand");
        bool quoted = s_[i_] == '`';
        std::string name = ident();
        n->kind = Node::Kind::Feat;
        if (!quoted && peek_op() == '(') {
            take_op();
            n->feat = call(name, n->pos);
            expect(')');
        } else {
            n->feat = attr_feature(name);
        }
        return n;
    }

    FeaturePtr feature_arg() { return to_feature(*sum()); }

    FeaturePtr call(const std::string& name, std::size_t at) {
        static const std::map<std::string, UnaryOp> unary_ops = {
            {"log", UnaryOp::Log}, {"sqrt", UnaryOp::Sqrt}, {"recip", UnaryOp::Recip}, {"exp", UnaryOp::Exp}};
        static const std::map<std::string, BinaryOp> binary_ops = {
            {"add", BinaryOp::Add}, {"sub", BinaryOp::Sub}, {"mul", BinaryOp::Mul}, {"div", BinaryOp::Div}};
        static const std::map<std::string, AggOp> agg_ops = {{"sum", AggOp::Sum},
                                                             {"mean", AggOp::Mean},
                                                             {"max", AggOp::Max},
                                                             {"min", AggOp::Min},
                                                             {"count", AggOp::Count}};
        if (auto it = unary_ops.find(name); it != unary_ops.end()) return unary_feature(it->second, feature_arg());
        if (auto it = agg_ops.find(name); it != agg_ops.end()) return agg_feature(it->second, feature_arg());
        if (auto it = binary_ops.find(name); it != binary_ops.end()) {
            auto a = feature_arg();
            expect(',');
            auto b = feature_arg();
            return binary_feature(it->second, std::move(a), std::move(b));
        }
        if (name == "pow") {
            auto a = feature_arg();
            expect(',');
            std::size_t e_at = i_;
            double e = number();
            if (std::floor(e) != e || e < 2 || e > 16) fail("exponent must be an integer in [2, 16]", e_at);
            return pow_feature(std::move(a), static_cast<int>(e));
        }
        if (name == "group") {
            std::size_t op_at = i_;
            auto op = ident();
            auto it = agg_ops.find(op);
            if (it == agg_ops.end()) fail("unknown aggregate '" + op + "'", op_at);
            expect(',');
            auto of = feature_arg();
            std::vector<std::string> by;
            while (accept(',')) by.push_back(ident());
            if (by.empty()) fail("group needs at least one key attribute");
            return group_feature(it->second, std::move(of), std::move(by));
        }
        if (name == "onehot") {
            auto a = ident();
            expect(',');
            return onehot_feature(std::move(a), value());
        }
        if (name == "len") return text_feature(TextOp::Len, ident());
        if (name == "count_pat" || name == "contains") {
            auto a = ident();
            expect(',');
            auto p = string_lit();
            return text_feature(name == "contains" ? TextOp::ContainsPat : TextOp::CountPat, std::move(a), std::move(p));
        }
        fail("unknown function '" + name + "'", at);
    }

    FeaturePtr to_feature(const Node& n) {
        switch (n.kind) {
            case Node::Kind::Feat: return n.feat;
            case Node::Kind::Num: fail("constants are not allowed inside a feature", n.pos);
            case Node::Kind::Neg: fail("negation is not allowed inside a feature", n.pos);
            case Node::Kind::Bin: {
                BinaryOp op = n.op == '+' ? BinaryOp::Add
                              : n.op == '-' ? BinaryOp::Sub
                              : n.op == '*' ? BinaryOp::Mul
                                            : BinaryOp::Div;
                return binary_feature(op, to_feature(*n.l), to_feature(*n.r));
            }
        }
        fail("bad feature", n.pos);
    }

    // Splits a product chain into a constant factor and feature factors.
    void factors(const Node& n, bool inverted, double& coef, std::vector<FeaturePtr>& num,
                 std::vector<FeaturePtr>& den) {
        if (n.kind == Node::Kind::Num) {
            if (inverted) {
                if (n.value == 0) fail("division by zero constant", n.pos);
                coef /= n.value;
            } else {
                coef *= n.value;
            }
            return;
        }
        if (n.kind == Node::Kind::Neg) {
            coef = -coef;
            factors(*n.l, inverted, coef, num, den);
            return;
        }
        if (n.kind == Node::Kind::Bin && (n.op == '*' || n.op == '/')) {
            factors(*n.l, inverted, coef, num, den);
            if (n.op == '*') {
                factors(*n.r, inverted, coef, num, den);
            } else if (n.r->kind == Node::Kind::Num || n.r->kind == Node::Kind::Neg) {
                factors(*n.r, !inverted, coef, num, den);
            } else {
                (inverted ? num : den).push_back(to_feature(*n.r));
            }
            return;
        }
        (inverted ? den : num).push_back(to_feature(n));
    }

    void terms(const Node& n, double sign, LinearExpr& out) {
        if (n.kind == Node::Kind::Bin && (n.op == '+' || n.op == '-')) {
            terms(*n.l, sign, out);
            terms(*n.r, n.op == '-' ? -sign : sign, out);
            return;
        }
        if (n.kind == Node::Kind::Neg && n.l->kind == Node::Kind::Bin && (n.l->op == '+' || n.l->op == '-')) {
            terms(*n.l, -sign, out);
            return;
        }
        double coef = sign;
        std::vector<FeaturePtr> num, den;
        factors(n, false, coef, num, den);
        if (num.empty() && den.empty()) {
            out.intercept += coef;
            return;
        }
        auto chain = [](std::vector<FeaturePtr>& fs) {
            FeaturePtr f = fs[0];
            for (std::size_t i = 1; i < fs.size(); ++i) f = binary_feature(BinaryOp::Mul, f, fs[i]);
            return f;
        };
        FeaturePtr f;
        if (num.empty()) {
            f = unary_feature(UnaryOp::Recip, chain(den));
        } else if (den.empty()) {
            f = chain(num);
        } else {
            f = binary_feature(BinaryOp::Div, chain(num), chain(den));
        }
        out.terms.push_back({coef, std::move(f)});
    }

    LinearExpr linear_infix() {
        auto n = sum();
        LinearExpr out;
        terms(*n, 1.0, out);
        return out;
    }

    // --- canonical forms ---

    TreeNodePtr tree_node() {
        std::size_t at = i_;
        auto w = ident();
        expect('(');
        TreeNodePtr out;
        if (w == "leaf") {
            out = make_leaf(value());
        } else if (w == "le") {
            auto f = feature_arg();
            expect(',');
            double thr = number();
            expect(',');
            auto yes = tree_node();
            expect(',');
            auto no = tree_node();
            out = make_le(std::move(f), thr, std::move(yes), std::move(no));
        } else if (w == "eq") {
            auto a = ident();
            expect(',');
            auto v = value();
            expect(',');
            auto yes = tree_node();
            expect(',');
            auto no = tree_node();
            out = make_eq(std::move(a), std::move(v), std::move(yes), std::move(no));
        } else {
            fail("expected leaf, le or eq", at);
        }
        expect(')');
        return out;
    }

    StringOp step() {
        std::size_t at = i_;
        auto w = ident();
        static const std::map<std::string, StrOpKind> kinds = {
            {"split", StrOpKind::Split},
            {"merge", StrOpKind::Merge},
            {"drop", StrOpKind::Drop},
            {"substring", StrOpKind::Substring},
            {"lower", StrOpKind::Lower},
            {"upper", StrOpKind::Upper},
            {"strip_punct", StrOpKind::StripPunct},
            {"strip_digits", StrOpKind::StripDigits},
            {"strip_html", StrOpKind::StripHtml},
            {"remove_stopwords", StrOpKind::RemoveStopwords},
            {"stem", StrOpKind::Stem},
            {"trim", StrOpKind::Trim},
        };
        auto it = kinds.find(w);
        if (it == kinds.end()) fail("unknown string op '" + w + "'", at);
        StringOp op;
        op.kind = it->second;
        expect('(');
        op.col = count();
        switch (op.kind) {
            case StrOpKind::Split:
                expect(',');
                op.arg = string_lit();
                if (op.arg.empty()) fail("split delimiter must be non-empty", at);
                break;
            case StrOpKind::Merge:
                expect(',');
                op.col2 = count();
                expect(',');
                op.arg = string_lit();
                break;
            case StrOpKind::Substring:
                expect(',');
                op.i = count();
                expect(',');
                op.j = count();
                break;
            default: break;
        }
        expect(')');
        return op;
    }

    Expr expr() {
        ws();
        std::size_t save = i_;
        if (peek_ident_start() && s_[i_] != '`') {
            std::string w = ident();
            if (peek_op() == '(') {
                if (w == "linear") {
                    take_op();
                    LinearExpr e;
                    if (peek_op() != ';') {
                        do {
                            std::size_t at = i_;
                            auto part = linear_infix();
                            if (part.terms.size() != 1 || part.intercept != 0) fail("expected 'coef * feature'", at);
                            e.terms.push_back(part.terms[0]);
                        } while (accept(','));
                    }
                    expect(';');
                    e.intercept = number();
                    expect(')');
                    return Expr{e};
                }
                if (w == "tree" || w == "pred") {
                    take_op();
                    auto root = tree_node();
                    expect(')');
                    if (w == "tree") return Expr{TreeExpr{root}};
                    return Expr{PredicateExpr{root}};
                }
                if (w == "prog") {
                    take_op();
                    StringProg p;
                    expect('[');
                    if (peek_op() != ']') {
                        do {
                            p.inputs.push_back(ident());
                        } while (accept(','));
                    }
                    expect(']');
                    while (accept(';')) p.steps.push_back(step());
                    expect(')');
                    return Expr{p};
                }
                if (w == "marker") {
                    take_op();
                    MarkerExpr m;
                    std::size_t at = i_;
                    auto k = word();
                    try {
                        m.kind = marker_kind_from(k);
                    } catch (const Error&) {
                        fail("unknown marker kind '" + k + "'", at);
                    }
                    if (accept(';')) {
                        do {
                            m.refs.push_back(string_lit());
                        } while (accept(','));
                    }
                    expect(')');
                    return Expr{m};
                }
            }
        }
        i_ = save;
        return Expr{linear_infix()};
    }

    std::size_t pos() const { return i_; }

private:
    std::string_view s_;
    std::size_t i_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view s) {
    Parser p(s);
    auto e = p.expr();
    if (!p.at_end()) p.fail("unexpected trailing input");
    return e;
}

FeaturePtr parse_feature(std::string_view s) {
    Parser p(s);
    auto f = p.feature_arg();
    if (!p.at_end()) p.fail("unexpected trailing input");
    return f;
}

}  // namespace vdx
