#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vdx/table.hpp"

namespace vdx {

// --- features --------------------------------------------------------------

enum class FeatureKind { Attr, Unary, Binary, Agg, GroupAgg, OneHot, Text };
enum class UnaryOp { Pow, Log, Sqrt, Recip, Exp };
enum class BinaryOp { Add, Sub, Mul, Div };
enum class AggOp { Sum, Mean, Max, Min, Count };
enum class TextOp { Len, CountPat, ContainsPat };

struct Feature;
using FeaturePtr = std::shared_ptr<const Feature>;

// Numeric feature derived from table attributes. Evaluates to one double per
// tuple, NaN standing for Missing.
struct Feature {
    FeatureKind kind = FeatureKind::Attr;
    std::string attr;                // Attr, OneHot, Text
    UnaryOp unary = UnaryOp::Pow;
    int exponent = 2;                // Pow only
    BinaryOp binary = BinaryOp::Mul;
    AggOp agg = AggOp::Sum;          // Agg, GroupAgg
    TextOp text = TextOp::Len;
    std::vector<FeaturePtr> args;    // Unary/Agg/GroupAgg: 1, Binary: 2
    std::vector<std::string> by;     // GroupAgg keys
    Value category;                  // OneHot
    std::string pattern;             // CountPat, ContainsPat
};

FeaturePtr attr_feature(std::string attr);
FeaturePtr pow_feature(FeaturePtr f, int exponent);
FeaturePtr unary_feature(UnaryOp op, FeaturePtr f);
FeaturePtr binary_feature(BinaryOp op, FeaturePtr a, FeaturePtr b);
FeaturePtr agg_feature(AggOp op, FeaturePtr f);
FeaturePtr group_feature(AggOp op, FeaturePtr of, std::vector<std::string> by);
FeaturePtr onehot_feature(std::string attr, Value category);
FeaturePtr text_feature(TextOp op, std::string attr, std::string pattern = {});

bool feature_equal(const Feature& a, const Feature& b);
// Attributes the feature reads, sorted and deduplicated.
std::vector<std::string> feature_attrs(const Feature& f);
// Nesting depth of the extension chain (a plain attribute has depth 0).
std::size_t feature_depth(const Feature& f);

std::string_view to_string(UnaryOp op);
std::string_view to_string(BinaryOp op);
std::string_view to_string(AggOp op);

// --- string programs -------------------------------------------------------

enum class StrOpKind {
    Split,
    Merge,
    Drop,
    Substring,
    Lower,
    Upper,
    StripPunct,
    StripDigits,
    StripHtml,
    RemoveStopwords,
    Stem,
    Trim,
};

struct StringOp {
    StrOpKind kind = StrOpKind::Trim;
    std::size_t col = 0;   // field index the op acts on
    std::size_t col2 = 0;  // Merge: second field
    std::string arg;       // Split: delimiter, Merge: separator
    std::size_t i = 0, j = 0;  // Substring: [i, j) in characters

    bool operator==(const StringOp&) const = default;
};

std::string_view to_string(StrOpKind k);

// --- expressions -----------------------------------------------------------

struct LinearTerm {
    double coef = 1.0;
    FeaturePtr feature;
};

struct LinearExpr {
    std::vector<LinearTerm> terms;
    double intercept = 0.0;
};

struct TreeNode;
using TreeNodePtr = std::shared_ptr<const TreeNode>;

// Internal nodes test `feature <= threshold` (Le) or `attr == category` (Eq);
// the `yes` child is taken when the test holds.
struct TreeNode {
    enum class Test { Le, Eq };
    bool leaf = true;
    Value label;
    Test test = Test::Le;
    FeaturePtr feature;   // Le
    std::string attr;     // Eq
    Value category;       // Eq
    double threshold = 0.0;
    TreeNodePtr yes, no;
};

TreeNodePtr make_leaf(Value label);
TreeNodePtr make_le(FeaturePtr feature, double threshold, TreeNodePtr yes, TreeNodePtr no);
TreeNodePtr make_eq(std::string attr, Value category, TreeNodePtr yes, TreeNodePtr no);

struct TreeExpr {
    TreeNodePtr root;
};

// Leaves are labelled "remove" or "maintain".
struct PredicateExpr {
    TreeNodePtr root;
};

inline constexpr std::string_view kRemove = "remove";
inline constexpr std::string_view kMaintain = "maintain";

struct StringProg {
    std::vector<std::string> inputs;  // initial fields, one per attribute
    std::vector<StringOp> steps;
};

enum class MarkerKind {
    ContainsMissing,
    DuplicateOf,
    OverlapsWith,
    DeterminedBy,
    OutlierZ,
    OutlierIqr,
    BootstrappedFrom,
};

std::string_view to_string(MarkerKind k);
MarkerKind marker_kind_from(std::string_view s);

struct MarkerExpr {
    MarkerKind kind = MarkerKind::ContainsMissing;
    std::vector<std::string> refs;
};

struct Expr {
    std::variant<LinearExpr, TreeExpr, StringProg, PredicateExpr, MarkerExpr> node;

    bool is_marker() const { return std::holds_alternative<MarkerExpr>(node); }
};

bool expr_equal(const Expr& a, const Expr& b);

// Attributes the expression reads, sorted and deduplicated.
std::vector<std::string> expr_attrs(const Expr& e);

// --- evaluation ------------------------------------------------------------

std::vector<double> eval_feature(const Feature& f, const Table& t);
// One value per tuple of t. Missing inputs propagate; out-of-domain arithmetic
// yields Missing. Markers that flag tuples evaluate to Bool.
std::vector<Value> eval_expr(const Expr& e, const Table& t);
// Applies a string program to one row of input fields.
std::vector<std::optional<std::string>> run_program(const StringProg& p,
                                                    std::vector<std::optional<std::string>> fields);

// --- explainability --------------------------------------------------------

struct Explainability {
    std::size_t n_components = 1;
    std::size_t n_chunks = 1;
    double conciseness = 1.0;
    double concentration = 1.0;
    double total = 1.0;
};

Explainability explainability(const Expr& e);
std::size_t tree_node_count(const TreeNode& n);
std::size_t tree_internal_count(const TreeNode& n);

// --- text forms ------------------------------------------------------------

// Compact human-readable form, numbers at 6 significant digits.
std::string render_expr(const Expr& e);
std::string render_feature(const Feature& f);
// Canonical form; parse_expr(serialize_expr(e)) reproduces e exactly.
std::string serialize_expr(const Expr& e);
std::string serialize_feature(const Feature& f);
// Accepts the canonical form and infix arithmetic such as `60 * a3 / a2`.
// Errors carry the byte offset of the problem.
Expr parse_expr(std::string_view s);
FeaturePtr parse_feature(std::string_view s);

std::string format_sig(double v, int digits = 6);
std::string quote_string(std::string_view s);

}  // namespace vdx
