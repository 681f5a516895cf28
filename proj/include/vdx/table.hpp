#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace vdx {

// Base error for every recoverable failure in the library. Messages name the
// offending file, attribute or position.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Missing {
    bool operator==(const Missing&) const = default;
};

// A single cell. NaN never appears as a Number: it is normalised to Missing.
class Value {
public:
    Value() = default;
    Value(Missing) {}
    Value(double v);
    Value(std::string s) : data_(std::move(s)) {}
    Value(const char* s) : data_(std::string(s)) {}
    Value(bool b) : data_(b) {}

    bool is_missing() const { return std::holds_alternative<Missing>(data_); }
    bool is_number() const { return std::holds_alternative<double>(data_); }
    bool is_text() const { return std::holds_alternative<std::string>(data_); }
    bool is_bool() const { return std::holds_alternative<bool>(data_); }

    double number() const { return std::get<double>(data_); }
    const std::string& text() const { return std::get<std::string>(data_); }
    bool boolean() const { return std::get<bool>(data_); }

    // Numeric view: numbers, bools (0/1) and numeric-looking text.
    std::optional<double> as_number() const;
    // Canonical text rendering; Missing renders as the empty string.
    std::string to_string() const;
    // Key used for exact grouping (FD discovery, group-by, one-hot).
    std::string key() const;

    // Exact structural equality (numbers compared bitwise-equal).
    bool operator==(const Value& o) const { return data_ == o.data_; }
    // Total order used for deterministic sorting: Missing < Bool < Number < Text.
    bool operator<(const Value& o) const;

private:
    std::variant<Missing, bool, double, std::string> data_;
};

// Tolerance-aware equality used for validity scoring:
// |a-b| <= max(abs_tol, rel_tol*|b|) for numbers, exact for text,
// Missing equals Missing, number vs text compares canonical renderings.
bool values_match(const Value& predicted, const Value& truth, double rel_tol = 1e-6,
                  double abs_tol = 1e-6);

std::string format_number(double v);
std::optional<double> parse_number(std::string_view s);

enum class SemanticType { Numeric, Categorical, Textual };

std::string_view to_string(SemanticType t);

struct Attribute {
    std::string id;
    SemanticType type = SemanticType::Textual;
    // Integer-valued numeric column with few distinct values; the engine also
    // tries categorical explanations for such goals.
    bool categorical_compatible = false;
};

struct TypeInferenceConfig {
    double categorical_ratio = 0.1;
    std::size_t categorical_max = 20;
};

// Immutable column-major relation. Tuple ids are unique strings.
class Table {
public:
    Table() = default;
    Table(std::string name, std::vector<Attribute> attributes, std::vector<std::string> tuple_ids,
          std::vector<std::vector<Value>> columns);

    const std::string& name() const { return name_; }
    std::size_t num_rows() const { return tuple_ids_.size(); }
    std::size_t num_cols() const { return attributes_.size(); }

    const std::vector<Attribute>& attributes() const { return attributes_; }
    const Attribute& attribute(std::size_t i) const { return attributes_[i]; }
    const std::vector<std::string>& tuple_ids() const { return tuple_ids_; }

    bool has_attr(std::string_view id) const;
    std::size_t attr_index(std::string_view id) const;  // throws Error when absent
    std::optional<std::size_t> find_attr(std::string_view id) const;
    std::optional<std::size_t> find_row(std::string_view tuple_id) const;

    const std::vector<Value>& column(std::size_t i) const { return columns_[i]; }
    const std::vector<Value>& column(std::string_view id) const { return columns_[attr_index(id)]; }
    const Value& at(std::size_t row, std::size_t col) const { return columns_[col][row]; }
    std::vector<Value> row(std::size_t r) const;

    std::vector<std::string> attr_ids() const;

    // Copy with a different name.
    Table renamed(std::string name) const;
    // Copy with one more column appended (types are inferred by the caller).
    Table with_column(Attribute attr, std::vector<Value> values) const;
    // Copy without the named column.
    Table without_column(std::string_view id) const;
    // Copy keeping only the given rows, in the given order.
    Table select_rows(std::span<const std::size_t> rows) const;
    // Copy keeping the tuples whose ids are listed, in the listed order.
    Table select_ids(std::span<const std::string> ids) const;

private:
    void build_indexes();

    std::string name_;
    std::vector<Attribute> attributes_;
    std::vector<std::string> tuple_ids_;
    std::vector<std::vector<Value>> columns_;
    std::unordered_map<std::string, std::size_t> attr_pos_;
    std::unordered_map<std::string, std::size_t> row_pos_;
};

struct CsvOptions {
    char delimiter = ',';
    // Attribute holding tuple ids, "first" for the first column, or
    // "synthesize" for 0-based row ordinals.
    std::string id_column = "first";
    TypeInferenceConfig types;
};

inline constexpr std::string_view kSynthesizeIds = "synthesize";

Table load_table(const std::string& path, const CsvOptions& opts = {});
Table parse_table(std::string_view text, const std::string& name, const CsvOptions& opts = {});
// Writes the id column first under `id_header`.
std::string serialize_table(const Table& t, const std::string& id_header = "id", char delimiter = ',');
void save_table(const Table& t, const std::string& path, const std::string& id_header = "id",
                char delimiter = ',');

Table infer_types(const Table& t, const TypeInferenceConfig& cfg = {});
SemanticType infer_column_type(std::span<const Value> values, const TypeInferenceConfig& cfg,
                               bool* categorical_compatible = nullptr);

Table project(const Table& t, std::span<const std::string> attrs);

struct AttributeMatch {
    std::vector<std::pair<std::string, std::string>> pairs;

    std::optional<std::string> right_of(std::string_view left) const;
    std::optional<std::string> left_of(std::string_view right) const;
    AttributeMatch reversed() const;
};

// Matches attributes sharing the same id.
AttributeMatch match_by_name(const Table& t, const Table& t2);
AttributeMatch parse_match(std::string_view json_text);
AttributeMatch load_match(const std::string& path);
void validate_match(const AttributeMatch& m, const Table& t, const Table& t2);

struct ChangeSets {
    std::vector<std::string> left_delta_attrs, right_delta_attrs;
    std::vector<std::string> left_nabla_attrs, right_nabla_attrs;
    std::vector<std::string> left_delta_tuples, right_delta_tuples;
    std::vector<std::string> left_nabla_tuples, right_nabla_tuples;

    bool empty() const {
        return left_delta_attrs.empty() && right_delta_attrs.empty() && left_delta_tuples.empty() &&
               right_delta_tuples.empty();
    }
};

ChangeSets compute_change_sets(const Table& t, const Table& t2, const AttributeMatch& m);

// Tuples of t2 compared with tuples of t on matched attributes only.
bool projected_equal(const Table& t, std::size_t row, const Table& t2, std::size_t row2,
                     const AttributeMatch& m);

}  // namespace vdx
