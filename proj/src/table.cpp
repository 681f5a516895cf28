#include "vdx/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace vdx {

Value::Value(double v) {
    if (std::isfinite(v)) {
        data_ = v == 0.0 ? 0.0 : v;  // fold -0
    }
}

std::optional<double> Value::as_number() const {
    if (is_number()) return number();
    if (is_bool()) return boolean() ? 1.0 : 0.0;
    if (is_text()) return parse_number(text());
    return std::nullopt;
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return std::to_string(v);
    return std::string(buf, ptr);
}

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string Value::to_string() const {
    if (is_missing()) return {};
    if (is_number()) return format_number(number());
    if (is_bool()) return boolean() ? "true" : "false";
    return text();
}

std::string Value::key() const {
    if (is_missing()) return "M";
    if (is_bool()) return boolean() ? "B1" : "B0";
    if (is_number()) return "N" + format_number(number());
    return "T" + text();
}

bool Value::operator<(const Value& o) const {
    if (data_.index() != o.data_.index()) return data_.index() < o.data_.index();
    if (is_missing()) return false;
    if (is_bool()) return !boolean() && o.boolean();
    if (is_number()) return number() < o.number();
    return text() < o.text();
}

bool values_match(const Value& predicted, const Value& truth, double rel_tol, double abs_tol) {
    if (predicted.is_missing() || truth.is_missing()) {
        return predicted.is_missing() && truth.is_missing();
    }
    if (predicted.is_text() && truth.is_text()) return predicted.text() == truth.text();
    if (predicted.is_text() || truth.is_text()) {
        return predicted.to_string() == truth.to_string();
    }
    double a = *predicted.as_number();
    double b = *truth.as_number();
    return std::abs(a - b) <= std::max(abs_tol, rel_tol * std::abs(b));
}

std::string_view to_string(SemanticType t) {
    switch (t) {
        case SemanticType::Numeric: return "numeric";
        case SemanticType::Categorical: return "categorical";
        case SemanticType::Textual: return "textual";
    }
    return "textual";
}

// --- Table -----------------------------------------------------------------

Table::Table(std::string name, std::vector<Attribute> attributes, std::vector<std::string> tuple_ids,
             std::vector<std::vector<Value>> columns)
    : name_(std::move(name)),
      attributes_(std::move(attributes)),
      tuple_ids_(std::move(tuple_ids)),
      columns_(std::move(columns)) {
    if (columns_.size() != attributes_.size()) {
        throw Error("table '" + name_ + "': " + std::to_string(attributes_.size()) +
                    " attributes but " + std::to_string(columns_.size()) + " columns");
    }
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (columns_[c].size() != tuple_ids_.size()) {
            throw Error("table '" + name_ + "': column '" + attributes_[c].id + "' has " +
                        std::to_string(columns_[c].size()) + " values, expected " +
                        std::to_string(tuple_ids_.size()));
        }
    }
    build_indexes();
}

void Table::build_indexes() {
    attr_pos_.clear();
    row_pos_.clear();
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
        if (!attr_pos_.emplace(attributes_[i].id, i).second) {
            throw Error("table '" + name_ + "': duplicate attribute '" + attributes_[i].id + "'");
        }
    }
    for (std::size_t i = 0; i < tuple_ids_.size(); ++i) {
        if (!row_pos_.emplace(tuple_ids_[i], i).second) {
            throw Error("table '" + name_ + "': duplicate tuple id '" + tuple_ids_[i] + "' at row " +
                        std::to_string(i + 1));
        }
    }
}

bool Table::has_attr(std::string_view id) const { return attr_pos_.contains(std::string(id)); }

std::optional<std::size_t> Table::find_attr(std::string_view id) const {
    auto it = attr_pos_.find(std::string(id));
    if (it == attr_pos_.end()) return std::nullopt;
    return it->second;
}

std::size_t Table::attr_index(std::string_view id) const {
    auto pos = find_attr(id);
    if (!pos) throw Error("table '" + name_ + "': unknown attribute '" + std::string(id) + "'");
    return *pos;
}

std::optional<std::size_t> Table::find_row(std::string_view tuple_id) const {
    auto it = row_pos_.find(std::string(tuple_id));
    if (it == row_pos_.end()) return std::nullopt;
    return it->second;
}

std::vector<Value> Table::row(std::size_t r) const {
    std::vector<Value> out;
    out.reserve(columns_.size());
    for (const auto& col : columns_) out.push_back(col[r]);
    return out;
}

std::vector<std::string> Table::attr_ids() const {
    std::vector<std::string> out;
    out.reserve(attributes_.size());
    for (const auto& a : attributes_) out.push_back(a.id);
    return out;
}

Table Table::renamed(std::string name) const {
    Table copy = *this;
    copy.name_ = std::move(name);
    return copy;
}

Table Table::with_column(Attribute attr, std::vector<Value> values) const {
    auto attrs = attributes_;
    auto cols = columns_;
    attrs.push_back(std::move(attr));
    cols.push_back(std::move(values));
    return Table(name_, std::move(attrs), tuple_ids_, std::move(cols));
}

Table Table::without_column(std::string_view id) const {
    std::size_t idx = attr_index(id);
    auto attrs = attributes_;
    auto cols = columns_;
    attrs.erase(attrs.begin() + static_cast<std::ptrdiff_t>(idx));
    cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(idx));
    return Table(name_, std::move(attrs), tuple_ids_, std::move(cols));
}

Table Table::select_rows(std::span<const std::size_t> rows) const {
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (auto r : rows) ids.push_back(tuple_ids_.at(r));
    std::vector<std::vector<Value>> cols(columns_.size());
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        cols[c].reserve(rows.size());
        for (auto r : rows) cols[c].push_back(columns_[c][r]);
    }
    return Table(name_, attributes_, std::move(ids), std::move(cols));
}

Table Table::select_ids(std::span<const std::string> ids) const {
    std::vector<std::size_t> rows;
    rows.reserve(ids.size());
    for (const auto& id : ids) {
        auto r = find_row(id);
        if (!r) throw Error("table '" + name_ + "': unknown tuple id '" + id + "'");
        rows.push_back(*r);
    }
    return select_rows(rows);
}

// --- CSV -------------------------------------------------------------------

namespace {

struct Cell {
    std::string text;
    bool quoted = false;
};

std::vector<std::vector<Cell>> split_records(std::string_view text, char delim, const std::string& name) {
    std::vector<std::vector<Cell>> records;
    std::vector<Cell> record;
    Cell cell;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    auto end_field = [&] {
        record.push_back(std::move(cell));
        cell = Cell{};
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        if (!(record.size() == 1 && record[0].text.empty() && !record[0].quoted)) {
            records.push_back(std::move(record));
        }
        record.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell.text.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                cell.text.push_back(ch);
            }
            continue;
        }
        if (ch == '"' && !field_started) {
            in_quotes = true;
            cell.quoted = true;
            field_started = true;
        } else if (ch == delim) {
            end_field();
        } else if (ch == '\r') {
            // tolerated before \n
        } else if (ch == '\n') {
            end_record();
            ++line;
        } else {
            cell.text.push_back(ch);
            field_started = true;
        }
    }
    if (in_quotes) throw Error(name + ": unterminated quoted field near line " + std::to_string(line));
    if (field_started || !record.empty()) end_record();
    return records;
}

Value parse_cell(const Cell& c) {
    if (c.quoted) return Value(c.text);
    if (c.text.empty() || c.text == "NaN" || c.text == "nan" || c.text == "NAN") return Value(Missing{});
    if (auto v = parse_number(c.text)) return Value(*v);
    if (c.text == "true" || c.text == "True" || c.text == "TRUE") return Value(true);
    if (c.text == "false" || c.text == "False" || c.text == "FALSE") return Value(false);
    return Value(c.text);
}

bool needs_quotes(const std::string& s, char delim) {
    if (s.empty()) return true;
    for (char ch : s) {
        if (ch == delim || ch == '"' || ch == '\n' || ch == '\r') return true;
    }
    Value reparsed = parse_cell(Cell{s, false});
    return !reparsed.is_text();
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string render_cell(const Value& v, char delim) {
    if (v.is_missing()) return {};
    if (v.is_text()) return needs_quotes(v.text(), delim) ? quote(v.text()) : v.text();
    return v.to_string();
}

}  // namespace

Table parse_table(std::string_view text, const std::string& name, const CsvOptions& opts) {
    auto records = split_records(text, opts.delimiter, name);
    if (records.empty()) throw Error(name + ": missing header row");
    const auto& header = records.front();
    std::size_t width = header.size();
    std::optional<std::size_t> id_col;
    if (opts.id_column == "first") {
        id_col = 0;
    } else if (opts.id_column != kSynthesizeIds) {
        for (std::size_t c = 0; c < width; ++c) {
            if (header[c].text == opts.id_column) id_col = c;
        }
        if (!id_col) throw Error(name + ": id column '" + opts.id_column + "' not in header");
    }
    std::vector<Attribute> attrs;
    std::vector<std::size_t> source_cols;
    for (std::size_t c = 0; c < width; ++c) {
        if (id_col && c == *id_col) continue;
        attrs.push_back(Attribute{header[c].text, SemanticType::Textual, false});
        source_cols.push_back(c);
    }
    std::vector<std::string> ids;
    std::vector<std::vector<Value>> cols(attrs.size());
    std::unordered_set<std::string> seen;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != width) {
            throw Error(name + ": row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                        " fields, header has " + std::to_string(width));
        }
        std::string id = id_col ? rec[*id_col].text : std::to_string(r - 1);
        if (!seen.insert(id).second) {
            throw Error(name + ": duplicate tuple id '" + id + "' at row " + std::to_string(r));
        }
        ids.push_back(std::move(id));
        for (std::size_t k = 0; k < source_cols.size(); ++k) cols[k].push_back(parse_cell(rec[source_cols[k]]));
    }
    return infer_types(Table(name, std::move(attrs), std::move(ids), std::move(cols)), opts.types);
}

Table load_table(const std::string& path, const CsvOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read table file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_table(ss.str(), path, opts);
}

std::string serialize_table(const Table& t, const std::string& id_header, char delimiter) {
    std::string out;
    auto put = [&](const std::string& s) {
        out += needs_quotes(s, delimiter) && !s.empty() ? quote(s) : s;
    };
    put(id_header);
    for (const auto& a : t.attributes()) {
        out.push_back(delimiter);
        put(a.id);
    }
    out.push_back('\n');
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
        put(t.tuple_ids()[r]);
        for (std::size_t c = 0; c < t.num_cols(); ++c) {
            out.push_back(delimiter);
            out += render_cell(t.at(r, c), delimiter);
        }
        out.push_back('\n');
    }
    return out;
}

void save_table(const Table& t, const std::string& path, const std::string& id_header, char delimiter) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write table file '" + path + "'");
    out << serialize_table(t, id_header, delimiter);
}

// --- types -----------------------------------------------------------------

SemanticType infer_column_type(std::span<const Value> values, const TypeInferenceConfig& cfg,
                               bool* categorical_compatible) {
    std::set<std::string> distinct;
    std::size_t present = 0;
    bool numeric = true;
    bool integral = true;
    for (const auto& v : values) {
        if (v.is_missing()) continue;
        ++present;
        distinct.insert(v.key());
        auto n = v.as_number();
        if (!n) {
            numeric = false;
        } else if (std::floor(*n) != *n) {
            integral = false;
        }
    }
    if (categorical_compatible) *categorical_compatible = false;
    if (numeric) {
        if (categorical_compatible) {
            *categorical_compatible = present > 0 && integral && distinct.size() <= cfg.categorical_max;
        }
        return SemanticType::Numeric;
    }
    double ratio = present == 0 ? 0.0 : static_cast<double>(distinct.size()) / static_cast<double>(present);
    // On small tables the ratio alone rejects obvious categories, so a
    // repeated value is enough there.
    bool repeats = distinct.size() < present;
    if ((ratio <= cfg.categorical_ratio || repeats) && distinct.size() <= cfg.categorical_max) {
        return SemanticType::Categorical;
    }
    return SemanticType::Textual;
}

Table infer_types(const Table& t, const TypeInferenceConfig& cfg) {
    auto attrs = t.attributes();
    std::vector<std::vector<Value>> cols;
    cols.reserve(attrs.size());
    for (std::size_t c = 0; c < attrs.size(); ++c) {
        attrs[c].type = infer_column_type(t.column(c), cfg, &attrs[c].categorical_compatible);
        cols.push_back(t.column(c));
    }
    return Table(t.name(), std::move(attrs), t.tuple_ids(), std::move(cols));
}

Table project(const Table& t, std::span<const std::string> attrs) {
    std::vector<Attribute> out_attrs;
    std::vector<std::vector<Value>> cols;
    for (const auto& a : attrs) {
        std::size_t idx = t.attr_index(a);
        out_attrs.push_back(t.attribute(idx));
        cols.push_back(t.column(idx));
    }
    return Table(t.name(), std::move(out_attrs), t.tuple_ids(), std::move(cols));
}

// --- matches ---------------------------------------------------------------

std::optional<std::string> AttributeMatch::right_of(std::string_view left) const {
    for (const auto& [l, r] : pairs) {
        if (l == left) return r;
    }
    return std::nullopt;
}

std::optional<std::string> AttributeMatch::left_of(std::string_view right) const {
    for (const auto& [l, r] : pairs) {
        if (r == right) return l;
    }
    return std::nullopt;
}

AttributeMatch AttributeMatch::reversed() const {
    AttributeMatch out;
    for (const auto& [l, r] : pairs) out.pairs.emplace_back(r, l);
    return out;
}

AttributeMatch match_by_name(const Table& t, const Table& t2) {
    AttributeMatch m;
    for (const auto& a : t.attributes()) {
        if (t2.has_attr(a.id)) m.pairs.emplace_back(a.id, a.id);
    }
    return m;
}

AttributeMatch parse_match(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("match file: parse error at byte ") + std::to_string(e.byte) + ": " + e.what());
    }
    if (!j.is_array()) throw Error("match file: expected a JSON array of [left, right] pairs");
    AttributeMatch m;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& p = j[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string()) {
            throw Error("match file: entry " + std::to_string(i) + " is not a [left, right] string pair");
        }
        m.pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
    }
    return m;
}

AttributeMatch load_match(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read match file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_match(ss.str());
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

void validate_match(const AttributeMatch& m, const Table& t, const Table& t2) {
    std::unordered_set<std::string> seen_l, seen_r;
    for (const auto& [l, r] : m.pairs) {
        if (!t.has_attr(l)) throw Error("match references unknown left attribute '" + l + "'");
        if (!t2.has_attr(r)) throw Error("match references unknown right attribute '" + r + "'");
        if (!seen_l.insert(l).second) throw Error("left attribute '" + l + "' matched more than once");
        if (!seen_r.insert(r).second) throw Error("right attribute '" + r + "' matched more than once");
    }
}

ChangeSets compute_change_sets(const Table& t, const Table& t2, const AttributeMatch& m) {
    validate_match(m, t, t2);
    ChangeSets cs;
    for (const auto& a : t.attributes()) {
        (m.right_of(a.id) ? cs.left_nabla_attrs : cs.left_delta_attrs).push_back(a.id);
    }
    for (const auto& a : t2.attributes()) {
        (m.left_of(a.id) ? cs.right_nabla_attrs : cs.right_delta_attrs).push_back(a.id);
    }
    for (const auto& id : t.tuple_ids()) {
        (t2.find_row(id) ? cs.left_nabla_tuples : cs.left_delta_tuples).push_back(id);
    }
    for (const auto& id : t2.tuple_ids()) {
        (t.find_row(id) ? cs.right_nabla_tuples : cs.right_delta_tuples).push_back(id);
    }
    return cs;
}

bool projected_equal(const Table& t, std::size_t row, const Table& t2, std::size_t row2,
                     const AttributeMatch& m) {
    for (const auto& [l, r] : m.pairs) {
        if (!(t.at(row, t.attr_index(l)) == t2.at(row2, t2.attr_index(r)))) return false;
    }
    return true;
}

}  // namespace vdx
