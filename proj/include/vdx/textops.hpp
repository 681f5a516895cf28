#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vdx/expr.hpp"

// String operators used by string programs and text pattern features.
// Strings are treated as byte sequences; case and punctuation handling is ASCII.
namespace vdx::text {

using Field = std::optional<std::string>;  // nullopt = Missing
using Fields = std::vector<Field>;

// Applies op in place. Returns false (leaving fields untouched) when the op
// does not apply, e.g. a field index out of range or dropping the last field.
bool apply_op(const StringOp& op, Fields& fields);

std::string lower(std::string_view s);
std::string upper(std::string_view s);
std::string strip_punct(std::string_view s);
// Removes every whitespace-delimited token that contains a digit; spacing is kept.
std::string strip_digits(std::string_view s);
std::string strip_html(std::string_view s);
std::string remove_stopwords(std::string_view s);
// Porter-stems each alphabetic token (lowercased first); other tokens pass through.
std::string stem_words(std::string_view s);
std::string trim(std::string_view s);

std::string porter_stem(std::string_view word);
const std::vector<std::string>& stopwords();
bool is_stopword(std::string_view token);
bool is_punct(char c);

std::size_t edit_distance(std::string_view a, std::string_view b);
// Non-overlapping occurrences, left to right. An empty pattern counts 0.
std::size_t count_pattern(std::string_view s, std::string_view pattern);
// Stopword patterns are matched token-wise (case-insensitive), others as substrings.
std::size_t count_feature_pattern(std::string_view s, std::string_view pattern);
// Registered patterns: space, comma, question mark, percent, parentheses,
// digits, each ASCII punctuation mark and each stopword (prefixed "w:").
const std::vector<std::string>& pattern_library();
// Special pattern matching any decimal digit.
inline constexpr std::string_view kDigitPattern = "<digit>";

}  // namespace vdx::text
