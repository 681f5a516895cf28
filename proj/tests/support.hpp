#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vdx/table.hpp"

namespace vdx::testing {

// Builds a typed table with ids "r0", "r1", ...
inline Table make_table(const std::vector<std::string>& names, const std::vector<std::vector<Value>>& cols,
                        std::string name = "t") {
    std::vector<Attribute> attrs;
    for (const auto& n : names) attrs.push_back({n, SemanticType::Textual, false});
    std::vector<std::string> ids;
    std::size_t rows = cols.empty() ? 0 : cols[0].size();
    for (std::size_t i = 0; i < rows; ++i) ids.push_back("r" + std::to_string(i));
    return infer_types(Table(std::move(name), std::move(attrs), std::move(ids), cols));
}

inline std::vector<Value> numbers(const std::vector<double>& xs) {
    return {xs.begin(), xs.end()};
}

inline std::vector<Value> texts(const std::vector<std::string>& xs) {
    return {xs.begin(), xs.end()};
}

inline std::string data_path(const std::string& rel) { return std::string(VDX_DATA_DIR) + "/" + rel; }

}  // namespace vdx::testing
