#include "vdx/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace vdx {

namespace {

std::string_view strip(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double to_double(std::string_view key, std::string_view v) {
    auto x = parse_number(v);
    if (!x) throw Error("config key '" + std::string(key) + "': expected a number, got '" + std::string(v) + "'");
    return *x;
}

std::size_t to_size(std::string_view key, std::string_view v) {
    std::size_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw Error("config key '" + std::string(key) + "': expected a non-negative integer, got '" +
                    std::string(v) + "'");
    }
    return out;
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error("config key '" + std::string(key) + "': expected true or false, got '" + std::string(v) + "'");
}

struct Field {
    std::function<void(EngineConfig&, std::string_view, std::string_view)> set;
    std::function<std::string(const EngineConfig&)> get;
};

template <class T>
Field field(T EngineConfig::*member) {
    Field f;
    f.set = [member](EngineConfig& c, std::string_view k, std::string_view v) {
        if constexpr (std::is_same_v<T, double>) {
            c.*member = to_double(k, v);
        } else if constexpr (std::is_same_v<T, bool>) {
            c.*member = to_bool(k, v);
        } else if constexpr (std::is_same_v<T, int>) {
            c.*member = static_cast<int>(to_size(k, v));
        } else {
            c.*member = to_size(k, v);
        }
    };
    f.get = [member](const EngineConfig& c) {
        if constexpr (std::is_same_v<T, double>) {
            return format_number(c.*member);
        } else if constexpr (std::is_same_v<T, bool>) {
            return std::string(c.*member ? "true" : "false");
        } else {
            return std::to_string(c.*member);
        }
    };
    return f;
}

const std::map<std::string, Field, std::less<>>& fields() {
    static const std::map<std::string, Field, std::less<>> f = {
        {"early_stop_validity", field(&EngineConfig::early_stop_validity)},
        {"early_stop_explainability", field(&EngineConfig::early_stop_explainability)},
        {"idiopathic_threshold", field(&EngineConfig::idiopathic_threshold)},
        {"alpha", field(&EngineConfig::alpha)},
        {"poly_degree", field(&EngineConfig::poly_degree)},
        {"timeout_per_goal_s", field(&EngineConfig::timeout_per_goal_s)},
        {"categorical_ratio", field(&EngineConfig::categorical_ratio)},
        {"categorical_max", field(&EngineConfig::categorical_max)},
        {"overlap", field(&EngineConfig::overlap)},
        {"z_threshold", field(&EngineConfig::z_threshold)},
        {"iqr_factor", field(&EngineConfig::iqr_factor)},
        {"max_determinant", field(&EngineConfig::max_determinant)},
        {"max_origins", field(&EngineConfig::max_origins)},
        {"tree_max_depth", field(&EngineConfig::tree_max_depth)},
        {"tree_min_leaf", field(&EngineConfig::tree_min_leaf)},
        {"text_sample_rows", field(&EngineConfig::text_sample_rows)},
        {"workers", field(&EngineConfig::workers)},
        {"timings", field(&EngineConfig::timings)},
    };
    return f;
}

}  // namespace

void set_config_value(EngineConfig& cfg, std::string_view key, std::string_view value) {
    auto it = fields().find(key);
    if (it == fields().end()) throw Error("unknown config key '" + std::string(key) + "'");
    it->second.set(cfg, key, value);
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& [k, _] : fields()) out.push_back(k);
    return out;
}

EngineConfig parse_config(std::string_view text, EngineConfig base) {
    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error("config line " + std::to_string(lineno) + ": expected key = value");
        }
        try {
            set_config_value(base, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
        } catch (const Error& e) {
            throw Error("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    base.validate();
    return base;
}

EngineConfig load_config(const std::string& path, EngineConfig base) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str(), base);
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

std::string dump_config(const EngineConfig& cfg) {
    std::string out;
    for (const auto& [k, f] : fields()) out += k + " = " + f.get(cfg) + "\n";
    return out;
}

}  // namespace vdx
