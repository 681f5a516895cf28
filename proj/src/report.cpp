#include "vdx/report.hpp"

#include <sstream>

#include "json.hpp"

namespace vdx {

namespace {

using nlohmann::ordered_json;

ordered_json optional_number(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json scores_json(const ScoreCard& s) {
    ordered_json j;
    j["validity"] = s.validity;
    j["generalizability"] = optional_number(s.generalizability);
    j["n_components"] = s.n_components;
    j["n_chunks"] = s.n_chunks;
    j["conciseness"] = s.conciseness;
    j["concentration"] = s.concentration;
    j["total_explainability"] = s.total_explainability;
    return j;
}

ordered_json explanation_json(const Explanation& e) {
    ordered_json j;
    j["origin"] = e.origin;
    j["expr"] = render_expr(e.expr);
    j["canonical"] = serialize_expr(e.expr);
    j["producer"] = e.producer;
    j["scores"] = scores_json(e.scores);
    if (!e.group_by.empty()) j["group_by"] = e.group_by;
    if (!e.covers.empty()) j["covers"] = e.covers;
    if (!e.note.empty()) j["note"] = e.note;
    return j;
}

ordered_json summary_json(const TupleSummary& s) {
    ordered_json j;
    j["validity"] = s.validity;
    j["false_removals"] = s.false_removals;
    j["generalizability"] = optional_number(s.generalizability);
    j["idiopathic"] = s.idiopathic;
    return j;
}

std::string fmt(double v) { return format_sig(v, 4); }

std::string join(const std::vector<std::string>& xs, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += xs[i];
    }
    return out;
}

}  // namespace

std::string render_explanation(const Explanation& e) {
    std::string origin;
    if (e.origin.empty()) {
        origin = "∅";
    } else if (e.origin.size() == 1) {
        origin = e.origin[0];
    } else {
        origin = "{" + join(e.origin, ", ") + "}";
    }
    return "(" + origin + ", " + render_expr(e.expr) + ")";
}

std::string report_json(const Report& r, const ReportOptions& opts) {
    ordered_json j;
    j["report_version"] = kReportVersion;
    j["left"] = r.left_name;
    j["right"] = r.right_name;
    j["reshape"] = r.reshape;
    const auto& c = r.changes;
    j["changes"] = {
        {"left_delta_attrs", c.left_delta_attrs},   {"right_delta_attrs", c.right_delta_attrs},
        {"left_nabla_attrs", c.left_nabla_attrs},   {"right_nabla_attrs", c.right_nabla_attrs},
        {"left_delta_tuples", c.left_delta_tuples}, {"right_delta_tuples", c.right_delta_tuples},
    };
    ordered_json goals = ordered_json::array();
    for (const auto& g : r.goals) {
        ordered_json gj;
        gj["name"] = g.goal.name;
        gj["side"] = g.goal.side;
        gj["kind"] = std::string(to_string(g.goal.kind));
        gj["idiopathic"] = g.idiopathic;
        gj["winner"] = g.winner ? ordered_json(*g.winner) : ordered_json(nullptr);
        gj["origins_tried"] = g.origins_tried;
        gj["early_stopped"] = g.early_stopped;
        if (!g.error.empty()) gj["error"] = g.error;
        if (opts.timings) gj["seconds"] = g.seconds;
        ordered_json cands = ordered_json::array();
        for (const auto& e : g.candidates) cands.push_back(explanation_json(e));
        gj["candidates"] = std::move(cands);
        goals.push_back(std::move(gj));
    }
    j["goals"] = std::move(goals);
    j["tuple_removal"] = r.tuple_removal ? summary_json(*r.tuple_removal) : ordered_json(nullptr);
    j["tuple_addition"] = r.tuple_addition ? summary_json(*r.tuple_addition) : ordered_json(nullptr);
    j["partial"] = r.partial();
    if (opts.timings) j["seconds"] = r.seconds;
    return j.dump(opts.indent) + "\n";
}

std::string report_text(const Report& r, const ReportOptions& opts) {
    std::ostringstream os;
    os << r.left_name << " -> " << r.right_name;
    if (r.reshape) os << " (reshaped)";
    os << "\n";
    const auto& c = r.changes;
    os << "added attributes: " << c.right_delta_attrs.size() << ", removed attributes: " << c.left_delta_attrs.size()
       << ", removed tuples: " << c.left_delta_tuples.size() << ", added tuples: " << c.right_delta_tuples.size()
       << "\n";
    if (r.goals.empty()) {
        os << "no changes\n";
        return os.str();
    }
    for (const auto& g : r.goals) {
        std::string name = g.goal.name;
        if (name.size() > 60) name = name.substr(0, 57) + "...";
        os << "\n[" << to_string(g.goal.kind) << "] " << name << "\n";
        if (!g.error.empty()) os << "  error: " << g.error << "\n";
        if (!g.winner) {
            os << "  idiopathic: no explanation\n";
            continue;
        }
        const auto& e = g.candidates[*g.winner];
        std::string shown = render_explanation(e);
        for (std::size_t p = shown.find('\n'); p != std::string::npos; p = shown.find('\n', p + 1)) {
            shown.insert(p + 1, "    ");
        }
        os << "  " << shown;
        if (g.idiopathic) os << "  [idiopathic]";
        os << "\n";
        os << "  validity " << fmt(e.scores.validity);
        os << ", generalizability " << (e.scores.generalizability ? fmt(*e.scores.generalizability) : "-");
        os << ", conciseness " << fmt(e.scores.conciseness) << ", concentration " << fmt(e.scores.concentration)
           << ", explainability " << fmt(e.scores.total_explainability) << "\n";
        os << "  producer " << e.producer << ", " << g.candidates.size() << " candidate(s)";
        if (opts.timings) os << ", " << fmt(g.seconds) << " s";
        os << "\n";
        if (!e.note.empty()) os << "  " << e.note << "\n";
    }
    auto summary = [&](const char* label, const TupleSummary& s, bool removal) {
        os << "\n" << label << ": validity " << fmt(s.validity);
        os << ", generalizability " << (s.generalizability ? fmt(*s.generalizability) : "-");
        if (removal) os << ", false removals " << s.false_removals;
        if (!s.idiopathic.empty()) os << ", unexplained " << join(s.idiopathic, ",");
        os << "\n";
    };
    if (r.tuple_removal) summary("tuple removal", *r.tuple_removal, true);
    if (r.tuple_addition) summary("tuple addition", *r.tuple_addition, false);
    if (opts.timings) os << "\ntotal " << fmt(r.seconds) << " s\n";
    return os.str();
}

}  // namespace vdx
