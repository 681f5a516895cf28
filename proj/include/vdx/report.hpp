#pragma once

#include <string>

#include "vdx/engine.hpp"

namespace vdx {

inline constexpr int kReportVersion = 1;

struct ReportOptions {
    bool timings = false;  // wall-clock seconds per goal and in total
    int indent = 2;
};

// JSON document with "report_version", the change sets, every goal with all of
// its scored candidates, the winner index and the tuple summaries. Without
// timings the output is a pure function of the inputs.
std::string report_json(const Report& r, const ReportOptions& opts = {});

// Human-readable summary: one block per goal in report order, the winner shown
// as "(origin, expression)" followed by its scores.
std::string report_text(const Report& r, const ReportOptions& opts = {});

// "(a2, a2 ÷ 60)"; several origin attributes are braced, none renders as ∅.
std::string render_explanation(const Explanation& e);

}  // namespace vdx
