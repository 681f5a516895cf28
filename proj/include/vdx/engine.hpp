#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vdx/evaluator.hpp"
#include "vdx/numeric.hpp"
#include "vdx/table.hpp"

namespace vdx {

struct EngineConfig {
    double early_stop_validity = 0.95;
    double early_stop_explainability = 0.95;
    double idiopathic_threshold = 0.5;   // winners below this validity are idiopathic
    double alpha = 0.5;
    int poly_degree = 2;
    double timeout_per_goal_s = 60.0;
    double categorical_ratio = 0.1;
    std::size_t categorical_max = 20;
    double overlap = 0.9;
    double z_threshold = 3.0;
    double iqr_factor = 1.5;
    std::size_t max_determinant = 3;
    std::size_t max_origins = 6;
    std::size_t tree_max_depth = 4;
    std::size_t tree_min_leaf = 1;
    std::size_t text_sample_rows = 50;
    std::size_t workers = 0;             // 0 = available parallelism
    bool timings = false;                // include wall-clock timings in reports

    // Throws Error naming the first field outside its range.
    void validate() const;
};

struct GoalReport {
    Goal goal;
    std::vector<Explanation> candidates;
    std::optional<std::size_t> winner;
    bool idiopathic = false;
    std::string error;
    std::size_t origins_tried = 0;
    bool early_stopped = false;
    double seconds = 0.0;
};

struct TupleSummary {
    double validity = 1.0;
    std::size_t false_removals = 0;
    std::optional<double> generalizability;
    std::vector<std::string> idiopathic;
};

struct Report {
    std::string left_name, right_name;
    ChangeSets changes;
    bool reshape = false;
    std::vector<GoalReport> goals;   // attr-adds, attr-removes, tuple-removes, tuple-adds
    std::optional<TupleSummary> tuple_removal;
    std::optional<TupleSummary> tuple_addition;
    double seconds = 0.0;

    bool partial() const;            // some goal recorded an error
};

struct Holdout {
    const Table& left;
    const Table& right;
};

Report explain_versions(const Table& t, const Table& t2, const AttributeMatch& m, const EngineConfig& cfg = {},
                        std::optional<Holdout> holdout = {});

// Candidate generation for one added attribute. `t` holds the matched tuples
// and `goal` the new column aligned with them. Origins are tried in ranked
// order until a candidate meets both early-stop thresholds.
GoalReport explain_added_attribute(const Table& t, const std::string& goal_name, std::span<const Value> goal,
                                   const EngineConfig& cfg = {});

// Index of the winner: highest validity, then total explainability, then
// conciseness, then the smaller origin, then fewer fitted constants; remaining
// ties go to the smallest canonical expression, then producer, so the choice does not depend on
// candidate order. Throws Error on an empty list.
std::size_t select_explanation(std::span<const Explanation> cands);

}  // namespace vdx
