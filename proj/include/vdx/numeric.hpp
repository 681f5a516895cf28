#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vdx/expr.hpp"
#include "vdx/table.hpp"

namespace vdx {

using Clock = std::chrono::steady_clock;

// A feature together with its values on the table it was built from.
struct FeatureColumn {
    FeaturePtr feature;
    std::vector<double> values;  // NaN = Missing
};
using FeatureSet = std::vector<FeatureColumn>;

enum class Extension { Poly, Inter, Math, Agg };
using ExtensionSet = std::vector<Extension>;  // applied left to right

std::string_view to_string(Extension e);

struct NumericConfig {
    int poly_degree = 2;
    std::vector<double> lasso_lambdas = {1e-1, 1e-2, 1e-3, 1e-4};
    double ridge_lambda = 1e-6;
    double max_missing_ratio = 0.5;
    double early_stop_validity = 0.95;
    double early_stop_explainability = 0.95;
    std::size_t max_features = 400;
    std::size_t lasso_max_iter = 2000;
    double lasso_tol = 1e-10;
};

FeatureSet make_feature_set(const Table& t, std::span<const FeaturePtr> features);
// Plain numeric attributes of `attrs`.
FeatureSet base_features(const Table& t, std::span<const std::string> attrs);
// Adds the extension's columns to `fs` (which keeps its own columns).
FeatureSet extend_features(const Table& t, const FeatureSet& fs, Extension ext, const NumericConfig& cfg = {});
// Applies the extensions consecutively, starting from the origin's numeric attributes.
FeatureSet extend_features(const Table& t, std::span<const std::string> origin, const ExtensionSet& exts,
                           const NumericConfig& cfg = {});
// Every extension set in ascending size: [], single extensions, then ordered pairs.
std::vector<ExtensionSet> extension_schedule();

struct FitDiagnostics {
    std::size_t fit_rows = 0;
    std::size_t features_used = 0;
    bool used_ridge = false;
    double validity = 0.0;  // over all tuples of the table
};

// Fits goal ~ features. Rows with Missing goal or feature values are left out of
// the fit; validity is measured on every tuple. Throws Error on fewer than two
// usable rows or an all-Missing goal.
std::pair<LinearExpr, FitDiagnostics> fit_regressor(const Table& t, const FeatureSet& features,
                                                    std::span<const Value> goal, const NumericConfig& cfg = {});

// Coordinate-descent Lasso on standardized columns; returns coefficients in the
// original scale followed by the intercept.
std::vector<double> lasso_fit(const std::vector<std::vector<double>>& x, std::span<const double> y, double lambda,
                              std::size_t max_iter, double tol);

struct NumericCandidate {
    LinearExpr expr;
    std::string producer;
    double validity = 0.0;
    ExtensionSet extensions;
};

struct NumericRun {
    std::vector<NumericCandidate> candidates;
    std::size_t fits_attempted = 0;
    bool early_stopped = false;
};

// Tries extension sets in ascending size until one reaches both thresholds.
NumericRun explain_numeric(const Table& t, std::span<const std::string> origin, std::span<const Value> goal,
                           const NumericConfig& cfg = {}, std::optional<Clock::time_point> deadline = {});

// Single-feature exact fits y = c*f + b over the given features, each scored;
// used for text and encoded features.
std::vector<NumericCandidate> single_feature_fits(const Table& t, const FeatureSet& fs, std::span<const Value> goal,
                                                  const std::string& producer);

double linear_validity(const LinearExpr& e, const Table& t, std::span<const Value> goal);

}  // namespace vdx
