#include "vdx/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>
#include <set>

#include <Eigen/Dense>

#include "vdx/kernels.hpp"

namespace vdx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_constant_feature(const Feature& f) { return f.kind == FeatureKind::Agg; }

FeatureColumn column_for(const Table& t, FeaturePtr f) {
    auto values = eval_feature(*f, t);
    return {std::move(f), std::move(values)};
}

// Non-zero with at most `digits` significant digits, within a relative 1e-9.
bool is_round(double v, int digits = 2) {
    if (v == 0) return true;
    double mag = std::floor(std::log10(std::abs(v)));
    double scale = std::pow(10.0, digits - 1 - mag);
    double r = std::round(v * scale) / scale;
    return std::abs(r - v) <= 1e-9 * std::abs(v);
}

double snap_round(double v, int digits = 2) {
    if (v == 0) return 0;
    double mag = std::floor(std::log10(std::abs(v)));
    double scale = std::pow(10.0, digits - 1 - mag);
    return std::round(v * scale) / scale;
}

struct Design {
    std::vector<std::size_t> rows;          // fit rows
    std::vector<std::size_t> cols;          // indices into the feature set
    std::vector<std::vector<double>> x;     // column-major over fit rows
    std::vector<double> y;
};

Design build_design(const FeatureSet& fs, std::span<const Value> goal, const NumericConfig& cfg) {
    Design d;
    const std::size_t n = goal.size();
    std::vector<double> y(n, kNaN);
    std::vector<std::size_t> goal_rows;
    for (std::size_t i = 0; i < n; ++i) {
        if (auto v = goal[i].as_number()) {
            y[i] = *v;
            goal_rows.push_back(i);
        }
    }
    if (goal_rows.empty()) throw Error("goal has no numeric values");
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < fs.size(); ++c) {
        std::size_t missing = 0;
        for (auto r : goal_rows) missing += std::isnan(fs[c].values[r]) ? 1 : 0;
        if (static_cast<double>(missing) > cfg.max_missing_ratio * static_cast<double>(goal_rows.size())) continue;
        keep.push_back(c);
    }
    for (auto r : goal_rows) {
        bool ok = std::all_of(keep.begin(), keep.end(), [&](std::size_t c) { return !std::isnan(fs[c].values[r]); });
        if (ok) d.rows.push_back(r);
    }
    for (auto r : d.rows) d.y.push_back(y[r]);
    std::set<std::vector<double>> seen;
    for (auto c : keep) {
        std::vector<double> col;
        col.reserve(d.rows.size());
        for (auto r : d.rows) col.push_back(fs[c].values[r]);
        if (col.empty()) continue;
        bool constant = std::all_of(col.begin(), col.end(), [&](double v) { return v == col[0]; });
        if (constant) continue;
        if (!seen.insert(col).second) continue;
        d.cols.push_back(c);
        d.x.push_back(std::move(col));
        if (d.cols.size() >= cfg.max_features) break;
    }
    return d;
}

struct Scaled {
    std::vector<double> mean, scale;
    double ymean = 0, yscale = 1;
};

Scaled scale_design(const std::vector<std::vector<double>>& x, std::span<const double> y) {
    Scaled s;
    const double n = static_cast<double>(y.size());
    for (const auto& col : x) {
        double m = std::accumulate(col.begin(), col.end(), 0.0) / n;
        double v = 0;
        for (double a : col) v += (a - m) * (a - m);
        double sd = std::sqrt(v / n);
        s.mean.push_back(m);
        s.scale.push_back(sd > 0 ? sd : 1.0);
    }
    s.ymean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double v = 0;
    for (double a : y) v += (a - s.ymean) * (a - s.ymean);
    double sd = std::sqrt(v / n);
    s.yscale = sd > 0 ? sd : 1.0;
    return s;
}

// Coordinate descent on standardized data, warm-started from `beta`.
void lasso_cd(const std::vector<std::vector<double>>& z, const std::vector<double>& yz, double lambda,
              std::size_t max_iter, double tol, std::vector<double>& beta) {
    const std::size_t n = yz.size();
    const std::size_t p = z.size();
    std::vector<double> resid = yz;
    for (std::size_t j = 0; j < p; ++j) {
        if (beta[j] == 0) continue;
        for (std::size_t i = 0; i < n; ++i) resid[i] -= z[j][i] * beta[j];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t it = 0; it < max_iter; ++it) {
        double max_delta = 0;
        for (std::size_t j = 0; j < p; ++j) {
            double rho = 0;
            for (std::size_t i = 0; i < n; ++i) rho += z[j][i] * resid[i];
            rho = rho * inv_n + beta[j];
            double nb = rho > lambda ? rho - lambda : (rho < -lambda ? rho + lambda : 0.0);
            double delta = nb - beta[j];
            if (delta != 0) {
                for (std::size_t i = 0; i < n; ++i) resid[i] -= z[j][i] * delta;
                beta[j] = nb;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        if (max_delta < tol) break;
    }
}

std::vector<std::vector<double>> standardize(const std::vector<std::vector<double>>& x, const Scaled& s) {
    std::vector<std::vector<double>> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        z[j].reserve(x[j].size());
        for (double a : x[j]) z[j].push_back((a - s.mean[j]) / s.scale[j]);
    }
    return z;
}

// Least squares on the chosen columns; returns coefficients and intercept.
std::pair<std::vector<double>, double> ols(const std::vector<std::vector<double>>& x, std::span<const double> y,
                                           const std::vector<std::size_t>& support, bool intercept, double ridge = 0) {
    const auto n = static_cast<Eigen::Index>(y.size());
    const auto p = static_cast<Eigen::Index>(support.size());
    std::vector<double> coef(support.size(), 0.0);
    double ym = 0;
    if (intercept) ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    if (p == 0) return {coef, ym};
    Eigen::MatrixXd a(n, p);
    Eigen::VectorXd b(n);
    std::vector<double> mean(support.size(), 0.0), scale(support.size(), 1.0);
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto& col = x[support[static_cast<std::size_t>(j)]];
        double m = 0;
        if (intercept) m = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
        double ss = 0;
        for (double v : col) ss += (v - m) * (v - m);
        double sc = std::sqrt(ss / static_cast<double>(n));
        if (sc == 0) sc = 1;
        mean[static_cast<std::size_t>(j)] = m;
        scale[static_cast<std::size_t>(j)] = sc;
        for (Eigen::Index i = 0; i < n; ++i) a(i, j) = (col[static_cast<std::size_t>(i)] - m) / sc;
    }
    for (Eigen::Index i = 0; i < n; ++i) b(i) = y[static_cast<std::size_t>(i)] - ym;
    Eigen::VectorXd sol;
    if (ridge > 0) {
        Eigen::MatrixXd g = a.transpose() * a;
        g.diagonal().array() += ridge * static_cast<double>(n);
        sol = g.ldlt().solve(a.transpose() * b);
    } else {
        sol = a.colPivHouseholderQr().solve(b);
    }
    double icpt = ym;
    for (Eigen::Index j = 0; j < p; ++j) {
        auto k = static_cast<std::size_t>(j);
        coef[k] = sol(j) / scale[k];
        if (!std::isfinite(coef[k])) coef[k] = 0;
        icpt -= coef[k] * mean[k];
    }
    return {coef, intercept ? icpt : 0.0};
}

LinearExpr to_expr(const FeatureSet& fs, const Design& d, const std::vector<std::size_t>& support,
                   const std::vector<double>& coef, double intercept) {
    LinearExpr e;
    for (std::size_t k = 0; k < support.size(); ++k) {
        if (std::abs(coef[k]) < 1e-8) continue;
        e.terms.push_back({coef[k], fs[d.cols[support[k]]].feature});
    }
    e.intercept = std::abs(intercept) < 1e-8 ? 0.0 : intercept;
    return e;
}

struct Fitted {
    LinearExpr expr;
    double validity = -1;
};

// Rewrites y = c*f + b as an aggregate normalization of f when the constants
// coincide with statistics of f and are not themselves round numbers.
LinearExpr lift_aggregates(const LinearExpr& e, const Table& t, std::span<const Value> goal) {
    if (e.terms.size() != 1) return e;
    const auto& term = e.terms[0];
    const auto& f = term.feature;
    if (f->kind == FeatureKind::GroupAgg || f->kind == FeatureKind::Agg || f->kind == FeatureKind::OneHot) return e;
    double c = term.coef, b = e.intercept;
    if ((is_round(c) || is_round(1.0 / c)) && is_round(b)) return e;
    auto vals = eval_feature(*f, t);
    std::vector<double> present;
    for (double v : vals) {
        if (!std::isnan(v)) present.push_back(v);
    }
    if (present.empty()) return e;
    double sum = std::accumulate(present.begin(), present.end(), 0.0);
    double mean = sum / static_cast<double>(present.size());
    double mx = *std::max_element(present.begin(), present.end());
    double mn = *std::min_element(present.begin(), present.end());
    enum S { One, Sum, Mean, Max, Min, Range };
    enum M { Zero, MMean, MMin, MMax };
    struct Tmpl {
        M m;
        S s;
    };
    static const std::vector<Tmpl> templates = {
        {Zero, Sum},  {Zero, Mean},  {Zero, Max},   {Zero, Min},   {MMean, One},   {MMin, One},
        {MMax, One},  {MMin, Range}, {MMean, Range}, {MMean, Max}, {MMean, Sum},  {MMin, Max},
        {MMax, Range}, {Zero, Range},
    };
    auto sval = [&](S s) {
        switch (s) {
            case One: return 1.0;
            case Sum: return sum;
            case Mean: return mean;
            case Max: return mx;
            case Min: return mn;
            case Range: return mx - mn;
        }
        return 1.0;
    };
    auto mval = [&](M m) {
        switch (m) {
            case Zero: return 0.0;
            case MMean: return mean;
            case MMin: return mn;
            case MMax: return mx;
        }
        return 0.0;
    };
    for (const auto& tp : templates) {
        double sv = sval(tp.s);
        if (sv == 0) continue;
        double k = c * sv;
        double ebase = b + c * mval(tp.m);
        if (!is_round(k) || k == 0) continue;
        if (std::abs(ebase) > 1e-9 * std::max(1.0, std::abs(b)) && !is_round(ebase)) continue;
        double k_snap = snap_round(k);
        double e_snap = std::abs(ebase) <= 1e-9 * std::max(1.0, std::abs(b)) ? 0.0 : snap_round(ebase);
        FeaturePtr num = f;
        switch (tp.m) {
            case Zero: break;
            case MMean: num = binary_feature(BinaryOp::Sub, f, agg_feature(AggOp::Mean, f)); break;
            case MMin: num = binary_feature(BinaryOp::Sub, f, agg_feature(AggOp::Min, f)); break;
            case MMax: num = binary_feature(BinaryOp::Sub, f, agg_feature(AggOp::Max, f)); break;
        }
        FeaturePtr den;
        switch (tp.s) {
            case One: break;
            case Sum: den = agg_feature(AggOp::Sum, f); break;
            case Mean: den = agg_feature(AggOp::Mean, f); break;
            case Max: den = agg_feature(AggOp::Max, f); break;
            case Min: den = agg_feature(AggOp::Min, f); break;
            case Range:
                den = binary_feature(BinaryOp::Sub, agg_feature(AggOp::Max, f), agg_feature(AggOp::Min, f));
                break;
        }
        LinearExpr out;
        out.terms.push_back({k_snap, den ? binary_feature(BinaryOp::Div, num, den) : num});
        out.intercept = e_snap;
        if (linear_validity(out, t, goal) >= linear_validity(e, t, goal)) return out;
    }
    return e;
}

}  // namespace

std::string_view to_string(Extension e) {
    switch (e) {
        case Extension::Poly: return "poly";
        case Extension::Inter: return "inter";
        case Extension::Math: return "math";
        case Extension::Agg: return "agg";
    }
    return "?";
}

double linear_validity(const LinearExpr& e, const Table& t, std::span<const Value> goal) {
    if (goal.empty()) return 1.0;
    auto pred = eval_expr(Expr{e}, t);
    return static_cast<double>(kernels::count_matches(pred, goal, kernels::default_exec())) /
           static_cast<double>(goal.size());
}

FeatureSet make_feature_set(const Table& t, std::span<const FeaturePtr> features) {
    FeatureSet fs;
    fs.reserve(features.size());
    for (const auto& f : features) fs.push_back(column_for(t, f));
    return fs;
}

FeatureSet base_features(const Table& t, std::span<const std::string> attrs) {
    FeatureSet fs;
    for (const auto& a : attrs) {
        const auto& attr = t.attribute(t.attr_index(a));
        if (attr.type != SemanticType::Numeric) continue;
        fs.push_back(column_for(t, attr_feature(a)));
    }
    return fs;
}

FeatureSet extend_features(const Table& t, const FeatureSet& fs, Extension ext, const NumericConfig& cfg) {
    FeatureSet out = fs;
    std::vector<FeaturePtr> added;
    switch (ext) {
        case Extension::Poly:
            for (const auto& c : fs) {
                if (is_constant_feature(*c.feature)) continue;
                for (int k = 2; k <= cfg.poly_degree; ++k) added.push_back(pow_feature(c.feature, k));
            }
            break;
        case Extension::Inter:
            for (std::size_t i = 0; i < fs.size(); ++i) {
                for (std::size_t j = 0; j < fs.size(); ++j) {
                    if (i == j) continue;
                    bool ci = is_constant_feature(*fs[i].feature), cj = is_constant_feature(*fs[j].feature);
                    if (ci && cj) continue;
                    if (i < j && !ci && !cj) added.push_back(binary_feature(BinaryOp::Mul, fs[i].feature, fs[j].feature));
                    added.push_back(binary_feature(BinaryOp::Div, fs[i].feature, fs[j].feature));
                }
            }
            break;
        case Extension::Math:
            for (const auto& c : fs) {
                if (is_constant_feature(*c.feature)) continue;
                for (auto op : {UnaryOp::Log, UnaryOp::Sqrt, UnaryOp::Recip, UnaryOp::Exp}) {
                    added.push_back(unary_feature(op, c.feature));
                }
            }
            break;
        case Extension::Agg:
            for (const auto& c : fs) {
                if (is_constant_feature(*c.feature)) continue;
                for (auto op : {AggOp::Sum, AggOp::Mean, AggOp::Max, AggOp::Min}) {
                    added.push_back(agg_feature(op, c.feature));
                }
            }
            break;
    }
    for (auto& f : added) {
        if (out.size() >= cfg.max_features) break;
        out.push_back(column_for(t, std::move(f)));
    }
    return out;
}

FeatureSet extend_features(const Table& t, std::span<const std::string> origin, const ExtensionSet& exts,
                           const NumericConfig& cfg) {
    for (const auto& a : origin) {
        if (t.attribute(t.attr_index(a)).type != SemanticType::Numeric) {
            throw Error("extension over non-numeric attribute '" + a + "'");
        }
    }
    FeatureSet fs = base_features(t, origin);
    for (auto e : exts) fs = extend_features(t, fs, e, cfg);
    return fs;
}

std::vector<ExtensionSet> extension_schedule() {
    const std::vector<Extension> all = {Extension::Poly, Extension::Inter, Extension::Math, Extension::Agg};
    std::vector<ExtensionSet> out = {{}};
    for (auto e : all) out.push_back({e});
    for (auto a : all) {
        for (auto b : all) {
            if (a != b) out.push_back({a, b});
        }
    }
    return out;
}

std::vector<double> lasso_fit(const std::vector<std::vector<double>>& x, std::span<const double> y, double lambda,
                              std::size_t max_iter, double tol) {
    auto s = scale_design(x, y);
    auto z = standardize(x, s);
    std::vector<double> yz;
    for (double v : y) yz.push_back((v - s.ymean) / s.yscale);
    std::vector<double> beta(x.size(), 0.0);
    lasso_cd(z, yz, lambda, max_iter, tol, beta);
    std::vector<double> out;
    double icpt = s.ymean;
    for (std::size_t j = 0; j < x.size(); ++j) {
        double c = beta[j] * s.yscale / s.scale[j];
        out.push_back(c);
        icpt -= c * s.mean[j];
    }
    out.push_back(icpt);
    return out;
}

std::pair<LinearExpr, FitDiagnostics> fit_regressor(const Table& t, const FeatureSet& features,
                                                    std::span<const Value> goal, const NumericConfig& cfg) {
    if (goal.size() != t.num_rows()) throw Error("goal column misaligned with table '" + t.name() + "'");
    Design d = build_design(features, goal, cfg);
    if (d.rows.size() < 2) throw Error("fewer than two usable rows for regression");
    FitDiagnostics diag;
    diag.fit_rows = d.rows.size();
    // Degrees-of-freedom guard: a fit may use at most half as many components
    // as it has rows, so that tiny tables are not simply interpolated.
    const std::size_t max_components = std::max<std::size_t>(1, d.rows.size() / 2);

    // Validity straight from the feature columns, over every tuple.
    const std::size_t n = goal.size();
    std::vector<Value> pred(n);
    auto score_support = [&](const std::vector<std::size_t>& support, const std::vector<double>& coef, double icpt) {
        for (std::size_t i = 0; i < n; ++i) {
            double v = icpt;
            for (std::size_t k = 0; k < support.size(); ++k) v += coef[k] * features[d.cols[support[k]]].values[i];
            pred[i] = std::isfinite(v) ? Value(v) : Value(Missing{});
        }
        return static_cast<double>(kernels::count_matches(pred, goal, kernels::default_exec())) /
               static_cast<double>(n);
    };
    struct Fit {
        std::vector<std::size_t> support;
        std::vector<double> coef;
        double intercept = 0;
        double validity = -1;
        std::size_t components() const {
            std::size_t c = std::count_if(coef.begin(), coef.end(), [](double x) { return std::abs(x) >= 1e-8; });
            return c + (std::abs(intercept) >= 1e-8 ? 1 : 0);
        }
    };
    auto refit = [&](const std::vector<std::size_t>& support, bool intercept) {
        Fit f;
        f.support = support;
        std::tie(f.coef, f.intercept) = ols(d.x, d.y, support, intercept);
        f.validity = score_support(f.support, f.coef, f.intercept);
        return f;
    };
    // Backward pruning: drop the intercept, then each term, whenever the refit
    // keeps validity.
    auto prune = [&](std::vector<std::size_t> support) {
        Fit cur = refit(support, true);
        bool intercept = true;
        if (!support.empty()) {
            Fit f = refit(support, false);
            if (f.validity >= cur.validity - 1e-12) {
                cur = f;
                intercept = false;
            }
        }
        for (std::size_t k = 0; k < cur.support.size();) {
            auto trial = cur.support;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
            Fit f = refit(trial, intercept);
            if (f.validity >= cur.validity - 1e-12) {
                cur = f;
            } else {
                ++k;
            }
        }
        return cur;
    };

    Fit best;
    auto consider = [&](const Fit& f) {
        if (f.components() > max_components && f.components() > 1) return;
        if (f.validity > best.validity + 1e-12 ||
            (std::abs(f.validity - best.validity) <= 1e-12 && f.components() < best.components())) {
            best = f;
        }
    };

    consider(prune({}));
    if (!d.x.empty()) {
        auto s = scale_design(d.x, d.y);
        auto z = standardize(d.x, s);
        std::vector<double> yz;
        for (double v : d.y) yz.push_back((v - s.ymean) / s.yscale);
        std::vector<double> beta(d.x.size(), 0.0);
        std::vector<double> lambdas = cfg.lasso_lambdas;
        std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
        std::set<std::vector<std::size_t>> tried;
        const std::size_t cap = std::max<std::size_t>(2 * max_components, 4);
        for (double lambda : lambdas) {
            lasso_cd(z, yz, lambda, cfg.lasso_max_iter, cfg.lasso_tol, beta);
            std::vector<std::size_t> support;
            for (std::size_t j = 0; j < beta.size(); ++j) {
                if (beta[j] != 0) support.push_back(j);
            }
            if (support.size() > cap) {
                std::stable_sort(support.begin(), support.end(),
                                 [&](std::size_t a, std::size_t b) { return std::abs(beta[a]) > std::abs(beta[b]); });
                support.resize(cap);
                std::sort(support.begin(), support.end());
            }
            if (!tried.insert(support).second) continue;
            consider(prune(support));
        }
        if (best.validity < cfg.early_stop_validity) {
            std::vector<std::size_t> all(d.x.size());
            std::iota(all.begin(), all.end(), 0);
            if (all.size() + 1 <= max_components) {
                Fit f;
                f.support = all;
                std::tie(f.coef, f.intercept) = ols(d.x, d.y, all, true, cfg.ridge_lambda);
                f.validity = score_support(f.support, f.coef, f.intercept);
                double before = best.validity;
                consider(f);
                diag.used_ridge = best.validity > before;
            }
        }
    }

    Fitted chosen{to_expr(features, d, best.support, best.coef, best.intercept), best.validity};
    LinearExpr lifted = lift_aggregates(chosen.expr, t, goal);
    if (lifted.terms.size() == 1 && chosen.expr.terms.size() == 1 &&
        !feature_equal(*lifted.terms[0].feature, *chosen.expr.terms[0].feature)) {
        double lv = linear_validity(lifted, t, goal);
        if (lv >= chosen.validity - 1e-12) chosen = {lifted, lv};
    }
    diag.features_used = chosen.expr.terms.size();
    diag.validity = chosen.validity;
    return {chosen.expr, diag};
}

NumericRun explain_numeric(const Table& t, std::span<const std::string> origin, std::span<const Value> goal,
                           const NumericConfig& cfg, std::optional<Clock::time_point> deadline) {
    NumericRun run;
    std::set<std::string> seen;
    for (const auto& exts : extension_schedule()) {
        if (deadline && Clock::now() > *deadline) break;
        FeatureSet fs = extend_features(t, origin, exts, cfg);
        if (fs.empty()) continue;
        ++run.fits_attempted;
        std::pair<LinearExpr, FitDiagnostics> fit;
        try {
            fit = fit_regressor(t, fs, goal, cfg);
        } catch (const Error&) {
            continue;
        }
        std::string producer = "numeric";
        for (auto e : exts) producer += std::string(":") + std::string(to_string(e));
        auto key = serialize_expr(Expr{fit.first});
        if (seen.insert(key).second) {
            run.candidates.push_back({fit.first, producer, fit.second.validity, exts});
        }
        if (fit.second.validity >= cfg.early_stop_validity &&
            explainability(Expr{fit.first}).total >= cfg.early_stop_explainability) {
            run.early_stopped = true;
            break;
        }
    }
    return run;
}

std::vector<NumericCandidate> single_feature_fits(const Table& t, const FeatureSet& fs, std::span<const Value> goal,
                                                  const std::string& producer) {
    std::vector<NumericCandidate> out;
    for (const auto& fc : fs) {
        FeatureSet one = {fc};
        try {
            auto [e, diag] = fit_regressor(t, one, goal);
            if (diag.validity <= 0) continue;
            out.push_back({e, producer, diag.validity, {}});
        } catch (const Error&) {
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const NumericCandidate& a, const NumericCandidate& b) { return a.validity > b.validity; });
    std::vector<NumericCandidate> dedup;
    std::set<std::string> seen;
    for (auto& c : out) {
        if (seen.insert(serialize_expr(Expr{c.expr})).second) dedup.push_back(std::move(c));
        if (dedup.size() >= 5) break;
    }
    return dedup;
}

}  // namespace vdx
