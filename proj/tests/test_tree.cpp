#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>

#include "support.hpp"
#include "vdx/tree.hpp"

using namespace vdx;
using vdx::testing::data_path;
using vdx::testing::make_table;
using vdx::testing::numbers;
using vdx::testing::texts;

namespace {

std::size_t depth(const TreeNode& n) {
    if (n.leaf) return 0;
    return 1 + std::max(depth(*n.yes), depth(*n.no));
}

void thresholds(const TreeNode& n, std::vector<double>& out) {
    if (n.leaf) return;
    if (n.test == TreeNode::Test::Le) out.push_back(n.threshold);
    thresholds(*n.yes, out);
    thresholds(*n.no, out);
}

bool is_multiple(double v, double step) {
    double k = v / step;
    return std::abs(k - std::round(k)) < 1e-6;
}

}  // namespace

TEST_CASE("rating band thresholds are whole numbers") {
    auto t = load_table(data_path("fixtures/movies_t.csv"));
    auto t2 = load_table(data_path("fixtures/movies_t2.csv"));
    auto m = t.select_ids(t2.tuple_ids());
    std::vector<std::string> origin = {"a3"};
    auto cands = explain_categorical(m, origin, t2.column("a7"));
    REQUIRE(!cands.empty());
    CHECK(cands[0].validity == 1.0);
    std::vector<double> th;
    thresholds(*cands[0].expr.root, th);
    std::sort(th.begin(), th.end());
    CHECK(th == std::vector<double>{7, 8, 9});
}

TEST_CASE("round thresholds") {
    CHECK(round_threshold(6.5, 7.6) == 7.0);
    CHECK(round_threshold(139, 141) == 140.0);
    CHECK(round_threshold(0.21, 0.29) == doctest::Approx(0.25));
    CHECK(round_threshold(-3.5, -2.2) == -3.0);
    CHECK(round_threshold(5, 5) == 5.0);
}

TEST_CASE("round thresholds lie in range at the coarsest granularity") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-500, 500);
    std::uniform_real_distribution<double> w(-4, 2);
    for (int i = 0; i < 2000; ++i) {
        double lo = u(rng);
        double hi = lo + std::pow(10.0, w(rng));
        double r = round_threshold(lo, hi);
        REQUIRE(r >= lo);
        REQUIRE(r < hi);
        // the coarsest power of ten having a multiple in [lo, hi)
        double step = 1000;
        while (std::ceil(lo / step) * step >= hi) step /= 10;
        CHECK(is_multiple(r, step));
        double mid = lo + (hi - lo) / 2;
        double best = std::abs(r - mid);
        for (double k = std::ceil(lo / step); k * step < hi; ++k) CHECK(std::abs(k * step - mid) >= best - 1e-9);
    }
}

TEST_CASE("pure labels make a single leaf") {
    auto t = make_table({"x"}, {numbers({1, 2, 3})});
    auto fs = base_features(t, std::vector<std::string>{"x"});
    auto tree = fit_tree(fs, texts({"A", "A", "A"}));
    REQUIRE(tree.root->leaf);
    CHECK(tree.root->label == Value("A"));
}

TEST_CASE("depth is bounded") {
    std::vector<double> x;
    std::vector<Value> y;
    for (int i = 0; i < 64; ++i) {
        x.push_back(i);
        y.emplace_back(static_cast<double>(i % 2));
    }
    auto t = make_table({"x"}, {numbers(x)});
    auto fs = base_features(t, std::vector<std::string>{"x"});
    for (std::size_t d : {1u, 2u, 3u}) {
        TreeConfig cfg;
        cfg.max_depth = d;
        auto tree = fit_tree(fs, y, cfg);
        CHECK(depth(*tree.root) <= d);
    }
}

TEST_CASE("missing labels do not take part in the fit") {
    auto t = make_table({"x"}, {numbers({1, 2, 3, 4})});
    auto fs = base_features(t, std::vector<std::string>{"x"});
    std::vector<Value> y = {Value("lo"), Value("lo"), Value(), Value("hi")};
    auto tree = fit_tree(fs, y);
    auto pred = eval_expr(Expr{tree}, t);
    CHECK(pred[0] == Value("lo"));
    CHECK(pred[3] == Value("hi"));
    CHECK(tree_validity(tree, t, y) == 0.75);
}

TEST_CASE("categorical origins split on indicators") {
    auto t = make_table({"g"}, {texts({"Drama", "Action", "Drama", "Animation", "Action"})});
    std::vector<Value> y = texts({"adult", "adult", "adult", "kids", "adult"});
    std::vector<std::string> origin = {"g"};
    auto c = explain_categorical(t, origin, y);
    REQUIRE(!c.empty());
    CHECK(c[0].validity == 1.0);
    CHECK(render_expr(Expr{c[0].expr}).find("Animation") != std::string::npos);
}

TEST_CASE("x > y needs an interaction feature") {
    std::mt19937_64 rng(6);
    std::vector<double> x, z;
    std::vector<Value> y;
    for (int i = 0; i < 80; ++i) {
        double a = static_cast<double>(rng() % 1000) / 10;
        double b = static_cast<double>(rng() % 1000) / 10 + 0.05;
        x.push_back(a);
        z.push_back(b);
        y.emplace_back(a > b ? "x" : "z");
    }
    auto t = make_table({"x", "z"}, {numbers(x), numbers(z)});
    std::vector<std::string> origin = {"x", "z"};
    TreeConfig cfg;
    cfg.max_depth = 2;
    auto c = explain_categorical(t, origin, y, cfg, 1.0);
    REQUIRE(c.size() == 2);
    CHECK(c[0].validity < 1.0);
    CHECK(c[1].producer == "categorical:tree:inter");
    CHECK(c[1].validity == 1.0);
}
