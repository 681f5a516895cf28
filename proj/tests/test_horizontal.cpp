#include "doctest.h"

#include <random>
#include <set>

#include "support.hpp"
#include "vdx/horizontal.hpp"

using namespace vdx;
using vdx::testing::data_path;
using vdx::testing::make_table;
using vdx::testing::numbers;
using vdx::testing::texts;

namespace {

Table keep_rows(const Table& t, const std::vector<bool>& keep, std::string name = "t2") {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i]) rows.push_back(i);
    }
    auto s = t.select_rows(rows);
    std::vector<std::vector<Value>> cols;
    for (std::size_t c = 0; c < s.num_cols(); ++c) cols.push_back(s.column(c));
    return Table(std::move(name), s.attributes(), s.tuple_ids(), cols);
}

TupleRemovalResult run(const Table& t, const Table& t2) {
    auto m = match_by_name(t, t2);
    return explain_tuple_removal(compute_change_sets(t, t2, m), t, t2, m);
}

}  // namespace

TEST_CASE("the movie without a runtime is removed for missing data") {
    auto t = load_table(data_path("fixtures/movies_t.csv"));
    auto t2 = load_table(data_path("fixtures/movies_t2.csv"));
    auto r = run(t, t2);
    REQUIRE(r.rules.size() == 1);
    CHECK(render_expr(r.rules[0].expr) == "has_NaN");
    CHECK(r.rules[0].covers == std::vector<std::string>{"m4"});
    CHECK(r.idiopathic.empty());
    CHECK(r.validity == 1.0);
    CHECK(r.false_removals == 0);
}

TEST_CASE("a marker that would remove a survivor is not used") {
    auto t = make_table({"x", "g"}, {{Value(), Value(1.0), Value(), Value(3.0)}, texts({"a", "a", "b", "b"})});
    auto t2 = keep_rows(t, {false, true, true, true});
    auto r = run(t, t2);
    for (const auto& rule : r.rules) CHECK(render_expr(rule.expr) != "has_NaN");
    CHECK(r.false_removals == 0);
}

TEST_CASE("removed exact duplicates") {
    auto t = make_table({"x", "y"}, {numbers({1, 2, 1, 3}), numbers({5, 6, 5, 7})});
    auto t2 = keep_rows(t, {true, true, false, true});
    auto r = run(t, t2);
    REQUIRE(!r.rules.empty());
    CHECK(r.rules[0].producer == "horizontal:duplicate-of");
    CHECK(r.rules[0].covers == std::vector<std::string>{"r2"});
    CHECK(r.validity == 1.0);
}

TEST_CASE("a far outlier is removed by the z rule") {
    std::vector<double> x;
    for (int i = 0; i < 30; ++i) x.push_back(10 + (i % 5));
    x.push_back(1000);
    auto t = make_table({"x"}, {numbers(x)});
    std::vector<bool> keep(x.size(), true);
    keep.back() = false;
    auto r = run(t, keep_rows(t, keep));
    REQUIRE(!r.rules.empty());
    CHECK(r.rules[0].producer == "horizontal:outlier-z");
    CHECK(r.validity == 1.0);
}

TEST_CASE("a threshold filter is learned as a predicate") {
    std::mt19937_64 rng(40);
    std::vector<double> rating;
    std::vector<Value> genre;
    const char* genres[] = {"Drama", "Action", "Animation", "Comedy"};
    std::vector<bool> keep;
    for (int i = 0; i < 60; ++i) {
        double v = static_cast<double>(10 + rng() % 90) / 10;
        rating.push_back(v);
        genre.emplace_back(genres[rng() % 4]);
        keep.push_back(v > 6.5);
    }
    auto t = make_table({"rating", "genre"}, {numbers(rating), genre});
    auto r = run(t, keep_rows(t, keep));
    REQUIRE(!r.rules.empty());
    CHECK(r.rules.back().producer == "horizontal:predicate");
    CHECK(r.validity == 1.0);
    CHECK(r.false_removals == 0);
    CHECK(r.idiopathic.empty());
}

TEST_CASE("nothing removed is trivially valid") {
    auto t = make_table({"x"}, {numbers({1, 2})});
    auto r = run(t, t);
    CHECK(r.rules.empty());
    CHECK(r.validity == 1.0);
}

TEST_CASE("reconstruction counts correct and false removals") {
    auto t = make_table({"x"}, {{Value(), Value(1.0), Value(), Value(3.0)}});
    auto t2 = keep_rows(t, {false, true, true, true});
    Explanation rule;
    rule.goal = {"r0", "left", GoalKind::TupleRemove};
    rule.expr = Expr{MarkerExpr{MarkerKind::ContainsMissing, {}}};
    std::vector<Explanation> rules = {rule};
    auto rec = reconstruct_and_score(rules, t, t2, match_by_name(t, t2));
    CHECK(rec.validity == 1.0);
    CHECK(rec.false_removals == 1);
    CHECK(rec.removed == std::vector<std::string>{"r0", "r2"});
}

TEST_CASE("added copies are bootstrapped; new tuples are idiopathic") {
    auto t = make_table({"x", "y"}, {numbers({1, 2, 3}), texts({"a", "b", "c"})});
    std::vector<std::string> ids = {"r0", "r1", "r2", "r0_b1", "r1_b1", "n1"};
    std::vector<std::vector<Value>> cols = {numbers({1, 2, 3, 1, 2, 9}), texts({"a", "b", "c", "a", "b", "z"})};
    Table t2("t2", t.attributes(), ids, cols);
    auto m = match_by_name(t, t2);
    auto r = explain_tuple_addition(compute_change_sets(t, t2, m), t, t2, m);
    REQUIRE(r.rules.size() == 1);
    CHECK(r.rules[0].covers == std::vector<std::string>{"r0_b1", "r1_b1"});
    CHECK(r.idiopathic == std::vector<std::string>{"n1"});
    CHECK(r.validity == doctest::Approx(2.0 / 3));
    CHECK(bootstrap_score(t, t2, m) == doctest::Approx(2.0 / 3));
    CHECK_FALSE(bootstrap_score(t, t, match_by_name(t, t)).has_value());
}

// Random filters over random tables: every removed tuple is either covered by
// exactly one rule or idiopathic, and marker rules never touch survivors.
TEST_CASE("rules partition the removed tuples") {
    std::mt19937_64 rng(41);
    for (int iter = 0; iter < 60; ++iter) {
        std::size_t nr = 4 + rng() % 30;
        std::vector<Value> x, g;
        std::vector<bool> keep;
        for (std::size_t i = 0; i < nr; ++i) {
            x.emplace_back(rng() % 10 == 0 ? Value() : Value(static_cast<double>(rng() % 20)));
            g.emplace_back(std::string(1, static_cast<char>('a' + rng() % 3)));
            keep.push_back(rng() % 3 != 0);
        }
        g[0] = g[1] = Value("a");
        auto t = make_table({"x", "g"}, {x, g});
        auto t2 = keep_rows(t, keep);
        auto r = run(t, t2);
        std::multiset<std::string> seen(r.idiopathic.begin(), r.idiopathic.end());
        for (const auto& rule : r.rules) {
            seen.insert(rule.covers.begin(), rule.covers.end());
            if (rule.producer != "horizontal:predicate") {
                auto flags = rule_flags(rule, t, match_by_name(t, t2));
                for (std::size_t i = 0; i < nr; ++i) CHECK((!flags[i] || !keep[i]));
            }
        }
        std::multiset<std::string> gone;
        for (std::size_t i = 0; i < nr; ++i) {
            if (!keep[i]) gone.insert(t.tuple_ids()[i]);
        }
        CHECK(seen == gone);
    }
}
