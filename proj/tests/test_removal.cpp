#include "doctest.h"

#include <algorithm>
#include <random>

#include "support.hpp"
#include "vdx/removal.hpp"

using namespace vdx;
using vdx::testing::make_table;
using vdx::testing::numbers;
using vdx::testing::texts;

namespace {

AttributeMatch identity_match(const Table& t, const Table& t2) { return match_by_name(t, t2); }

std::vector<MarkerKind> kinds(const std::vector<Explanation>& es) {
    std::vector<MarkerKind> out;
    for (const auto& e : es) out.push_back(std::get<MarkerExpr>(e.expr.node).kind);
    return out;
}

Table drop(const Table& t, const std::string& attr, std::string name = "t2") {
    std::vector<std::string> keep;
    for (const auto& a : t.attr_ids()) {
        if (a != attr) keep.push_back(a);
    }
    auto p = project(t, keep);
    return Table(std::move(name), p.attributes(), p.tuple_ids(), [&] {
        std::vector<std::vector<Value>> cols;
        for (std::size_t c = 0; c < p.num_cols(); ++c) cols.push_back(p.column(c));
        return cols;
    }());
}

}  // namespace

TEST_CASE("mostly missing column is explained by contains-missing") {
    auto t = make_table({"k", "x"}, {numbers({1, 2, 3, 4, 5}), {Value(), Value(), Value(), Value(1.0), Value(2.0)}});
    auto t2 = drop(t, "x");
    auto es = explain_attr_removal("x", t, t2, identity_match(t, t2));
    REQUIRE(!es.empty());
    CHECK(kinds(es)[0] == MarkerKind::ContainsMissing);
    CHECK(es[0].scores.validity == 1.0);

    RemovalConfig strict;
    strict.alpha = 0.6;
    auto es2 = explain_attr_removal("x", t, t2, identity_match(t, t2), strict);
    CHECK(std::find(kinds(es2).begin(), kinds(es2).end(), MarkerKind::ContainsMissing) == kinds(es2).end());
}

TEST_CASE("a removed copy of a surviving column is a duplicate") {
    auto t = make_table({"a", "b"}, {numbers({1, 2, 3}), numbers({1, 2, 3})});
    auto t2 = drop(t, "b");
    auto es = explain_attr_removal("b", t, t2, identity_match(t, t2));
    REQUIRE(!es.empty());
    CHECK(kinds(es)[0] == MarkerKind::DuplicateOf);
    CHECK(std::get<MarkerExpr>(es[0].expr.node).refs == std::vector<std::string>{"a"});
    CHECK(render_expr(es[0].expr).find("a") != std::string::npos);
}

TEST_CASE("a renamed column is a duplicate") {
    auto t = make_table({"a", "b"}, {numbers({1, 2, 3}), texts({"x", "y", "z"})});
    auto t2 = make_table({"a", "c"}, {numbers({1, 2, 3}), texts({"x", "y", "z"})}, "t2");
    auto es = explain_attr_removal("b", t, t2, identity_match(t, t2));
    REQUIRE(!es.empty());
    CHECK(kinds(es)[0] == MarkerKind::DuplicateOf);
    CHECK(std::get<MarkerExpr>(es[0].expr.node).refs == std::vector<std::string>{"c"});
}

TEST_CASE("shuffled values overlap without being duplicates") {
    auto t = make_table({"a", "b"}, {numbers({1, 2, 3, 4}), texts({"p", "q", "r", "s"})});
    auto t2 = make_table({"a", "c"}, {numbers({1, 2, 3, 4}), texts({"q", "p", "s", "r"})}, "t2");
    auto es = explain_attr_removal("b", t, t2, identity_match(t, t2));
    auto k = kinds(es);
    CHECK(std::find(k.begin(), k.end(), MarkerKind::DuplicateOf) == k.end());
    CHECK(std::find(k.begin(), k.end(), MarkerKind::OverlapsWith) != k.end());
}

TEST_CASE("a derivable column is determined by what remains") {
    auto t = make_table({"genre", "family", "r"},
                        {texts({"Drama", "Action", "Drama", "Animation", "Action"}),
                         texts({"no", "no", "no", "yes", "no"}), numbers({1, 2, 3, 4, 5})});
    auto t2 = drop(t, "family");
    auto es = explain_attr_removal("family", t, t2, identity_match(t, t2));
    auto k = kinds(es);
    REQUIRE(!k.empty());
    CHECK(k.back() == MarkerKind::DeterminedBy);
    CHECK(std::get<MarkerExpr>(es.back().expr.node).refs == std::vector<std::string>{"genre"});
}

TEST_CASE("unique noise is idiopathic") {
    auto t = make_table({"g", "noise"}, {texts({"a", "a", "b", "b"}), numbers({0.13, 0.72, 0.55, 0.91})});
    auto t2 = drop(t, "noise");
    CHECK(explain_attr_removal("noise", t, t2, identity_match(t, t2)).empty());
}

TEST_CASE("matched or unknown attributes are rejected") {
    auto t = make_table({"a", "b"}, {numbers({1, 2}), numbers({3, 4})});
    CHECK_THROWS_AS(explain_attr_removal("a", t, t, identity_match(t, t)), Error);
    CHECK_THROWS_AS(explain_attr_removal("zz", t, t, identity_match(t, t)), Error);
}

TEST_CASE("multiset Jaccard") {
    CHECK(multiset_jaccard(numbers({1, 1, 2}), numbers({1, 2, 2})) == doctest::Approx(2.0 / 4));
    CHECK(multiset_jaccard(numbers({}), numbers({})) == 1.0);
    CHECK(multiset_jaccard(texts({"a"}), texts({"b"})) == 0.0);
}

// Every emitted marker satisfies its own rule, and raising alpha never adds
// explanations.
TEST_CASE("emitted markers hold and alpha is monotone") {
    std::mt19937_64 rng(31);
    for (int iter = 0; iter < 150; ++iter) {
        std::size_t nr = 2 + rng() % 12, nc = 2 + rng() % 3;
        std::vector<std::string> names;
        std::vector<std::vector<Value>> cols(nc);
        for (std::size_t c = 0; c < nc; ++c) {
            names.push_back("c" + std::to_string(c));
            for (std::size_t r = 0; r < nr; ++r) {
                if (rng() % 4 == 0) {
                    cols[c].emplace_back();
                } else {
                    cols[c].emplace_back(static_cast<double>(rng() % 3));
                }
            }
        }
        if (rng() % 3 == 0) cols[nc - 1] = cols[0];
        auto t = make_table(names, cols);
        std::string goal = names.back();
        auto t2 = drop(t, goal);
        auto m = identity_match(t, t2);
        RemovalConfig lo, hi;
        lo.alpha = 0.2;
        hi.alpha = 0.6;
        auto a = explain_attr_removal(goal, t, t2, m, lo);
        auto b = explain_attr_removal(goal, t, t2, m, hi);
        CHECK(b.size() <= a.size());
        for (const auto& e : a) CHECK(removal_holds(std::get<MarkerExpr>(e.expr.node), goal, t, t2, m, lo));
    }
}
