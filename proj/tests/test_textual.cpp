#include "doctest.h"

#include <algorithm>

#include "support.hpp"
#include "vdx/textual.hpp"

using namespace vdx;
using vdx::testing::data_path;
using vdx::testing::make_table;
using vdx::testing::texts;

namespace {

Table movies_matched() {
    auto t = load_table(data_path("fixtures/movies_t.csv"));
    auto t2 = load_table(data_path("fixtures/movies_t2.csv"));
    return t.select_ids(t2.tuple_ids());
}

void check_reproduces(const StringProg& p, const Table& t, const std::vector<Value>& goal) {
    auto out = eval_expr(Expr{p}, t);
    REQUIRE(out.size() == goal.size());
    for (std::size_t i = 0; i < goal.size(); ++i) CHECK(out[i] == goal[i]);
}

}  // namespace

TEST_CASE("certificate is synthesized from the title") {
    auto m = movies_matched();
    auto t2 = load_table(data_path("fixtures/movies_t2.csv"));
    std::vector<std::string> origin = {"a1"};
    auto goal = t2.column("a5");
    auto c = synthesize_text_to_text(m, origin, goal);
    CHECK(c.validity == 1.0);
    CHECK_FALSE(c.timed_out);
    check_reproduces(c.prog, m, goal);
    CHECK(c.prog.steps.size() <= 4);
}

TEST_CASE("clean title is lower, strip_punct, strip_digits, trim") {
    auto t = load_table(data_path("fixtures/features_t.csv"));
    auto t2 = load_table(data_path("fixtures/features_t2.csv"));
    std::vector<std::string> origin = {"a1"};
    auto goal = t2.column("a12");
    auto c = synthesize_text_to_text(t, origin, goal);
    CHECK(c.validity == 1.0);
    check_reproduces(c.prog, t, goal);
}

TEST_CASE("identity goal needs no steps") {
    auto t = make_table({"s"}, {texts({"ab", "cd ef", "g"})});
    std::vector<std::string> origin = {"s"};
    auto c = synthesize_text_to_text(t, origin, t.column("s"));
    CHECK(c.validity == 1.0);
    CHECK(c.prog.steps.empty());
}

TEST_CASE("an unreachable goal returns the best partial program") {
    auto t = make_table({"s"}, {texts({"alpha", "beta", "gamma"})});
    std::vector<std::string> origin = {"s"};
    TextConfig cfg;
    cfg.max_expansions = 500;
    auto c = synthesize_text_to_text(t, origin, texts({"ALPHA", "zzz", "GAMMA"}), cfg);
    CHECK(c.validity == doctest::Approx(2.0 / 3));
    CHECK(c.expansions <= 500);
}

TEST_CASE("a past deadline stops the search") {
    auto m = movies_matched();
    auto t2 = load_table(data_path("fixtures/movies_t2.csv"));
    std::vector<std::string> origin = {"a1"};
    auto c = synthesize_text_to_text(m, origin, t2.column("a5"), {}, Clock::now());
    CHECK(c.timed_out);
}

TEST_CASE("delimiters come from the origin and the goal context") {
    std::vector<std::string> origin = {"The Godfather (R)", "Moana (U)"};
    std::vector<std::string> goal = {"R", "U"};
    auto d = mine_delimiters(origin, goal);
    CHECK(std::find(d.begin(), d.end(), "(") != d.end());
    CHECK(std::find(d.begin(), d.end(), ")") != d.end());
    CHECK(std::find(d.begin(), d.end(), " ") != d.end());
}

TEST_CASE("title length is len(a1)") {
    auto m = movies_matched();
    auto t2 = load_table(data_path("fixtures/movies_t2.csv"));
    auto c = synthesize_text_to_numeric(m, "a1", t2.column("a8"));
    REQUIRE(!c.empty());
    CHECK(c[0].validity == 1.0);
    CHECK(render_expr(Expr{c[0].expr}) == "len(a1)");
}

TEST_CASE("word count is the space count plus one") {
    auto t = make_table({"s"}, {texts({"a b c", "one", "x y", "p q r s"})});
    std::vector<Value> goal = {Value(3.0), Value(1.0), Value(2.0), Value(4.0)};
    auto c = synthesize_text_to_numeric(t, "s", goal);
    REQUIRE(!c.empty());
    CHECK(c[0].validity == 1.0);
    auto out = eval_expr(Expr{c[0].expr}, t);
    for (std::size_t i = 0; i < goal.size(); ++i) CHECK(values_match(out[i], goal[i]));
}

TEST_CASE("question marks flag questions") {
    auto t = make_table({"s"}, {texts({"why?", "because", "how so?", "fine", "ok"})});
    std::vector<Value> goal = texts({"q", "s", "q", "s", "s"});
    auto c = synthesize_text_to_categorical(t, "s", goal);
    REQUIRE(!c.empty());
    CHECK(c[0].validity == 1.0);
    CHECK(c[0].producer == "textual:contains");
}

TEST_CASE("pattern features") {
    auto t = make_table({"s"}, {texts({"a, b", "c", "d, e, f"})});
    auto num = text_numeric_features(t, "s");
    auto ind = text_indicator_features(t, "s");
    CHECK(!num.empty());
    CHECK(!ind.empty());
    for (const auto& f : ind) {
        for (double v : f.values) CHECK((v == 0.0 || v == 1.0));
    }
}

TEST_CASE("fields can be merged in reverse order") {
    auto t = make_table({"name"}, {texts({"Lee, Ann", "Chen, Bo", "Diaz, Cy", "Egan, Di"})});
    std::vector<std::string> origin = {"name"};
    auto goal = texts({"Ann Lee", "Bo Chen", "Cy Diaz", "Di Egan"});
    auto c = synthesize_text_to_text(t, origin, goal);
    CHECK(c.validity == 1.0);
    check_reproduces(c.prog, t, goal);
}
