#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "support.hpp"
#include "vdx/table.hpp"

using namespace vdx;
using vdx::testing::data_path;
using vdx::testing::make_table;
using vdx::testing::numbers;
using vdx::testing::texts;

TEST_CASE("loading a CSV keeps the id column as tuple ids") {
    auto t = parse_table("a0,a1,a2\nm1,x,1\nm2,y,2\nm3,z,3\n", "t");
    CHECK(t.tuple_ids() == std::vector<std::string>{"m1", "m2", "m3"});
    CHECK(t.attr_ids() == std::vector<std::string>{"a1", "a2"});
    CHECK(t.attribute(1).type == SemanticType::Numeric);
}

TEST_CASE("header-only file loads as an empty table") {
    auto t = parse_table("id,a,b\n", "t");
    CHECK(t.num_rows() == 0);
    CHECK(t.num_cols() == 2);
}

TEST_CASE("NaN and empty cells are Missing") {
    auto t = parse_table("id,x\nr1,NaN\nr2,\nr3,4\n", "t");
    CHECK(t.at(0, 0).is_missing());
    CHECK(t.at(1, 0).is_missing());
    CHECK(t.at(2, 0).number() == 4.0);
    CHECK(t.attribute(0).type == SemanticType::Numeric);
}

TEST_CASE("load errors name the problem") {
    CHECK_THROWS_AS(parse_table("id,a\nr1,1,2\n", "t"), Error);
    CHECK_THROWS_AS(parse_table("id,a\nr1,1\nr1,2\n", "t"), Error);
    CHECK_THROWS_AS(load_table("/nonexistent/file.csv"), Error);
    try {
        parse_table("id,a\nr1,1\nr1,2\n", "dup.csv");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("dup.csv") != std::string::npos);
    }
}

TEST_CASE("synthesized ids are row ordinals") {
    CsvOptions o;
    o.id_column = std::string(kSynthesizeIds);
    auto t = parse_table("a,b\n1,2\n3,4\n", "t", o);
    CHECK(t.tuple_ids() == std::vector<std::string>{"0", "1"});
    CHECK(t.num_cols() == 2);
}

TEST_CASE("type inference") {
    TypeInferenceConfig cfg;
    CHECK(infer_column_type(numbers({7.6, 8.2, 9.0}), cfg) == SemanticType::Numeric);
    CHECK(infer_column_type(texts({"Drama", "Action", "Drama", "Animation"}), cfg) == SemanticType::Categorical);
    CHECK(infer_column_type(texts({"The Godfather (R)", "Moana (U)", "Coco (PG)"}), cfg) == SemanticType::Textual);
    CHECK(infer_column_type(texts({"1", "x"}), cfg) == SemanticType::Textual);

    bool compat = false;
    infer_column_type(numbers({1, 2, 3, 2}), cfg, &compat);
    CHECK(compat);
    infer_column_type(numbers({1.5, 2, 3}), cfg, &compat);
    CHECK_FALSE(compat);

    std::vector<Value> many;
    for (int i = 0; i < 60; ++i) many.emplace_back("c" + std::to_string(i % 30));
    CHECK(infer_column_type(many, cfg) == SemanticType::Textual);  // 30 distinct > categorical_max
}

TEST_CASE("change sets of the movie example") {
    auto t = load_table(data_path("fixtures/movies_t.csv"));
    auto t2 = load_table(data_path("fixtures/movies_t2.csv"));
    auto cs = compute_change_sets(t, t2, match_by_name(t, t2));
    CHECK(cs.right_delta_attrs == std::vector<std::string>{"a5", "a6", "a7", "a8"});
    CHECK(cs.left_delta_tuples == std::vector<std::string>{"m4"});
    CHECK(cs.left_delta_attrs.empty());
    CHECK(cs.right_delta_tuples.empty());
}

TEST_CASE("identical tables have no changes; a renamed id shows on both sides") {
    auto t = load_table(data_path("fixtures/movies_t.csv"));
    CHECK(compute_change_sets(t, t, match_by_name(t, t)).empty());

    auto ids = t.tuple_ids();
    ids[1] = "m99";
    std::vector<std::vector<Value>> cols;
    for (std::size_t c = 0; c < t.num_cols(); ++c) cols.push_back(t.column(c));
    Table r("r", t.attributes(), ids, cols);
    auto cs = compute_change_sets(t, r, match_by_name(t, r));
    CHECK(cs.left_delta_tuples == std::vector<std::string>{"m2"});
    CHECK(cs.right_delta_tuples == std::vector<std::string>{"m99"});
}

TEST_CASE("dangling match entries are rejected") {
    auto t = make_table({"a"}, {numbers({1})});
    AttributeMatch m;
    m.pairs = {{"a", "zz"}};
    CHECK_THROWS_AS(compute_change_sets(t, t, m), Error);
    CHECK_THROWS_AS(parse_match("{\"a\": "), Error);
}

TEST_CASE("projection") {
    auto t = load_table(data_path("fixtures/movies_t.csv"));
    auto p = project(t, std::vector<std::string>{"a2"});
    CHECK(p.num_cols() == 1);
    CHECK(p.tuple_ids() == t.tuple_ids());
    CHECK(project(t, std::vector<std::string>{}).num_cols() == 0);
    auto q = project(t, std::vector<std::string>{"a2", "a3"});
    CHECK(q.column("a3") == t.column("a3"));
    CHECK_THROWS_AS(project(t, std::vector<std::string>{"nope"}), Error);
}

TEST_CASE("serialize and reload round-trips values") {
    auto t = make_table({"x", "s", "b"}, {{Value(1.25), Value(), Value(1e-7)},
                                          {Value("a,b"), Value("q\"uote"), Value()},
                                          {Value(true), Value(false), Value(true)}});
    auto back = parse_table(serialize_table(t), "t");
    REQUIRE(back.num_rows() == 3);
    for (std::size_t c = 0; c < t.num_cols(); ++c) CHECK(back.column(c) == t.column(c));
}

TEST_CASE("values_match tolerance") {
    CHECK(values_match(Value(1.0 + 1e-9), Value(1.0)));
    CHECK(values_match(Value(1e6 + 0.5), Value(1e6)));
    CHECK_FALSE(values_match(Value(1.01), Value(1.0)));
    CHECK(values_match(Value(), Value()));
    CHECK_FALSE(values_match(Value(), Value(0.0)));
    CHECK(values_match(Value("x"), Value("x")));
}

// Random tables and matches: the delta and nabla sets partition attributes and
// tuples, and swapping the sides exchanges the roles.
TEST_CASE("change sets partition and swap symmetrically") {
    std::mt19937_64 rng(17);
    for (int iter = 0; iter < 200; ++iter) {
        auto random_table = [&](const char* name, const std::string& prefix) {
            std::size_t nc = 1 + rng() % 5, nr = rng() % 8;
            std::vector<std::string> names;
            std::vector<std::vector<Value>> cols(nc);
            for (std::size_t c = 0; c < nc; ++c) names.push_back(prefix + std::to_string(c));
            std::set<std::string> idset;
            while (idset.size() < nr) idset.insert("r" + std::to_string(rng() % 12));
            std::vector<std::string> ids(idset.begin(), idset.end());
            for (auto& col : cols) {
                for (std::size_t r = 0; r < nr; ++r) col.emplace_back(static_cast<double>(rng() % 3));
            }
            std::vector<Attribute> attrs;
            for (const auto& n : names) attrs.push_back({n});
            return infer_types(Table(name, attrs, ids, cols));
        };
        auto t = random_table("t", "a");
        auto t2 = random_table("t2", "b");
        AttributeMatch m;
        std::size_t k = std::min(t.num_cols(), t2.num_cols());
        for (std::size_t i = 0; i < k; ++i) {
            if (rng() % 2) m.pairs.emplace_back(t.attribute(i).id, t2.attribute(i).id);
        }
        auto cs = compute_change_sets(t, t2, m);

        std::multiset<std::string> la(cs.left_delta_attrs.begin(), cs.left_delta_attrs.end());
        la.insert(cs.left_nabla_attrs.begin(), cs.left_nabla_attrs.end());
        auto ta = t.attr_ids();
        CHECK(la == std::multiset<std::string>(ta.begin(), ta.end()));
        std::multiset<std::string> ra(cs.right_delta_attrs.begin(), cs.right_delta_attrs.end());
        ra.insert(cs.right_nabla_attrs.begin(), cs.right_nabla_attrs.end());
        auto t2a = t2.attr_ids();
        CHECK(ra == std::multiset<std::string>(t2a.begin(), t2a.end()));
        std::multiset<std::string> lt(cs.left_delta_tuples.begin(), cs.left_delta_tuples.end());
        lt.insert(cs.left_nabla_tuples.begin(), cs.left_nabla_tuples.end());
        CHECK(lt == std::multiset<std::string>(t.tuple_ids().begin(), t.tuple_ids().end()));
        std::multiset<std::string> rt(cs.right_delta_tuples.begin(), cs.right_delta_tuples.end());
        rt.insert(cs.right_nabla_tuples.begin(), cs.right_nabla_tuples.end());
        CHECK(rt == std::multiset<std::string>(t2.tuple_ids().begin(), t2.tuple_ids().end()));

        auto sw = compute_change_sets(t2, t, m.reversed());
        CHECK(sw.left_delta_attrs == cs.right_delta_attrs);
        CHECK(sw.right_delta_attrs == cs.left_delta_attrs);
        CHECK(sw.left_delta_tuples == cs.right_delta_tuples);
        CHECK(sw.right_delta_tuples == cs.left_delta_tuples);
    }
}
