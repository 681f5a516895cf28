#include "doctest.h"

#include <functional>
#include <random>

#include "vdx/textops.hpp"

using namespace vdx;
using namespace vdx::text;

namespace {

StringOp op(StrOpKind k, std::size_t col = 0, std::string arg = {}) {
    StringOp o;
    o.kind = k;
    o.col = col;
    o.arg = std::move(arg);
    return o;
}

// Plain recursive Levenshtein with memoization.
std::size_t naive_distance(const std::string& a, const std::string& b) {
    std::vector<std::vector<long>> memo(a.size() + 1, std::vector<long>(b.size() + 1, -1));
    std::function<long(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> long {
        if (i == 0) return static_cast<long>(j);
        if (j == 0) return static_cast<long>(i);
        if (memo[i][j] >= 0) return memo[i][j];
        long best = std::min(go(i - 1, j) + 1, go(i, j - 1) + 1);
        best = std::min(best, go(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1));
        return memo[i][j] = best;
    };
    return static_cast<std::size_t>(go(a.size(), b.size()));
}

}  // namespace

TEST_CASE("certificate is extracted by split and drop") {
    Fields f = {std::string("The Godfather (R)")};
    REQUIRE(apply_op(op(StrOpKind::Split, 0, "("), f));
    REQUIRE(apply_op(op(StrOpKind::Drop, 0), f));
    REQUIRE(apply_op(op(StrOpKind::Split, 0, ")"), f));
    REQUIRE(apply_op(op(StrOpKind::Drop, 1), f));
    REQUIRE(f.size() == 1);
    CHECK(*f[0] == "R");
}

TEST_CASE("split without the delimiter leaves an empty right field") {
    Fields f = {std::string("abc")};
    REQUIRE(apply_op(op(StrOpKind::Split, 0, "|"), f));
    CHECK(f == Fields{std::string("abc"), std::string()});
}

TEST_CASE("ops that do not apply leave fields untouched") {
    Fields f = {std::string("x")};
    CHECK_FALSE(apply_op(op(StrOpKind::Drop, 0), f));
    CHECK_FALSE(apply_op(op(StrOpKind::Lower, 3), f));
    CHECK_FALSE(apply_op(op(StrOpKind::Split, 0, ""), f));
    StringOp m = op(StrOpKind::Merge, 0);
    m.col2 = 0;
    CHECK_FALSE(apply_op(m, f));
    CHECK(f == Fields{std::string("x")});
}

TEST_CASE("missing fields stay missing") {
    Fields f = {std::nullopt, std::string("b")};
    REQUIRE(apply_op(op(StrOpKind::Upper, 0), f));
    CHECK_FALSE(f[0].has_value());
    StringOp m = op(StrOpKind::Merge, 0, "-");
    m.col2 = 1;
    REQUIRE(apply_op(m, f));
    CHECK(f.size() == 1);
    CHECK_FALSE(f[0].has_value());
}

TEST_CASE("merge and substring") {
    Fields f = {std::string("ab"), std::string("cd")};
    StringOp m = op(StrOpKind::Merge, 1, "+");
    m.col2 = 0;
    REQUIRE(apply_op(m, f));
    CHECK(*f[0] == "cd+ab");
    StringOp s = op(StrOpKind::Substring, 0);
    s.i = 1;
    s.j = 3;
    REQUIRE(apply_op(s, f));
    CHECK(*f[0] == "d+");
    s.i = 10;
    s.j = 12;
    REQUIRE(apply_op(s, f));
    CHECK(*f[0] == "");
}

TEST_CASE("cleaning operators") {
    CHECK(lower("MoAna") == "moana");
    CHECK(upper("r15") == "R15");
    CHECK(strip_punct("Coco, (PG)!") == "Coco PG");
    CHECK(strip_digits("The Good Place 7 (R13)") == "The Good Place  ");
    CHECK(strip_html("<b>bold</b> text") == "bold text");
    CHECK(trim("  x y \t") == "x y");
    CHECK(remove_stopwords("the cat and the hat") == "cat hat");
    CHECK(is_stopword("The"));
    CHECK_FALSE(is_stopword("cat"));
}

TEST_CASE("porter stemmer reference words") {
    CHECK(porter_stem("caresses") == "caress");
    CHECK(porter_stem("ponies") == "poni");
    CHECK(porter_stem("cats") == "cat");
    CHECK(porter_stem("agreed") == "agre");
    CHECK(porter_stem("hopping") == "hop");
    CHECK(porter_stem("relational") == "relat");
    CHECK(porter_stem("happy") == "happi");
    CHECK(porter_stem("generalizations") == "gener");
    CHECK(porter_stem("is") == "is");
    CHECK(stem_words("Running dogs 42") == "run dog 42");
}

TEST_CASE("pattern counting") {
    CHECK(count_pattern("aaaa", "aa") == 2);
    CHECK(count_pattern("abc", "") == 0);
    CHECK(count_feature_pattern("a1b22", kDigitPattern) == 3);
    CHECK(count_feature_pattern("The cat and the hat", "w:the") == 2);
    CHECK(count_feature_pattern("other", "w:the") == 0);
    CHECK(count_feature_pattern("a b c", " ") == 2);
    const auto& lib = pattern_library();
    CHECK(std::find(lib.begin(), lib.end(), std::string(" ")) != lib.end());
    CHECK(std::find(lib.begin(), lib.end(), std::string("w:the")) != lib.end());
}

TEST_CASE("edit distance matches a recursive oracle") {
    std::mt19937_64 rng(4);
    auto rand_str = [&] {
        std::string s;
        std::size_t n = rng() % 9;
        for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>('a' + rng() % 3));
        return s;
    };
    for (int i = 0; i < 400; ++i) {
        auto a = rand_str(), b = rand_str();
        CHECK(edit_distance(a, b) == naive_distance(a, b));
        CHECK(edit_distance(a, b) == edit_distance(b, a));
    }
    CHECK(edit_distance("kitten", "sitting") == 3);
}
