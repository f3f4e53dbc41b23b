#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gdfuzz/parser.hpp"
#include "helpers.hpp"

using namespace gdfuzz;
using test_helpers::euclid_grammar;
using test_helpers::tree_equal;

TEST_CASE("parse: canonical euclid(0,2) derivation") {
    Grammar g = euclid_grammar();
    ParseTree t = parse(g, "euclid(0,2)");
    check_tree(g, t);
    CHECK(unparse(t) == "euclid(0,2)");

    REQUIRE(t.rule == find_rule(g, "start"));
    REQUIRE(t.children.size() == 5);
    CHECK(t.children[0].is_terminal());
    CHECK(t.children[0].bytes == "euclid(");
    CHECK(t.children[2].bytes == ",");
    CHECK(t.children[4].bytes == ")");

    // first integer: integer -> digit -> "0"
    const ParseTree& i1 = t.children[1];
    REQUIRE(i1.rule == find_rule(g, "integer"));
    CHECK(i1.alternative == 0);
    REQUIRE(i1.children.size() == 1);
    const ParseTree& d1 = i1.children[0];
    CHECK(d1.rule == find_rule(g, "digit"));
    CHECK(d1.alternative == 0);
    CHECK(unparse(d1) == "0");

    // second integer: integer -> digit -> nzdigit -> "2"
    const ParseTree& i2 = t.children[3];
    CHECK(i2.alternative == 0);
    const ParseTree& d2 = i2.children[0];
    CHECK(d2.rule == find_rule(g, "digit"));
    CHECK(d2.alternative == 1);
    const ParseTree& nz = d2.children[0];
    CHECK(nz.rule == find_rule(g, "nzdigit"));
    CHECK(nz.alternative == 1);
    CHECK(unparse(nz) == "2");
}

TEST_CASE("parse: trivial single terminal") {
    Grammar g = load_grammar("start = \"a\"");
    ParseTree t = parse(g, "a");
    REQUIRE(t.children.size() == 1);
    CHECK(t.children[0].bytes == "a");
    CHECK(unparse(t) == "a");
}

TEST_CASE("parse: failure offset") {
    Grammar g = euclid_grammar();
    try {
        parse(g, "euclid(x,1)");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset == 7);
    }
    CHECK_THROWS_AS(parse(g, ""), ParseError);
    CHECK_THROWS_AS(parse(g, "euclid(1,2"), ParseError);
}

TEST_CASE("parse: determinism") {
    Grammar g = euclid_grammar();
    CHECK(tree_equal(parse(g, "euclid(1032,45)"), parse(g, "euclid(1032,45)")));
}

TEST_CASE("parse: ambiguity resolves to the lowest alternative index") {
    Grammar g = load_grammar(
        "s = a | \"x\"\n"
        "a = \"x\"");
    ParseTree t = parse(g, "x");
    CHECK(t.alternative == 0); // via rule a, not the direct terminal
    CHECK(t.children[0].rule == find_rule(g, "a"));
}

TEST_CASE("parse: epsilon alternatives") {
    Grammar g = load_grammar(
        "s = a a \"x\"\n"
        "a = \"\" | \"y\"");
    ParseTree t = parse(g, "x");
    check_tree(g, t);
    CHECK(unparse(t) == "x");
    ParseTree t2 = parse(g, "yyx");
    CHECK(unparse(t2) == "yyx");
    ParseTree t3 = parse(g, "yx");
    CHECK(unparse(t3) == "yx");
}

TEST_CASE("parse: multi-byte terminals and seed-corpus round trips") {
    Grammar g = euclid_grammar();
    for (const auto& seed : test_helpers::kEuclidSeeds) {
        ParseTree t = parse(g, seed);
        check_tree(g, t);
        CHECK(unparse(t) == seed);
    }
    CHECK(unparse(parse(g, "euclid(21,4)")) == "euclid(21,4)");
}

TEST_CASE("unparse: single leaf") {
    CHECK(unparse(ParseTree::leaf("x")) == "x");
}

TEST_CASE("check_tree rejects malformed trees") {
    Grammar g = euclid_grammar();
    ParseTree t = parse(g, "euclid(0,2)");
    ParseTree broken = t;
    broken.children.pop_back(); // arity mismatch
    CHECK_THROWS_AS(check_tree(g, broken), GrammarError);

    ParseTree wrong_leaf = t;
    wrong_leaf.children[0].bytes = "euclid[";
    CHECK_THROWS_AS(check_tree(g, wrong_leaf), GrammarError);

    ParseTree bad_alt = t;
    bad_alt.alternative = 7;
    CHECK_THROWS_AS(check_tree(g, bad_alt), GrammarError);
}
