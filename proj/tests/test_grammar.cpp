#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gdfuzz/grammar.hpp"
#include "helpers.hpp"

using namespace gdfuzz;
using test_helpers::euclid_grammar;

TEST_CASE("load: single terminal rule") {
    Grammar g = load_grammar("start = \"a\"");
    REQUIRE(g.rules.size() == 1);
    REQUIRE(g.rules[0].alternatives.size() == 1);
    CHECK(g.rules[0].alternatives[0].probability == 1.0);
    CHECK(g.rules[0].alternatives[0].symbols[0].terminal);
    CHECK(g.rules[0].alternatives[0].symbols[0].text == "a");
    CHECK(g.start_rule == 0);
}

TEST_CASE("load: euclid grammar annotations") {
    Grammar g = euclid_grammar();
    std::size_t digit = find_rule(g, "digit");
    REQUIRE(digit != kNoRule);
    REQUIRE(g.rules[digit].alternatives.size() == 2);
    CHECK(g.rules[digit].alternatives[0].probability == doctest::Approx(0.09).epsilon(1e-12));
    CHECK(g.rules[digit].alternatives[1].probability == doctest::Approx(0.91).epsilon(1e-12));
    CHECK(g.rules[digit].alternatives[0].symbols[0].text == "0");
    CHECK(g.rules[digit].alternatives[1].symbols[0].text == "nzdigit");
}

TEST_CASE("load: unannotated alternatives get uniform probabilities") {
    Grammar g = load_grammar("d = \"0\" | \"1\"");
    CHECK(g.rules[0].alternatives[0].probability == 0.5);
    CHECK(g.rules[0].alternatives[1].probability == 0.5);
}

TEST_CASE("load: partially annotated alternatives share the residual mass") {
    Grammar g = load_grammar("d = @0.5 \"0\" | \"1\" | \"2\"");
    CHECK(g.rules[0].alternatives[0].probability == doctest::Approx(0.5));
    CHECK(g.rules[0].alternatives[1].probability == doctest::Approx(0.25));
    CHECK(g.rules[0].alternatives[2].probability == doctest::Approx(0.25));
}

TEST_CASE("load: comments, continuations, and escapes") {
    Grammar g = load_grammar(
        "# leading comment\n"
        "s = \"a#b\" t # trailing comment\n"
        "  | \"\\\"\\\\\\n\\t\\x41\"\n"
        "t = \"\" # epsilon-like empty terminal\n");
    REQUIRE(g.rules.size() == 2);
    REQUIRE(g.rules[0].alternatives.size() == 2);
    CHECK(g.rules[0].alternatives[0].symbols[0].text == "a#b");
    CHECK(g.rules[0].alternatives[1].symbols[0].text == "\"\\\n\tA");
    CHECK(g.rules[1].alternatives[0].symbols[0].text == "");
}

TEST_CASE("load errors") {
    CHECK_THROWS_AS(load_grammar("s = t"), GrammarError);              // undefined nonterminal
    CHECK_THROWS_AS(load_grammar("s = @0.7 \"a\" | @0.7 \"b\""), GrammarError); // mass > 1
    CHECK_THROWS_AS(load_grammar("s \"a\""), GrammarError);            // missing '='
    CHECK_THROWS_AS(load_grammar("s = \"a"), GrammarError);            // unterminated quote
    // line number is reported
    try {
        load_grammar("a = \"x\"\nb = c");
        FAIL("expected GrammarError");
    } catch (const GrammarError& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
}

TEST_CASE("save/load round-trip on euclid") {
    Grammar g = euclid_grammar();
    Grammar h = load_grammar(save_grammar(g));
    REQUIRE(h.rules.size() == g.rules.size());
    for (std::size_t i = 0; i < g.rules.size(); ++i) {
        CHECK(h.rules[i].name == g.rules[i].name);
        REQUIRE(h.rules[i].alternatives.size() == g.rules[i].alternatives.size());
        for (std::size_t j = 0; j < g.rules[i].alternatives.size(); ++j)
            CHECK(h.rules[i].alternatives[j].probability ==
                  doctest::Approx(g.rules[i].alternatives[j].probability).epsilon(1e-9));
    }
}

TEST_CASE("save/load round-trip with epsilon alternative") {
    Grammar g = load_grammar("s = \"x\" | \"\"");
    Grammar h = load_grammar(save_grammar(g));
    REQUIRE(h.rules[0].alternatives.size() == 2);
    CHECK(h.rules[0].alternatives[1].symbols[0].text.empty());
}

TEST_CASE("save/load keeps thirds within serialization precision") {
    Grammar g = load_grammar("s = \"a\" | \"b\" | \"c\"");
    Grammar h = load_grammar(save_grammar(g));
    double sum = 0;
    for (const auto& alt : h.rules[0].alternatives) {
        CHECK(std::fabs(alt.probability - 1.0 / 3.0) <= 1e-9);
        sum += alt.probability;
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-9);
    validate(h);
}

TEST_CASE("normalize") {
    Grammar g = load_grammar("s = \"a\" | \"b\"");
    g.rules[0].alternatives[0].probability = 2.0;
    g.rules[0].alternatives[1].probability = 2.0;
    Grammar n = normalize(g);
    CHECK(n.rules[0].alternatives[0].probability == 0.5);
    CHECK(n.rules[0].alternatives[1].probability == 0.5);

    g.rules[0].alternatives[0].probability = 0.18;
    g.rules[0].alternatives[1].probability = 1.82;
    n = normalize(g);
    CHECK(n.rules[0].alternatives[0].probability == doctest::Approx(0.09));
    CHECK(n.rules[0].alternatives[1].probability == doctest::Approx(0.91));

    Grammar one = load_grammar("s = \"a\"");
    CHECK(normalize(one).rules[0].alternatives[0].probability == 1.0);

    g.rules[0].alternatives[0].probability = 0.0;
    g.rules[0].alternatives[1].probability = 0.0;
    CHECK_THROWS_AS(normalize(g), GrammarError);
}

TEST_CASE("invert_probabilities") {
    Grammar g = euclid_grammar();
    std::size_t digit = find_rule(g, "digit");
    Grammar inv = invert_probabilities(g);
    CHECK(inv.rules[digit].alternatives[0].probability == doctest::Approx(0.91));
    CHECK(inv.rules[digit].alternatives[1].probability == doctest::Approx(0.09));
    // single-alternative rule unchanged
    CHECK(inv.rules[find_rule(g, "start")].alternatives[0].probability == 1.0);

    Grammar u = load_grammar("s = \"a\" | \"b\"");
    Grammar iu = invert_probabilities(u);
    CHECK(iu.rules[0].alternatives[0].probability == 0.5);
    CHECK(iu.rules[0].alternatives[1].probability == 0.5);

    Grammar t = load_grammar("s = @0.2 \"a\" | @0.3 \"b\" | @0.5 \"c\"");
    Grammar it = invert_probabilities(t);
    CHECK(it.rules[0].alternatives[0].probability == doctest::Approx(0.4));
    CHECK(it.rules[0].alternatives[1].probability == doctest::Approx(0.35));
    CHECK(it.rules[0].alternatives[2].probability == doctest::Approx(0.25));
    validate(it);

    // involution for two-alternative rules
    Grammar gg = invert_probabilities(invert_probabilities(g));
    CHECK(gg.rules[digit].alternatives[0].probability == doctest::Approx(0.09));
}

TEST_CASE("uniformize_rule") {
    Grammar g = euclid_grammar();
    std::size_t digit = find_rule(g, "digit");
    Grammar u = uniformize_rule(g, digit);
    CHECK(u.rules[digit].alternatives[0].probability == 0.5);
    CHECK(u.rules[digit].alternatives[1].probability == 0.5);
    // other rules unchanged
    std::size_t integer = find_rule(g, "integer");
    CHECK(u.rules[integer].alternatives[0].probability == doctest::Approx(0.04));

    CHECK(uniformize_rule(g, find_rule(g, "start")).rules[0].alternatives[0].probability ==
          1.0);

    Grammar four = load_grammar("s = \"a\" | \"b\" | \"c\" | \"d\"");
    Grammar uf = uniformize_rule(four, 0);
    for (const auto& alt : uf.rules[0].alternatives) CHECK(alt.probability == 0.25);

    CHECK_THROWS_AS(uniformize_rule(g, g.rules.size()), GrammarError);
}

TEST_CASE("mutate_grammar uniformizes exactly one rule") {
    Grammar g = euclid_grammar();
    // find a seed whose first index draw picks the digit rule (index 3)
    std::uint64_t seed = 0;
    for (; seed < 10000; ++seed) {
        Rng probe(seed);
        if (probe.next_index(g.rules.size()) == 3) break;
    }
    REQUIRE(seed < 10000);
    Rng rng(seed);
    Grammar m = mutate_grammar(g, rng);
    CHECK(m.rules[3].alternatives[0].probability == 0.5);
    CHECK(m.rules[3].alternatives[1].probability == 0.5);
    for (std::size_t i = 0; i < g.rules.size(); ++i) {
        if (i == 3) continue;
        for (std::size_t j = 0; j < g.rules[i].alternatives.size(); ++j)
            CHECK(m.rules[i].alternatives[j].probability ==
                  g.rules[i].alternatives[j].probability);
    }
    // idempotent when the same rule is selected again
    Rng rng2(seed);
    Grammar m2 = mutate_grammar(m, rng2);
    CHECK(m2.rules[3].alternatives[0].probability == 0.5);

    Grammar one = load_grammar("s = \"a\" | \"b\" | \"c\"");
    Rng r3(1);
    Grammar mo = mutate_grammar(one, r3);
    for (const auto& alt : mo.rules[0].alternatives)
        CHECK(alt.probability == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("to_gene matches the euclid probability matrix") {
    ProbabilityMatrix m = to_gene(euclid_grammar());
    ProbabilityMatrix expect = {
        {1.0},
        {0.04, 0.96},
        {0.74, 0.26},
        {0.09, 0.91},
        {0.12, 0.14, 0.11, 0.14, 0.13, 0.10, 0.09, 0.09, 0.08}};
    REQUIRE(m.size() == expect.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        REQUIRE(m[i].size() == expect[i].size());
        for (std::size_t j = 0; j < m[i].size(); ++j)
            CHECK(m[i][j] == doctest::Approx(expect[i][j]).epsilon(1e-12));
    }
}

TEST_CASE("from_gene round-trip and errors") {
    Grammar g = euclid_grammar();
    ProbabilityMatrix m = to_gene(g);
    Grammar h = from_gene(g, m);
    ProbabilityMatrix m2 = to_gene(h);
    CHECK(m == m2);

    ProbabilityMatrix bad_shape = m;
    bad_shape.pop_back();
    CHECK_THROWS_AS(from_gene(g, bad_shape), GrammarError);

    ProbabilityMatrix bad_row = m;
    bad_row[1] = {0.9, 0.9};
    CHECK_THROWS_AS(from_gene(g, bad_row), GrammarError);

    Grammar single = load_grammar("s = \"a\"");
    Grammar same = from_gene(single, {{1.0}});
    CHECK(same.rules[0].alternatives[0].probability == 1.0);
}

TEST_CASE("validate accepts op outputs and rejects broken sums") {
    Grammar g = euclid_grammar();
    validate(g);
    validate(invert_probabilities(g));
    validate(uniformize_rule(g, 1));
    g.rules[3].alternatives[0].probability = 0.5; // sum now 1.41
    CHECK_THROWS_AS(validate(g), GrammarError);
}
