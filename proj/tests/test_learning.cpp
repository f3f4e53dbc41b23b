#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gdfuzz/learning.hpp"
#include "helpers.hpp"

using namespace gdfuzz;
using test_helpers::euclid_grammar;

namespace {

std::vector<ParseTree> seed_trees(const Grammar& g) {
    std::vector<ParseTree> trees;
    for (const auto& s : test_helpers::kEuclidSeeds) trees.push_back(parse(g, s));
    return trees;
}

Grammar uniform_prior(const Grammar& g) {
    Grammar prior = g;
    for (std::size_t i = 0; i < prior.rules.size(); ++i) prior = uniformize_rule(prior, i);
    return prior;
}

} // namespace

TEST_CASE("count_expansions on euclid(0,2)") {
    Grammar g = euclid_grammar();
    auto counts = count_expansions({parse(g, "euclid(0,2)")}, g);
    std::size_t digit = find_rule(g, "digit");
    CHECK(counts[digit][0] == 1);
    CHECK(counts[digit][1] == 1);
    CHECK(counts[find_rule(g, "start")][0] == 1);
    CHECK(counts[find_rule(g, "integer")][0] == 2);
    CHECK(counts[find_rule(g, "integer")][1] == 0);
    // number is never exercised by single-digit integers
    CHECK(counts[find_rule(g, "number")][0] == 0);
    CHECK(counts[find_rule(g, "number")][1] == 0);
}

TEST_CASE("count_expansions: empty tree list is all zeros") {
    Grammar g = euclid_grammar();
    auto counts = count_expansions({}, g);
    for (const auto& row : counts)
        for (auto c : row) CHECK(c == 0);
}

TEST_CASE("count_expansions over the 8 seeds: integer row [2, 14]") {
    Grammar g = euclid_grammar();
    auto counts = count_expansions(seed_trees(g), g);
    std::size_t integer = find_rule(g, "integer");
    CHECK(counts[integer][0] == 2);  // single-digit integers: 1 and 5
    CHECK(counts[integer][1] == 14);
}

TEST_CASE("count_expansions rejects foreign trees") {
    Grammar g = euclid_grammar();
    Grammar other = load_grammar("s = \"a\" \"b\"");
    ParseTree t = parse(other, "ab");
    CHECK_THROWS_AS(count_expansions({t}, g), GrammarError);
}

TEST_CASE("learn_probabilities over the seed corpus") {
    Grammar g = euclid_grammar();
    Grammar learned = learn_probabilities(uniform_prior(g), seed_trees(g));
    std::size_t integer = find_rule(g, "integer");
    CHECK(learned.rules[integer].alternatives[0].probability == 2.0 / 16.0);
    CHECK(learned.rules[integer].alternatives[1].probability == 14.0 / 16.0);
    validate(learned);
}

TEST_CASE("learn_probabilities from a single tree") {
    Grammar g = euclid_grammar();
    Grammar learned = learn_probabilities(g, {parse(g, "euclid(0,2)")});
    std::size_t digit = find_rule(g, "digit");
    CHECK(learned.rules[digit].alternatives[0].probability == 0.5);
    CHECK(learned.rules[digit].alternatives[1].probability == 0.5);
    CHECK(learned.rules[find_rule(g, "start")].alternatives[0].probability == 1.0);
    // unexercised rule keeps the prior verbatim
    std::size_t number = find_rule(g, "number");
    CHECK(learned.rules[number].alternatives[0].probability ==
          g.rules[number].alternatives[0].probability);
    CHECK(learned.rules[number].alternatives[1].probability ==
          g.rules[number].alternatives[1].probability);
}

TEST_CASE("learning is order-invariant and duplication-sensitive") {
    Grammar g = euclid_grammar();
    auto trees = seed_trees(g);
    auto reversed = trees;
    std::reverse(reversed.begin(), reversed.end());
    Grammar a = learn_probabilities(g, trees);
    Grammar b = learn_probabilities(g, reversed);
    CHECK(to_gene(a) == to_gene(b));

    // duplicating one tree shifts counts
    ParseTree single = parse(g, "euclid(0,2)");
    ParseTree multi = parse(g, "euclid(36,20)");
    Grammar once = learn_probabilities(g, {single, multi});
    Grammar twice = learn_probabilities(g, {single, single, multi});
    std::size_t integer = find_rule(g, "integer");
    // euclid(0,2) contributes two digit-only integers, euclid(36,20) two
    // multi-digit ones; duplicating the former shifts 2/4 to 4/6
    CHECK(once.rules[integer].alternatives[0].probability == doctest::Approx(2.0 / 4.0));
    CHECK(twice.rules[integer].alternatives[0].probability == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("learned nonzero rows sum to 1 exactly") {
    Grammar g = euclid_grammar();
    Grammar learned = learn_probabilities(uniform_prior(g), seed_trees(g));
    for (const auto& rule : learned.rules) {
        double sum = 0;
        for (const auto& alt : rule.alternatives) sum += alt.probability;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}
