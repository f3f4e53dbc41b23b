#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdfuzz/rng.hpp"

namespace gdfuzz {

inline constexpr std::size_t kNoRule = std::numeric_limits<std::size_t>::max();

struct GrammarError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Terminal byte string or reference to another rule. Terminals may be empty.
struct Symbol {
    bool terminal = true;
    std::string text;          // terminal bytes, or the nonterminal name
    std::size_t rule = kNoRule; // resolved rule index for nonterminals

    static Symbol term(std::string bytes) { return {true, std::move(bytes), kNoRule}; }
    static Symbol nonterm(std::string name) { return {false, std::move(name), kNoRule}; }
};

struct Alternative {
    std::vector<Symbol> symbols; // empty list = epsilon
    double probability = 0.0;
};

struct Rule {
    std::string name;
    std::vector<Alternative> alternatives; // order is identity-bearing
};

/// Context-free grammar with a probability distribution over each rule's
/// alternatives. Values are immutable by convention: every operation
/// returns a new grammar.
struct Grammar {
    std::vector<Rule> rules;
    std::size_t start_rule = 0;
};

/// entries[i][j] = probability of alternative j under rule i.
using ProbabilityMatrix = std::vector<std::vector<double>>;

/// Parses the grammar file format. Unannotated alternatives share the
/// residual probability mass uniformly; fully unannotated rules get a
/// uniform distribution. Throws GrammarError with a line number on
/// syntax errors, undefined nonterminals, or over-committed annotations.
Grammar load_grammar(const std::string& text);

/// Serializes so that load_grammar(save_grammar(g)) reproduces g
/// (names, order, probabilities to 9 decimal places).
std::string save_grammar(const Grammar& g);

/// Scales each rule's probabilities to sum to 1, preserving ratios.
/// Throws GrammarError on an all-zero rule.
Grammar normalize(const Grammar& g);

/// Per rule with J > 1 alternatives: p' = (1 - p) / (J - 1).
/// Rules with a single alternative are unchanged.
Grammar invert_probabilities(const Grammar& g);

/// Replaces the selected rule's distribution with the uniform 1/J.
Grammar uniformize_rule(const Grammar& g, std::size_t rule_index);

/// Draws one rule index uniformly and uniformizes it. One next_index draw.
Grammar mutate_grammar(const Grammar& g, Rng& rng);

ProbabilityMatrix to_gene(const Grammar& g);

/// Installs the matrix into g's structure. Throws on shape mismatch or a
/// row not summing to 1 within 1e-9.
Grammar from_gene(const Grammar& g, const ProbabilityMatrix& m);

/// Checks structural invariants: resolved nonterminals, per-rule sums
/// within 1e-9 of 1, probabilities in [0,1]. Throws GrammarError.
void validate(const Grammar& g);

/// Index of the rule with the given name, or kNoRule.
std::size_t find_rule(const Grammar& g, const std::string& name);

} // namespace gdfuzz
