#pragma once

#include <vector>

#include "gdfuzz/grammar.hpp"
#include "gdfuzz/parser.hpp"
#include "gdfuzz/rng.hpp"

namespace gdfuzz {

struct GenerationPolicy {
    enum class Kind { probabilistic, uniform, inverse };
    Kind kind = Kind::probabilistic;
    // Tree depth in edges after which shortest completion takes over.
    int depth_limit = 3;
};

/// Minimum derivation-tree depth (in edges to the deepest terminal) for
/// each rule: fixpoint of depth(i) = min over alternatives of (1 if the
/// alternative is all-terminal, else 1 + max over its nonterminals).
/// Throws GrammarError naming the first rule with no finite derivation.
std::vector<int> min_completion_depth(const Grammar& g);

/// Stochastic expansion from the start rule. Below the depth limit the
/// alternative is drawn from the policy's distribution (one next_double
/// per choice); at or beyond it the shortest-completion alternative is
/// taken deterministically (ties broken by lowest index).
ParseTree generate(const Grammar& g, const GenerationPolicy& policy, Rng& rng);

/// n independent draws consuming rng in order.
std::vector<ParseTree> generate_batch(const Grammar& g, const GenerationPolicy& policy,
                                      std::size_t n, Rng& rng);

} // namespace gdfuzz
