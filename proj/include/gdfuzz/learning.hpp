#pragma once

#include <cstdint>
#include <vector>

#include "gdfuzz/grammar.hpp"
#include "gdfuzz/parser.hpp"

namespace gdfuzz {

/// counts[i][j] = number of nodes across all trees expanding rule i via
/// alternative j. Trees must derive from g (shape-checked).
std::vector<std::vector<std::uint64_t>> count_expansions(
    const std::vector<ParseTree>& trees, const Grammar& g);

/// Replaces each exercised rule's distribution with the exact count
/// ratios from the trees; rules with zero total count keep the prior's
/// probabilities verbatim. Structure is never changed.
Grammar learn_probabilities(const Grammar& prior, const std::vector<ParseTree>& trees);

} // namespace gdfuzz
