#pragma once

#include <string>
#include <vector>

#include "gdfuzz/grammar.hpp"
#include "gdfuzz/parser.hpp"
#include "gdfuzz/rng.hpp"

namespace gdfuzz {

struct MutationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flips the given bit (byte = bit / 8, LSB = bit 0 within the byte).
std::string bit_flip_at(std::string input, std::size_t bit);

/// Flips one bit drawn uniformly from [0, 8*len). One next_index draw.
/// Throws MutationError on empty input.
std::string bit_flip(const std::string& input, Rng& rng);

/// Swaps two same-rule subtrees chosen uniformly among all unordered
/// pairs of node occurrences sharing a rule index where neither node is
/// an ancestor of the other. Returns t unchanged when no such pair
/// exists. One next_index draw when candidates exist.
ParseTree subtree_swap(const ParseTree& t, Rng& rng);

struct MutationConfig {
    double bitflip_fraction = 0.5; // probability of bit flip vs. tree swap
};

/// One mutant per input. Per input: one next_double mode draw, then the
/// operator's draws. Bit-flip mutants operate on the unparsed bytes and
/// may be syntactically invalid; tree-swap mutants unparse valid inputs.
std::vector<std::string> mutate_inputs(const std::vector<ParseTree>& trees,
                                       const Grammar& g, Rng& rng,
                                       const MutationConfig& config);

} // namespace gdfuzz
