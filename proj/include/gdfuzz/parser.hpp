#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdfuzz/grammar.hpp"

namespace gdfuzz {

struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(std::size_t off, const std::string& msg)
        : std::runtime_error(msg), offset(off) {}
};

/// Derivation tree node. A terminal leaf has rule == kNoRule and carries
/// bytes; a nonterminal node carries (rule, alternative) and one child per
/// symbol of that alternative.
struct ParseTree {
    std::size_t rule = kNoRule;
    std::size_t alternative = 0;
    std::string bytes;
    std::vector<ParseTree> children;

    bool is_terminal() const { return rule == kNoRule; }

    static ParseTree leaf(std::string b) {
        ParseTree t;
        t.bytes = std::move(b);
        return t;
    }
};

/// Earley parse of the whole input from the start rule. Handles any CFG
/// over byte terminals, including epsilon and ambiguity. On ambiguity the
/// canonical derivation prefers the lowest alternative index, then the
/// longest nonterminal span, so identical (g, input) always yields an
/// identical tree. Throws ParseError carrying the byte offset of the
/// first unconsumable position.
ParseTree parse(const Grammar& g, const std::string& input);

/// Left-to-right concatenation of the terminal leaves.
std::string unparse(const ParseTree& t);

/// Verifies that t is a structurally valid derivation under g: every
/// node's indices in range and children matching the alternative's
/// symbol list. Throws GrammarError on mismatch.
void check_tree(const Grammar& g, const ParseTree& t);

} // namespace gdfuzz
