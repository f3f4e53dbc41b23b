#pragma once

#include <string>
#include <vector>

#include "gdfuzz/grammar.hpp"
#include "gdfuzz/parser.hpp"

namespace test_helpers {

inline const char* kEuclidGrammar = R"BNF(
start = @1.0 "euclid(" integer "," integer ")"
integer = @0.04 digit | @0.96 nzdigit number
number = @0.74 digit | @0.26 digit number
digit = @0.09 "0" | @0.91 nzdigit
nzdigit = @0.12 "1" | @0.14 "2" | @0.11 "3"
        | @0.14 "4" | @0.13 "5" | @0.10 "6"
        | @0.09 "7" | @0.09 "8" | @0.08 "9"
)BNF";

inline const std::vector<std::string> kEuclidSeeds = {
    "euclid(36,20)", "euclid(1,40)",   "euclid(56,19)", "euclid(5,307)",
    "euclid(92,81)", "euclid(1032,45)", "euclid(19,23)", "euclid(54,36)",
};

inline gdfuzz::Grammar euclid_grammar() {
    return gdfuzz::load_grammar(kEuclidGrammar);
}

inline bool tree_equal(const gdfuzz::ParseTree& a, const gdfuzz::ParseTree& b) {
    if (a.rule != b.rule || a.alternative != b.alternative || a.bytes != b.bytes ||
        a.children.size() != b.children.size())
        return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!tree_equal(a.children[i], b.children[i])) return false;
    return true;
}

} // namespace test_helpers
