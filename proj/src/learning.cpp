#include "gdfuzz/learning.hpp"

namespace gdfuzz {

std::vector<std::vector<std::uint64_t>> count_expansions(
    const std::vector<ParseTree>& trees, const Grammar& g) {
    std::vector<std::vector<std::uint64_t>> counts(g.rules.size());
    for (std::size_t i = 0; i < g.rules.size(); ++i)
        counts[i].assign(g.rules[i].alternatives.size(), 0);

    for (const auto& tree : trees) {
        check_tree(g, tree);
        std::vector<const ParseTree*> stack{&tree};
        while (!stack.empty()) {
            const ParseTree* node = stack.back();
            stack.pop_back();
            if (node->is_terminal()) continue;
            ++counts[node->rule][node->alternative];
            for (const auto& child : node->children) stack.push_back(&child);
        }
    }
    return counts;
}

Grammar learn_probabilities(const Grammar& prior, const std::vector<ParseTree>& trees) {
    auto counts = count_expansions(trees, prior);
    Grammar out = prior;
    for (std::size_t i = 0; i < out.rules.size(); ++i) {
        std::uint64_t total = 0;
        for (auto c : counts[i]) total += c;
        if (total == 0) continue; // fallback: keep prior probabilities
        auto& alts = out.rules[i].alternatives;
        for (std::size_t j = 0; j < alts.size(); ++j)
            alts[j].probability =
                static_cast<double>(counts[i][j]) / static_cast<double>(total);
    }
    return out;
}

} // namespace gdfuzz
