#include "gdfuzz/mutation.hpp"

#include <algorithm>
#include <map>

namespace gdfuzz {

namespace {

using Path = std::vector<std::size_t>;

void collect_nodes(const ParseTree& t, Path& path,
                   std::map<std::size_t, std::vector<Path>>& by_rule) {
    if (t.is_terminal()) return;
    by_rule[t.rule].push_back(path);
    for (std::size_t i = 0; i < t.children.size(); ++i) {
        path.push_back(i);
        collect_nodes(t.children[i], path, by_rule);
        path.pop_back();
    }
}

bool is_prefix(const Path& a, const Path& b) {
    if (a.size() > b.size()) return false;
    return std::equal(a.begin(), a.end(), b.begin());
}

ParseTree* node_at(ParseTree& t, const Path& path) {
    ParseTree* n = &t;
    for (std::size_t i : path) n = &n->children[i];
    return n;
}

} // namespace

std::string bit_flip_at(std::string input, std::size_t bit) {
    input.at(bit / 8) ^= static_cast<char>(1u << (bit % 8));
    return input;
}

std::string bit_flip(const std::string& input, Rng& rng) {
    if (input.empty()) throw MutationError("cannot bit-flip an empty input");
    return bit_flip_at(input, rng.next_index(input.size() * 8));
}

ParseTree subtree_swap(const ParseTree& t, Rng& rng) {
    std::map<std::size_t, std::vector<Path>> by_rule;
    Path path;
    collect_nodes(t, path, by_rule);

    std::vector<std::pair<Path, Path>> pairs;
    for (const auto& [rule, nodes] : by_rule) {
        for (std::size_t a = 0; a + 1 < nodes.size(); ++a)
            for (std::size_t b = a + 1; b < nodes.size(); ++b)
                if (!is_prefix(nodes[a], nodes[b]) && !is_prefix(nodes[b], nodes[a]))
                    pairs.emplace_back(nodes[a], nodes[b]);
    }
    if (pairs.empty()) return t;

    const auto& [pa, pb] = pairs[rng.next_index(pairs.size())];
    ParseTree out = t;
    std::swap(*node_at(out, pa), *node_at(out, pb));
    return out;
}

std::vector<std::string> mutate_inputs(const std::vector<ParseTree>& trees,
                                       const Grammar& g, Rng& rng,
                                       const MutationConfig& config) {
    (void)g;
    std::vector<std::string> mutants;
    mutants.reserve(trees.size());
    for (const auto& tree : trees) {
        bool flip = rng.next_double() < config.bitflip_fraction;
        if (flip) {
            std::string bytes = unparse(tree);
            if (bytes.empty())
                mutants.push_back(bytes); // nothing to flip in an empty input
            else
                mutants.push_back(bit_flip(bytes, rng));
        } else {
            mutants.push_back(unparse(subtree_swap(tree, rng)));
        }
    }
    return mutants;
}

} // namespace gdfuzz
