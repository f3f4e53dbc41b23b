#include "gdfuzz/generation.hpp"

#include <algorithm>
#include <limits>

namespace gdfuzz {

namespace {

constexpr int kInfDepth = std::numeric_limits<int>::max();

// Depth of one alternative given current rule depths.
int alternative_depth(const Alternative& alt, const std::vector<int>& depth) {
    int worst = 0;
    for (const auto& sym : alt.symbols) {
        if (sym.terminal) continue;
        if (depth[sym.rule] == kInfDepth) return kInfDepth;
        worst = std::max(worst, depth[sym.rule]);
    }
    return worst + 1;
}

struct Generator {
    const Grammar& g;
    const GenerationPolicy& policy;
    const std::vector<int>& min_depth;
    Rng& rng;

    double alt_probability(std::size_t rule, std::size_t j) const {
        const auto& alts = g.rules[rule].alternatives;
        double p = alts[j].probability;
        switch (policy.kind) {
        case GenerationPolicy::Kind::probabilistic: return p;
        case GenerationPolicy::Kind::uniform: return 1.0 / static_cast<double>(alts.size());
        case GenerationPolicy::Kind::inverse:
            return alts.size() <= 1 ? 1.0
                                    : (1.0 - p) / static_cast<double>(alts.size() - 1);
        }
        return p;
    }

    std::size_t draw_alternative(std::size_t rule) {
        const auto& alts = g.rules[rule].alternatives;
        double r = rng.next_double();
        double cum = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t j = 0; j < alts.size(); ++j) {
            double p = alt_probability(rule, j);
            if (p <= 0.0) continue;
            last_positive = j;
            cum += p;
            if (r < cum) return j;
        }
        return last_positive; // rounding slack lands on the last positive mass
    }

    std::size_t shortest_alternative(std::size_t rule) const {
        const auto& alts = g.rules[rule].alternatives;
        std::size_t best = 0;
        int best_depth = kInfDepth;
        for (std::size_t j = 0; j < alts.size(); ++j) {
            int d = alternative_depth(alts[j], min_depth);
            if (d < best_depth) {
                best_depth = d;
                best = j;
            }
        }
        return best;
    }

    ParseTree expand(std::size_t rule, int depth) {
        std::size_t j = depth < policy.depth_limit ? draw_alternative(rule)
                                                   : shortest_alternative(rule);
        ParseTree node;
        node.rule = rule;
        node.alternative = j;
        for (const auto& sym : g.rules[rule].alternatives[j].symbols) {
            if (sym.terminal)
                node.children.push_back(ParseTree::leaf(sym.text));
            else
                node.children.push_back(expand(sym.rule, depth + 1));
        }
        return node;
    }
};

} // namespace

std::vector<int> min_completion_depth(const Grammar& g) {
    std::vector<int> depth(g.rules.size(), kInfDepth);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < g.rules.size(); ++i) {
            int best = kInfDepth;
            for (const auto& alt : g.rules[i].alternatives)
                best = std::min(best, alternative_depth(alt, depth));
            if (best < depth[i]) {
                depth[i] = best;
                changed = true;
            }
        }
    }
    for (std::size_t i = 0; i < g.rules.size(); ++i)
        if (depth[i] == kInfDepth)
            throw GrammarError("rule '" + g.rules[i].name +
                               "' has no terminating derivation");
    return depth;
}

ParseTree generate(const Grammar& g, const GenerationPolicy& policy, Rng& rng) {
    auto depths = min_completion_depth(g);
    Generator gen{g, policy, depths, rng};
    return gen.expand(g.start_rule, 0);
}

std::vector<ParseTree> generate_batch(const Grammar& g, const GenerationPolicy& policy,
                                      std::size_t n, Rng& rng) {
    auto depths = min_completion_depth(g);
    Generator gen{g, policy, depths, rng};
    std::vector<ParseTree> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(gen.expand(g.start_rule, 0));
    return out;
}

} // namespace gdfuzz
