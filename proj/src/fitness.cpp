#include "gdfuzz/fitness.hpp"

#include <cmath>

namespace gdfuzz {

namespace {

// Chains starting at `node`: walk every single-child path downward.
void chains_from(const ParseTree& node, int d, FeatureKey& chain, FeatureSet& out) {
    chain.insert(node.rule);
    out.insert(chain);
    if (d > 0) {
        for (const auto& child : node.children) {
            if (child.is_terminal()) continue;
            bool added = !chain.count(child.rule);
            chains_from(child, d - 1, chain, out);
            if (added) chain.erase(child.rule);
        }
    }
    // caller removes node.rule if it introduced it
}

void visit(const ParseTree& node, int d, FeatureSet& out) {
    if (node.is_terminal()) return;
    FeatureKey chain;
    chains_from(node, d, chain, out);
    for (const auto& child : node.children) visit(child, d, out);
}

} // namespace

FeatureSet extract_features(const ParseTree& t, int d) {
    FeatureSet out;
    visit(t, d, out);
    return out;
}

MappingSet compute_mappings(const FeatureSet& f, const std::set<std::string>& units) {
    MappingSet out;
    for (const auto& feature : f)
        for (const auto& unit : units) out.emplace(feature, unit);
    return out;
}

NormalizedFeedback normalize_feedback(const RawMetrics& raw, const NormalizeConfig& cfg) {
    if (cfg.a_max <= 0 || cfg.b_tot <= 0 || cfg.timeout <= 0 || cfg.inputs <= 0)
        throw FitnessError("normalization config values must be positive");
    if (raw.covered > cfg.b_tot) throw FitnessError("covered count exceeds total units");
    if (raw.runtime > cfg.timeout) throw FitnessError("runtime exceeds timeout");
    if (raw.exceptions > cfg.inputs) throw FitnessError("exception count exceeds inputs");

    NormalizedFeedback x;
    double ratio = raw.mappings / cfg.a_max;
    x.x1 = ratio / (1.0 + std::fabs(ratio));
    x.x2 = raw.covered / cfg.b_tot;
    x.x3 = raw.timed_out ? 1.0 : raw.runtime / cfg.timeout;
    x.x4 = (0.1 * raw.exceptions + 0.9 * raw.unique_exceptions) / cfg.inputs;
    return x;
}

double fitness(const NormalizedFeedback& x, const FitnessWeights& w) {
    return w.mappings * x.x1 + w.coverage * x.x2 + w.runtime * x.x3 + w.exceptions * x.x4;
}

FitnessWeights weights_for_mode(const GoalMode& mode) {
    FitnessWeights w; // all ones
    if (mode.kind == GoalMode::Kind::multiple) return w;
    double v = mode.kind == GoalMode::Kind::single ? 10.0 : 0.0;
    switch (mode.goal) {
    case Goal::mappings: w.mappings = v; break;
    case Goal::coverage: w.coverage = v; break;
    case Goal::runtime: w.runtime = v; break;
    case Goal::exceptions: w.exceptions = v; break;
    }
    return w;
}

} // namespace gdfuzz
