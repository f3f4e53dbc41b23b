#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include "gdfuzz/parser.hpp"

namespace gdfuzz {

struct FitnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A feature is the set of rule indices along one downward chain of
/// nonterminal nodes with at most d edges (d+1 nodes).
using FeatureKey = std::set<std::size_t>;
using FeatureSet = std::set<FeatureKey>;

/// All downward nonterminal chains of 1..(d+1) nodes in t, as rule-index
/// sets. Duplicates collapse.
FeatureSet extract_features(const ParseTree& t, int d);

using MappingPair = std::pair<FeatureKey, std::string>;
using MappingSet = std::set<MappingPair>;

/// Full cross product features x covered units; |result| = |f| * |e|.
MappingSet compute_mappings(const FeatureSet& f, const std::set<std::string>& units);

struct RawMetrics {
    double mappings = 0;          // a
    double covered = 0;           // b
    double runtime = 0;           // c
    double exceptions = 0;        // d
    double unique_exceptions = 0; // e
    bool timed_out = false;
};

struct NormalizeConfig {
    double a_max = 1;
    double b_tot = 1;
    double timeout = 1;
    double inputs = 1;
};

struct NormalizedFeedback {
    double x1 = 0, x2 = 0, x3 = 0, x4 = 0;
};

/// x1 = (a/a_max)/(1+|a/a_max|), x2 = b/b_tot, x3 = c/timeout (forced to
/// 1.0 on timeout), x4 = (0.1 d + 0.9 e)/inputs. Throws FitnessError on
/// precondition violations (nonpositive config, b > b_tot, c > timeout,
/// d > inputs).
NormalizedFeedback normalize_feedback(const RawMetrics& raw, const NormalizeConfig& cfg);

struct FitnessWeights {
    double mappings = 1, coverage = 1, runtime = 1, exceptions = 1; // mu1..mu4
};

/// The weighted sum mu1 x1 + mu2 x2 + mu3 x3 + mu4 x4.
double fitness(const NormalizedFeedback& x, const FitnessWeights& w);

enum class Goal { mappings, coverage, runtime, exceptions };

struct GoalMode {
    enum class Kind { single, multiple, ignore };
    Kind kind = Kind::multiple;
    Goal goal = Goal::coverage; // meaningful for single/ignore
};

/// single(g): weight 10 for g, 1 elsewhere; multiple: all 1;
/// ignore(g): 0 for g, 1 elsewhere.
FitnessWeights weights_for_mode(const GoalMode& mode);

} // namespace gdfuzz
