#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gdfuzz/feedback.hpp"
#include "gdfuzz/fitness.hpp"
#include "gdfuzz/generation.hpp"
#include "gdfuzz/grammar.hpp"
#include "gdfuzz/mutation.hpp"

namespace gdfuzz {

struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CampaignConfig {
    Grammar grammar;
    std::vector<std::string> seeds;
    SubjectAdapter subject;
    GoalMode mode;
    int generations = 50;
    int inputs_per_generation = 5; // n; 2n candidates are executed per generation
    int depth_limit = 3;
    int feature_depth = 3;
    // Instruction budget for built-in subjects, milliseconds for external.
    double timeout = 10000;
    std::uint64_t rng_seed = 1;
    std::optional<double> a_max; // calibrated when absent
    int calibration_samples = 100;
    double bitflip_fraction = 0.5;
    // Debug hook for weight-zero invariance checks: feeds b = 0 into x2
    // while leaving covered units (and thus mappings) untouched.
    bool zero_coverage_metric = false;
    std::optional<std::filesystem::path> out_dir; // outputs written when set
};

struct GenerationRecord {
    int gen = 0; // 1-based
    std::string selected_input;
    double fitness = 0;
    double coverage_fraction = 0;     // cumulative over selected inputs
    std::size_t mappings = 0;         // cumulative distinct pairs
    std::size_t exceptions = 0;       // cumulative selected-input exceptions
    std::size_t unique_exceptions = 0;
    double runtime_total = 0;         // cumulative over all executions
};

struct CampaignResult {
    std::vector<GenerationRecord> records;
    Grammar final_grammar;
    std::vector<std::string> selected_inputs; // I, one per generation
    std::set<std::string> unique_exception_ids;
    double a_max = 1;
};

/// Mutable loop state: the current grammar and the cumulative sets the
/// marginal fitness is computed against.
struct EngineState {
    Grammar grammar;
    MappingSet cumulative_mappings;
    std::set<std::string> cumulative_units;
    std::set<std::string> cumulative_exception_ids;
    std::size_t cumulative_exceptions = 0;
    double runtime_total = 0;
    double a_max = 1;
};

/// Index of the maximal score; ties resolve to the lowest index.
std::size_t select_best(const std::vector<double>& scores);

/// Runs `samples` uniform-policy inputs against the subject and returns
/// max(1, largest single-input distinct mapping count observed).
double calibrate_max_mappings(const SubjectAdapter& subject, const Grammar& grammar,
                              int samples, const CampaignConfig& cfg, Rng& rng);

/// One generation: generate n inputs, mutate them to 2n candidates,
/// parse + execute each, score marginal contributions under the mode's
/// weights, select, merge, learn from the selected tree (when it
/// parses), then mutate the grammar.
GenerationRecord run_generation(EngineState& state, const CampaignConfig& cfg, int gen,
                                Rng& rng);

/// The full campaign: learns G_0 from the seeds over a uniform prior,
/// runs the configured generations, and writes campaign.jsonl,
/// inputs/gen<K>.txt, final_grammar.bnf and summary.csv when out_dir is
/// set. RNG order: calibration draws (when a_max is absent), then per
/// generation the batch draws, mutation draws, and one grammar-mutation
/// draw.
CampaignResult run_campaign(const CampaignConfig& cfg);

} // namespace gdfuzz
