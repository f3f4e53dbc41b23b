#include "gdfuzz/engine.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "gdfuzz/learning.hpp"

namespace gdfuzz {

namespace {

struct Candidate {
    std::string input;
    std::optional<ParseTree> tree; // absent when the mutant fails to parse
    FeatureSet features;
    RawFeedback feedback;
};

Candidate evaluate_candidate(std::string input, const CampaignConfig& cfg) {
    Candidate c;
    c.input = std::move(input);
    try {
        c.tree = parse(cfg.grammar, c.input);
        c.features = extract_features(*c.tree, cfg.feature_depth);
    } catch (const ParseError&) {
        // invalid mutants still run; they just carry no features
    }
    c.feedback = run_subject(cfg.subject, c.input, cfg.timeout);
    return c;
}

std::string csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace

std::size_t select_best(const std::vector<double>& scores) {
    if (scores.empty()) throw EngineError("select_best on empty candidate list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

double calibrate_max_mappings(const SubjectAdapter& subject, const Grammar& grammar,
                              int samples, const CampaignConfig& cfg, Rng& rng) {
    GenerationPolicy policy{GenerationPolicy::Kind::uniform, cfg.depth_limit};
    double best = 1;
    for (int i = 0; i < samples; ++i) {
        ParseTree tree = generate(grammar, policy, rng);
        std::string input = unparse(tree);
        RawFeedback fb = run_subject(subject, input, cfg.timeout);
        auto features = extract_features(tree, cfg.feature_depth);
        double count = static_cast<double>(features.size() * fb.covered_units.size());
        best = std::max(best, count);
    }
    return best;
}

GenerationRecord run_generation(EngineState& state, const CampaignConfig& cfg, int gen,
                                Rng& rng) {
    const std::size_t n = static_cast<std::size_t>(cfg.inputs_per_generation);

    GenerationPolicy policy{GenerationPolicy::Kind::probabilistic, cfg.depth_limit};
    std::vector<ParseTree> generated = generate_batch(state.grammar, policy, n, rng);
    MutationConfig mut_cfg{cfg.bitflip_fraction};
    std::vector<std::string> mutants = mutate_inputs(generated, state.grammar, rng, mut_cfg);

    CampaignConfig eval_cfg = cfg;
    eval_cfg.grammar = state.grammar;
    std::vector<Candidate> candidates;
    candidates.reserve(2 * n);
    for (const auto& tree : generated)
        candidates.push_back(evaluate_candidate(unparse(tree), eval_cfg));
    for (auto& m : mutants) candidates.push_back(evaluate_candidate(std::move(m), eval_cfg));

    FitnessWeights weights = weights_for_mode(cfg.mode);
    NormalizeConfig norm{state.a_max, static_cast<double>(cfg.subject.total_units),
                         cfg.timeout, static_cast<double>(2 * n)};

    std::vector<double> scores;
    std::vector<MappingSet> pair_sets;
    scores.reserve(candidates.size());
    pair_sets.reserve(candidates.size());
    for (const auto& c : candidates) {
        MappingSet pairs = compute_mappings(c.features, c.feedback.covered_units);
        RawMetrics raw;
        for (const auto& p : pairs)
            if (!state.cumulative_mappings.count(p)) raw.mappings += 1;
        for (const auto& u : c.feedback.covered_units)
            if (!state.cumulative_units.count(u)) raw.covered += 1;
        if (cfg.zero_coverage_metric) raw.covered = 0;
        raw.runtime = c.feedback.runtime;
        raw.timed_out = c.feedback.timed_out;
        if (c.feedback.exception) {
            raw.exceptions = 1;
            if (!state.cumulative_exception_ids.count(*c.feedback.exception))
                raw.unique_exceptions = 1;
        }
        scores.push_back(fitness(normalize_feedback(raw, norm), weights));
        pair_sets.push_back(std::move(pairs));
        state.runtime_total += c.feedback.runtime;
    }

    std::size_t sel = select_best(scores);
    const Candidate& s = candidates[sel];

    state.cumulative_mappings.insert(pair_sets[sel].begin(), pair_sets[sel].end());
    state.cumulative_units.insert(s.feedback.covered_units.begin(),
                                  s.feedback.covered_units.end());
    if (s.feedback.exception) {
        state.cumulative_exceptions += 1;
        state.cumulative_exception_ids.insert(*s.feedback.exception);
    }

    if (s.tree) state.grammar = learn_probabilities(state.grammar, {*s.tree});
    state.grammar = mutate_grammar(state.grammar, rng);

    GenerationRecord rec;
    rec.gen = gen;
    rec.selected_input = s.input;
    rec.fitness = scores[sel];
    rec.coverage_fraction = static_cast<double>(state.cumulative_units.size()) /
                            static_cast<double>(cfg.subject.total_units);
    rec.mappings = state.cumulative_mappings.size();
    rec.exceptions = state.cumulative_exceptions;
    rec.unique_exceptions = state.cumulative_exception_ids.size();
    rec.runtime_total = state.runtime_total;
    return rec;
}

CampaignResult run_campaign(const CampaignConfig& cfg) {
    validate(cfg.grammar);
    if (cfg.generations < 1 || cfg.inputs_per_generation < 1)
        throw EngineError("generations and inputs-per-generation must be >= 1");

    // G_0: learn over a uniform prior from the parseable seeds
    Grammar prior = cfg.grammar;
    for (std::size_t i = 0; i < prior.rules.size(); ++i) prior = uniformize_rule(prior, i);
    std::vector<ParseTree> seed_trees;
    for (const auto& seed : cfg.seeds) {
        try {
            seed_trees.push_back(parse(cfg.grammar, seed));
        } catch (const ParseError& e) {
            std::cerr << "warning: skipping unparseable seed \"" << seed << "\" ("
                      << e.what() << ")\n";
        }
    }
    if (seed_trees.empty()) throw EngineError("no usable seed inputs");

    Rng rng(cfg.rng_seed);
    EngineState state;
    state.grammar = learn_probabilities(prior, seed_trees);
    state.a_max = cfg.a_max
                      ? *cfg.a_max
                      : calibrate_max_mappings(cfg.subject, state.grammar,
                                               cfg.calibration_samples, cfg, rng);

    CampaignResult result;
    result.a_max = state.a_max;
    for (int gen = 1; gen <= cfg.generations; ++gen) {
        GenerationRecord rec = run_generation(state, cfg, gen, rng);
        result.selected_inputs.push_back(rec.selected_input);
        result.records.push_back(std::move(rec));
    }
    result.final_grammar = state.grammar;
    result.unique_exception_ids = state.cumulative_exception_ids;

    if (cfg.out_dir) {
        namespace fs = std::filesystem;
        const fs::path& dir = *cfg.out_dir;
        fs::create_directories(dir / "inputs");

        std::ofstream jsonl(dir / "campaign.jsonl", std::ios::binary);
        std::ofstream csv(dir / "summary.csv", std::ios::binary);
        csv << "gen,fitness,coverage,mappings,exceptions,unique_exceptions,runtime_total\n";
        for (const auto& rec : result.records) {
            std::string input_file = "inputs/gen" + std::to_string(rec.gen) + ".txt";
            std::ofstream(dir / input_file, std::ios::binary) << rec.selected_input;
            nlohmann::json j{{"gen", rec.gen},
                             {"fitness", rec.fitness},
                             {"coverage", rec.coverage_fraction},
                             {"mappings", rec.mappings},
                             {"exceptions", rec.exceptions},
                             {"unique_exceptions", rec.unique_exceptions},
                             {"runtime_total", rec.runtime_total},
                             {"selected_input_file", input_file}};
            jsonl << j.dump() << "\n";
            csv << rec.gen << ',' << csv_double(rec.fitness) << ','
                << csv_double(rec.coverage_fraction) << ',' << rec.mappings << ','
                << rec.exceptions << ',' << rec.unique_exceptions << ','
                << csv_double(rec.runtime_total) << "\n";
        }
        std::ofstream(dir / "final_grammar.bnf", std::ios::binary)
            << save_grammar(result.final_grammar);
    }
    return result;
}

} // namespace gdfuzz
