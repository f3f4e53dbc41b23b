#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gdfuzz/engine.hpp"
#include "gdfuzz/learning.hpp"
#include "gdfuzz/stats.hpp"

namespace fs = std::filesystem;
using namespace gdfuzz;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string strip_trailing_newline(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

// Directory: one seed per regular file. File: one seed per line.
std::vector<std::string> load_seeds(const fs::path& path) {
    std::vector<std::string> seeds;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) seeds.push_back(strip_trailing_newline(read_file(f)));
    } else {
        std::istringstream in(read_file(path));
        std::string line;
        while (std::getline(in, line)) {
            line = strip_trailing_newline(line);
            if (!line.empty()) seeds.push_back(line);
        }
    }
    return seeds;
}

SubjectAdapter parse_subject(const std::string& spec, std::size_t total_units) {
    if (spec.rfind("builtin:", 0) == 0) {
        std::string name = spec.substr(8);
        if (name == "euclid") return euclid_subject();
        if (name == "json-flatten") return json_flatten_subject();
        throw CLI::ValidationError("--subject", "unknown builtin subject '" + name + "'");
    }
    if (spec.rfind("exec:", 0) == 0) {
        if (total_units == 0)
            throw CLI::ValidationError("--subject",
                                       "external subjects require --total-units");
        return external_subject(spec.substr(5), total_units);
    }
    throw CLI::ValidationError("--subject", "expected builtin:<name> or exec:<cmdline>");
}

Goal parse_goal(const std::string& name) {
    if (name == "mappings") return Goal::mappings;
    if (name == "coverage") return Goal::coverage;
    if (name == "runtime") return Goal::runtime;
    if (name == "exceptions") return Goal::exceptions;
    throw CLI::ValidationError("--mode", "unknown goal '" + name + "'");
}

GoalMode parse_mode(const std::string& spec) {
    GoalMode mode;
    if (spec == "multiple") {
        mode.kind = GoalMode::Kind::multiple;
        return mode;
    }
    if (spec.rfind("single:", 0) == 0) {
        mode.kind = GoalMode::Kind::single;
        mode.goal = parse_goal(spec.substr(7));
        return mode;
    }
    if (spec.rfind("ignore:", 0) == 0) {
        mode.kind = GoalMode::Kind::ignore;
        mode.goal = parse_goal(spec.substr(7));
        return mode;
    }
    throw CLI::ValidationError("--mode", "expected single:<goal>|multiple|ignore:<goal>");
}

GenerationPolicy::Kind parse_policy(const std::string& name) {
    if (name == "prob") return GenerationPolicy::Kind::probabilistic;
    if (name == "uniform") return GenerationPolicy::Kind::uniform;
    if (name == "inverse") return GenerationPolicy::Kind::inverse;
    throw CLI::ValidationError("--policy", "expected prob|uniform|inverse");
}

std::string csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// Final row of a summary.csv, parsed into named metric columns.
std::map<std::string, double> final_summary_row(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::string header, line, last;
    if (!std::getline(in, header)) throw std::runtime_error("empty csv: " + path.string());
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    if (last.empty()) throw std::runtime_error("no data rows in " + path.string());

    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::istringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    auto names = split(header);
    auto cells = split(last);
    if (names.size() != cells.size())
        throw std::runtime_error("malformed csv row in " + path.string());
    std::map<std::string, double> row;
    for (std::size_t i = 0; i < names.size(); ++i) row[names[i]] = std::stod(cells[i]);
    return row;
}

int cmd_baseline(const Grammar& grammar, const SubjectAdapter& subject,
                 GenerationPolicy policy, int count, int feature_depth, double timeout,
                 std::uint64_t seed, std::optional<double> a_max_opt, const fs::path& out) {
    Rng rng(seed);
    CampaignConfig cal_cfg;
    cal_cfg.depth_limit = policy.depth_limit;
    cal_cfg.feature_depth = feature_depth;
    cal_cfg.timeout = timeout;
    double a_max = a_max_opt ? *a_max_opt
                             : calibrate_max_mappings(subject, grammar, 100, cal_cfg, rng);

    FitnessWeights weights; // multiple-goal weights for reporting
    NormalizeConfig norm{a_max, static_cast<double>(subject.total_units), timeout, 1.0};

    MappingSet cumulative_pairs;
    std::set<std::string> cumulative_units, cumulative_ids;
    std::size_t exceptions = 0;
    double runtime_total = 0;

    fs::create_directories(out);
    std::ofstream csv(out / "summary.csv", std::ios::binary);
    csv << "gen,fitness,coverage,mappings,exceptions,unique_exceptions,runtime_total\n";

    for (int i = 1; i <= count; ++i) {
        ParseTree tree = generate(grammar, policy, rng);
        std::string input = unparse(tree);
        RawFeedback fb = run_subject(subject, input, timeout);
        auto features = extract_features(tree, feature_depth);
        MappingSet pairs = compute_mappings(features, fb.covered_units);

        RawMetrics raw;
        for (const auto& p : pairs)
            if (!cumulative_pairs.count(p)) raw.mappings += 1;
        for (const auto& u : fb.covered_units)
            if (!cumulative_units.count(u)) raw.covered += 1;
        raw.runtime = fb.runtime;
        raw.timed_out = fb.timed_out;
        if (fb.exception) {
            raw.exceptions = 1;
            if (!cumulative_ids.count(*fb.exception)) raw.unique_exceptions = 1;
        }
        double f = fitness(normalize_feedback(raw, norm), weights);

        cumulative_pairs.insert(pairs.begin(), pairs.end());
        cumulative_units.insert(fb.covered_units.begin(), fb.covered_units.end());
        if (fb.exception) {
            ++exceptions;
            cumulative_ids.insert(*fb.exception);
        }
        runtime_total += fb.runtime;

        double coverage = static_cast<double>(cumulative_units.size()) /
                          static_cast<double>(subject.total_units);
        csv << i << ',' << csv_double(f) << ',' << csv_double(coverage) << ','
            << cumulative_pairs.size() << ',' << exceptions << ','
            << cumulative_ids.size() << ',' << csv_double(runtime_total) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"goal-directed grammar-based test input generator"};
    app.require_subcommand(1);

    // --- run ---
    auto* run = app.add_subcommand("run", "run a full feedback-loop campaign");
    std::string run_grammar, run_seeds, run_subject_spec, run_mode = "multiple", run_out;
    int run_gens = 50, run_n = 5, run_depth = 3, run_fdepth = 3;
    double run_timeout = 10000;
    std::uint64_t run_seed = 1;
    std::size_t run_total_units = 0;
    double run_a_max = 0;
    run->add_option("--grammar", run_grammar, "grammar file")->required();
    run->add_option("--seeds", run_seeds, "seed corpus (directory or line file)")->required();
    run->add_option("--subject", run_subject_spec, "builtin:<name> or exec:<cmdline>")
        ->required();
    run->add_option("--mode", run_mode, "single:<goal>|multiple|ignore:<goal>");
    run->add_option("--generations", run_gens)->check(CLI::PositiveNumber);
    run->add_option("--inputs-per-gen", run_n)->check(CLI::PositiveNumber);
    run->add_option("--depth-limit", run_depth)->check(CLI::PositiveNumber);
    run->add_option("--feature-depth", run_fdepth)->check(CLI::PositiveNumber);
    run->add_option("--timeout-ms", run_timeout)->check(CLI::PositiveNumber);
    run->add_option("--random-seed", run_seed);
    run->add_option("--total-units", run_total_units, "unit count for external subjects");
    run->add_option("--a-max", run_a_max, "mapping normalization cap (calibrated if unset)");
    run->add_option("--out", run_out, "output directory")->required();

    // --- learn ---
    auto* learn = app.add_subcommand("learn", "learn grammar probabilities from seeds");
    std::string learn_grammar, learn_seeds, learn_out;
    learn->add_option("--grammar", learn_grammar)->required();
    learn->add_option("--seeds", learn_seeds)->required();
    learn->add_option("--out", learn_out, "output grammar file (stdout if unset)");

    // --- generate ---
    auto* gen = app.add_subcommand("generate", "sample inputs from a grammar");
    std::string gen_grammar, gen_policy = "prob", gen_out;
    int gen_count = 10, gen_depth = 3;
    std::uint64_t gen_seed = 1;
    gen->add_option("--grammar", gen_grammar)->required();
    gen->add_option("--policy", gen_policy, "prob|uniform|inverse");
    gen->add_option("--count", gen_count)->check(CLI::PositiveNumber);
    gen->add_option("--depth-limit", gen_depth)->check(CLI::PositiveNumber);
    gen->add_option("--random-seed", gen_seed);
    gen->add_option("--out", gen_out, "output directory (stdout if unset)");

    // --- baseline ---
    auto* base = app.add_subcommand("baseline",
                                    "run a non-evolving generator against a subject");
    std::string base_grammar, base_subject_spec, base_policy = "uniform", base_out;
    int base_count = 250, base_depth = 3, base_fdepth = 3;
    double base_timeout = 10000, base_a_max = 0;
    std::uint64_t base_seed = 1;
    std::size_t base_total_units = 0;
    base->add_option("--grammar", base_grammar)->required();
    base->add_option("--subject", base_subject_spec)->required();
    base->add_option("--policy", base_policy, "prob|uniform|inverse");
    base->add_option("--count", base_count)->check(CLI::PositiveNumber);
    base->add_option("--depth-limit", base_depth)->check(CLI::PositiveNumber);
    base->add_option("--feature-depth", base_fdepth)->check(CLI::PositiveNumber);
    base->add_option("--timeout-ms", base_timeout)->check(CLI::PositiveNumber);
    base->add_option("--random-seed", base_seed);
    base->add_option("--total-units", base_total_units);
    base->add_option("--a-max", base_a_max);
    base->add_option("--out", base_out)->required();

    // --- stats ---
    auto* stats = app.add_subcommand("stats", "compare two groups of summary.csv runs");
    std::vector<std::string> stats_a, stats_b;
    std::vector<std::uint64_t> stats_odds;
    stats->add_option("--a", stats_a, "summary.csv of group A (repeatable)");
    stats->add_option("--b", stats_b, "summary.csv of group B (repeatable)");
    stats->add_option("--odds", stats_odds, "2x2 table n11 n12 n21 n22")->expected(4);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            CampaignConfig cfg;
            cfg.grammar = load_grammar(read_file(run_grammar));
            cfg.seeds = load_seeds(run_seeds);
            cfg.subject = parse_subject(run_subject_spec, run_total_units);
            cfg.mode = parse_mode(run_mode);
            cfg.generations = run_gens;
            cfg.inputs_per_generation = run_n;
            cfg.depth_limit = run_depth;
            cfg.feature_depth = run_fdepth;
            cfg.timeout = run_timeout;
            cfg.rng_seed = run_seed;
            if (run_a_max > 0) cfg.a_max = run_a_max;
            cfg.out_dir = fs::path(run_out);
            CampaignResult result = run_campaign(cfg);
            std::cout << "campaign finished: " << result.records.size()
                      << " generations, coverage "
                      << csv_double(result.records.back().coverage_fraction)
                      << ", unique exceptions " << result.unique_exception_ids.size()
                      << "\n";
            return 0;
        }
        if (*learn) {
            Grammar grammar = load_grammar(read_file(learn_grammar));
            Grammar prior = grammar;
            for (std::size_t i = 0; i < prior.rules.size(); ++i)
                prior = uniformize_rule(prior, i);
            std::vector<ParseTree> trees;
            for (const auto& seed : load_seeds(learn_seeds)) {
                try {
                    trees.push_back(parse(grammar, seed));
                } catch (const ParseError& e) {
                    std::cerr << "warning: skipping unparseable seed \"" << seed << "\" ("
                              << e.what() << ")\n";
                }
            }
            if (trees.empty()) throw std::runtime_error("no usable seed inputs");
            std::string text = save_grammar(learn_probabilities(prior, trees));
            if (learn_out.empty()) std::cout << text;
            else std::ofstream(learn_out, std::ios::binary) << text;
            return 0;
        }
        if (*gen) {
            Grammar grammar = load_grammar(read_file(gen_grammar));
            GenerationPolicy policy{parse_policy(gen_policy), gen_depth};
            Rng rng(gen_seed);
            if (!gen_out.empty()) fs::create_directories(gen_out);
            for (int i = 1; i <= gen_count; ++i) {
                std::string input = unparse(generate(grammar, policy, rng));
                if (gen_out.empty()) {
                    std::cout << input << "\n";
                } else {
                    std::ofstream(fs::path(gen_out) / ("input" + std::to_string(i) + ".txt"),
                                  std::ios::binary)
                        << input;
                }
            }
            return 0;
        }
        if (*base) {
            Grammar grammar = load_grammar(read_file(base_grammar));
            SubjectAdapter subject = parse_subject(base_subject_spec, base_total_units);
            GenerationPolicy policy{parse_policy(base_policy), base_depth};
            std::optional<double> a_max;
            if (base_a_max > 0) a_max = base_a_max;
            return cmd_baseline(grammar, subject, policy, base_count, base_fdepth,
                                base_timeout, base_seed, a_max, base_out);
        }
        if (*stats) {
            if (!stats_odds.empty()) {
                auto r = odds_ratio({{{stats_odds[0], stats_odds[1]},
                                      {stats_odds[2], stats_odds[3]}}});
                std::cout << "odds_ratio " << r.odds_ratio << " p " << r.p << "\n";
            }
            if (!stats_a.empty() && !stats_b.empty()) {
                std::vector<std::map<std::string, double>> rows_a, rows_b;
                for (const auto& f : stats_a) rows_a.push_back(final_summary_row(f));
                for (const auto& f : stats_b) rows_b.push_back(final_summary_row(f));
                for (const auto& metric : {"coverage", "mappings", "exceptions",
                                           "unique_exceptions", "runtime_total"}) {
                    std::vector<double> va, vb;
                    for (auto& r : rows_a) va.push_back(r.at(metric));
                    for (auto& r : rows_b) vb.push_back(r.at(metric));
                    auto mw = mann_whitney_u(va, vb);
                    std::cout << metric << " U " << mw.u << " z " << csv_double(mw.z)
                              << " p " << csv_double(mw.p) << "\n";
                }
            } else if (stats_odds.empty()) {
                std::cerr << "stats: provide --a/--b groups or --odds\n";
                return 2;
            }
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
