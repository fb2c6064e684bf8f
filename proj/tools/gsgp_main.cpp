// Command-line front end: single runs, multi-run benchmarks, offline
// reconstruction and simplification of run artifacts, and cross-method
// statistics over finished benchmark directories.

#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gsgp/artifacts.hpp"
#include "gsgp/baseline.hpp"
#include "gsgp/dataio.hpp"
#include "gsgp/engine.hpp"
#include "gsgp/reconstruct.hpp"
#include "gsgp/rng.hpp"
#include "gsgp/stats.hpp"
#include "gsgp/version.hpp"

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct common_options {
    std::string dataset;
    std::string config_file;
    std::string method = "gsgp";
    std::size_t pop = 100;
    std::size_t gens = 2000;
    double xo_rate = 0.9;
    double mut_rate = -1.0;   // resolved per method: 0.5 gsgp, 0.1 stdgp
    double ms = 0.1;
    std::size_t tournament = 4;
    int init_depth = 6;
    int random_tree_depth = 6;
    int mut_depth = 6;
    double split_fraction = 0.7;
    std::uint64_t seed = 1;
    bool no_sigmoid_mutation = false;
    bool no_elitism = false;
    bool ephemeral_constants = false;
    std::uint64_t node_ceiling = 1'000'000;

    void resolve() {
        if (mut_rate < 0.0) mut_rate = method == "gsgp" ? 0.5 : 0.1;
    }
};

void add_common_options(CLI::App* sub, common_options& o) {
    sub->add_option("--dataset", o.dataset, "Numeric table, last column is the target");
    sub->add_option("--method", o.method, "gsgp (semantic operators) or stdgp (subtree operators)")
        ->check(CLI::IsMember({"gsgp", "stdgp"}));
    sub->add_option("--pop", o.pop, "Population size");
    sub->add_option("--gens", o.gens, "Generations to evolve");
    sub->add_option("--xo-rate", o.xo_rate, "Crossover probability")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--mut-rate", o.mut_rate,
                    "Mutation probability (default 0.5 for gsgp, 0.1 for stdgp)");
    sub->add_option("--ms", o.ms, "Mutation step");
    sub->add_option("--tournament", o.tournament, "Tournament size");
    sub->add_option("--init-depth", o.init_depth, "Max depth for initial trees");
    sub->add_option("--random-tree-depth", o.random_tree_depth,
                    "Depth of pool trees drawn by the semantic operators");
    sub->add_option("--mut-depth", o.mut_depth, "Max depth of stdgp mutation subtrees");
    sub->add_option("--split", o.split_fraction, "Training fraction of the dataset");
    sub->add_option("--seed", o.seed, "Master seed; every random choice derives from it");
    sub->add_flag("--no-sigmoid-mutation", o.no_sigmoid_mutation,
                  "Leave mutation's random trees unbounded");
    sub->add_flag("--no-elitism", o.no_elitism, "Do not copy the best individual forward");
    sub->add_flag("--ephemeral-constants", o.ephemeral_constants,
                  "Allow random constant leaves in generated trees");
    sub->add_option("--node-ceiling", o.node_ceiling,
                    "stdgp aborts when an offspring exceeds this node count");
    sub->add_option("--config", o.config_file,
                    "Flat key=value config file; explicit flags override it");
}

// CLI11 only processes config files attached to the top-level app, not to a
// subcommand, so the per-command --config is applied by hand: flat key=value
// lines, '#' comments, and any option the command line already set wins.
void apply_config(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    const auto trim = [](std::string s) {
        const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
        while (!s.empty() && is_space(static_cast<unsigned char>(s.front())))
            s.erase(s.begin());
        while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.pop_back();
        return s;
    };
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": expected key=value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        CLI::Option* opt = key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
        if (!opt)
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": unknown option '" + key + "'");
        if (opt->count() > 0) continue;
        opt->add_result(value);
        opt->run_callback();
    }
}

gsgp::run_config to_run_config(const common_options& o, std::uint64_t engine_seed) {
    gsgp::run_config cfg;
    cfg.pop_size = o.pop;
    cfg.generations = o.gens;
    cfg.xo_rate = o.xo_rate;
    cfg.mut_rate = o.mut_rate;
    cfg.ms = o.ms;
    cfg.tournament_size = o.tournament;
    cfg.max_init_depth = o.init_depth;
    cfg.random_tree_depth = o.random_tree_depth;
    cfg.seed = engine_seed;
    cfg.sigmoid_on_mutation = !o.no_sigmoid_mutation;
    cfg.elitism = !o.no_elitism;
    cfg.ephemeral_constants = o.ephemeral_constants;
    return cfg;
}

gsgp::std_gp_config to_std_config(const common_options& o, std::uint64_t engine_seed) {
    gsgp::std_gp_config cfg;
    cfg.pop_size = o.pop;
    cfg.generations = o.gens;
    cfg.xo_rate = o.xo_rate;
    cfg.mut_rate = o.mut_rate;
    cfg.tournament_size = o.tournament;
    cfg.max_init_depth = o.init_depth;
    cfg.mutation_max_depth = o.mut_depth;
    cfg.seed = engine_seed;
    cfg.elitism = !o.no_elitism;
    cfg.ephemeral_constants = o.ephemeral_constants;
    cfg.node_ceiling = o.node_ceiling;
    return cfg;
}

struct run_outcome {
    gsgp::run_trace trace;
    gsgp::run_meta meta;
};

// Executes run index r: split with seed master+r, engine seeded from a
// decorrelated stream of the master. Writes per-run artifacts when a stem is
// given (trace CSV always; population/pool/store for gsgp, best tree for
// stdgp).
run_outcome execute_run(const common_options& o, const gsgp::dataset& ds, std::size_t r,
                        const fs::path* stem) {
    const std::uint64_t split_seed = o.seed + r;
    const std::uint64_t engine_seed = gsgp::derive_seed(o.seed, r);
    const gsgp::split_dataset split = gsgp::split(ds, o.split_fraction, split_seed);

    run_outcome out;
    out.meta.method = o.method;
    out.meta.dataset = o.dataset;
    out.meta.pop_size = o.pop;
    out.meta.generations = o.gens;
    out.meta.xo_rate = o.xo_rate;
    out.meta.mut_rate = o.mut_rate;
    out.meta.ms = o.ms;
    out.meta.tournament_size = o.tournament;
    out.meta.max_init_depth = o.init_depth;
    out.meta.sigmoid_on_mutation = !o.no_sigmoid_mutation;
    out.meta.elitism = !o.no_elitism;
    out.meta.split_fraction = o.split_fraction;
    out.meta.split_seed = split_seed;
    out.meta.engine_seed = engine_seed;
    out.meta.version = gsgp::version_string;

    if (o.method == "gsgp") {
        out.meta.random_tree_depth = o.random_tree_depth;
        gsgp::gsgp_engine engine(to_run_config(o, engine_seed), split);
        out.trace = engine.run();
        out.meta.best_ref = engine.best_id();
        out.meta.final_train_rmse = engine.best_train_rmse();
        out.meta.final_test_rmse = engine.best_test_rmse();
        out.meta.pool_size = engine.pool().size();
        out.meta.store_size = engine.store().size();
        if (stem) {
            fs::path csv = *stem;
            csv += ".csv";
            gsgp::write_trace_csv(csv, out.trace);
            gsgp::write_run_artifacts(*stem, out.meta, engine.initial_population(),
                                      engine.pool().trees(), engine.store());
        }
    } else {
        out.meta.random_tree_depth = o.mut_depth;
        out.meta.sigmoid_on_crossover = false;
        out.meta.sigmoid_on_mutation = false;
        gsgp::std_gp_engine engine(to_std_config(o, engine_seed), split);
        out.trace = engine.run();
        out.meta.best_ref = engine.best_index();
        out.meta.final_train_rmse = engine.best_train_rmse();
        out.meta.final_test_rmse = engine.best_test_rmse();
        if (stem) {
            fs::path csv = *stem;
            csv += ".csv";
            gsgp::write_trace_csv(csv, out.trace);
            fs::path best = *stem;
            best += ".best.txt";
            const gsgp::expr_ptr tree = engine.best_tree();
            gsgp::write_trees(best, std::span(&tree, 1));
            fs::path meta = *stem;
            meta += ".meta.txt";
            gsgp::write_meta(meta, out.meta);
        }
    }
    return out;
}

void write_manifest(const fs::path& path, const common_options& o, std::size_t runs,
                    const std::vector<run_outcome>& outcomes) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "version=" << gsgp::version_string << '\n'
        << "method=" << o.method << '\n'
        << "dataset=" << o.dataset << '\n'
        << "runs=" << runs << '\n'
        << "master_seed=" << o.seed << '\n'
        << "pop_size=" << o.pop << '\n'
        << "generations=" << o.gens << '\n'
        << "xo_rate=" << fmt(o.xo_rate) << '\n'
        << "mut_rate=" << fmt(o.mut_rate) << '\n';
    if (o.method == "gsgp")
        out << "ms=" << fmt(o.ms) << '\n'
            << "random_tree_depth=" << o.random_tree_depth << '\n'
            << "sigmoid_on_crossover=1\n"
            << "sigmoid_on_mutation=" << (o.no_sigmoid_mutation ? 0 : 1) << '\n';
    else
        out << "mutation_max_depth=" << o.mut_depth << '\n'
            << "node_ceiling=" << o.node_ceiling << '\n';
    out << "tournament_size=" << o.tournament << '\n'
        << "max_init_depth=" << o.init_depth << '\n'
        << "elitism=" << (o.no_elitism ? 0 : 1) << '\n'
        << "ephemeral_constants=" << (o.ephemeral_constants ? 1 : 0) << '\n'
        << "split_fraction=" << fmt(o.split_fraction) << '\n';
    for (std::size_t r = 0; r < outcomes.size(); ++r)
        out << "run_" << r << "_split_seed=" << outcomes[r].meta.split_seed << '\n'
            << "run_" << r << "_engine_seed=" << outcomes[r].meta.engine_seed << '\n'
            << "run_" << r << "_best_ref=" << outcomes[r].meta.best_ref << '\n';
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void write_bench_stats(const fs::path& dir, const std::string& method,
                       const std::vector<gsgp::run_trace>& traces) {
    gsgp::write_summary_csv(dir / "summary.csv", {{method, gsgp::summarize_curves(traces)}});
    std::vector<gsgp::labeled_box> boxes;
    const auto train = gsgp::final_train_rmse(traces);
    const auto test = gsgp::final_test_rmse(traces);
    if (train.size() >= 4) {
        boxes.push_back({method, "final_train_rmse", gsgp::summarize_box(train)});
        boxes.push_back({method, "final_test_rmse", gsgp::summarize_box(test)});
        gsgp::write_boxes_csv(dir / "boxes.csv", boxes);
    }
}

int cmd_run(const common_options& opts, const std::string& out_dir) {
    const gsgp::dataset ds = gsgp::load(opts.dataset);
    std::optional<fs::path> stem;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        stem = fs::path(out_dir) / "run-0";
    }
    const run_outcome outcome = execute_run(opts, ds, 0, stem ? &*stem : nullptr);
    std::cout << "method: " << opts.method << '\n'
              << "train_rmse: " << fmt(outcome.meta.final_train_rmse) << '\n'
              << "test_rmse: " << fmt(outcome.meta.final_test_rmse) << '\n';
    if (stem) std::cout << "artifacts: " << stem->string() << ".*\n";
    return 0;
}

int cmd_bench(const common_options& opts, const std::string& out_dir, std::size_t runs,
              std::size_t jobs) {
    if (runs == 0) throw std::invalid_argument("bench: --runs must be >= 1");
    const gsgp::dataset ds = gsgp::load(opts.dataset);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    std::vector<run_outcome> outcomes(runs);
    std::vector<fs::path> stems(runs);
    for (std::size_t r = 0; r < runs; ++r)
        stems[r] = dir / ("run-" + std::to_string(r));

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, runs));
    const auto worker = [&] {
        while (true) {
            const std::size_t r = next.fetch_add(1);
            if (r >= runs) return;
            try {
                outcomes[r] = execute_run(opts, ds, r, &stems[r]);
            } catch (...) {
                const std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (std::size_t i = 0; i < workers; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<gsgp::run_trace> traces;
    traces.reserve(runs);
    for (auto& oc : outcomes) traces.push_back(oc.trace);
    write_manifest(dir / "manifest.txt", opts, runs, outcomes);
    write_bench_stats(dir, opts.method, traces);

    std::cout << "runs: " << runs << '\n'
              << "median_final_train_rmse: " << fmt(gsgp::median(gsgp::final_train_rmse(traces)))
              << '\n'
              << "median_final_test_rmse: " << fmt(gsgp::median(gsgp::final_test_rmse(traces)))
              << '\n'
              << "artifacts: " << dir.string() << '\n';
    return 0;
}

fs::path strip_artifact_suffix(std::string arg) {
    for (const char* suffix :
         {".meta.txt", ".pop.txt", ".pool.txt", ".store.txt", ".csv"}) {
        if (arg.ends_with(suffix)) {
            arg.resize(arg.size() - std::string_view(suffix).size());
            break;
        }
    }
    return fs::path(arg);
}

int cmd_reconstruct(const std::string& artifact, std::uint64_t budget, bool do_simplify,
                    std::int64_t ref_flag) {
    const fs::path stem = strip_artifact_suffix(artifact);
    // Check the method before touching the tree files: stdgp runs only write
    // .meta.txt and .best.txt, so a full load would fail with a bare
    // cannot-open error instead of this explanation.
    fs::path meta_path = stem;
    meta_path += ".meta.txt";
    if (const gsgp::run_meta meta = gsgp::read_meta(meta_path); meta.method != "gsgp")
        throw std::runtime_error("reconstruct: artifacts at " + stem.string() +
                                 " are from method '" + meta.method +
                                 "', which stores explicit trees (see run-*.best.txt)");
    const gsgp::run_artifacts arts = gsgp::load_run_artifacts(stem);

    gsgp::reconstruction_context ctx;
    ctx.initial = arts.initial;
    ctx.pool = arts.pool;
    ctx.store = &arts.store;
    ctx.sigmoid_on_crossover = arts.meta.sigmoid_on_crossover;
    ctx.sigmoid_on_mutation = arts.meta.sigmoid_on_mutation;
    ctx.node_budget = budget;

    const gsgp::individual_id ref =
        ref_flag >= 0 ? static_cast<gsgp::individual_id>(ref_flag) : arts.meta.best_ref;
    const gsgp::big_int size = gsgp::expected_size(ref, ctx);
    std::cout << "ref: " << ref << '\n' << "expected_size: " << size.str() << '\n';
    if (size <= ctx.node_budget) {
        std::cout << "expression: " << gsgp::materialize(ref, ctx) << '\n';
    } else {
        std::cout << "expression: not materialized (expected size exceeds node budget "
                  << ctx.node_budget << ")\n";
    }
    if (do_simplify) {
        const gsgp::expr_ptr simplified = gsgp::simplify(gsgp::unwind(ref, ctx));
        std::cout << "simplified_size: " << simplified->node_count() << '\n';
        if (simplified->node_count() <= ctx.node_budget)
            std::cout << "simplified: " << gsgp::render(simplified) << '\n';
        else
            std::cout << "simplified: not materialized (size exceeds node budget "
                      << ctx.node_budget << ")\n";
    }
    return 0;
}

int cmd_simplify(const std::string& expr_text, const std::string& in_file) {
    std::string text = expr_text;
    if (text.empty()) {
        if (!in_file.empty()) {
            std::ifstream in(in_file);
            if (!in) throw std::runtime_error(in_file + ": cannot open");
            std::stringstream buffer;
            buffer << in.rdbuf();
            text = buffer.str();
        } else {
            std::stringstream buffer;
            buffer << std::cin.rdbuf();
            text = buffer.str();
        }
    }
    std::cout << gsgp::render(gsgp::simplify(gsgp::parse(text))) << '\n';
    return 0;
}

struct bench_input {
    std::string method;
    std::vector<gsgp::run_trace> traces;
};

bench_input read_bench_dir(const fs::path& dir) {
    std::ifstream in(dir / "manifest.txt");
    if (!in) throw std::runtime_error((dir / "manifest.txt").string() + ": cannot open");
    bench_input input;
    std::size_t runs = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.starts_with("method=")) input.method = line.substr(7);
        if (line.starts_with("runs=")) runs = std::stoull(line.substr(5));
    }
    if (input.method.empty() || runs == 0)
        throw std::runtime_error((dir / "manifest.txt").string() +
                                 ": missing method or runs key");
    for (std::size_t r = 0; r < runs; ++r)
        input.traces.push_back(gsgp::read_trace_csv(dir / ("run-" + std::to_string(r) + ".csv")));
    return input;
}

int cmd_stats(const std::vector<std::string>& in_dirs, const std::string& out_dir) {
    std::vector<bench_input> inputs;
    inputs.reserve(in_dirs.size());
    for (const auto& d : in_dirs) inputs.push_back(read_bench_dir(d));

    // disambiguate duplicate method labels by position
    for (std::size_t i = 0; i < inputs.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (inputs[j].method == inputs[i].method)
                inputs[i].method += "-" + std::to_string(i + 1);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    std::vector<std::pair<std::string, gsgp::curve_summary>> curves;
    std::vector<gsgp::labeled_box> boxes;
    for (const auto& input : inputs) {
        curves.emplace_back(input.method, gsgp::summarize_curves(input.traces));
        if (input.traces.size() >= 4) {
            boxes.push_back({input.method, "final_train_rmse",
                             gsgp::summarize_box(gsgp::final_train_rmse(input.traces))});
            boxes.push_back({input.method, "final_test_rmse",
                             gsgp::summarize_box(gsgp::final_test_rmse(input.traces))});
        }
    }
    gsgp::write_summary_csv(dir / "summary.csv", curves);
    gsgp::write_boxes_csv(dir / "boxes.csv", boxes);
    std::cout << "summary: " << (dir / "summary.csv").string() << '\n'
              << "boxes: " << (dir / "boxes.csv").string() << '\n';

    if (inputs.size() == 2) {
        const auto a_test = gsgp::final_test_rmse(inputs[0].traces);
        const auto b_test = gsgp::final_test_rmse(inputs[1].traces);
        const auto a_train = gsgp::final_train_rmse(inputs[0].traces);
        const auto b_train = gsgp::final_train_rmse(inputs[1].traces);
        const bool exact = a_test.size() + b_test.size() <= 20;
        const auto mode = exact ? gsgp::wilcoxon_mode::exact : gsgp::wilcoxon_mode::normal_approx;
        std::cout << "wilcoxon_mode: " << (exact ? "exact" : "normal_approx") << '\n'
                  << "wilcoxon_final_test_p: " << fmt(gsgp::wilcoxon_rank_sum(a_test, b_test, mode))
                  << '\n'
                  << "wilcoxon_final_train_p: "
                  << fmt(gsgp::wilcoxon_rank_sum(a_train, b_train, mode)) << '\n';
    }
    return 0;
}

}

int main(int argc, char** argv) {
    CLI::App app{"Geometric semantic genetic programming for symbolic regression"};
    app.require_subcommand(1);

    common_options run_opts;
    std::string run_out;
    CLI::App* run_cmd = app.add_subcommand("run", "One run; prints final train/test RMSE");
    add_common_options(run_cmd, run_opts);
    run_cmd->add_option("--out", run_out, "Directory for run artifacts (omit to skip writing)");

    common_options bench_opts;
    std::string bench_out;
    std::size_t bench_runs = 30;
    std::size_t bench_jobs = 1;
    CLI::App* bench_cmd =
        app.add_subcommand("bench", "Repeated runs with fresh splits; writes traces and summaries");
    add_common_options(bench_cmd, bench_opts);
    bench_cmd->add_option("--out", bench_out, "Output directory")->required();
    bench_cmd->add_option("--runs", bench_runs, "Number of runs")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--jobs", bench_jobs, "Concurrent runs")->check(CLI::PositiveNumber);

    std::string rec_artifact;
    std::uint64_t rec_budget = 10'000'000;
    bool rec_simplify = false;
    std::int64_t rec_ref = -1;
    CLI::App* rec_cmd = app.add_subcommand(
        "reconstruct", "Rebuild an individual from run artifacts and print it");
    rec_cmd->add_option("artifact", rec_artifact,
                        "Artifact stem (e.g. out/run-0) or any of its files")
        ->required();
    rec_cmd->add_option("--budget", rec_budget,
                        "Refuse to materialize expressions over this node count");
    rec_cmd->add_flag("--simplify", rec_simplify, "Also print the simplified expression");
    rec_cmd->add_option("--ref", rec_ref, "Individual to rebuild (default: the run's best)");

    std::string simp_expr;
    std::string simp_file;
    CLI::App* simp_cmd =
        app.add_subcommand("simplify", "Simplify an infix expression (from flag, file, or stdin)");
    simp_cmd->add_option("--expr", simp_expr, "Expression text");
    simp_cmd->add_option("--in", simp_file, "File holding the expression");

    std::vector<std::string> stats_in;
    std::string stats_out;
    CLI::App* stats_cmd = app.add_subcommand(
        "stats", "Aggregate bench directories; two inputs also get a rank-sum test");
    stats_cmd->add_option("--in", stats_in, "Bench output directory (repeatable)")
        ->required()
        ->expected(1, -1);
    stats_cmd->add_option("--out", stats_out, "Directory for summary.csv and boxes.csv")
        ->required();

    CLI11_PARSE(app, argc, argv);

    const auto finish_options = [](CLI::App* sub, common_options& o) {
        if (!o.config_file.empty()) apply_config(sub, o.config_file);
        if (o.dataset.empty())
            throw std::invalid_argument(
                "--dataset is required (on the command line or in the config file)");
        o.resolve();
    };

    try {
        if (run_cmd->parsed()) {
            finish_options(run_cmd, run_opts);
            return cmd_run(run_opts, run_out);
        }
        if (bench_cmd->parsed()) {
            finish_options(bench_cmd, bench_opts);
            return cmd_bench(bench_opts, bench_out, bench_runs, bench_jobs);
        }
        if (rec_cmd->parsed())
            return cmd_reconstruct(rec_artifact, rec_budget, rec_simplify, rec_ref);
        if (simp_cmd->parsed()) return cmd_simplify(simp_expr, simp_file);
        if (stats_cmd->parsed()) return cmd_stats(stats_in, stats_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
