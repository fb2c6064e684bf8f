#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gsgp/engine.hpp"
#include "gsgp/expr.hpp"
#include "gsgp/semantics.hpp"
#include "gsgp/stats.hpp"

namespace gsgp {

/// Trace CSV with header `generation,best_train_rmse,best_test_rmse,elapsed_ms`.
/// Reading restores those four fields; the best-individual ref is not part
/// of the schema (it lives in the run meta file) and reads back as 0.
void write_trace_csv(const std::filesystem::path& path, const run_trace& trace);
run_trace read_trace_csv(const std::filesystem::path& path);

/// One infix expression per line, parse/render round-trip exact.
void write_trees(const std::filesystem::path& path, std::span<const expr_ptr> trees);
std::vector<expr_ptr> read_trees(const std::filesystem::path& path);

/// Line-oriented ancestry log:
///   `<child_id> crossover <parent1> <parent2> <pool_ref>`
///   `<child_id> mutation <parent> <pool_ref1> <pool_ref2> <ms>`
/// Child ids must be dense and ascending; the reader revalidates every ref
/// against the given initial population and pool sizes and reports the
/// offending line on failure.
void write_store(const std::filesystem::path& path, const ancestry_store& store);
ancestry_store read_store(const std::filesystem::path& path, std::uint64_t initial_count,
                          std::uint64_t pool_size);

/// Flat key=value description of one finished run; everything the
/// reconstruct subcommand needs to resolve the other artifact files.
struct run_meta {
    std::string method = "gsgp";
    std::string dataset;
    std::size_t pop_size = 0;
    std::size_t generations = 0;
    double xo_rate = 0.0;
    double mut_rate = 0.0;
    double ms = 0.0;
    std::size_t tournament_size = 0;
    int max_init_depth = 0;
    int random_tree_depth = 0;    // mutation subtree depth for method stdgp
    bool sigmoid_on_crossover = true;
    bool sigmoid_on_mutation = true;
    bool elitism = true;
    double split_fraction = 0.0;
    std::uint64_t split_seed = 0;
    std::uint64_t engine_seed = 0;
    std::uint64_t best_ref = 0;
    double final_train_rmse = 0.0;
    double final_test_rmse = 0.0;
    std::size_t pool_size = 0;
    std::size_t store_size = 0;
    std::string version;
};

void write_meta(const std::filesystem::path& path, const run_meta& meta);
run_meta read_meta(const std::filesystem::path& path);

/// The artifact bundle of one semantic-engine run, addressed by a common
/// stem: <stem>.meta.txt, <stem>.pop.txt, <stem>.pool.txt, <stem>.store.txt
/// (plus <stem>.csv for the trace, not loaded here).
struct run_artifacts {
    run_meta meta;
    std::vector<expr_ptr> initial;
    std::vector<expr_ptr> pool;
    ancestry_store store;
};

void write_run_artifacts(const std::filesystem::path& stem, const run_meta& meta,
                         std::span<const expr_ptr> initial, std::span<const expr_ptr> pool,
                         const ancestry_store& store);
run_artifacts load_run_artifacts(const std::filesystem::path& stem);

/// summary.csv: per-generation median curves, one train/test column pair per
/// method, e.g. `generation,gsgp_median_train,gsgp_median_test,...`.
/// All methods must cover the same generation count.
void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, curve_summary>>& methods);

/// boxes.csv: one row per (method, metric) box with the whisker fields and
/// a semicolon-joined outlier list.
struct labeled_box {
    std::string method;
    std::string metric;
    box_summary box;
};
void write_boxes_csv(const std::filesystem::path& path, const std::vector<labeled_box>& boxes);

}
