#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "gsgp/dataio.hpp"
#include "gsgp/semantics.hpp"

namespace gsgp {

struct run_config {
    std::size_t pop_size = 100;
    std::size_t generations = 2000;
    double xo_rate = 0.9;
    double mut_rate = 0.5;
    double ms = 0.1;
    std::size_t tournament_size = 4;
    int max_init_depth = 6;
    int random_tree_depth = 6;
    std::uint64_t seed = 1;
    bool sigmoid_on_crossover = true;
    bool sigmoid_on_mutation = true;
    bool elitism = true;
    bool ephemeral_constants = false;

    /// Throws std::invalid_argument describing the first violated bound.
    void validate() const;
};

struct trace_record {
    std::uint64_t generation = 0;
    double best_train_rmse = 0.0;
    double best_test_rmse = 0.0;
    individual_id best = 0;
    double elapsed_ms = 0.0;
};

/// Per-generation progress of one run. Every field except elapsed_ms is a
/// pure function of (config, dataset, seed).
struct run_trace {
    std::vector<trace_record> records;
    individual_id final_best = 0;
};

/// Root mean squared error. Requires equal non-zero lengths; zero iff the
/// vectors are identical.
double rmse(std::span<const double> outputs, std::span<const double> targets);

/// Index of the best (lowest-fitness) member among `size` candidates drawn
/// uniformly with replacement. Ties keep the earliest drawn candidate.
std::size_t tournament_select(std::span<const double> fitnesses, std::size_t size,
                              std::mt19937_64& rng);

/// Evolutionary loop working purely on semantics: offspring are new table
/// columns computed from their parents' columns plus random-tree semantics,
/// and an ancestry entry per operator application. No offspring tree is ever
/// built, so the per-generation cost is O(pop_size * cases) regardless of
/// how large the virtual individuals have grown.
///
/// Per offspring slot: with probability xo_rate a crossover of two
/// tournament-selected parents, otherwise a straight copy of one; then,
/// independently with probability mut_rate, a mutation of that result. With
/// elitism the current best is copied into the next generation first,
/// keeping best train RMSE non-increasing.
class gsgp_engine {
public:
    gsgp_engine(const run_config& cfg, const split_dataset& data);

    /// Test-fixture entry point: explicit generation-0 trees and a preloaded
    /// random pool (pass an empty vector to keep lazy generation). The
    /// initial population must match cfg.pop_size.
    gsgp_engine(const run_config& cfg, const split_dataset& data,
                std::vector<expr_ptr> initial_population, std::vector<expr_ptr> pool_trees);

    /// One full generation: elite copy, offspring pipeline, table swap.
    void step_generation();

    /// Steps until the configured generation count is reached. The first
    /// trace record reports the state already present on entry.
    run_trace run();

    /// Deterministic building blocks of step_generation, exposed so a driver
    /// can dictate exact parents and pool trees. Each appends one column to
    /// the next generation; finish_generation swaps it in once complete.
    individual_id crossover_into_next(individual_id p1, individual_id p2, pool_id r);
    individual_id mutate_into_next(individual_id parent, pool_id r1, pool_id r2);
    void copy_into_next(individual_id member);
    void finish_generation();

    std::uint64_t generation() const noexcept { return train_cur_.generation(); }
    const run_config& config() const noexcept { return cfg_; }
    const split_dataset& data() const noexcept { return data_; }

    const semantics_table& train_table() const noexcept { return train_cur_; }
    const semantics_table& test_table() const noexcept { return test_cur_; }

    /// Individual ids of the current generation, one per table column.
    std::span<const individual_id> members() const noexcept { return members_; }
    std::span<const double> fitnesses() const noexcept { return fitness_; }

    std::size_t best_column() const noexcept { return best_col_; }
    individual_id best_id() const noexcept { return members_[best_col_]; }
    double best_train_rmse() const noexcept { return fitness_[best_col_]; }
    double best_test_rmse() const;

    const ancestry_store& store() const noexcept { return store_; }
    random_pool& pool() noexcept { return pool_; }
    const random_pool& pool() const noexcept { return pool_; }
    const std::vector<expr_ptr>& initial_population() const noexcept { return initial_; }

    double init_elapsed_ms() const noexcept { return init_elapsed_ms_; }

private:
    pool_id fresh_pool_tree();
    std::size_t column_of(individual_id id) const;
    individual_id compute_crossover(std::size_t c1, std::size_t c2, pool_id r,
                                    semantic_vector& train_out, semantic_vector& test_out);
    individual_id apply_mutation(individual_id parent, pool_id r1, pool_id r2,
                                 semantic_vector& train_io, semantic_vector& test_io);
    void push_next(individual_id id, semantic_vector train_col, semantic_vector test_col);
    void recompute_fitness();

    run_config cfg_;
    split_dataset data_;
    std::vector<expr_ptr> initial_;
    random_pool pool_;
    ancestry_store store_;
    semantics_table train_cur_;
    semantics_table train_next_;
    semantics_table test_cur_;
    semantics_table test_next_;
    std::vector<individual_id> members_;
    std::vector<individual_id> next_members_;
    std::vector<double> fitness_;
    std::size_t best_col_ = 0;
    std::mt19937_64 evo_rng_;
    double init_elapsed_ms_ = 0.0;
};

/// Convenience wrapper: build an engine, run it, return only the trace.
run_trace run(const run_config& cfg, const split_dataset& data);

}
