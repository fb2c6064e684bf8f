#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "gsgp/dataio.hpp"
#include "gsgp/engine.hpp"
#include "gsgp/expr.hpp"

namespace gsgp {

struct std_gp_config {
    std::size_t pop_size = 100;
    std::size_t generations = 2000;
    double xo_rate = 0.9;
    double mut_rate = 0.1;
    std::size_t tournament_size = 4;
    int max_init_depth = 6;
    int mutation_max_depth = 6;
    std::uint64_t seed = 1;
    bool elitism = true;
    bool ephemeral_constants = false;

    /// Trees have no depth limit, but any offspring over this node count
    /// aborts the run with a diagnostic instead of exhausting memory.
    std::uint64_t node_ceiling = 1'000'000;

    void validate() const;
};

/// Copy of p1 with one uniformly chosen node replaced by a uniformly chosen
/// subtree of p2. Both parents are left untouched; unchanged parts are
/// shared, not copied. The p1 node index is drawn before the p2 index.
expr_ptr subtree_crossover(const expr_ptr& p1, const expr_ptr& p2, std::mt19937_64& rng);

/// Copy of p with one uniformly chosen node replaced by a fresh grow-tree of
/// depth at most max_depth. The node index is drawn before the subtree.
expr_ptr subtree_mutation(const expr_ptr& p, int max_depth, int num_features,
                          std::mt19937_64& rng, const generator_options& options = {});

/// Standard tree GP under the same protocol as the semantic engine: same
/// initialisation (identical generation 0 for equal seeds), tournament
/// selection, copy-first elitism, RMSE fitness, and the same trace schema
/// (the best field holds the population index). Operators are exclusive
/// alternatives per offspring: crossover with probability xo_rate, else
/// mutation with mut_rate, else reproduction, so xo_rate + mut_rate <= 1.
/// Fitness is recomputed by full tree evaluation every generation.
class std_gp_engine {
public:
    std_gp_engine(const std_gp_config& cfg, const split_dataset& data);
    std_gp_engine(const std_gp_config& cfg, const split_dataset& data,
                  std::vector<expr_ptr> initial_population);

    /// Throws std::runtime_error when an offspring exceeds the node ceiling.
    void step_generation();
    run_trace run();

    std::uint64_t generation() const noexcept { return generation_; }
    const std_gp_config& config() const noexcept { return cfg_; }
    const split_dataset& data() const noexcept { return data_; }

    const std::vector<expr_ptr>& population() const noexcept { return pop_; }
    std::span<const double> fitnesses() const noexcept { return fitness_; }
    std::size_t best_index() const noexcept { return best_idx_; }
    const expr_ptr& best_tree() const noexcept { return pop_[best_idx_]; }
    double best_train_rmse() const noexcept { return fitness_[best_idx_]; }
    double best_test_rmse() const;

    double init_elapsed_ms() const noexcept { return init_elapsed_ms_; }

private:
    void evaluate_population();

    std_gp_config cfg_;
    split_dataset data_;
    std::vector<expr_ptr> pop_;
    std::vector<double> fitness_;
    std::size_t best_idx_ = 0;
    std::uint64_t generation_ = 0;
    std::mt19937_64 evo_rng_;
    double init_elapsed_ms_ = 0.0;
};

/// Convenience wrapper mirroring gsgp::run.
run_trace run_std(const std_gp_config& cfg, const split_dataset& data);

}
