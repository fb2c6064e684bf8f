#include "gsgp/baseline.hpp"

#include <chrono>
#include <stdexcept>

#include "gsgp/rng.hpp"

namespace gsgp {

void std_gp_config::validate() const {
    if (pop_size < 2) throw std::invalid_argument("std_gp_config: pop_size must be >= 2");
    if (!(xo_rate >= 0.0 && xo_rate <= 1.0))
        throw std::invalid_argument("std_gp_config: xo_rate must be in [0, 1]");
    if (!(mut_rate >= 0.0 && mut_rate <= 1.0))
        throw std::invalid_argument("std_gp_config: mut_rate must be in [0, 1]");
    if (xo_rate + mut_rate > 1.0)
        throw std::invalid_argument(
            "std_gp_config: xo_rate + mut_rate must not exceed 1 (operators are exclusive)");
    if (tournament_size < 1 || tournament_size > pop_size)
        throw std::invalid_argument("std_gp_config: tournament_size must be in [1, pop_size]");
    if (max_init_depth < 1)
        throw std::invalid_argument("std_gp_config: max_init_depth must be >= 1");
    if (mutation_max_depth < 0)
        throw std::invalid_argument("std_gp_config: mutation_max_depth must be >= 0");
    if (node_ceiling < 1)
        throw std::invalid_argument("std_gp_config: node_ceiling must be >= 1");
}

expr_ptr subtree_crossover(const expr_ptr& p1, const expr_ptr& p2, std::mt19937_64& rng) {
    if (!p1 || !p2) throw std::invalid_argument("subtree_crossover: null parent");
    const auto i1 =
        std::uniform_int_distribution<std::uint64_t>(0, p1->node_count() - 1)(rng);
    const auto i2 =
        std::uniform_int_distribution<std::uint64_t>(0, p2->node_count() - 1)(rng);
    return replace_subtree(p1, i1, subtree_at(p2, i2));
}

expr_ptr subtree_mutation(const expr_ptr& p, int max_depth, int num_features,
                          std::mt19937_64& rng, const generator_options& options) {
    if (!p) throw std::invalid_argument("subtree_mutation: null parent");
    const auto i = std::uniform_int_distribution<std::uint64_t>(0, p->node_count() - 1)(rng);
    auto fresh = random_tree(max_depth, gen_method::grow, num_features, rng, options);
    return replace_subtree(p, i, std::move(fresh));
}

namespace {

std_gp_config validated(std_gp_config cfg) {
    cfg.validate();
    return cfg;
}

const split_dataset& validated(const split_dataset& data) {
    if (data.train.rows == 0 || data.test.rows == 0)
        throw std::invalid_argument("std_gp_engine: both train and test sides must be non-empty");
    if (data.train.features == 0)
        throw std::invalid_argument("std_gp_engine: dataset has no feature columns");
    if (data.test.features != data.train.features)
        throw std::invalid_argument("std_gp_engine: train/test feature count mismatch");
    return data;
}

std::vector<expr_ptr> make_initial(const std_gp_config& cfg, std::size_t num_features,
                                   std::vector<expr_ptr> given) {
    if (!given.empty()) {
        if (given.size() != cfg.pop_size)
            throw std::invalid_argument("std_gp_engine: initial population size " +
                                        std::to_string(given.size()) + " does not match pop_size " +
                                        std::to_string(cfg.pop_size));
        for (const auto& t : given)
            if (!t) throw std::invalid_argument("std_gp_engine: initial tree is null");
        return given;
    }
    auto rng = make_rng(cfg.seed, rng_stream_init);
    generator_options opts;
    opts.ephemeral_constants = cfg.ephemeral_constants;
    return ramped_half_and_half(cfg.pop_size, cfg.max_init_depth,
                                static_cast<int>(num_features), rng, opts);
}

}

std_gp_engine::std_gp_engine(const std_gp_config& cfg, const split_dataset& data)
    : std_gp_engine(cfg, data, {}) {}

std_gp_engine::std_gp_engine(const std_gp_config& cfg, const split_dataset& data,
                             std::vector<expr_ptr> initial_population)
    : cfg_(validated(cfg)),
      data_(validated(data)),
      pop_(make_initial(cfg_, data_.train.features, std::move(initial_population))),
      evo_rng_(make_rng(cfg_.seed, rng_stream_evolution)) {
    const auto t0 = std::chrono::steady_clock::now();
    evaluate_population();
    init_elapsed_ms_ =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void std_gp_engine::evaluate_population() {
    const case_matrix train_cases = data_.train.cases();
    fitness_.resize(pop_.size());
    for (std::size_t i = 0; i < pop_.size(); ++i)
        fitness_[i] = rmse(eval_all(pop_[i], train_cases), data_.train.y);
    best_idx_ = 0;
    for (std::size_t i = 1; i < fitness_.size(); ++i)
        if (fitness_[i] < fitness_[best_idx_]) best_idx_ = i;
}

double std_gp_engine::best_test_rmse() const {
    return rmse(eval_all(pop_[best_idx_], data_.test.cases()), data_.test.y);
}

void std_gp_engine::step_generation() {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    generator_options opts;
    opts.ephemeral_constants = cfg_.ephemeral_constants;
    const int num_features = static_cast<int>(data_.train.features);

    std::vector<expr_ptr> next;
    next.reserve(cfg_.pop_size);
    if (cfg_.elitism) next.push_back(pop_[best_idx_]);
    while (next.size() < cfg_.pop_size) {
        const double u = unit(evo_rng_);
        expr_ptr child;
        if (u < cfg_.xo_rate) {
            const std::size_t c1 = tournament_select(fitness_, cfg_.tournament_size, evo_rng_);
            const std::size_t c2 = tournament_select(fitness_, cfg_.tournament_size, evo_rng_);
            child = subtree_crossover(pop_[c1], pop_[c2], evo_rng_);
        } else if (u < cfg_.xo_rate + cfg_.mut_rate) {
            const std::size_t c = tournament_select(fitness_, cfg_.tournament_size, evo_rng_);
            child = subtree_mutation(pop_[c], cfg_.mutation_max_depth, num_features, evo_rng_,
                                     opts);
        } else {
            const std::size_t c = tournament_select(fitness_, cfg_.tournament_size, evo_rng_);
            child = pop_[c];
        }
        if (child->node_count() > cfg_.node_ceiling)
            throw std::runtime_error(
                "std_gp_engine: offspring of " + std::to_string(child->node_count()) +
                " nodes exceeds the ceiling of " + std::to_string(cfg_.node_ceiling) +
                " at generation " + std::to_string(generation_ + 1) +
                "; raise node_ceiling or stop earlier");
        next.push_back(std::move(child));
    }
    pop_ = std::move(next);
    evaluate_population();
    ++generation_;
}

run_trace std_gp_engine::run() {
    run_trace trace;
    trace.records.push_back({generation_, best_train_rmse(), best_test_rmse(),
                             static_cast<individual_id>(best_idx_),
                             generation_ == 0 ? init_elapsed_ms_ : 0.0});
    while (generation_ < cfg_.generations) {
        const auto t0 = std::chrono::steady_clock::now();
        step_generation();
        const double elapsed =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        trace.records.push_back({generation_, best_train_rmse(), best_test_rmse(),
                                 static_cast<individual_id>(best_idx_), elapsed});
    }
    trace.final_best = static_cast<individual_id>(best_idx_);
    return trace;
}

run_trace run_std(const std_gp_config& cfg, const split_dataset& data) {
    std_gp_engine engine(cfg, data);
    return engine.run();
}

}
