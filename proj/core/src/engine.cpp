#include "gsgp/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "gsgp/rng.hpp"

namespace gsgp {

void run_config::validate() const {
    if (pop_size < 2) throw std::invalid_argument("run_config: pop_size must be >= 2");
    if (!(xo_rate >= 0.0 && xo_rate <= 1.0))
        throw std::invalid_argument("run_config: xo_rate must be in [0, 1]");
    if (!(mut_rate >= 0.0 && mut_rate <= 1.0))
        throw std::invalid_argument("run_config: mut_rate must be in [0, 1]");
    if (!(ms > 0.0)) throw std::invalid_argument("run_config: ms must be > 0");
    if (tournament_size < 1 || tournament_size > pop_size)
        throw std::invalid_argument("run_config: tournament_size must be in [1, pop_size]");
    if (max_init_depth < 1) throw std::invalid_argument("run_config: max_init_depth must be >= 1");
    if (random_tree_depth < 0)
        throw std::invalid_argument("run_config: random_tree_depth must be >= 0");
}

double rmse(std::span<const double> outputs, std::span<const double> targets) {
    if (outputs.size() != targets.size())
        throw std::invalid_argument("rmse: length mismatch (" + std::to_string(outputs.size()) +
                                    " vs " + std::to_string(targets.size()) + ")");
    if (outputs.empty()) throw std::invalid_argument("rmse: empty vectors");
    double sum = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const double d = outputs[i] - targets[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(outputs.size()));
}

std::size_t tournament_select(std::span<const double> fitnesses, std::size_t size,
                              std::mt19937_64& rng) {
    if (fitnesses.empty()) throw std::invalid_argument("tournament_select: empty fitness list");
    if (size < 1) throw std::invalid_argument("tournament_select: size must be >= 1");
    std::uniform_int_distribution<std::size_t> pick(0, fitnesses.size() - 1);
    std::size_t best = pick(rng);
    for (std::size_t i = 1; i < size; ++i) {
        const std::size_t c = pick(rng);
        if (fitnesses[c] < fitnesses[best]) best = c;
    }
    return best;
}

namespace {

run_config validated(run_config cfg) {
    cfg.validate();
    return cfg;
}

const split_dataset& validated(const split_dataset& data) {
    if (data.train.rows == 0 || data.test.rows == 0)
        throw std::invalid_argument("gsgp_engine: both train and test sides must be non-empty");
    if (data.train.features == 0)
        throw std::invalid_argument("gsgp_engine: dataset has no feature columns");
    if (data.test.features != data.train.features)
        throw std::invalid_argument("gsgp_engine: train/test feature count mismatch");
    return data;
}

std::vector<expr_ptr> make_initial(const run_config& cfg, std::size_t num_features,
                                   std::vector<expr_ptr> given) {
    if (!given.empty()) {
        if (given.size() != cfg.pop_size)
            throw std::invalid_argument("gsgp_engine: initial population size " +
                                        std::to_string(given.size()) + " does not match pop_size " +
                                        std::to_string(cfg.pop_size));
        for (const auto& t : given)
            if (!t) throw std::invalid_argument("gsgp_engine: initial tree is null");
        return given;
    }
    auto rng = make_rng(cfg.seed, rng_stream_init);
    generator_options opts;
    opts.ephemeral_constants = cfg.ephemeral_constants;
    return ramped_half_and_half(cfg.pop_size, cfg.max_init_depth,
                                static_cast<int>(num_features), rng, opts);
}

random_pool make_pool(const run_config& cfg, const split_dataset& owned,
                      std::vector<expr_ptr> trees) {
    if (!trees.empty())
        return random_pool(std::move(trees), owned.train.cases(), owned.test.cases());
    generator_options opts;
    opts.ephemeral_constants = cfg.ephemeral_constants;
    return random_pool(owned.train.cases(), owned.test.cases(), cfg.random_tree_depth,
                       static_cast<int>(owned.train.features), opts);
}

}

gsgp_engine::gsgp_engine(const run_config& cfg, const split_dataset& data)
    : gsgp_engine(cfg, data, {}, {}) {}

gsgp_engine::gsgp_engine(const run_config& cfg, const split_dataset& data,
                         std::vector<expr_ptr> initial_population,
                         std::vector<expr_ptr> pool_trees)
    : cfg_(validated(cfg)),
      data_(validated(data)),
      initial_(make_initial(cfg_, data_.train.features, std::move(initial_population))),
      pool_(make_pool(cfg_, data_, std::move(pool_trees))),
      store_(cfg_.pop_size),
      train_cur_(data_.train.rows, cfg_.pop_size, 0),
      train_next_(data_.train.rows, cfg_.pop_size, 1),
      test_cur_(data_.test.rows, cfg_.pop_size, 0),
      test_next_(data_.test.rows, cfg_.pop_size, 1),
      evo_rng_(make_rng(cfg_.seed, rng_stream_evolution)) {
    const auto t0 = std::chrono::steady_clock::now();
    store_.set_pool_size(pool_.size());
    const case_matrix train_cases = data_.train.cases();
    const case_matrix test_cases = data_.test.cases();
    members_.reserve(cfg_.pop_size);
    for (std::size_t i = 0; i < cfg_.pop_size; ++i) {
        train_cur_.push_column(eval_all(initial_[i], train_cases));
        test_cur_.push_column(eval_all(initial_[i], test_cases));
        members_.push_back(i);
    }
    recompute_fitness();
    init_elapsed_ms_ =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

double gsgp_engine::best_test_rmse() const {
    return rmse(test_cur_.column(best_col_), data_.test.y);
}

pool_id gsgp_engine::fresh_pool_tree() {
    const pool_id id = pool_.add_fresh(evo_rng_);
    store_.set_pool_size(pool_.size());
    return id;
}

std::size_t gsgp_engine::column_of(individual_id id) const {
    for (std::size_t c = 0; c < members_.size(); ++c)
        if (members_[c] == id) return c;
    throw std::logic_error("gsgp_engine: individual " + std::to_string(id) +
                           " is not in the current generation");
}

individual_id gsgp_engine::compute_crossover(std::size_t c1, std::size_t c2, pool_id r,
                                             semantic_vector& train_out,
                                             semantic_vector& test_out) {
    const semantic_vector& r_train = pool_.train_semantics(r);
    const semantic_vector& r_test = pool_.test_semantics(r);
    if (cfg_.sigmoid_on_crossover) {
        train_out = xo_semantics(train_cur_.column(c1), train_cur_.column(c2),
                                 sigmoid_map(r_train));
        test_out = xo_semantics(test_cur_.column(c1), test_cur_.column(c2),
                                sigmoid_map(r_test));
    } else {
        train_out = xo_semantics(train_cur_.column(c1), train_cur_.column(c2), r_train);
        test_out = xo_semantics(test_cur_.column(c1), test_cur_.column(c2), r_test);
    }
    return store_.record_crossover(members_[c1], members_[c2], r);
}

individual_id gsgp_engine::apply_mutation(individual_id parent, pool_id r1, pool_id r2,
                                          semantic_vector& train_io, semantic_vector& test_io) {
    const semantic_vector& r1_train = pool_.train_semantics(r1);
    const semantic_vector& r2_train = pool_.train_semantics(r2);
    const semantic_vector& r1_test = pool_.test_semantics(r1);
    const semantic_vector& r2_test = pool_.test_semantics(r2);
    if (cfg_.sigmoid_on_mutation) {
        train_io = mut_semantics(train_io, sigmoid_map(r1_train), sigmoid_map(r2_train), cfg_.ms);
        test_io = mut_semantics(test_io, sigmoid_map(r1_test), sigmoid_map(r2_test), cfg_.ms);
    } else {
        train_io = mut_semantics(train_io, r1_train, r2_train, cfg_.ms);
        test_io = mut_semantics(test_io, r1_test, r2_test, cfg_.ms);
    }
    return store_.record_mutation(parent, r1, r2, cfg_.ms);
}

void gsgp_engine::push_next(individual_id id, semantic_vector train_col,
                            semantic_vector test_col) {
    train_next_.push_column(std::move(train_col));
    test_next_.push_column(std::move(test_col));
    next_members_.push_back(id);
}

void gsgp_engine::recompute_fitness() {
    fitness_.resize(members_.size());
    for (std::size_t c = 0; c < members_.size(); ++c)
        fitness_[c] = rmse(train_cur_.column(c), data_.train.y);
    best_col_ = 0;
    for (std::size_t c = 1; c < fitness_.size(); ++c)
        if (fitness_[c] < fitness_[best_col_]) best_col_ = c;
}

individual_id gsgp_engine::crossover_into_next(individual_id p1, individual_id p2, pool_id r) {
    const std::size_t c1 = column_of(p1);
    const std::size_t c2 = column_of(p2);
    semantic_vector train_col, test_col;
    const individual_id child = compute_crossover(c1, c2, r, train_col, test_col);
    push_next(child, std::move(train_col), std::move(test_col));
    return child;
}

individual_id gsgp_engine::mutate_into_next(individual_id parent, pool_id r1, pool_id r2) {
    const std::size_t c = column_of(parent);
    semantic_vector train_col = train_cur_.column(c);
    semantic_vector test_col = test_cur_.column(c);
    const individual_id child = apply_mutation(parent, r1, r2, train_col, test_col);
    push_next(child, std::move(train_col), std::move(test_col));
    return child;
}

void gsgp_engine::copy_into_next(individual_id member) {
    const std::size_t c = column_of(member);
    push_next(member, train_cur_.column(c), test_cur_.column(c));
}

void gsgp_engine::finish_generation() {
    swap_generation(train_cur_, train_next_);
    swap_generation(test_cur_, test_next_);
    members_ = std::move(next_members_);
    next_members_.clear();
    pool_.drop_semantics_cache();
    recompute_fitness();
}

void gsgp_engine::step_generation() {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (cfg_.elitism)
        push_next(members_[best_col_], train_cur_.column(best_col_), test_cur_.column(best_col_));
    while (next_members_.size() < cfg_.pop_size) {
        semantic_vector train_col, test_col;
        individual_id child;
        if (unit(evo_rng_) < cfg_.xo_rate) {
            const std::size_t c1 = tournament_select(fitness_, cfg_.tournament_size, evo_rng_);
            const std::size_t c2 = tournament_select(fitness_, cfg_.tournament_size, evo_rng_);
            const pool_id r = fresh_pool_tree();
            child = compute_crossover(c1, c2, r, train_col, test_col);
        } else {
            const std::size_t c = tournament_select(fitness_, cfg_.tournament_size, evo_rng_);
            train_col = train_cur_.column(c);
            test_col = test_cur_.column(c);
            child = members_[c];
        }
        if (unit(evo_rng_) < cfg_.mut_rate) {
            const pool_id r1 = fresh_pool_tree();
            const pool_id r2 = fresh_pool_tree();
            child = apply_mutation(child, r1, r2, train_col, test_col);
        }
        push_next(child, std::move(train_col), std::move(test_col));
    }
    finish_generation();
}

run_trace gsgp_engine::run() {
    run_trace trace;
    trace.records.push_back({generation(), best_train_rmse(), best_test_rmse(), best_id(),
                             generation() == 0 ? init_elapsed_ms_ : 0.0});
    while (generation() < cfg_.generations) {
        const auto t0 = std::chrono::steady_clock::now();
        step_generation();
        const double elapsed =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        trace.records.push_back({generation(), best_train_rmse(), best_test_rmse(), best_id(),
                                 elapsed});
    }
    trace.final_best = best_id();
    return trace;
}

run_trace run(const run_config& cfg, const split_dataset& data) {
    gsgp_engine engine(cfg, data);
    return engine.run();
}

}
