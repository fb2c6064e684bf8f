#include "gsgp/semantics.hpp"

#include <stdexcept>
#include <string>

namespace gsgp {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* where) {
    if (a != b)
        throw std::invalid_argument(std::string(where) + ": semantic vector lengths differ (" +
                                    std::to_string(a) + " vs " + std::to_string(b) + ")");
}

}

semantic_vector sigmoid_map(const semantic_vector& raw) {
    semantic_vector out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = sigmoid_clamped(raw[i]);
    return out;
}

semantic_vector xo_semantics(const semantic_vector& s1, const semantic_vector& s2,
                             const semantic_vector& sr) {
    require_same_length(s1.size(), s2.size(), "xo_semantics");
    require_same_length(s1.size(), sr.size(), "xo_semantics");
    semantic_vector out(s1.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = s1[i] * sr[i] + (1.0 - sr[i]) * s2[i];
    return out;
}

semantic_vector mut_semantics(const semantic_vector& s, const semantic_vector& sr1,
                              const semantic_vector& sr2, double ms) {
    require_same_length(s.size(), sr1.size(), "mut_semantics");
    require_same_length(s.size(), sr2.size(), "mut_semantics");
    if (ms < 0.0) throw std::invalid_argument("mut_semantics: ms must be >= 0");
    semantic_vector out(s.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s[i] + ms * (sr1[i] - sr2[i]);
    return out;
}

semantics_table::semantics_table(std::size_t case_count, std::size_t expected_columns,
                                 std::uint64_t generation)
    : case_count_(case_count), expected_columns_(expected_columns), generation_(generation) {
    if (case_count_ == 0)
        throw std::invalid_argument("semantics_table: case count must be positive");
    if (expected_columns_ == 0)
        throw std::invalid_argument("semantics_table: expected column count must be positive");
    columns_.reserve(expected_columns_);
}

void semantics_table::push_column(semantic_vector column) {
    if (complete())
        throw std::logic_error("semantics_table: generation " + std::to_string(generation_) +
                               " already has all " + std::to_string(expected_columns_) +
                               " columns");
    if (column.size() != case_count_)
        throw std::invalid_argument("semantics_table: column length " +
                                    std::to_string(column.size()) + " does not match case count " +
                                    std::to_string(case_count_));
    columns_.push_back(std::move(column));
}

void semantics_table::clear(std::uint64_t new_generation) {
    columns_.clear();
    generation_ = new_generation;
}

semantics_table& swap_generation(semantics_table& current, semantics_table& next) {
    if (!next.complete())
        throw std::logic_error("swap_generation: next table holds " +
                               std::to_string(next.columns()) + " of " +
                               std::to_string(next.expected_columns()) + " columns");
    const std::uint64_t promoted = next.generation();
    current = std::move(next);
    next = semantics_table(current.case_count(), current.expected_columns(), promoted + 1);
    return current;
}

ancestry_store::ancestry_store(std::uint64_t initial_population)
    : initial_count_(initial_population) {
    if (initial_count_ == 0)
        throw std::invalid_argument("ancestry_store: initial population must be non-empty");
}

void ancestry_store::set_pool_size(std::uint64_t n) {
    if (n < pool_size_)
        throw std::logic_error("ancestry_store: pool size cannot shrink");
    pool_size_ = n;
}

namespace {

[[noreturn]] void bad_ref(const char* op, const char* what, std::uint64_t ref,
                          std::uint64_t limit) {
    throw std::logic_error(std::string(op) + ": " + what + " ref " + std::to_string(ref) +
                           " is not resolvable (limit " + std::to_string(limit) + ")");
}

}

individual_id ancestry_store::record_crossover(individual_id p1, individual_id p2, pool_id r) {
    const individual_id child = next_id();
    if (p1 >= child) bad_ref("record_crossover", "parent1", p1, child);
    if (p2 >= child) bad_ref("record_crossover", "parent2", p2, child);
    if (r >= pool_size_) bad_ref("record_crossover", "pool", r, pool_size_);
    entries_.push_back({child, ancestry_op::crossover, p1, p2, r, 0, 0.0});
    return child;
}

individual_id ancestry_store::record_mutation(individual_id p, pool_id r1, pool_id r2, double ms) {
    const individual_id child = next_id();
    if (p >= child) bad_ref("record_mutation", "parent", p, child);
    if (r1 >= pool_size_) bad_ref("record_mutation", "pool", r1, pool_size_);
    if (r2 >= pool_size_) bad_ref("record_mutation", "pool", r2, pool_size_);
    if (!(ms > 0.0))
        throw std::invalid_argument("record_mutation: ms must be > 0");
    entries_.push_back({child, ancestry_op::mutation, p, 0, r1, r2, ms});
    return child;
}

const ancestry_entry& ancestry_store::entry(individual_id id) const {
    if (id < initial_count_)
        throw std::out_of_range("ancestry_store: id " + std::to_string(id) +
                                " is an initial individual, not a recorded offspring");
    if (id >= next_id())
        throw std::out_of_range("ancestry_store: id " + std::to_string(id) +
                                " has not been recorded (next id " +
                                std::to_string(next_id()) + ")");
    return entries_[static_cast<std::size_t>(id - initial_count_)];
}

random_pool::random_pool(case_matrix train_cases, case_matrix test_cases, int tree_depth,
                         int num_features, generator_options options)
    : train_(train_cases), test_(test_cases), tree_depth_(tree_depth),
      num_features_(num_features), options_(options) {
    if (tree_depth_ < 0) throw std::invalid_argument("random_pool: tree depth must be >= 0");
    if (num_features_ < 1) throw std::invalid_argument("random_pool: num_features must be >= 1");
}

random_pool::random_pool(std::vector<expr_ptr> trees, case_matrix train_cases,
                         case_matrix test_cases)
    : train_(train_cases), test_(test_cases), trees_(std::move(trees)) {
    for (const auto& t : trees_)
        if (!t) throw std::invalid_argument("random_pool: preloaded tree is null");
    train_cache_.resize(trees_.size());
    test_cache_.resize(trees_.size());
}

pool_id random_pool::add_fresh(std::mt19937_64& rng) {
    if (num_features_ < 1)
        throw std::logic_error("random_pool: pool was preloaded and cannot generate trees");
    trees_.push_back(random_tree(tree_depth_, gen_method::grow, num_features_, rng, options_));
    train_cache_.emplace_back();
    test_cache_.emplace_back();
    return trees_.size() - 1;
}

const semantic_vector& random_pool::train_semantics(pool_id id) {
    auto& slot = train_cache_.at(id);
    if (!slot) {
        slot = eval_all(trees_[id], train_);
        if (!test_cache_[id]) recently_cached_.push_back(id);
    }
    return *slot;
}

const semantic_vector& random_pool::test_semantics(pool_id id) {
    auto& slot = test_cache_.at(id);
    if (!slot) {
        slot = eval_all(trees_[id], test_);
        if (!train_cache_[id]) recently_cached_.push_back(id);
    }
    return *slot;
}

void random_pool::drop_semantics_cache() {
    for (pool_id id : recently_cached_) {
        train_cache_[id].reset();
        test_cache_[id].reset();
    }
    recently_cached_.clear();
}

}
