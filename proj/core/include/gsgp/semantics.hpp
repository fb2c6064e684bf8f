#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "gsgp/expr.hpp"

namespace gsgp {

/// Output vector of one individual over the fitness cases, one entry per case.
using semantic_vector = std::vector<double>;

/// Opaque individual reference: 0..n-1 name the initial population, larger
/// ids name recorded offspring in creation order.
using individual_id = std::uint64_t;

/// Index into the random-tree pool; a namespace separate from individual_id.
using pool_id = std::uint64_t;

/// Applies the clamped logistic function element-wise. Output entries are
/// strictly inside (0, 1) and monotone in the input.
semantic_vector sigmoid_map(const semantic_vector& raw);

/// Semantics of a crossover child: out_i = s1_i * sr_i + (1 - sr_i) * s2_i,
/// evaluated in exactly that form. With sr_i in [0, 1] each output lies
/// between the parents; callers may pass unbounded sr (the mixing tree's raw
/// semantics), in which case the convexity guarantee is theirs to forfeit.
semantic_vector xo_semantics(const semantic_vector& s1, const semantic_vector& s2,
                             const semantic_vector& sr);

/// Semantics of a mutation child: out_i = s_i + ms * (sr1_i - sr2_i).
/// With sr1, sr2 in (0, 1) and ms > 0 this perturbs each coordinate by
/// strictly less than ms. Requires ms >= 0.
semantic_vector mut_semantics(const semantic_vector& s, const semantic_vector& sr1,
                              const semantic_vector& sr2, double ms);

/// Fixed-width column store of semantic vectors for one generation. A table
/// is complete once it holds exactly its expected column count.
class semantics_table {
public:
    semantics_table(std::size_t case_count, std::size_t expected_columns,
                    std::uint64_t generation = 0);

    std::size_t case_count() const noexcept { return case_count_; }
    std::size_t expected_columns() const noexcept { return expected_columns_; }
    std::size_t columns() const noexcept { return columns_.size(); }
    bool complete() const noexcept { return columns_.size() == expected_columns_; }
    std::uint64_t generation() const noexcept { return generation_; }

    /// Appends one column. Throws std::invalid_argument on a length mismatch
    /// and std::logic_error when the table is already complete.
    void push_column(semantic_vector column);

    const semantic_vector& column(std::size_t i) const { return columns_.at(i); }

    /// Drops all columns and retags the (now incomplete) table.
    void clear(std::uint64_t new_generation);

private:
    std::size_t case_count_;
    std::size_t expected_columns_;
    std::uint64_t generation_;
    std::vector<semantic_vector> columns_;
};

/// Promotes a complete next-generation table into the current slot and
/// resets the next buffer for the following generation. Throws
/// std::logic_error if next is incomplete. Returns current.
semantics_table& swap_generation(semantics_table& current, semantics_table& next);

enum class ancestry_op : std::uint8_t { crossover, mutation };

/// One recorded offspring: which operator produced it and from what. For a
/// crossover the refs are (parent1, parent2, pool tree); for a mutation
/// (parent, pool tree 1, pool tree 2) plus the step ms > 0.
struct ancestry_entry {
    individual_id child = 0;
    ancestry_op op = ancestry_op::crossover;
    individual_id parent1 = 0;
    individual_id parent2 = 0;   // crossover only
    pool_id rand1 = 0;
    pool_id rand2 = 0;           // mutation only
    double ms = 0.0;             // mutation only
};

/// Append-only log of how every non-initial individual was produced. Child
/// ids are dense and monotone: entry for id i lives at index i - initial
/// count, so the log is topologically ordered and acyclic by construction.
/// Recording validates every cited ref; a bad ref is an engine bug surfaced
/// as std::logic_error.
class ancestry_store {
public:
    explicit ancestry_store(std::uint64_t initial_population);

    /// Pool refs are validated against this watermark; keep it current as
    /// the pool grows. Starts at zero, so recording before the first call
    /// rejects any pool ref.
    void set_pool_size(std::uint64_t n);
    std::uint64_t pool_size() const noexcept { return pool_size_; }

    individual_id record_crossover(individual_id p1, individual_id p2, pool_id r);
    individual_id record_mutation(individual_id p, pool_id r1, pool_id r2, double ms);

    std::uint64_t initial_count() const noexcept { return initial_count_; }
    individual_id next_id() const noexcept { return initial_count_ + entries_.size(); }
    std::size_t size() const noexcept { return entries_.size(); }
    bool is_initial(individual_id id) const noexcept { return id < initial_count_; }
    bool contains(individual_id id) const noexcept { return id < next_id(); }

    /// Entry that produced a non-initial individual. Throws std::out_of_range
    /// for initial or unknown ids.
    const ancestry_entry& entry(individual_id id) const;

    const std::vector<ancestry_entry>& entries() const noexcept { return entries_; }

private:
    std::uint64_t initial_count_;
    std::uint64_t pool_size_ = 0;
    std::vector<ancestry_entry> entries_;
};

/// Growable pool of random trees with per-tree semantics caching. Trees are
/// generated on first need and kept for the lifetime of the run so offspring
/// can be reconstructed; semantics columns are cached until dropped (the
/// engine drops them at each generation swap to keep memory bounded).
class random_pool {
public:
    /// Pool that grows by generating fresh trees of the given depth.
    random_pool(case_matrix train_cases, case_matrix test_cases, int tree_depth,
                int num_features, generator_options options = {});

    /// Pool over a fixed set of caller-supplied trees; add_fresh is disabled.
    random_pool(std::vector<expr_ptr> trees, case_matrix train_cases, case_matrix test_cases);

    /// Generates one new tree with the grow method and returns its id.
    pool_id add_fresh(std::mt19937_64& rng);

    std::size_t size() const noexcept { return trees_.size(); }
    const expr_ptr& tree(pool_id id) const { return trees_.at(id); }
    const std::vector<expr_ptr>& trees() const noexcept { return trees_; }

    /// Raw semantics of tree id over the training cases, cached after the
    /// first evaluation. The sigmoid wrapper is applied by the caller where
    /// an operator requires it.
    const semantic_vector& train_semantics(pool_id id);
    const semantic_vector& test_semantics(pool_id id);

    /// Frees only the columns cached since the previous drop, so the cost is
    /// proportional to recent use, not to the lifetime pool size.
    void drop_semantics_cache();

private:
    case_matrix train_;
    case_matrix test_;
    int tree_depth_ = 0;
    int num_features_ = 0;
    generator_options options_;
    std::vector<expr_ptr> trees_;
    std::vector<std::optional<semantic_vector>> train_cache_;
    std::vector<std::optional<semantic_vector>> test_cache_;
    std::vector<pool_id> recently_cached_;
};

}
