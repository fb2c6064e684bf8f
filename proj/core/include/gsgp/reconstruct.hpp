#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gsgp/expr.hpp"
#include "gsgp/semantics.hpp"

namespace gsgp {

using big_int = boost::multiprecision::cpp_int;

/// Everything needed to rebuild any individual of a finished run: the
/// generation-0 trees, the random-pool trees, and the ancestry log, plus the
/// operator-template flags the run used. The node budget bounds explicit
/// materialization only; DAG-shaped unwinding is always permitted.
struct reconstruction_context {
    std::span<const expr_ptr> initial;
    std::span<const expr_ptr> pool;
    const ancestry_store* store = nullptr;
    bool sigmoid_on_crossover = true;
    bool sigmoid_on_mutation = true;
    std::uint64_t node_budget = 10'000'000;
};

/// Extra nodes a crossover template adds beyond its three operand trees:
/// add(mul(T1, R), mul(sub(1, R), T2)), R wrapped as sigmoid(.) when enabled
/// (the wrapped R appears twice, hence two extra nodes).
constexpr std::uint64_t xo_template_overhead(bool sigmoid_wrapper) noexcept {
    return sigmoid_wrapper ? 7 : 5;
}

/// Extra nodes a mutation template adds beyond its three operand trees:
/// add(T, mul(ms, sub(R1, R2))), each Ri wrapped once when enabled.
constexpr std::uint64_t mut_template_overhead(bool sigmoid_wrapper) noexcept {
    return sigmoid_wrapper ? 6 : 4;
}

/// Rebuilds individuals from the ancestry log. Parents are shared between
/// siblings and between operator applications, so the result is a DAG whose
/// distinct-node count is linear in the store even when the expanded tree
/// is astronomically large. Instances cache every individual they build.
class unwinder {
public:
    explicit unwinder(const reconstruction_context& ctx);

    /// Tree for the given individual. Throws std::logic_error on a ref the
    /// context cannot resolve.
    expr_ptr tree(individual_id ref);

private:
    void build_up_to(individual_id ref);

    reconstruction_context ctx_;
    std::vector<expr_ptr> built_;   // dense by id
};

/// One-shot unwind without a reusable cache.
expr_ptr unwind(individual_id ref, const reconstruction_context& ctx);

/// Exact expanded node counts from the size recurrence
///   size(xo)  = size(T1) + size(T2) + 2*size(R)   + xo_template_overhead
///   size(mut) = size(T)  + size(R1) + size(R2)    + mut_template_overhead
/// memoized over the store, so the cost is linear in store size while the
/// counts themselves grow exponentially.
class size_estimator {
public:
    explicit size_estimator(const reconstruction_context& ctx);

    const big_int& size(individual_id ref);

private:
    reconstruction_context ctx_;
    std::vector<big_int> sizes_;   // dense by id
};

/// One-shot expected size.
big_int expected_size(individual_id ref, const reconstruction_context& ctx);

/// Unwinds and renders the individual as an explicit infix expression.
/// Refuses with std::runtime_error (naming the expected size and the budget)
/// when the expanded size exceeds ctx.node_budget.
std::string materialize(individual_id ref, const reconstruction_context& ctx);

/// Semantics-preserving structural cleanup with a fixed rule set:
///   x*1 -> x, 1*x -> x, x+0 -> x, 0+x -> x, x-0 -> x,
///   x-x -> 0, x/x -> 1, 0-(0-x) -> x
/// where x-x and x/x require syntactically identical operands, and x/x is
/// additionally skipped if the denominator evaluates to zero on any probe
/// case (protecting the division rule's domain). Rules are applied bottom-up
/// to a fixpoint (at most 100 passes); the result never has more nodes than
/// the input and agrees with it on the probe cases.
expr_ptr simplify(const expr_ptr& tree, const case_matrix& probes);

/// Same, probing on 100 internally generated cases (fixed seed, entries
/// uniform in [-1, 1], width taken from the tree's variables).
expr_ptr simplify(const expr_ptr& tree);

}
