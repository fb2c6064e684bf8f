#include "gsgp/reconstruct.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace gsgp {

namespace {

void check_context(const reconstruction_context& ctx) {
    if (!ctx.store) throw std::logic_error("reconstruction_context: null ancestry store");
    if (ctx.initial.size() != ctx.store->initial_count())
        throw std::logic_error("reconstruction_context: " + std::to_string(ctx.initial.size()) +
                               " initial trees for a store expecting " +
                               std::to_string(ctx.store->initial_count()));
    if (ctx.pool.size() < ctx.store->pool_size())
        throw std::logic_error("reconstruction_context: " + std::to_string(ctx.pool.size()) +
                               " pool trees but the store references up to " +
                               std::to_string(ctx.store->pool_size()));
}

void check_ref(individual_id ref, const reconstruction_context& ctx) {
    if (!ctx.store->contains(ref))
        throw std::logic_error("reconstruct: individual ref " + std::to_string(ref) +
                               " is not resolvable (store next id " +
                               std::to_string(ctx.store->next_id()) + ")");
}

}

unwinder::unwinder(const reconstruction_context& ctx) : ctx_(ctx) {
    check_context(ctx_);
}

expr_ptr unwinder::tree(individual_id ref) {
    check_ref(ref, ctx_);
    build_up_to(ref);
    return built_[static_cast<std::size_t>(ref)];
}

void unwinder::build_up_to(individual_id ref) {
    // Entries only cite individuals with smaller ids, so building in id
    // order needs no recursion and caches every intermediate ancestor.
    const auto wrap = [](const expr_ptr& t, bool on) {
        return on ? expr_tree::sigmoid(t) : t;
    };
    for (individual_id id = built_.size(); id <= ref; ++id) {
        if (ctx_.store->is_initial(id)) {
            built_.push_back(ctx_.initial[static_cast<std::size_t>(id)]);
            continue;
        }
        const ancestry_entry& e = ctx_.store->entry(id);
        if (e.op == ancestry_op::crossover) {
            const expr_ptr r = wrap(ctx_.pool[static_cast<std::size_t>(e.rand1)],
                                    ctx_.sigmoid_on_crossover);
            const expr_ptr& t1 = built_[static_cast<std::size_t>(e.parent1)];
            const expr_ptr& t2 = built_[static_cast<std::size_t>(e.parent2)];
            built_.push_back(expr_tree::add(
                expr_tree::mul(t1, r),
                expr_tree::mul(expr_tree::sub(expr_tree::constant(1.0), r), t2)));
        } else {
            const expr_ptr r1 = wrap(ctx_.pool[static_cast<std::size_t>(e.rand1)],
                                     ctx_.sigmoid_on_mutation);
            const expr_ptr r2 = wrap(ctx_.pool[static_cast<std::size_t>(e.rand2)],
                                     ctx_.sigmoid_on_mutation);
            const expr_ptr& t = built_[static_cast<std::size_t>(e.parent1)];
            built_.push_back(expr_tree::add(
                t, expr_tree::mul(expr_tree::constant(e.ms), expr_tree::sub(r1, r2))));
        }
    }
}

expr_ptr unwind(individual_id ref, const reconstruction_context& ctx) {
    return unwinder(ctx).tree(ref);
}

size_estimator::size_estimator(const reconstruction_context& ctx) : ctx_(ctx) {
    check_context(ctx_);
}

const big_int& size_estimator::size(individual_id ref) {
    check_ref(ref, ctx_);
    for (individual_id id = sizes_.size(); id <= ref; ++id) {
        if (ctx_.store->is_initial(id)) {
            sizes_.emplace_back(ctx_.initial[static_cast<std::size_t>(id)]->node_count());
            continue;
        }
        const ancestry_entry& e = ctx_.store->entry(id);
        if (e.op == ancestry_op::crossover) {
            big_int s = sizes_[static_cast<std::size_t>(e.parent1)];
            s += sizes_[static_cast<std::size_t>(e.parent2)];
            s += 2 * big_int(ctx_.pool[static_cast<std::size_t>(e.rand1)]->node_count());
            s += xo_template_overhead(ctx_.sigmoid_on_crossover);
            sizes_.push_back(std::move(s));
        } else {
            big_int s = sizes_[static_cast<std::size_t>(e.parent1)];
            s += ctx_.pool[static_cast<std::size_t>(e.rand1)]->node_count();
            s += ctx_.pool[static_cast<std::size_t>(e.rand2)]->node_count();
            s += mut_template_overhead(ctx_.sigmoid_on_mutation);
            sizes_.push_back(std::move(s));
        }
    }
    return sizes_[static_cast<std::size_t>(ref)];
}

big_int expected_size(individual_id ref, const reconstruction_context& ctx) {
    return size_estimator(ctx).size(ref);
}

std::string materialize(individual_id ref, const reconstruction_context& ctx) {
    const big_int size = expected_size(ref, ctx);
    if (size > ctx.node_budget)
        throw std::runtime_error("materialize: individual " + std::to_string(ref) +
                                 " expands to " + size.str() + " nodes, over the budget of " +
                                 std::to_string(ctx.node_budget));
    return render(unwind(ref, ctx));
}

namespace {

bool is_const(const expr_tree* n, double v) {
    return n->kind() == node_kind::constant && n->value() == v;
}

// One bottom-up pass. Returns the original pointer wherever nothing changed,
// which doubles as the fixpoint signal.
expr_ptr simplify_pass(const expr_ptr& node, const case_matrix& probes,
                       std::unordered_map<const expr_tree*, expr_ptr>& memo) {
    if (node->is_leaf()) return node;
    if (const auto it = memo.find(node.get()); it != memo.end()) return it->second;

    expr_ptr result;
    if (node->kind() == node_kind::sigmoid) {
        auto inner = simplify_pass(node->left(), probes, memo);
        result = inner == node->left() ? node : expr_tree::sigmoid(std::move(inner));
    } else {
        auto lhs = simplify_pass(node->left(), probes, memo);
        auto rhs = simplify_pass(node->right(), probes, memo);
        const expr_tree* l = lhs.get();
        const expr_tree* r = rhs.get();
        switch (node->kind()) {
        case node_kind::mul:
            if (is_const(r, 1.0)) result = lhs;
            else if (is_const(l, 1.0)) result = rhs;
            break;
        case node_kind::add:
            if (is_const(r, 0.0)) result = lhs;
            else if (is_const(l, 0.0)) result = rhs;
            break;
        case node_kind::sub:
            if (is_const(r, 0.0)) result = lhs;
            else if (structurally_equal(lhs, rhs)) result = expr_tree::constant(0.0);
            else if (is_const(l, 0.0) && r->kind() == node_kind::sub &&
                     is_const(r->left().get(), 0.0))
                result = rhs->right();
            break;
        case node_kind::pdiv:
            if (structurally_equal(lhs, rhs)) {
                // Keep the rewrite inside protected division's safe domain:
                // only fold when no probe case drives the denominator to 0.
                const auto outputs = eval_all(rhs, probes);
                if (std::none_of(outputs.begin(), outputs.end(),
                                 [](double v) { return v == 0.0; }))
                    result = expr_tree::constant(1.0);
            }
            break;
        default: break;
        }
        if (!result)
            result = (lhs == node->left() && rhs == node->right())
                         ? node
                         : expr_tree::binary(node->kind(), std::move(lhs), std::move(rhs));
    }
    memo.emplace(node.get(), result);
    return result;
}

}

expr_ptr simplify(const expr_ptr& tree, const case_matrix& probes) {
    if (!tree) throw std::invalid_argument("simplify: null tree");
    if (probes.rows == 0 || probes.values.size() != probes.rows * probes.cols)
        throw std::invalid_argument("simplify: invalid probe matrix");
    expr_ptr current = tree;
    for (int pass = 0; pass < 100; ++pass) {
        std::unordered_map<const expr_tree*, expr_ptr> memo;
        expr_ptr next = simplify_pass(current, probes, memo);
        if (next == current) break;
        current = std::move(next);
    }
    return current;
}

expr_ptr simplify(const expr_ptr& tree) {
    if (!tree) throw std::invalid_argument("simplify: null tree");
    const int width = std::max(1, max_variable_index(tree) + 1);
    constexpr std::size_t probe_count = 100;
    std::vector<double> values(probe_count * static_cast<std::size_t>(width));
    std::mt19937_64 rng(0x51e9f7u); // fixed so repeated simplification is reproducible
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& v : values) v = dist(rng);
    const case_matrix probes{values, probe_count, static_cast<std::size_t>(width)};
    return simplify(tree, probes);
}

}
