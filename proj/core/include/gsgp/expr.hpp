#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gsgp {

/// Division with a total domain: a zero denominator yields exactly 1.0.
constexpr double protected_div(double num, double den) noexcept {
    return den == 0.0 ? 1.0 : num / den;
}

/// Clamp bound keeping the logistic map inside the open interval (0, 1)
/// even when exp() overflows or underflows.
inline constexpr double sigmoid_floor = 1e-12;

/// Logistic function 1 / (1 + e^-x), clamped to [sigmoid_floor, 1 - sigmoid_floor].
inline double sigmoid_clamped(double x) noexcept {
    const double s = 1.0 / (1.0 + std::exp(-x));
    if (s < sigmoid_floor) return sigmoid_floor;
    if (s > 1.0 - sigmoid_floor) return 1.0 - sigmoid_floor;
    return s;
}

enum class node_kind : std::uint8_t { variable, constant, add, sub, mul, pdiv, sigmoid };

class expr_tree;
using expr_ptr = std::shared_ptr<const expr_tree>;

/// Row-major view over fitness cases, one row per case.
struct case_matrix {
    std::span<const double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::span<const double> row(std::size_t i) const { return values.subspan(i * cols, cols); }
};

/// Immutable expression tree node. Children are shared, never copied, so a
/// tree may in fact be a DAG; node_count() reports the expanded size (each
/// shared subtree counted once per occurrence) and saturates at uint64 max.
/// All traversals in this module visit each distinct node once.
class expr_tree {
public:
    static expr_ptr variable(int index);
    static expr_ptr constant(double value);
    static expr_ptr add(expr_ptr lhs, expr_ptr rhs);
    static expr_ptr sub(expr_ptr lhs, expr_ptr rhs);
    static expr_ptr mul(expr_ptr lhs, expr_ptr rhs);
    static expr_ptr pdiv(expr_ptr lhs, expr_ptr rhs);
    static expr_ptr sigmoid(expr_ptr inner);
    static expr_ptr binary(node_kind op, expr_ptr lhs, expr_ptr rhs);

    node_kind kind() const noexcept { return kind_; }
    bool is_leaf() const noexcept {
        return kind_ == node_kind::variable || kind_ == node_kind::constant;
    }
    bool is_binary() const noexcept {
        return kind_ == node_kind::add || kind_ == node_kind::sub ||
               kind_ == node_kind::mul || kind_ == node_kind::pdiv;
    }

    /// Zero-based variable index; only meaningful for variable nodes.
    int var_index() const noexcept { return var_index_; }
    double value() const noexcept { return value_; }

    /// Left child for binary nodes, the single operand for sigmoid.
    const expr_ptr& left() const noexcept { return left_; }
    const expr_ptr& right() const noexcept { return right_; }

    std::uint64_t node_count() const noexcept { return node_count_; }
    std::uint32_t depth() const noexcept { return depth_; }

private:
    expr_tree(node_kind kind, int var_index, double value, expr_ptr left, expr_ptr right);

    node_kind kind_;
    int var_index_ = -1;
    double value_ = 0.0;
    expr_ptr left_;
    expr_ptr right_;
    std::uint64_t node_count_ = 1;
    std::uint32_t depth_ = 0;
};

/// True when the two trees have identical shape, operators, variable indices
/// and constant values. Shared nodes compare equal by pointer without
/// descending, so the cost is bounded by the number of distinct node pairs.
bool structurally_equal(const expr_ptr& a, const expr_ptr& b);

/// Largest zero-based variable index referenced, or -1 for constant-only trees.
int max_variable_index(const expr_ptr& tree);

/// Evaluates the tree on a single fitness case. Division by zero follows
/// protected_div; the sigmoid node uses sigmoid_clamped. Each distinct node
/// is evaluated once.
double eval(const expr_ptr& tree, std::span<const double> case_values);

/// Evaluates the tree on every row of the case matrix, returning one output
/// per row. Equivalent to calling eval per row but visits each distinct node
/// once for the whole matrix.
std::vector<double> eval_all(const expr_ptr& tree, const case_matrix& cases);

/// Renders a fully parenthesised infix expression: variables as x1, x2, ...
/// (one-based), constants in shortest round-trip decimal form, the unary
/// node as sigmoid(...). parse(render(t)) reproduces t exactly.
std::string render(const expr_ptr& tree);

/// Parses the infix syntax produced by render, plus conventional shorthand:
/// redundant parentheses, * and / binding tighter than + and -, left
/// associativity, and a leading minus on numeric literals. Throws
/// std::runtime_error naming the byte offset of the first syntax error.
expr_ptr parse(std::string_view text);

struct generator_options {
    /// When set, leaves draw a constant from [constant_min, constant_max]
    /// with probability constant_rate instead of a variable.
    bool ephemeral_constants = false;
    double constant_rate = 0.2;
    double constant_min = -1.0;
    double constant_max = 1.0;
};

enum class gen_method : std::uint8_t { grow, full };

/// Generates a random tree over num_features variables and the four binary
/// operators. full places leaves exactly at max_depth; grow may stop early,
/// but the root is an operator whenever max_depth >= 1, so only max_depth 0
/// produces a bare leaf. Depth counts edges: a leaf has depth 0.
expr_ptr random_tree(int max_depth, gen_method method, int num_features,
                     std::mt19937_64& rng, const generator_options& options = {});

/// Ramped half-and-half initialisation: the population is split as evenly as
/// possible across depths 1..max_depth (shallower strata take the remainder),
/// and each stratum is half grow, half full (grow takes the odd tree).
/// Requires pop_size >= 2 and max_depth >= 1.
std::vector<expr_ptr> ramped_half_and_half(std::size_t pop_size, int max_depth,
                                           int num_features, std::mt19937_64& rng,
                                           const generator_options& options = {});

/// Returns the subtree rooted at the given preorder index (0 is the root).
/// Throws std::out_of_range if index >= node_count.
expr_ptr subtree_at(const expr_ptr& tree, std::uint64_t index);

/// Returns a new tree with the subtree at the given preorder index replaced.
/// Nodes off the path to the replacement are shared with the original.
expr_ptr replace_subtree(const expr_ptr& tree, std::uint64_t index, expr_ptr replacement);

}
