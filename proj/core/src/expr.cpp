#include "gsgp/expr.hpp"

#include <charconv>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace gsgp {

namespace {

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) noexcept {
    const std::uint64_t s = a + b;
    return s < a ? std::numeric_limits<std::uint64_t>::max() : s;
}

[[noreturn]] void null_child() {
    throw std::invalid_argument("expr_tree: child node must not be null");
}

}

expr_tree::expr_tree(node_kind kind, int var_index, double value, expr_ptr left, expr_ptr right)
    : kind_(kind), var_index_(var_index), value_(value),
      left_(std::move(left)), right_(std::move(right)) {
    if (left_) {
        std::uint64_t count = saturating_add(left_->node_count_, 1);
        depth_ = left_->depth_ + 1;
        if (right_) {
            count = saturating_add(count, right_->node_count_);
            depth_ = std::max(depth_, right_->depth_ + 1);
        }
        node_count_ = count;
    }
}

expr_ptr expr_tree::variable(int index) {
    if (index < 0) throw std::invalid_argument("expr_tree: variable index must be >= 0");
    return expr_ptr(new expr_tree(node_kind::variable, index, 0.0, nullptr, nullptr));
}

expr_ptr expr_tree::constant(double value) {
    if (!std::isfinite(value))
        throw std::invalid_argument("expr_tree: constant must be finite");
    return expr_ptr(new expr_tree(node_kind::constant, -1, value, nullptr, nullptr));
}

expr_ptr expr_tree::binary(node_kind op, expr_ptr lhs, expr_ptr rhs) {
    if (op != node_kind::add && op != node_kind::sub &&
        op != node_kind::mul && op != node_kind::pdiv)
        throw std::invalid_argument("expr_tree: binary() requires a binary operator kind");
    if (!lhs || !rhs) null_child();
    return expr_ptr(new expr_tree(op, -1, 0.0, std::move(lhs), std::move(rhs)));
}

expr_ptr expr_tree::add(expr_ptr lhs, expr_ptr rhs) {
    return binary(node_kind::add, std::move(lhs), std::move(rhs));
}
expr_ptr expr_tree::sub(expr_ptr lhs, expr_ptr rhs) {
    return binary(node_kind::sub, std::move(lhs), std::move(rhs));
}
expr_ptr expr_tree::mul(expr_ptr lhs, expr_ptr rhs) {
    return binary(node_kind::mul, std::move(lhs), std::move(rhs));
}
expr_ptr expr_tree::pdiv(expr_ptr lhs, expr_ptr rhs) {
    return binary(node_kind::pdiv, std::move(lhs), std::move(rhs));
}

expr_ptr expr_tree::sigmoid(expr_ptr inner) {
    if (!inner) null_child();
    return expr_ptr(new expr_tree(node_kind::sigmoid, -1, 0.0, std::move(inner), nullptr));
}

namespace {

struct ptr_pair_hash {
    std::size_t operator()(const std::pair<const expr_tree*, const expr_tree*>& p) const noexcept {
        auto h = std::hash<const expr_tree*>{};
        return h(p.first) * 31 + h(p.second);
    }
};

using ptr_pair_set =
    std::unordered_set<std::pair<const expr_tree*, const expr_tree*>, ptr_pair_hash>;

bool equal_rec(const expr_tree* a, const expr_tree* b, ptr_pair_set& proven) {
    if (a == b) return true;
    if (a->kind() != b->kind()) return false;
    switch (a->kind()) {
    case node_kind::variable: return a->var_index() == b->var_index();
    case node_kind::constant: return a->value() == b->value();
    default: break;
    }
    if (proven.contains({a, b})) return true;
    if (!equal_rec(a->left().get(), b->left().get(), proven)) return false;
    if (a->right() && !equal_rec(a->right().get(), b->right().get(), proven)) return false;
    proven.insert({a, b});
    return true;
}

}

bool structurally_equal(const expr_ptr& a, const expr_ptr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    ptr_pair_set proven;
    return equal_rec(a.get(), b.get(), proven);
}

int max_variable_index(const expr_ptr& tree) {
    if (!tree) throw std::invalid_argument("max_variable_index: null tree");
    int best = -1;
    std::unordered_set<const expr_tree*> seen;
    std::vector<const expr_tree*> stack{tree.get()};
    while (!stack.empty()) {
        const expr_tree* n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) continue;
        if (n->kind() == node_kind::variable) {
            best = std::max(best, n->var_index());
        } else if (!n->is_leaf()) {
            stack.push_back(n->left().get());
            if (n->right()) stack.push_back(n->right().get());
        }
    }
    return best;
}

namespace {

// Post-order walk over distinct nodes. `known` must report true once
// `compute` has produced a value for the node; leaves are computed directly.
template <typename Known, typename Compute>
void walk_unique_postorder(const expr_tree* root, Known known, Compute compute) {
    std::vector<const expr_tree*> stack{root};
    while (!stack.empty()) {
        const expr_tree* n = stack.back();
        if (known(n)) {
            stack.pop_back();
            continue;
        }
        if (n->is_leaf()) {
            compute(n);
            stack.pop_back();
            continue;
        }
        const expr_tree* l = n->left().get();
        const expr_tree* r = n->right() ? n->right().get() : nullptr;
        const bool ready = known(l) && (!r || known(r));
        if (ready) {
            compute(n);
            stack.pop_back();
        } else {
            if (!known(l)) stack.push_back(l);
            if (r && !known(r)) stack.push_back(r);
        }
    }
}

[[noreturn]] void variable_out_of_range(int index, std::size_t width) {
    throw std::out_of_range("eval: expression uses x" + std::to_string(index + 1) +
                            " but the case has only " + std::to_string(width) +
                            " feature(s)");
}

}

double eval(const expr_ptr& tree, std::span<const double> case_values) {
    if (!tree) throw std::invalid_argument("eval: null tree");
    std::unordered_map<const expr_tree*, double> memo;
    walk_unique_postorder(
        tree.get(),
        [&](const expr_tree* n) { return memo.contains(n); },
        [&](const expr_tree* n) {
            double v = 0.0;
            switch (n->kind()) {
            case node_kind::variable:
                if (static_cast<std::size_t>(n->var_index()) >= case_values.size())
                    variable_out_of_range(n->var_index(), case_values.size());
                v = case_values[static_cast<std::size_t>(n->var_index())];
                break;
            case node_kind::constant: v = n->value(); break;
            case node_kind::add: v = memo[n->left().get()] + memo[n->right().get()]; break;
            case node_kind::sub: v = memo[n->left().get()] - memo[n->right().get()]; break;
            case node_kind::mul: v = memo[n->left().get()] * memo[n->right().get()]; break;
            case node_kind::pdiv:
                v = protected_div(memo[n->left().get()], memo[n->right().get()]);
                break;
            case node_kind::sigmoid: v = sigmoid_clamped(memo[n->left().get()]); break;
            }
            memo.emplace(n, v);
        });
    return memo.at(tree.get());
}

std::vector<double> eval_all(const expr_ptr& tree, const case_matrix& cases) {
    if (!tree) throw std::invalid_argument("eval_all: null tree");
    if (cases.values.size() != cases.rows * cases.cols)
        throw std::invalid_argument("eval_all: case matrix extent mismatch");
    const std::size_t k = cases.rows;
    std::unordered_map<const expr_tree*, std::vector<double>> memo;
    walk_unique_postorder(
        tree.get(),
        [&](const expr_tree* n) { return memo.contains(n); },
        [&](const expr_tree* n) {
            std::vector<double> v(k);
            switch (n->kind()) {
            case node_kind::variable: {
                const auto idx = static_cast<std::size_t>(n->var_index());
                if (idx >= cases.cols) variable_out_of_range(n->var_index(), cases.cols);
                for (std::size_t i = 0; i < k; ++i) v[i] = cases.values[i * cases.cols + idx];
                break;
            }
            case node_kind::constant:
                std::fill(v.begin(), v.end(), n->value());
                break;
            case node_kind::add: {
                const auto& l = memo[n->left().get()];
                const auto& r = memo[n->right().get()];
                for (std::size_t i = 0; i < k; ++i) v[i] = l[i] + r[i];
                break;
            }
            case node_kind::sub: {
                const auto& l = memo[n->left().get()];
                const auto& r = memo[n->right().get()];
                for (std::size_t i = 0; i < k; ++i) v[i] = l[i] - r[i];
                break;
            }
            case node_kind::mul: {
                const auto& l = memo[n->left().get()];
                const auto& r = memo[n->right().get()];
                for (std::size_t i = 0; i < k; ++i) v[i] = l[i] * r[i];
                break;
            }
            case node_kind::pdiv: {
                const auto& l = memo[n->left().get()];
                const auto& r = memo[n->right().get()];
                for (std::size_t i = 0; i < k; ++i) v[i] = protected_div(l[i], r[i]);
                break;
            }
            case node_kind::sigmoid: {
                const auto& l = memo[n->left().get()];
                for (std::size_t i = 0; i < k; ++i) v[i] = sigmoid_clamped(l[i]);
                break;
            }
            }
            memo.emplace(n, std::move(v));
        });
    return std::move(memo.at(tree.get()));
}

namespace {

void render_into(const expr_tree* n, std::string& out) {
    switch (n->kind()) {
    case node_kind::variable:
        out += 'x';
        out += std::to_string(n->var_index() + 1);
        return;
    case node_kind::constant: {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof(buf), n->value());
        out.append(buf, res.ptr);
        return;
    }
    case node_kind::sigmoid:
        out += "sigmoid(";
        render_into(n->left().get(), out);
        out += ')';
        return;
    default: break;
    }
    const char op = n->kind() == node_kind::add   ? '+'
                    : n->kind() == node_kind::sub ? '-'
                    : n->kind() == node_kind::mul ? '*'
                                                  : '/';
    out += '(';
    render_into(n->left().get(), out);
    out += ' ';
    out += op;
    out += ' ';
    render_into(n->right().get(), out);
    out += ')';
}

}

std::string render(const expr_ptr& tree) {
    if (!tree) throw std::invalid_argument("render: null tree");
    std::string out;
    render_into(tree.get(), out);
    return out;
}

namespace {

class infix_parser {
public:
    explicit infix_parser(std::string_view text) : text_(text) {}

    expr_ptr run() {
        auto e = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) {
        throw std::runtime_error("parse error at offset " + std::to_string(pos_) + ": " + what);
    }

    void skip_ws() {
        while (pos_ < text_.size() &&
               (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                text_[pos_] == '\n' || text_[pos_] == '\r'))
            ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    expr_ptr parse_sum() {
        auto lhs = parse_product();
        while (true) {
            const char c = peek();
            if (c != '+' && c != '-') return lhs;
            ++pos_;
            auto rhs = parse_product();
            lhs = expr_tree::binary(c == '+' ? node_kind::add : node_kind::sub,
                                    std::move(lhs), std::move(rhs));
        }
    }

    expr_ptr parse_product() {
        auto lhs = parse_factor();
        while (true) {
            const char c = peek();
            if (c != '*' && c != '/') return lhs;
            ++pos_;
            auto rhs = parse_factor();
            lhs = expr_tree::binary(c == '*' ? node_kind::mul : node_kind::pdiv,
                                    std::move(lhs), std::move(rhs));
        }
    }

    expr_ptr parse_factor() {
        const char c = peek();
        if (c == '(') {
            ++pos_;
            auto e = parse_sum();
            if (peek() != ')') fail("expected ')'");
            ++pos_;
            return e;
        }
        if (c == '-') {
            ++pos_;
            const char next = peek();
            if (!(std::isdigit(static_cast<unsigned char>(next)) || next == '.'))
                fail("'-' is only allowed in front of a numeric literal");
            return expr_tree::constant(-parse_number());
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return expr_tree::constant(parse_number());
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_identifier();
        if (c == '\0') fail("unexpected end of input");
        fail(std::string("unexpected character '") + c + "'");
    }

    double parse_number() {
        skip_ws();
        double value = 0.0;
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        const auto res = std::from_chars(begin, end, value);
        if (res.ec != std::errc{}) fail("malformed number");
        pos_ += static_cast<std::size_t>(res.ptr - begin);
        return value;
    }

    expr_ptr parse_identifier() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string_view name = text_.substr(start, pos_ - start);
        if (name == "sigmoid") {
            if (peek() != '(') fail("expected '(' after sigmoid");
            ++pos_;
            auto inner = parse_sum();
            if (peek() != ')') fail("expected ')'");
            ++pos_;
            return expr_tree::sigmoid(std::move(inner));
        }
        if (name.size() >= 2 && name[0] == 'x') {
            int index = 0;
            const auto res = std::from_chars(name.data() + 1, name.data() + name.size(), index);
            if (res.ec == std::errc{} && res.ptr == name.data() + name.size()) {
                if (index < 1) {
                    pos_ = start;
                    fail("variable indices start at x1");
                }
                return expr_tree::variable(index - 1);
            }
        }
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}

expr_ptr parse(std::string_view text) {
    return infix_parser(text).run();
}

namespace {

expr_ptr random_leaf(int num_features, std::mt19937_64& rng, const generator_options& o) {
    if (o.ephemeral_constants &&
        std::uniform_real_distribution<double>(0.0, 1.0)(rng) < o.constant_rate)
        return expr_tree::constant(
            std::uniform_real_distribution<double>(o.constant_min, o.constant_max)(rng));
    return expr_tree::variable(std::uniform_int_distribution<int>(0, num_features - 1)(rng));
}

expr_ptr gen_tree(int depth_left, bool at_root, gen_method method, int num_features,
                  std::mt19937_64& rng, const generator_options& o) {
    if (depth_left == 0) return random_leaf(num_features, rng, o);
    // grow picks leaf or operator with equal probability below the root; the
    // root is always an operator so no individual degenerates to one leaf.
    if (method == gen_method::grow && !at_root &&
        std::uniform_int_distribution<int>(0, 1)(rng) == 0)
        return random_leaf(num_features, rng, o);
    static constexpr node_kind ops[] = {node_kind::add, node_kind::sub,
                                        node_kind::mul, node_kind::pdiv};
    const node_kind op = ops[std::uniform_int_distribution<int>(0, 3)(rng)];
    auto lhs = gen_tree(depth_left - 1, false, method, num_features, rng, o);
    auto rhs = gen_tree(depth_left - 1, false, method, num_features, rng, o);
    return expr_tree::binary(op, std::move(lhs), std::move(rhs));
}

}

expr_ptr random_tree(int max_depth, gen_method method, int num_features,
                     std::mt19937_64& rng, const generator_options& options) {
    if (max_depth < 0) throw std::invalid_argument("random_tree: max_depth must be >= 0");
    if (num_features < 1) throw std::invalid_argument("random_tree: num_features must be >= 1");
    return gen_tree(max_depth, true, method, num_features, rng, options);
}

std::vector<expr_ptr> ramped_half_and_half(std::size_t pop_size, int max_depth,
                                           int num_features, std::mt19937_64& rng,
                                           const generator_options& options) {
    if (pop_size < 2) throw std::invalid_argument("ramped_half_and_half: pop_size must be >= 2");
    if (max_depth < 1) throw std::invalid_argument("ramped_half_and_half: max_depth must be >= 1");
    if (num_features < 1)
        throw std::invalid_argument("ramped_half_and_half: num_features must be >= 1");

    const auto strata = static_cast<std::size_t>(max_depth);
    const std::size_t base = pop_size / strata;
    const std::size_t extra = pop_size % strata;

    std::vector<expr_ptr> out;
    out.reserve(pop_size);
    for (std::size_t s = 0; s < strata; ++s) {
        const int depth = static_cast<int>(s) + 1;
        const std::size_t count = base + (s < extra ? 1 : 0);
        const std::size_t grow_count = (count + 1) / 2;
        for (std::size_t i = 0; i < count; ++i) {
            const gen_method m = i < grow_count ? gen_method::grow : gen_method::full;
            out.push_back(random_tree(depth, m, num_features, rng, options));
        }
    }
    return out;
}

expr_ptr subtree_at(const expr_ptr& tree, std::uint64_t index) {
    if (!tree) throw std::invalid_argument("subtree_at: null tree");
    if (index >= tree->node_count())
        throw std::out_of_range("subtree_at: index " + std::to_string(index) +
                                " >= node count " + std::to_string(tree->node_count()));
    const expr_tree* cur = tree.get();
    expr_ptr cur_owned = tree;
    while (index != 0) {
        --index;
        const expr_ptr& l = cur->left();
        if (index < l->node_count()) {
            cur_owned = l;
        } else {
            index -= l->node_count();
            cur_owned = cur->right();
        }
        cur = cur_owned.get();
    }
    return cur_owned;
}

expr_ptr replace_subtree(const expr_ptr& tree, std::uint64_t index, expr_ptr replacement) {
    if (!tree) throw std::invalid_argument("replace_subtree: null tree");
    if (!replacement) throw std::invalid_argument("replace_subtree: null replacement");
    if (index >= tree->node_count())
        throw std::out_of_range("replace_subtree: index " + std::to_string(index) +
                                " >= node count " + std::to_string(tree->node_count()));
    if (index == 0) return replacement;
    --index;
    const expr_ptr& l = tree->left();
    if (index < l->node_count()) {
        auto new_left = replace_subtree(l, index, std::move(replacement));
        if (tree->kind() == node_kind::sigmoid) return expr_tree::sigmoid(std::move(new_left));
        return expr_tree::binary(tree->kind(), std::move(new_left), tree->right());
    }
    auto new_right = replace_subtree(tree->right(), index - l->node_count(), std::move(replacement));
    return expr_tree::binary(tree->kind(), tree->left(), std::move(new_right));
}

}
