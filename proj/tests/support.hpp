#pragma once

// Shared helpers for the unit and acceptance binaries. The reference
// evaluator here is deliberately a naive recursive interpreter so it shares
// no traversal machinery with the library's memoized one.

#include <gsgp/dataio.hpp>
#include <gsgp/engine.hpp>
#include <gsgp/expr.hpp>
#include <gsgp/reconstruct.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace testsup {

inline double ref_eval(const gsgp::expr_ptr& node, std::span<const double> xs) {
    using gsgp::node_kind;
    switch (node->kind()) {
        case node_kind::variable: {
            const auto idx = static_cast<std::size_t>(node->var_index());
            if (idx >= xs.size()) throw std::out_of_range("ref_eval: variable out of range");
            return xs[idx];
        }
        case node_kind::constant: return node->value();
        case node_kind::add: return ref_eval(node->left(), xs) + ref_eval(node->right(), xs);
        case node_kind::sub: return ref_eval(node->left(), xs) - ref_eval(node->right(), xs);
        case node_kind::mul: return ref_eval(node->left(), xs) * ref_eval(node->right(), xs);
        case node_kind::pdiv: {
            const double den = ref_eval(node->right(), xs);
            return den == 0.0 ? 1.0 : ref_eval(node->left(), xs) / den;
        }
        case node_kind::sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-ref_eval(node->left(), xs)));
            if (s < gsgp::sigmoid_floor) return gsgp::sigmoid_floor;
            if (s > 1.0 - gsgp::sigmoid_floor) return 1.0 - gsgp::sigmoid_floor;
            return s;
        }
    }
    throw std::logic_error("ref_eval: unknown node kind");
}

// Recursive node counter, clamped rather than saturating-per-step; good
// enough as an oracle for trees whose true size fits in uint64.
inline std::uint64_t ref_node_count(const gsgp::expr_ptr& node) {
    if (node->is_leaf()) return 1;
    if (node->kind() == gsgp::node_kind::sigmoid) return 1 + ref_node_count(node->left());
    return 1 + ref_node_count(node->left()) + ref_node_count(node->right());
}

inline bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

template <class TargetFn>
gsgp::dataset make_dataset(std::size_t rows, std::size_t features, std::uint64_t seed,
                           TargetFn&& target, double lo = -1.0, double hi = 1.0) {
    gsgp::dataset ds;
    ds.rows = rows;
    ds.features = features;
    ds.x.resize(rows * features);
    ds.y.resize(rows);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& v : ds.x) v = dist(rng);
    for (std::size_t i = 0; i < rows; ++i)
        ds.y[i] = target(std::span<const double>(ds.x).subspan(i * features, features));
    return ds;
}

// 3 features in [-1, 1], y = x1.
inline gsgp::dataset toy_identity(std::size_t rows, std::uint64_t seed) {
    return make_dataset(rows, 3, seed, [](std::span<const double> x) { return x[0]; });
}

// 3 features in [-1, 1], y = x1 * x2 + x3.
inline gsgp::dataset toy_product(std::size_t rows, std::uint64_t seed) {
    return make_dataset(rows, 3, seed,
                        [](std::span<const double> x) { return x[0] * x[1] + x[2]; });
}

// Deterministic head/tail partition, for tests that need exact case control.
inline gsgp::split_dataset head_split(const gsgp::dataset& all, std::size_t train_rows) {
    if (train_rows == 0 || train_rows >= all.rows)
        throw std::invalid_argument("head_split: both sides must be non-empty");
    gsgp::split_dataset out;
    out.fraction = static_cast<double>(train_rows) / static_cast<double>(all.rows);
    auto take = [&](std::size_t begin, std::size_t end) {
        gsgp::dataset d;
        d.rows = end - begin;
        d.features = all.features;
        d.x.assign(all.x.begin() + static_cast<std::ptrdiff_t>(begin * all.features),
                   all.x.begin() + static_cast<std::ptrdiff_t>(end * all.features));
        d.y.assign(all.y.begin() + static_cast<std::ptrdiff_t>(begin),
                   all.y.begin() + static_cast<std::ptrdiff_t>(end));
        return d;
    };
    out.train = take(0, train_rows);
    out.test = take(train_rows, all.rows);
    return out;
}

// The five-tree hand fixture: a generation-0 population over four variables,
// five mixing trees, and the crossover triples (parent1, parent2, mixing
// tree) that produce children 5..9 of the first generation.
struct worked_example {
    std::vector<gsgp::expr_ptr> t;   // ids 0..4
    std::vector<gsgp::expr_ptr> r;   // pool ids 0..4
    static constexpr std::array<std::array<std::uint64_t, 3>, 5> triples{{
        {{3, 4, 1}},
        {{0, 3, 0}},
        {{0, 4, 3}},
        {{2, 3, 4}},
        {{2, 4, 2}},
    }};

    static worked_example make() {
        worked_example w;
        for (const char* s : {"x1 + x2 * x3", "x3 - x2 * x4", "x3 + x4 - 2 * x1", "x3 * x1",
                              "x1 - x3"})
            w.t.push_back(gsgp::parse(s));
        for (const char* s : {"x1 + x2 - 2 * x4", "x2 - x1", "x1 + x4 - 3 * x3",
                              "x2 - x3 - x4", "2 * x1"})
            w.r.push_back(gsgp::parse(s));
        return w;
    }
};

inline gsgp::reconstruction_context make_context(const gsgp::gsgp_engine& e) {
    gsgp::reconstruction_context ctx;
    ctx.initial = e.initial_population();
    ctx.pool = e.pool().trees();
    ctx.store = &e.store();
    ctx.sigmoid_on_crossover = e.config().sigmoid_on_crossover;
    ctx.sigmoid_on_mutation = e.config().sigmoid_on_mutation;
    return ctx;
}

class temp_dir {
public:
    explicit temp_dir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("gsgp-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    temp_dir(const temp_dir&) = delete;
    temp_dir& operator=(const temp_dir&) = delete;
    ~temp_dir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

struct cli_result {
    int exit_code = -1;
    std::string output;   // stdout and stderr interleaved
};

inline cli_result run_cli(const std::string& args,
                          const std::filesystem::path& cwd = {}) {
    std::string cmd;
    if (!cwd.empty()) cmd = "cd '" + cwd.string() + "' && ";
    cmd += "'" GSGP_CLI_PATH "' " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("run_cli: popen failed");
    cli_result res;
    std::array<char, 4096> buf;
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0)
        res.output.append(buf.data(), n);
    const int status = ::pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

inline std::string read_file(const std::filesystem::path& p) {
    FILE* f = std::fopen(p.c_str(), "rb");
    if (!f) throw std::runtime_error("read_file: cannot open " + p.string());
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0) out.append(buf.data(), n);
    std::fclose(f);
    return out;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    FILE* f = std::fopen(p.c_str(), "wb");
    if (!f) throw std::runtime_error("write_file: cannot open " + p.string());
    std::fwrite(content.data(), 1, content.size(), f);
    std::fclose(f);
}

}
