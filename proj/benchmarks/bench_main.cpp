// Microbenchmarks for the hot paths: expression evaluation, one evolutionary
// generation of each engine, and offline reconstruction. Not part of ctest;
// run the binary directly.

#include <benchmark/benchmark.h>

#include <gsgp/baseline.hpp>
#include <gsgp/dataio.hpp>
#include <gsgp/engine.hpp>
#include <gsgp/expr.hpp>
#include <gsgp/reconstruct.hpp>

#include <random>
#include <span>

namespace {

using namespace gsgp;

dataset make_cases(std::size_t rows, std::size_t features, std::uint64_t seed) {
    dataset ds;
    ds.rows = rows;
    ds.features = features;
    ds.x.resize(rows * features);
    ds.y.resize(rows);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& v : ds.x) v = dist(rng);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = ds.x.data() + i * features;
        ds.y[i] = row[0] * row[1] + row[2];
    }
    return ds;
}

split_dataset make_split(std::size_t train_rows, std::size_t test_rows, std::size_t features,
                         std::uint64_t seed) {
    split_dataset out;
    out.train = make_cases(train_rows, features, seed);
    out.test = make_cases(test_rows, features, seed + 1);
    out.fraction =
        static_cast<double>(train_rows) / static_cast<double>(train_rows + test_rows);
    return out;
}

void BM_eval_all(benchmark::State& state) {
    std::mt19937_64 rng(7);
    const expr_ptr tree =
        random_tree(static_cast<int>(state.range(0)), gen_method::full, 5, rng);
    const dataset ds = make_cases(1000, 5, 11);
    const case_matrix cases = ds.cases();
    for (auto _ : state) benchmark::DoNotOptimize(eval_all(tree, cases));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(ds.rows * tree->node_count()));
    state.counters["nodes"] = static_cast<double>(tree->node_count());
}
BENCHMARK(BM_eval_all)->Arg(6)->Arg(10)->Arg(13)->Unit(benchmark::kMicrosecond);

// One semantic-engine generation. The engine state carries over between
// iterations, which is exactly the claim being measured: cost per generation
// does not depend on how many generations came before.
void BM_gsgp_generation(benchmark::State& state) {
    const split_dataset data = make_split(250, 50, 5, 3);
    run_config cfg;
    cfg.pop_size = static_cast<std::size_t>(state.range(0));
    cfg.seed = 5;
    gsgp_engine engine(cfg, data);
    for (auto _ : state) engine.step_generation();
    state.counters["store_entries"] = static_cast<double>(engine.store().size());
}
BENCHMARK(BM_gsgp_generation)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

// One tree-engine generation. Trees grow across iterations, so later
// iterations are slower; the fixed iteration count keeps runs comparable.
void BM_stdgp_generation(benchmark::State& state) {
    const split_dataset data = make_split(250, 50, 5, 3);
    std_gp_config cfg;
    cfg.pop_size = static_cast<std::size_t>(state.range(0));
    cfg.seed = 5;
    std_gp_engine engine(cfg, data);
    for (auto _ : state) engine.step_generation();
    state.counters["generations"] = static_cast<double>(engine.generation());
}
BENCHMARK(BM_stdgp_generation)->Arg(50)->Arg(100)->Iterations(50)->Unit(benchmark::kMillisecond);

// Offline reconstruction over a finished 100-generation run.
class reconstruct_fixture : public benchmark::Fixture {
public:
    void SetUp(benchmark::State&) override {
        if (engine) return;
        data = make_split(100, 30, 5, 9);
        run_config cfg;
        cfg.pop_size = 50;
        cfg.generations = 100;
        cfg.seed = 17;
        engine = std::make_unique<gsgp_engine>(cfg, data);
        engine->run();
        ctx.initial = engine->initial_population();
        ctx.pool = engine->pool().trees();
        ctx.store = &engine->store();
    }

    split_dataset data;
    std::unique_ptr<gsgp_engine> engine;
    reconstruction_context ctx;
};

BENCHMARK_DEFINE_F(reconstruct_fixture, BM_unwind_best)(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(unwind(engine->best_id(), ctx));
}
BENCHMARK_REGISTER_F(reconstruct_fixture, BM_unwind_best)->Unit(benchmark::kMillisecond);

BENCHMARK_DEFINE_F(reconstruct_fixture, BM_expected_size_best)(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(expected_size(engine->best_id(), ctx));
}
BENCHMARK_REGISTER_F(reconstruct_fixture, BM_expected_size_best)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_DEFINE_F(reconstruct_fixture, BM_simplify_unwound)(benchmark::State& state) {
    const expr_ptr tree = unwind(engine->best_id(), ctx);
    for (auto _ : state) benchmark::DoNotOptimize(simplify(tree));
}
BENCHMARK_REGISTER_F(reconstruct_fixture, BM_simplify_unwound)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
