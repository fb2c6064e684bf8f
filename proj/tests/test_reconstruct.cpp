#include <doctest.h>

#include <gsgp/engine.hpp>
#include <gsgp/reconstruct.hpp>

#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "support.hpp"

using gsgp::big_int;
using gsgp::expr_ptr;
using gsgp::expr_tree;
using gsgp::gsgp_engine;
using gsgp::individual_id;
using gsgp::run_config;

namespace {

gsgp::split_dataset four_feature_split() {
    const auto ds = testsup::make_dataset(
        12, 4, 99, [](std::span<const double> x) { return x[0] * x[1] + x[2] - x[3]; });
    return testsup::head_split(ds, 8);
}

run_config fixture_config() {
    run_config cfg;
    cfg.pop_size = 5;
    cfg.generations = 1;
    cfg.tournament_size = 2;
    cfg.sigmoid_on_crossover = false;
    return cfg;
}

// Fixture engine with the first generation driven by the hand triples.
gsgp_engine driven_fixture(const gsgp::split_dataset& data) {
    const auto w = testsup::worked_example::make();
    gsgp_engine engine(fixture_config(), data, {w.t.begin(), w.t.end()},
                       {w.r.begin(), w.r.end()});
    for (const auto& [p1, p2, r] : testsup::worked_example::triples)
        engine.crossover_into_next(p1, p2, r);
    engine.finish_generation();
    return engine;
}

// Independent size recurrence over the raw store entries.
big_int ref_expected_size(individual_id ref, const gsgp::reconstruction_context& ctx,
                          std::map<individual_id, big_int>& memo) {
    if (const auto it = memo.find(ref); it != memo.end()) return it->second;
    big_int out;
    if (ctx.store->is_initial(ref)) {
        out = ctx.initial[static_cast<std::size_t>(ref)]->node_count();
    } else {
        const auto& e = ctx.store->entry(ref);
        if (e.op == gsgp::ancestry_op::crossover) {
            out = ref_expected_size(e.parent1, ctx, memo) +
                  ref_expected_size(e.parent2, ctx, memo) +
                  2 * big_int(ctx.pool[static_cast<std::size_t>(e.rand1)]->node_count()) +
                  (ctx.sigmoid_on_crossover ? 7 : 5);
        } else {
            out = ref_expected_size(e.parent1, ctx, memo) +
                  big_int(ctx.pool[static_cast<std::size_t>(e.rand1)]->node_count()) +
                  big_int(ctx.pool[static_cast<std::size_t>(e.rand2)]->node_count()) +
                  (ctx.sigmoid_on_mutation ? 6 : 4);
        }
    }
    memo.emplace(ref, out);
    return out;
}

}

TEST_SUITE("reconstruct") {

TEST_CASE("operator templates cost a fixed node overhead") {
    CHECK(gsgp::xo_template_overhead(false) == 5);
    CHECK(gsgp::xo_template_overhead(true) == 7);
    CHECK(gsgp::mut_template_overhead(false) == 4);
    CHECK(gsgp::mut_template_overhead(true) == 6);
}

TEST_CASE("unwinding the hand fixture reproduces the crossover template") {
    const auto data = four_feature_split();
    const auto engine = driven_fixture(data);
    const auto w = testsup::worked_example::make();
    const auto ctx = testsup::make_context(engine);

    gsgp::unwinder u(ctx);
    const auto one = expr_tree::constant(1.0);
    for (std::size_t i = 0; i < 5; ++i) {
        const auto [p1, p2, r] = testsup::worked_example::triples[i];
        const auto expected = expr_tree::add(
            expr_tree::mul(w.t[p1], w.r[r]),
            expr_tree::mul(expr_tree::sub(one, w.r[r]), w.t[p2]));
        CHECK(gsgp::structurally_equal(u.tree(5 + i), expected));
    }

    // the third child spelled out in full, exactly up to parenthesisation
    const auto spelled = gsgp::parse(
        "((x1 + x2 * x3) * (x2 - x3 - x4)) + ((1 - (x2 - x3 - x4)) * (x1 - x3))");
    CHECK(gsgp::structurally_equal(u.tree(7), spelled));
}

TEST_CASE("unwinding an initial id returns the generation-zero tree itself") {
    const auto data = four_feature_split();
    const auto engine = driven_fixture(data);
    const auto ctx = testsup::make_context(engine);
    gsgp::unwinder u(ctx);
    CHECK(u.tree(0) == engine.initial_population()[0]);
    CHECK(u.tree(4) == engine.initial_population()[4]);
    // the cache hands back the identical node on repeat queries
    CHECK(u.tree(7) == u.tree(7));
}

TEST_CASE("sigmoid wrappers appear in the templates exactly where enabled") {
    const auto data = four_feature_split();
    const auto w = testsup::worked_example::make();
    auto cfg = fixture_config();
    cfg.sigmoid_on_crossover = true;
    cfg.sigmoid_on_mutation = true;
    cfg.ms = 0.25;
    gsgp_engine engine(cfg, data, {w.t.begin(), w.t.end()}, {w.r.begin(), w.r.end()});

    engine.crossover_into_next(0, 1, 2);   // child 5
    engine.mutate_into_next(2, 3, 4);      // child 6
    for (int i = 0; i < 3; ++i) engine.copy_into_next(i);
    engine.finish_generation();

    const auto ctx = testsup::make_context(engine);
    gsgp::unwinder u(ctx);

    const auto wrapped_r = expr_tree::sigmoid(w.r[2]);
    const auto expect_xo = expr_tree::add(
        expr_tree::mul(w.t[0], wrapped_r),
        expr_tree::mul(expr_tree::sub(expr_tree::constant(1.0), wrapped_r), w.t[1]));
    CHECK(gsgp::structurally_equal(u.tree(5), expect_xo));

    const auto expect_mut = expr_tree::add(
        w.t[2], expr_tree::mul(expr_tree::constant(0.25),
                               expr_tree::sub(expr_tree::sigmoid(w.r[3]),
                                              expr_tree::sigmoid(w.r[4]))));
    CHECK(gsgp::structurally_equal(u.tree(6), expect_mut));
}

TEST_CASE("the context is validated against the store") {
    const auto data = four_feature_split();
    const auto engine = driven_fixture(data);

    {
        auto ctx = testsup::make_context(engine);
        ctx.store = nullptr;
        CHECK_THROWS_AS(gsgp::unwinder{ctx}, std::logic_error);
    }
    {
        auto ctx = testsup::make_context(engine);
        ctx.initial = ctx.initial.subspan(0, 3);
        CHECK_THROWS_WITH_AS(gsgp::unwinder{ctx}, doctest::Contains("initial trees"),
                             std::logic_error);
    }
    {
        auto ctx = testsup::make_context(engine);
        ctx.pool = ctx.pool.subspan(0, 2);
        CHECK_THROWS_WITH_AS(gsgp::size_estimator{ctx}, doctest::Contains("pool trees"),
                             std::logic_error);
    }
    {
        const auto ctx = testsup::make_context(engine);
        gsgp::unwinder u(ctx);
        CHECK_THROWS_WITH_AS(u.tree(10), doctest::Contains("not resolvable"),
                             std::logic_error);
    }
}

TEST_CASE("unwound semantics match the engine tables after several generations") {
    run_config cfg;
    cfg.pop_size = 6;
    cfg.generations = 8;
    cfg.seed = 5;
    cfg.max_init_depth = 3;
    cfg.random_tree_depth = 3;
    const auto data = testsup::head_split(testsup::toy_product(20, 77), 14);
    gsgp_engine engine(cfg, data);
    engine.run();

    const auto ctx = testsup::make_context(engine);
    gsgp::unwinder u(ctx);
    for (std::size_t c = 0; c < engine.members().size(); ++c) {
        const auto outs = gsgp::eval_all(u.tree(engine.members()[c]), data.train.cases());
        const auto& col = engine.train_table().column(c);
        REQUIRE(outs.size() == col.size());
        for (std::size_t i = 0; i < outs.size(); ++i)
            CHECK(testsup::rel_close(outs[i], col[i], 1e-9));
    }
}

TEST_CASE("expected_size equals the expanded node count while it fits") {
    for (const bool wrapped : {false, true}) {
        run_config cfg;
        cfg.pop_size = 5;
        cfg.generations = 4;
        cfg.seed = 7;
        cfg.max_init_depth = 3;
        cfg.random_tree_depth = 2;
        cfg.sigmoid_on_crossover = wrapped;
        cfg.sigmoid_on_mutation = wrapped;
        const auto data = testsup::head_split(testsup::toy_product(15, 83), 10);
        gsgp_engine engine(cfg, data);
        engine.run();

        const auto ctx = testsup::make_context(engine);
        gsgp::unwinder u(ctx);
        gsgp::size_estimator sizes(ctx);
        for (individual_id id = 0; id < engine.store().next_id(); ++id) {
            CAPTURE(id);
            CHECK(sizes.size(id) == big_int(u.tree(id)->node_count()));
        }
    }
}

TEST_CASE("expected_size reproduces an independent recurrence over the store") {
    run_config cfg;
    cfg.pop_size = 6;
    cfg.generations = 10;
    cfg.seed = 11;
    const auto data = testsup::head_split(testsup::toy_product(18, 87), 12);
    gsgp_engine engine(cfg, data);
    engine.run();

    const auto ctx = testsup::make_context(engine);
    std::map<individual_id, big_int> memo;
    gsgp::size_estimator sizes(ctx);
    for (individual_id id = 0; id < engine.store().next_id(); ++id)
        CHECK(sizes.size(id) == ref_expected_size(id, ctx, memo));
}

TEST_CASE("expanded sizes overflow any fixed-width count yet remain exact") {
    run_config cfg;
    cfg.pop_size = 4;
    cfg.generations = 120;
    cfg.xo_rate = 1.0;
    cfg.mut_rate = 0.0;
    cfg.elitism = false;
    cfg.seed = 13;
    cfg.max_init_depth = 2;
    cfg.random_tree_depth = 2;
    cfg.tournament_size = 2;
    const auto data = testsup::head_split(testsup::toy_product(10, 91), 6);
    gsgp_engine engine(cfg, data);
    engine.run();

    const auto ctx = testsup::make_context(engine);
    const auto ref = engine.best_id();
    const auto size = gsgp::expected_size(ref, ctx);
    const big_int u64_max = std::numeric_limits<std::uint64_t>::max();
    CHECK(size > u64_max);

    // the unwound dag is still linear in the store and reports saturation
    const auto tree = gsgp::unwind(ref, ctx);
    CHECK(tree->node_count() == std::numeric_limits<std::uint64_t>::max());
    CHECK_NOTHROW(gsgp::eval(tree, std::vector<double>{0.1, 0.2, 0.3}));
}

TEST_CASE("materialize renders within budget and refuses beyond it") {
    const auto data = four_feature_split();
    const auto engine = driven_fixture(data);
    auto ctx = testsup::make_context(engine);

    const auto text = gsgp::materialize(7, ctx);
    CHECK(gsgp::structurally_equal(gsgp::parse(text), gsgp::unwind(7, ctx)));

    const auto exact = gsgp::expected_size(7, ctx);
    ctx.node_budget = exact.convert_to<std::uint64_t>();
    CHECK_NOTHROW(gsgp::materialize(7, ctx));   // a budget met exactly still renders

    ctx.node_budget = exact.convert_to<std::uint64_t>() - 1;
    CHECK_THROWS_WITH_AS(gsgp::materialize(7, ctx), doctest::Contains("over the budget"),
                         std::runtime_error);
}

TEST_CASE("simplify applies each identity rule") {
    auto same = [](const char* in, const char* out) {
        CHECK(gsgp::render(gsgp::simplify(gsgp::parse(in))) == out);
    };
    same("x1 * 1", "x1");
    same("1 * x1", "x1");
    same("x1 + 0", "x1");
    same("0 + x1", "x1");
    same("x1 - 0", "x1");
    same("x1 - x1", "0");
    same("(x1 + x2) - (x1 + x2)", "0");
    same("(x1 + x2) / (x1 + x2)", "1");
    same("0 - (0 - x1)", "x1");
    same("((x1 * 1) + 0) - 0", "x1");
    same("(x2 * 1) * 1", "x2");
    // folding cascades across passes: the inner fold exposes the outer rule
    same("x1 * (x2 / x2)", "x1");
    // not in the rule set: stays put
    same("(x1 - x1) * x2", "(0 * x2)");
    same("x1 + x2", "(x1 + x2)");
}

TEST_CASE("simplify leaves an already-minimal tree untouched, pointer and all") {
    const auto tree = gsgp::parse("x1 + x2 * x3");
    CHECK(gsgp::simplify(tree) == tree);
}

TEST_CASE("the division fold is skipped when a probe hits the protected case") {
    const auto tree = gsgp::parse("x1 / x1");

    const std::vector<double> with_zero{0.5, 0.0, -1.0};
    const gsgp::case_matrix zero_probes{with_zero, 3, 1};
    CHECK(gsgp::simplify(tree, zero_probes) == tree);   // guard declines the rewrite

    const std::vector<double> nonzero{0.5, 2.0, -1.0};
    const gsgp::case_matrix safe_probes{nonzero, 3, 1};
    CHECK(gsgp::render(gsgp::simplify(tree, safe_probes)) == "1");
}

TEST_CASE("simplify preserves semantics and never grows the tree") {
    std::mt19937_64 rng(17);
    gsgp::generator_options opts;
    opts.ephemeral_constants = true;
    const auto probes_ds = testsup::make_dataset(
        25, 4, 19, [](std::span<const double>) { return 0.0; });
    for (int trial = 0; trial < 60; ++trial) {
        const auto tree = gsgp::random_tree(6, gsgp::gen_method::grow, 4, rng, opts);
        const auto slim = gsgp::simplify(tree, probes_ds.cases());
        CHECK(slim->node_count() <= tree->node_count());
        const auto before = gsgp::eval_all(tree, probes_ds.cases());
        const auto after = gsgp::eval_all(slim, probes_ds.cases());
        for (std::size_t i = 0; i < before.size(); ++i)
            CHECK(before[i] == after[i]);
        // a second application changes nothing
        CHECK(gsgp::simplify(slim, probes_ds.cases()) == slim);
    }
}

}
