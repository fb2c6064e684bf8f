#include <doctest.h>

#include <gsgp/baseline.hpp>
#include <gsgp/engine.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "support.hpp"

using gsgp::std_gp_config;
using gsgp::std_gp_engine;

TEST_SUITE("baseline") {

TEST_CASE("std_gp_config rejects overlapping operator rates") {
    std_gp_config cfg;
    CHECK_NOTHROW(cfg.validate());   // defaults: 0.9 crossover, 0.1 mutation

    auto expect_throw = [](std_gp_config c) {
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    };
    { auto c = cfg; c.xo_rate = 0.6; c.mut_rate = 0.6; expect_throw(c); }
    { auto c = cfg; c.pop_size = 1; expect_throw(c); }
    { auto c = cfg; c.mut_rate = -0.1; expect_throw(c); }
    { auto c = cfg; c.tournament_size = 0; expect_throw(c); }
    { auto c = cfg; c.mutation_max_depth = -1; expect_throw(c); }
    { auto c = cfg; c.node_ceiling = 0; expect_throw(c); }
    { auto c = cfg; c.xo_rate = 1.0; c.mut_rate = 0.0; CHECK_NOTHROW(c.validate()); }
}

TEST_CASE("subtree_crossover grafts the drawn donor subtree at the drawn site") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p1 = gsgp::random_tree(4, gsgp::gen_method::full, 3, rng);
        const auto p2 = gsgp::random_tree(4, gsgp::gen_method::grow, 3, rng);
        const auto p1_text = gsgp::render(p1);
        const auto p2_text = gsgp::render(p2);

        // the contract fixes the draw order: receiver site first, then donor
        std::mt19937_64 replay = rng;
        const auto i1 = std::uniform_int_distribution<std::uint64_t>(
            0, p1->node_count() - 1)(replay);
        const auto i2 = std::uniform_int_distribution<std::uint64_t>(
            0, p2->node_count() - 1)(replay);
        const auto expected = gsgp::replace_subtree(p1, i1, gsgp::subtree_at(p2, i2));

        const auto child = gsgp::subtree_crossover(p1, p2, rng);
        CHECK(gsgp::structurally_equal(child, expected));
        CHECK(gsgp::render(p1) == p1_text);   // parents untouched
        CHECK(gsgp::render(p2) == p2_text);
    }
    CHECK_THROWS_AS(gsgp::subtree_crossover(nullptr, gsgp::parse("x1"), rng),
                    std::invalid_argument);
}

TEST_CASE("subtree_mutation grafts a fresh grow tree at the drawn site") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = gsgp::random_tree(4, gsgp::gen_method::full, 3, rng);

        std::mt19937_64 replay = rng;
        const auto i = std::uniform_int_distribution<std::uint64_t>(
            0, p->node_count() - 1)(replay);
        const auto fresh = gsgp::random_tree(3, gsgp::gen_method::grow, 3, replay);
        const auto expected = gsgp::replace_subtree(p, i, fresh);

        const auto child = gsgp::subtree_mutation(p, 3, 3, rng);
        CHECK(gsgp::structurally_equal(child, expected));
    }
    CHECK_THROWS_AS(gsgp::subtree_mutation(nullptr, 3, 3, rng), std::invalid_argument);
}

TEST_CASE("both engines share generation zero for equal seeds") {
    const auto data = testsup::head_split(testsup::toy_product(24, 5), 16);

    gsgp::run_config semantic_cfg;
    semantic_cfg.pop_size = 14;
    semantic_cfg.seed = 42;
    std_gp_config tree_cfg;
    tree_cfg.pop_size = 14;
    tree_cfg.seed = 42;

    gsgp::gsgp_engine semantic(semantic_cfg, data);
    std_gp_engine tree(tree_cfg, data);

    REQUIRE(tree.population().size() == semantic.initial_population().size());
    for (std::size_t i = 0; i < tree.population().size(); ++i)
        CHECK(gsgp::structurally_equal(tree.population()[i],
                                       semantic.initial_population()[i]));
    CHECK(tree.best_train_rmse() == semantic.best_train_rmse());
    CHECK(tree.best_test_rmse() == semantic.best_test_rmse());
    CHECK(tree.generation() == 0);
}

TEST_CASE("fitness is recomputed from full tree evaluation every generation") {
    std_gp_config cfg;
    cfg.pop_size = 10;
    cfg.generations = 6;
    cfg.seed = 9;
    const auto data = testsup::head_split(testsup::toy_product(20, 11), 14);
    std_gp_engine engine(cfg, data);

    for (int g = 0; g < 6; ++g) {
        engine.step_generation();
        for (std::size_t i = 0; i < engine.population().size(); ++i)
            CHECK(engine.fitnesses()[i] ==
                  gsgp::rmse(gsgp::eval_all(engine.population()[i], data.train.cases()),
                             data.train.y));
        const auto best =
            std::min_element(engine.fitnesses().begin(), engine.fitnesses().end());
        CHECK(engine.best_index() ==
              static_cast<std::size_t>(best - engine.fitnesses().begin()));
    }
}

TEST_CASE("elitism keeps the best tree and the trace is monotone on train") {
    std_gp_config cfg;
    cfg.pop_size = 12;
    cfg.generations = 10;
    cfg.seed = 13;
    const auto data = testsup::head_split(testsup::toy_product(24, 15), 16);
    std_gp_engine engine(cfg, data);

    double prev = engine.best_train_rmse();
    for (int g = 0; g < 10; ++g) {
        const auto elite = engine.best_tree();
        engine.step_generation();
        CHECK(engine.population()[0] == elite);   // copied first, by pointer
        CHECK(engine.best_train_rmse() <= prev);
        prev = engine.best_train_rmse();
    }
}

TEST_CASE("reproduction-only stepping copies survivors") {
    std_gp_config cfg;
    cfg.pop_size = 8;
    cfg.xo_rate = 0.0;
    cfg.mut_rate = 0.0;
    cfg.seed = 17;
    const auto data = testsup::head_split(testsup::toy_product(16, 19), 11);
    std_gp_engine engine(cfg, data);

    const auto before = engine.population();
    engine.step_generation();
    for (const auto& tree : engine.population())
        CHECK(std::find(before.begin(), before.end(), tree) != before.end());
}

TEST_CASE("run produces the standard trace shape deterministically") {
    std_gp_config cfg;
    cfg.pop_size = 10;
    cfg.generations = 7;
    cfg.seed = 21;
    const auto data = testsup::head_split(testsup::toy_product(20, 23), 14);

    const auto a = gsgp::run_std(cfg, data);
    const auto b = gsgp::run_std(cfg, data);
    REQUIRE(a.records.size() == 8);
    for (std::size_t g = 0; g < a.records.size(); ++g) {
        CHECK(a.records[g].generation == g);
        CHECK(a.records[g].best < cfg.pop_size);   // population index, not an id
        CHECK(a.records[g].best_train_rmse == b.records[g].best_train_rmse);
        CHECK(a.records[g].best_test_rmse == b.records[g].best_test_rmse);
    }
    CHECK(a.final_best == a.records.back().best);

    // a different seed changes the trajectory somewhere, even if both runs
    // end up converging to similar finals
    auto other = cfg;
    other.seed = 22;
    const auto c = gsgp::run_std(other, data);
    bool any_difference = false;
    for (std::size_t g = 0; g < a.records.size(); ++g)
        any_difference = any_difference ||
                         c.records[g].best_train_rmse != a.records[g].best_train_rmse;
    CHECK(any_difference);
}

TEST_CASE("an offspring over the node ceiling aborts with a diagnostic") {
    std_gp_config cfg;
    cfg.pop_size = 2;
    cfg.tournament_size = 2;
    cfg.node_ceiling = 4;
    cfg.xo_rate = 0.0;
    cfg.mut_rate = 0.0;   // reproduction copies the parent, so the trip is certain
    cfg.seed = 25;
    const auto data = testsup::head_split(testsup::toy_product(10, 27), 7);
    // every fixture tree has five nodes, over the four-node ceiling
    std_gp_engine engine(cfg, data,
                         {gsgp::parse("x1 + x2 * x3"), gsgp::parse("x3 - x1 * x2")});
    CHECK_THROWS_WITH_AS(engine.step_generation(),
                         doctest::Contains("exceeds the ceiling of 4 at generation 1"),
                         std::runtime_error);
}

}
