#include <doctest.h>

#include <algorithm>

#include "sade/surrogate.hpp"

using namespace sade;

namespace {

EvaluatedSolution point(Vector x, double q) { return {std::move(x), q, 0}; }

SurrogateConfig pairwise_dt(std::size_t trail = 45) {
    auto c = SurrogateConfig::make(Approach::pairwise, LearnerKind::decision_tree);
    c.trail_size = trail;
    return c;
}

}  // namespace

TEST_CASE("pairwise label") {
    CHECK(pairwise_label(3.0, 2.0) == 1);
    CHECK(pairwise_label(2.0, 3.0) == 0);
    CHECK(pairwise_label(2.0, 2.0) == 0);
}

TEST_CASE("pairwise label antisymmetry") {
    RandomStream rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(-10, 10);
        const double b = i % 10 == 0 ? a : rng.uniform(-10, 10);
        if (a == b)
            CHECK(pairwise_label(a, b) + pairwise_label(b, a) == 0);
        else
            CHECK(pairwise_label(a, b) + pairwise_label(b, a) == 1);
    }
}

TEST_CASE("pairwise mappings") {
    CHECK(pairwise_map(Vector{1, 2}, Vector{3, 5}, Mapping::plain) == Vector{1, 2, 3, 5});
    CHECK(pairwise_map(Vector{1, 2}, Vector{3, 5}, Mapping::extended) == Vector{1, 2, 3, 5, -2, -3});
    const Vector x{0.5, -1.5, 2.0};
    CHECK(pairwise_map(x, x, Mapping::extended) == Vector{0.5, -1.5, 2.0, 0.5, -1.5, 2.0, 0, 0, 0});
    CHECK_THROWS_AS(pairwise_map(Vector{1, 2}, Vector{1}, Mapping::plain), std::invalid_argument);
}

TEST_CASE("warm-up boundary and defaults") {
    auto dt = SurrogateConfig::make(Approach::pairwise, LearnerKind::decision_tree);
    CHECK(dt.warmup_generations == 4);
    CHECK(in_warmup(3, dt));
    CHECK_FALSE(in_warmup(4, dt));
    auto mlp = SurrogateConfig::make(Approach::pairwise, LearnerKind::mlp);
    CHECK(mlp.warmup_generations == 2);
    CHECK(in_warmup(0, mlp));
    CHECK_THROWS(in_warmup(-1, dt));

    CHECK(default_warmup(LearnerKind::random_forest, Approach::surface) == 40);
    CHECK(default_warmup(LearnerKind::random_forest, Approach::pairwise) == 20);
    CHECK(default_warmup(LearnerKind::mlp, Approach::surface) == 30);
    CHECK(default_warmup(LearnerKind::ridge, Approach::surface) == 10);
    CHECK(default_warmup(LearnerKind::ridge, Approach::pairwise) == 2);
    CHECK(default_warmup(LearnerKind::decision_tree, Approach::surface) == 30);
    CHECK(default_warmup(LearnerKind::gradient_boosting, Approach::surface) == 2);
    CHECK(default_warmup(LearnerKind::gradient_boosting, Approach::pairwise) == 6);
}

TEST_CASE("config invariants") {
    auto c = SurrogateConfig::make(Approach::surface, LearnerKind::ridge);
    CHECK(c.learner.mode == LearnerMode::regressor);
    CHECK(c.label() == "Ridge/R");
    CHECK_NOTHROW(c.validate());
    c.learner.mode = LearnerMode::classifier;
    CHECK_THROWS(c.validate());
    auto p = pairwise_dt();
    CHECK(p.learner.mode == LearnerMode::classifier);
    p.trail_size = 0;
    CHECK_THROWS(p.validate());
    p = pairwise_dt();
    p.warmup_generations = 0;
    CHECK_THROWS(p.validate());
}

TEST_CASE("ingest row accounting") {
    SUBCASE("trail of two gives four rows") {
        SurrogateModel m(pairwise_dt(), 2);
        m.ingest(point({0, 0}, 1));
        CHECK(m.buffer_rows() == 0);
        m.ingest(point({1, 0}, 2));
        const auto before = m.buffer_rows();
        m.ingest(point({0, 1}, 3));
        CHECK(m.buffer_rows() - before == 4);
    }
    SUBCASE("surface grows by one") {
        SurrogateModel m(SurrogateConfig::make(Approach::surface, LearnerKind::ridge), 2);
        m.ingest(point({0, 0}, 1));
        CHECK(m.buffer_rows() == 1);
        m.ingest(point({0, 1}, 1));
        CHECK(m.buffer_rows() == 2);
        CHECK(m.buffer().features() == 2);
    }
    SUBCASE("row count closed form") {
        for (std::size_t trail : {1u, 7u, 45u}) {
            SurrogateModel m(pairwise_dt(trail), 3);
            RandomStream rng(trail);
            std::size_t expected = 0;
            for (std::size_t i = 1; i <= 100; ++i) {
                m.ingest(point({rng.uniform(), rng.uniform(), rng.uniform()}, rng.uniform()));
                expected += 2 * std::min(i - 1, trail);
                REQUIRE(m.buffer_rows() == expected);
            }
            CHECK(m.trail_length() == trail);
            CHECK(m.buffer().features() == 9);
        }
    }
    SUBCASE("row width for plain mapping") {
        auto c = pairwise_dt();
        c.mapping = Mapping::plain;
        SurrogateModel m(c, 4);
        m.ingest(point({0, 0, 0, 0}, 1));
        m.ingest(point({1, 1, 1, 1}, 0));
        CHECK(m.buffer().features() == 8);
    }
}

TEST_CASE("ingest emits both orientations with matching labels") {
    SurrogateModel m(pairwise_dt(), 1);
    m.ingest(point({1.0}, 5.0));
    m.ingest(point({2.0}, 3.0));
    const auto& b = m.buffer();
    REQUIRE(b.rows() == 2);
    // (old, new): new is better -> 1; (new, old) -> 0
    CHECK(Vector(b.row(0).begin(), b.row(0).end()) == Vector{1.0, 2.0, -1.0});
    CHECK(b.target(0) == 1.0);
    CHECK(Vector(b.row(1).begin(), b.row(1).end()) == Vector{2.0, 1.0, 1.0});
    CHECK(b.target(1) == 0.0);
}

TEST_CASE("retrain skip semantics") {
    RandomStream rng(1);
    SurrogateModel empty(pairwise_dt(), 2);
    CHECK_FALSE(empty.retrain(rng));
    CHECK_FALSE(empty.ready());
    CHECK_THROWS_AS(empty.pairwise_estimate(Vector{0, 0}, Vector{1, 1}), NotFitted);

    // equal fitness everywhere: every label is 0
    SurrogateModel flat(pairwise_dt(), 2);
    for (int i = 0; i < 5; ++i) flat.ingest(point({double(i), 0}, 1.0));
    CHECK_FALSE(flat.retrain(rng));
    CHECK_FALSE(flat.ready());

    SurrogateModel surf(SurrogateConfig::make(Approach::surface, LearnerKind::decision_tree), 1);
    CHECK_THROWS_AS(surf.surface_estimate(Vector{0.0}), NotFitted);
    for (int i = 0; i < 10; ++i) surf.ingest(point({double(i)}, double(i * i)));
    CHECK(surf.retrain(rng));
    for (int i = 0; i < 10; ++i) CHECK(surf.surface_estimate(Vector{double(i)}) == doctest::Approx(i * i));
}

TEST_CASE("pairwise estimate learns an ordering") {
    // fitness = first coordinate
    SurrogateModel m(pairwise_dt(), 3);
    RandomStream rng(11);
    for (int i = 0; i < 50; ++i) {
        Vector x{rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 10)};
        m.ingest(point(x, x[0]));
    }
    REQUIRE(m.retrain(rng));
    const Vector x{5, 5, 5}, y{1, 5, 5};
    CHECK(m.pairwise_estimate(x, y));
    CHECK_FALSE(m.pairwise_estimate(y, x));
}

TEST_CASE("retrain determinism") {
    for (auto kind : {LearnerKind::random_forest, LearnerKind::mlp, LearnerKind::decision_tree}) {
        SurrogateModel a(SurrogateConfig::make(Approach::pairwise, kind), 2);
        SurrogateModel b(SurrogateConfig::make(Approach::pairwise, kind), 2);
        RandomStream data(3);
        for (int i = 0; i < 30; ++i) {
            Vector x{data.uniform(-1, 1), data.uniform(-1, 1)};
            a.ingest(point(x, x[0] * x[0] + x[1]));
            b.ingest(point(x, x[0] * x[0] + x[1]));
        }
        RandomStream ra(9), rb(9);
        REQUIRE(a.retrain(ra));
        REQUIRE(b.retrain(rb));
        RandomStream probe(4);
        for (int i = 0; i < 50; ++i) {
            Vector x{probe.uniform(-1, 1), probe.uniform(-1, 1)}, y{probe.uniform(-1, 1), probe.uniform(-1, 1)};
            CHECK(a.pairwise_margin(x, y) == b.pairwise_margin(x, y));
        }
    }
}
