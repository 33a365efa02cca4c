#include <doctest.h>

#include <climits>

#include "sade/metrics.hpp"
#include "sade/optimizer.hpp"

using namespace sade;

namespace {

BenchmarkSpec sphere(std::size_t dim) { return make_simple("sphere", BaseKind::sphere, Vector(dim, 0.0)); }

std::vector<EvaluatedSolution> pop_of(std::vector<Vector> xs) {
    std::vector<EvaluatedSolution> p;
    for (auto& x : xs) p.push_back({std::move(x), 0.0, 0});
    return p;
}

RunRecord plain_run(const BenchmarkSpec& f, std::uint64_t seed, std::size_t workers = 1) {
    auto problem = make_problem(f, workers);
    auto streams = RngStreams::for_run(seed, 0);
    AcceptAllFilter filter;
    return run_optimization(DEConfig::for_dimension(f.dim), problem, filter, streams);
}

bool same_record(const RunRecord& a, const RunRecord& b) {
    if (a.curve.size() != b.curve.size() || a.generations.size() != b.generations.size()) return false;
    for (std::size_t i = 0; i < a.curve.size(); ++i)
        if (a.curve[i].fitness != b.curve[i].fitness || a.curve[i].best != b.curve[i].best) return false;
    for (std::size_t i = 0; i < a.generations.size(); ++i) {
        const auto& x = a.generations[i];
        const auto& y = b.generations[i];
        if (x.evaluations != y.evaluations || x.best != y.best || x.accepted != y.accepted) return false;
    }
    return a.best_x == b.best_x && a.best_fitness == b.best_fitness && a.termination == b.termination;
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_NOTHROW(DEConfig{}.validate());
    CHECK(DEConfig::for_dimension(50).budget == 750);
    DEConfig c;
    c.pop_size = 3;
    CHECK_THROWS(c.validate());
    c = {};
    c.F = 1.5;
    CHECK_THROWS(c.validate());
    c = {};
    c.CR = -0.1;
    CHECK_THROWS(c.validate());
    c = {};
    c.pop_size = 4;
    c.budget = 3;
    CHECK_THROWS(c.validate());
}

TEST_CASE("initial population") {
    const auto f = sphere(50);
    const auto problem = make_problem(f);
    DEConfig cfg = DEConfig::for_dimension(50);
    RandomStream a(1), b(1);
    EvaluationLedger la(cfg.budget), lb(cfg.budget);
    const auto pa = init_population(cfg, problem, a, la);
    const auto pb = init_population(cfg, problem, b, lb);
    CHECK(pa.size() == 15);
    CHECK(la.used() == 15);
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i].x == pb[i].x);
        CHECK(f.bounds.contains(pa[i].x));
        CHECK(pa[i].fitness == evaluate(f, pa[i].x));
    }
    DEConfig small;
    small.pop_size = 4;
    EvaluationLedger tiny(3);
    CHECK_THROWS(init_population(small, problem, a, tiny));
}

TEST_CASE("rand/1 mutation") {
    const auto b = Bounds::uniform(2, -10, 10);
    const auto pop = pop_of({{9, 9}, {1, 1}, {2, 2}, {0, 0}});
    CHECK(mutate_rand1(pop, 0, 1, 2, 3, 0.5, b) == Vector{2, 2});
    CHECK(mutate_rand1(pop, 0, 1, 2, 3, 0.0, b) == Vector{1, 1});
    const auto same = pop_of({{9, 9}, {1, 1}, {4, 4}, {4, 4}});
    CHECK(mutate_rand1(same, 0, 1, 2, 3, 0.5, b) == Vector{1, 1});
    // clamped into the box
    const auto far = pop_of({{0, 0}, {9, 9}, {10, -10}, {-10, 10}});
    CHECK(mutate_rand1(far, 0, 1, 2, 3, 1.0, b) == Vector{10, -10});
    CHECK_THROWS(mutate_rand1(pop, 0, 1, 1, 3, 0.5, b));
    CHECK_THROWS(mutate_rand1(pop, 1, 1, 2, 3, 0.5, b));
}

TEST_CASE("exponential crossover") {
    RandomStream rng(4);
    const Vector t(10, 0.0), m(10, 1.0);
    for (int i = 0; i < 100; ++i) {
        const auto zero = crossover_exp(t, m, 0.0, rng);
        CHECK(std::count(zero.begin(), zero.end(), 1.0) == 1);
        CHECK(crossover_exp(t, m, 1.0, rng) == m);
        CHECK(crossover_exp(m, m, 0.5, rng) == m);
        // mutant components form one circular run
        const auto mid = crossover_exp(t, m, 0.5, rng);
        int edges = 0;
        for (std::size_t j = 0; j < mid.size(); ++j) edges += mid[j] != mid[(j + 1) % mid.size()];
        CHECK(edges <= 2);
    }
    CHECK_THROWS(crossover_exp(t, Vector(3, 0.0), 0.5, rng));
}

TEST_CASE("donor selection") {
    RandomStream rng(6);
    for (int i = 0; i < 500; ++i) {
        const std::size_t target = i % 15;
        const auto r = pick_donors(15, target, rng);
        CHECK(r[0] != r[1]);
        CHECK(r[0] != r[2]);
        CHECK(r[1] != r[2]);
        for (auto v : r) {
            CHECK(v != target);
            CHECK(v < 15);
        }
    }
}

TEST_CASE("one generation with accept-all evaluates the population size") {
    const auto f = sphere(10);
    const auto problem = make_problem(f);
    auto streams = RngStreams::for_run(1, 0);
    AcceptAllFilter filter;
    auto s = start_run(DEConfig::for_dimension(10), problem, filter, streams);
    const auto before = s.ledger.used();
    REQUIRE(run_generation(s));
    CHECK(s.ledger.used() - before == 15);
    const auto& g = s.record.generations.back();
    CHECK(g.accepted == 15);
    CHECK(g.discarded == 0);
    CHECK(g.evaluated == 15);
}

TEST_CASE("reject-all stalls and stops on the idle limit") {
    const auto f = sphere(10);
    const auto problem = make_problem(f);
    auto streams = RngStreams::for_run(1, 0);
    RejectAllFilter filter;
    auto s = start_run(DEConfig::for_dimension(10), problem, filter, streams);
    const auto pop = s.population;
    REQUIRE(run_generation(s));
    CHECK(s.ledger.used() == 15);
    CHECK(s.idle_generations == 1);
    for (std::size_t i = 0; i < pop.size(); ++i) CHECK(s.population[i].x == pop[i].x);
    while (run_generation(s)) {
    }
    CHECK(s.record.termination == Termination::no_improvement);
    CHECK(s.record.generations.size() == 50);
    CHECK(s.record.evaluations == 15);
}

TEST_CASE("budget exactness on the suite") {
    const auto suite = make_suite(50, 2024);
    for (std::size_t i = 0; i < suite.size(); i += 3) {
        const auto r = plain_run(suite[i], 7);
        CHECK(r.evaluations == 750);
        CHECK(r.termination == Termination::budget);
        CHECK(r.curve.size() == 750);
    }
}

TEST_CASE("budget that ends mid-generation") {
    const auto f = sphere(5);
    const auto problem = make_problem(f);
    auto streams = RngStreams::for_run(3, 0);
    AcceptAllFilter filter;
    DEConfig cfg;
    cfg.budget = 22;
    const auto r = run_optimization(cfg, problem, filter, streams);
    CHECK(r.evaluations == 22);
    CHECK(r.termination == Termination::budget);
    CHECK(r.generations.back().evaluated == 7);
}

TEST_CASE("population best never increases") {
    const auto suite = make_suite(10, 1);
    for (std::size_t i = 0; i < suite.size(); i += 4) {
        const auto r = plain_run(suite[i], 9);
        double prev = r.init_best;
        for (const auto& g : r.generations) {
            CHECK(g.best <= prev);
            CHECK(g.accepted + g.discarded == 15);
            prev = g.best;
        }
        for (std::size_t k = 1; k < r.curve.size(); ++k) CHECK(r.curve[k].best <= r.curve[k - 1].best);
    }
}

TEST_CASE("identical seeds give identical records") {
    const auto f = make_suite(10, 5)[4];
    CHECK(same_record(plain_run(f, 3), plain_run(f, 3)));
    CHECK_FALSE(same_record(plain_run(f, 3), plain_run(f, 4)));
}

TEST_CASE("parallel evaluation matches sequential") {
    const auto f = make_suite(20, 5)[2];
    CHECK(same_record(plain_run(f, 8, 1), plain_run(f, 8, 4)));
    auto batch = parallel_batch([](std::span<const double> x) { return x[0] * 2; }, 3);
    std::vector<Vector> xs;
    for (int i = 0; i < 10; ++i) xs.push_back({double(i)});
    const auto out = batch(xs);
    for (int i = 0; i < 10; ++i) CHECK(out[i] == 2.0 * i);
    auto failing = parallel_batch(
        [](std::span<const double> x) -> double {
            if (x[0] > 5) throw std::runtime_error("boom");
            return 0;
        },
        3);
    CHECK_THROWS_AS(failing(xs), std::runtime_error);
}

TEST_CASE("surrogate with endless warm-up reproduces plain DE") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto f = sphere(10);
        const auto problem = make_problem(f);
        for (auto approach : {Approach::surface, Approach::pairwise}) {
            auto cfg = SurrogateConfig::make(approach, LearnerKind::decision_tree);
            cfg.warmup_generations = INT_MAX;
            auto filter = make_filter(cfg, StrategyFlags::parse("prob+qual+diver"), 10);
            auto streams = RngStreams::for_run(seed, 0);
            const auto r = run_optimization(DEConfig::for_dimension(10), problem, *filter, streams);
            CHECK(same_record(r, plain_run(f, seed)));
            CHECK(r.surrogate_fits == 0);
        }
    }
}

TEST_CASE("surrogate filter is consulted after warm-up") {
    const auto f = sphere(10);
    const auto problem = make_problem(f);
    auto cfg = SurrogateConfig::make(Approach::pairwise, LearnerKind::decision_tree);
    SurrogateFilter filter(cfg, {}, 10);
    auto streams = RngStreams::for_run(2, 0);
    const auto r = run_optimization(DEConfig::for_dimension(10), problem, filter, streams);
    REQUIRE(r.generations.size() > 4);
    for (int g = 0; g < 4; ++g) CHECK(r.generations[g].warmup);
    CHECK_FALSE(r.generations[4].warmup);
    CHECK(r.surrogate_fits > 0);
    std::size_t discarded = 0;
    for (const auto& g : r.generations) discarded += g.discarded;
    CHECK(discarded > 0);
    CHECK(r.evaluations <= 150);
}

TEST_CASE("strategies require a surrogate") {
    CHECK_THROWS(make_filter(std::nullopt, StrategyFlags::parse("prob"), 5));
    CHECK_NOTHROW(make_filter(std::nullopt, {}, 5));
}

TEST_CASE("shadow confusion for synthetic filters") {
    const auto f = make_suite(10, 3)[5];
    const auto problem = make_problem(f);
    DEConfig cfg = DEConfig::for_dimension(10);
    cfg.no_improvement_limit = 0;

    SUBCASE("oracle") {
        OracleFilter filter([&](std::span<const double> x) { return evaluate(f, x); });
        auto streams = RngStreams::for_run(1, 0);
        const auto r = run_shadow(cfg, problem, filter, streams);
        CHECK(r.shadow);
        CHECK(r.confusion.fp == 0);
        CHECK(r.confusion.fn == 0);
        CHECK(r.confusion.tp + r.confusion.tn == 135);
        // oracle shadow follows the plain DE trajectory
        CHECK(r.best_fitness == plain_run(f, 1).best_fitness);
    }
    SUBCASE("accept-all") {
        AcceptAllFilter filter;
        auto streams = RngStreams::for_run(1, 0);
        const auto r = run_shadow(cfg, problem, filter, streams);
        const auto rates = confusion_rates(r.confusion);
        CHECK(rates.sensitivity == 1.0);
        CHECK(rates.specificity == 0.0);
        CHECK(r.confusion.tn == 0);
        CHECK(r.confusion.fn == 0);
    }
    SUBCASE("reject-all") {
        RejectAllFilter filter;
        auto streams = RngStreams::for_run(1, 0);
        const auto r = run_shadow(cfg, problem, filter, streams);
        const auto rates = confusion_rates(r.confusion);
        CHECK(rates.sensitivity == 0.0);
        CHECK(rates.specificity == 1.0);
        CHECK(r.evaluations == 150);
        CHECK(r.best_fitness == r.init_best);
    }
    SUBCASE("plain runs leave confusion empty") {
        AcceptAllFilter filter;
        auto streams = RngStreams::for_run(1, 0);
        const auto r = run_optimization(cfg, problem, filter, streams);
        CHECK(r.confusion == Confusion{});
    }
}
