#include "sade/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace sade {

DEConfig DEConfig::for_dimension(std::size_t dim, std::int64_t multiplier) {
    DEConfig c;
    c.budget = multiplier * static_cast<std::int64_t>(dim);
    return c;
}

void DEConfig::validate() const {
    if (pop_size < 4) throw std::invalid_argument("DE: population size must be at least 4");
    if (!(F >= 0.0 && F <= 1.0)) throw std::invalid_argument("DE: F must lie in [0, 1]");
    if (!(CR >= 0.0 && CR <= 1.0)) throw std::invalid_argument("DE: CR must lie in [0, 1]");
    if (budget < static_cast<std::int64_t>(pop_size))
        throw std::invalid_argument("DE: budget " + std::to_string(budget) + " is smaller than the population");
    if (no_improvement_limit < 0) throw std::invalid_argument("DE: negative no-improvement limit");
    if (workers < 1) throw std::invalid_argument("DE: need at least one worker");
}

BatchObjective parallel_batch(Objective f, std::size_t workers) {
    if (workers < 1) throw std::invalid_argument("parallel_batch: need at least one worker");
    return [f = std::move(f), workers](std::span<const Vector> batch) {
        std::vector<double> out(batch.size());
        const std::size_t threads = std::min(workers, batch.size());
        if (threads <= 1) {
            for (std::size_t i = 0; i < batch.size(); ++i) out[i] = f(batch[i]);
            return out;
        }
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = t; i < batch.size(); i += threads) out[i] = f(batch[i]);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
        return out;
    };
}

Problem make_problem(const BenchmarkSpec& spec, std::size_t workers) {
    return {spec.bounds, parallel_batch([spec](std::span<const double> x) { return evaluate(spec, x); }, workers)};
}

Problem make_problem(const BlackBoxSpec& spec, Bounds bounds) {
    spec.validate();
    if (bounds.dim() != spec.dim) throw std::invalid_argument("black-box: bounds dimension mismatch");
    return {std::move(bounds), [spec](std::span<const Vector> batch) { return blackbox_evaluate(spec, batch); }};
}

// ---------------------------------------------------------------------------

SurrogateFilter::SurrogateFilter(SurrogateConfig cfg, StrategyFlags flags, std::size_t dim)
    : model_(std::move(cfg), dim), flags_(flags) {
    flags_.validate();
}

FilterDecision SurrogateFilter::decide(int generation, const EvaluatedSolution& current, const Vector& challenger,
                                       RandomStream& strategy_rng) {
    // warm-up and pass-through: evaluate everything, no strategy draws
    if (in_warmup(generation, model_.config()) || !model_.ready()) return {true, false};

    bool verdict = false;
    StrategyInputs inputs;
    if (model_.config().approach == Approach::surface) {
        const double q_hat = model_.surface_estimate(challenger);
        verdict = default_accept_surface(q_hat, current.fitness);
        if (flags_.use_qual) inputs.quality_distance = std::abs(model_.surface_estimate(current.x) - q_hat);
    } else {
        verdict = model_.pairwise_estimate(current.x, challenger);
        if (flags_.use_qual) inputs.quality_distance = model_.pairwise_margin(current.x, challenger);
    }
    if (flags_.use_diver) inputs.diversity_distance = diversity_distance(challenger, evaluated_);

    const bool accept = combined_accept(verdict, flags_, means_, inputs, strategy_rng);
    means_ = update_means(means_, inputs.quality_distance, std::nullopt);
    return {accept, true};
}

void SurrogateFilter::observe(const EvaluatedSolution& point) {
    model_.ingest(point);
    if (!flags_.use_diver) return;
    if (!evaluated_.empty()) means_ = update_means(means_, std::nullopt, diversity_distance(point.x, evaluated_));
    evaluated_.push_back(point.x);
}

void SurrogateFilter::end_generation(int generation, RandomStream& learner_rng) {
    // only fit when the next generation will consult the model
    if (!in_warmup(generation + 1, model_.config())) model_.retrain(learner_rng);
}

std::unique_ptr<ChallengerFilter> make_filter(const std::optional<SurrogateConfig>& surrogate,
                                              const StrategyFlags& flags, std::size_t dim) {
    if (!surrogate) {
        if (flags.any()) throw std::invalid_argument("strategies need a surrogate");
        return std::make_unique<AcceptAllFilter>();
    }
    return std::make_unique<SurrogateFilter>(*surrogate, flags, dim);
}

// ---------------------------------------------------------------------------

std::vector<EvaluatedSolution> init_population(const DEConfig& cfg, const Problem& problem, RandomStream& rng,
                                               EvaluationLedger& ledger) {
    if (ledger.remaining() < static_cast<std::int64_t>(cfg.pop_size))
        throw std::invalid_argument("init_population: budget smaller than the population");
    const auto& b = problem.bounds;
    std::vector<Vector> xs(cfg.pop_size, Vector(b.dim()));
    for (auto& x : xs)
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = rng.uniform(b.lower[j], b.upper[j]);
    const auto fitness = problem.evaluate(xs);
    if (fitness.size() != xs.size()) throw std::runtime_error("objective returned the wrong number of values");
    std::vector<EvaluatedSolution> pop;
    pop.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        ledger.record(fitness[i]);
        pop.push_back({std::move(xs[i]), fitness[i], ledger.used()});
    }
    return pop;
}

Vector mutate_rand1(std::span<const EvaluatedSolution> pop, std::size_t target, std::size_t r1, std::size_t r2,
                    std::size_t r3, double F, const Bounds& bounds) {
    const std::size_t n = pop.size();
    if (r1 >= n || r2 >= n || r3 >= n || target >= n) throw std::invalid_argument("mutate_rand1: index out of range");
    if (r1 == r2 || r1 == r3 || r2 == r3 || r1 == target || r2 == target || r3 == target)
        throw std::invalid_argument("mutate_rand1: indices must be distinct");
    const auto& a = pop[r1].x;
    const auto& b = pop[r2].x;
    const auto& c = pop[r3].x;
    Vector v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = a[j] + F * (b[j] - c[j]);
    return clamp(v, bounds);
}

Vector crossover_exp(std::span<const double> target, std::span<const double> mutant, double CR, RandomStream& rng) {
    if (target.size() != mutant.size()) throw std::invalid_argument("crossover_exp: length mismatch");
    const std::size_t d = target.size();
    Vector trial(target.begin(), target.end());
    std::size_t j = rng.index(d);
    std::size_t copied = 0;
    do {
        trial[j] = mutant[j];
        j = (j + 1) % d;
        ++copied;
    } while (copied < d && rng.uniform() < CR);
    return trial;
}

std::array<std::size_t, 3> pick_donors(std::size_t pop_size, std::size_t target, RandomStream& rng) {
    if (pop_size < 4) throw std::invalid_argument("pick_donors: population too small");
    std::array<std::size_t, 3> r{};
    for (std::size_t k = 0; k < 3; ++k) {
        std::size_t c;
        do {
            c = rng.index(pop_size);
        } while (c == target || std::find(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k), c) !=
                                    r.begin() + static_cast<std::ptrdiff_t>(k));
        r[k] = c;
    }
    return r;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Termination t) { return t == Termination::budget ? "budget" : "no_improvement"; }

namespace {

double population_best(const std::vector<EvaluatedSolution>& pop) {
    double b = std::numeric_limits<double>::infinity();
    for (const auto& p : pop) b = std::min(b, p.fitness);
    return b;
}

void finish(RunState& s, Termination why) {
    auto& r = s.record;
    r.termination = why;
    r.curve = s.ledger.curve();
    r.evaluations = s.ledger.used();
    const auto it = std::min_element(s.population.begin(), s.population.end(),
                                     [](const auto& a, const auto& b) { return a.fitness < b.fitness; });
    r.best_fitness = it->fitness;
    r.best_x = it->x;
    r.surrogate_fits = s.filter->fit_count();
    r.shadow = s.cfg.shadow_mode;
}

}  // namespace

RunState start_run(const DEConfig& cfg, const Problem& problem, ChallengerFilter& filter, RngStreams& streams) {
    cfg.validate();
    RunState s;
    s.cfg = cfg;
    s.problem = &problem;
    s.filter = &filter;
    s.streams = &streams;
    s.ledger = EvaluationLedger(cfg.budget);
    s.population = init_population(cfg, problem, streams.population_init, s.ledger);
    for (const auto& p : s.population) filter.observe(p);
    s.best = population_best(s.population);
    s.record.init_evaluations = s.ledger.used();
    s.record.init_best = s.best;
    if (s.ledger.exhausted()) finish(s, Termination::budget);
    return s;
}

bool run_generation(RunState& s) {
    if (s.ledger.exhausted()) return false;
    const std::size_t n = s.cfg.pop_size;
    auto& rng = s.streams->de_operators;

    // proposals from the generation-start population
    std::vector<Vector> trials(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = pick_donors(n, i, rng);
        const Vector mutant = mutate_rand1(s.population, i, r[0], r[1], r[2], s.cfg.F, s.problem->bounds);
        trials[i] = crossover_exp(s.population[i].x, mutant, s.cfg.CR, rng);
    }

    GenerationLog log;
    log.generation = s.generation;
    std::vector<FilterDecision> decisions(n);
    bool any_active = false;
    for (std::size_t i = 0; i < n; ++i) {
        decisions[i] = s.filter->decide(s.generation, s.population[i], trials[i], s.streams->strategy_bernoulli);
        any_active |= decisions[i].filter_active;
        if (decisions[i].accept)
            ++log.accepted;
        else
            ++log.discarded;
    }
    log.warmup = !any_active;

    std::vector<std::size_t> to_eval;
    for (std::size_t i = 0; i < n; ++i)
        if (s.cfg.shadow_mode || decisions[i].accept) to_eval.push_back(i);
    if (static_cast<std::int64_t>(to_eval.size()) > s.ledger.remaining())
        to_eval.resize(static_cast<std::size_t>(s.ledger.remaining()));

    std::vector<Vector> batch;
    batch.reserve(to_eval.size());
    for (auto i : to_eval) batch.push_back(trials[i]);
    const auto fitness = batch.empty() ? std::vector<double>{} : s.problem->evaluate(batch);
    if (fitness.size() != batch.size()) throw std::runtime_error("objective returned the wrong number of values");

    // apply in proposal order
    for (std::size_t k = 0; k < to_eval.size(); ++k) {
        const std::size_t i = to_eval[k];
        s.ledger.record(fitness[k]);
        ++log.evaluated;
        const bool better = is_better(fitness[k], s.population[i].fitness);
        if (s.cfg.shadow_mode) {
            auto& c = log.confusion;
            if (decisions[i].accept)
                (better ? c.tp : c.fp) += 1;
            else
                (better ? c.fn : c.tn) += 1;
        }
        if (!decisions[i].accept) continue;
        EvaluatedSolution e{std::move(batch[k]), fitness[k], s.ledger.used()};
        if (better) s.population[i] = e;
        s.filter->observe(e);
    }

    s.filter->end_generation(s.generation, s.streams->learner_training);

    const double best = population_best(s.population);
    if (best < s.best) {
        s.best = best;
        s.idle_generations = 0;
    } else {
        ++s.idle_generations;
    }
    log.evaluations = s.ledger.used();
    log.best = best;
    s.record.confusion += log.confusion;
    s.record.generations.push_back(log);
    ++s.generation;

    if (s.ledger.exhausted()) {
        finish(s, Termination::budget);
        return false;
    }
    if (s.cfg.no_improvement_limit > 0 && s.idle_generations >= s.cfg.no_improvement_limit) {
        finish(s, Termination::no_improvement);
        return false;
    }
    return true;
}

RunRecord run_optimization(const DEConfig& cfg, const Problem& problem, ChallengerFilter& filter, RngStreams& streams) {
    RunState s = start_run(cfg, problem, filter, streams);
    while (run_generation(s)) {
    }
    return std::move(s.record);
}

RunRecord run_shadow(DEConfig cfg, const Problem& problem, ChallengerFilter& filter, RngStreams& streams) {
    cfg.shadow_mode = true;
    return run_optimization(cfg, problem, filter, streams);
}

}  // namespace sade
