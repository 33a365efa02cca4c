#pragma once

#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <optional>

#include "sade/benchmarks.hpp"
#include "sade/strategies.hpp"
#include "sade/surrogate.hpp"

namespace sade {

struct DEConfig {
    std::size_t pop_size = 15;
    double F = 0.5;
    double CR = 0.5;
    std::int64_t budget = 750;
    int no_improvement_limit = 50;  // generations; 0 disables the rule
    bool shadow_mode = false;
    std::size_t workers = 8;  // threads for one generation's batch of true evaluations

    /// Defaults with a budget of multiplier * dim.
    static DEConfig for_dimension(std::size_t dim, std::int64_t multiplier = 15);
    void validate() const;
};

using Objective = std::function<double(std::span<const double>)>;
using BatchObjective = std::function<std::vector<double>(std::span<const Vector>)>;

/// Evaluates a batch with up to `workers` threads; results in batch order.
BatchObjective parallel_batch(Objective f, std::size_t workers);

struct Problem {
    Bounds bounds;
    BatchObjective evaluate;
};

Problem make_problem(const BenchmarkSpec& spec, std::size_t workers = 1);
Problem make_problem(const BlackBoxSpec& spec, Bounds bounds);

// ---------------------------------------------------------------------------
// Filters

struct FilterDecision {
    bool accept = true;
    bool filter_active = false;  // false during warm-up and pass-through
};

/// Accept/discard hook consulted for every challenger.
class ChallengerFilter {
public:
    virtual ~ChallengerFilter() = default;
    virtual FilterDecision decide(int generation, const EvaluatedSolution& current, const Vector& challenger,
                                  RandomStream& strategy_rng) = 0;
    /// A truly evaluated point that the search keeps (initial population and accepted challengers).
    virtual void observe(const EvaluatedSolution&) {}
    virtual void end_generation(int /*generation*/, RandomStream& /*learner_rng*/) {}
    virtual std::size_t fit_count() const { return 0; }
};

class AcceptAllFilter final : public ChallengerFilter {
public:
    FilterDecision decide(int, const EvaluatedSolution&, const Vector&, RandomStream&) override { return {true, true}; }
};

class RejectAllFilter final : public ChallengerFilter {
public:
    FilterDecision decide(int, const EvaluatedSolution&, const Vector&, RandomStream&) override { return {false, true}; }
};

/// Knows the true objective: accepts exactly the improving challengers. Test instrument only;
/// its calls do not touch the budget.
class OracleFilter final : public ChallengerFilter {
public:
    explicit OracleFilter(Objective f) : f_(std::move(f)) {}
    FilterDecision decide(int, const EvaluatedSolution& current, const Vector& challenger, RandomStream&) override {
        return {is_better(f_(challenger), current.fitness), true};
    }

private:
    Objective f_;
};

/// Surface or pairwise surrogate plus relaxation strategies.
class SurrogateFilter final : public ChallengerFilter {
public:
    SurrogateFilter(SurrogateConfig cfg, StrategyFlags flags, std::size_t dim);

    FilterDecision decide(int generation, const EvaluatedSolution& current, const Vector& challenger,
                          RandomStream& strategy_rng) override;
    void observe(const EvaluatedSolution& point) override;
    void end_generation(int generation, RandomStream& learner_rng) override;
    std::size_t fit_count() const override { return model_.fit_count(); }

    const SurrogateModel& model() const { return model_; }
    const RunningMeans& means() const { return means_; }

private:
    SurrogateModel model_;
    StrategyFlags flags_;
    RunningMeans means_;
    std::vector<Vector> evaluated_;
};

/// No surrogate: plain DE.
std::unique_ptr<ChallengerFilter> make_filter(const std::optional<SurrogateConfig>& surrogate,
                                              const StrategyFlags& flags, std::size_t dim);

// ---------------------------------------------------------------------------
// DE operators

std::vector<EvaluatedSolution> init_population(const DEConfig& cfg, const Problem& problem, RandomStream& rng,
                                               EvaluationLedger& ledger);

/// x_r1 + F (x_r2 - x_r3), clamped to the bounds.
Vector mutate_rand1(std::span<const EvaluatedSolution> pop, std::size_t target, std::size_t r1, std::size_t r2,
                    std::size_t r3, double F, const Bounds& bounds);

/// Exponential crossover: a circular run of mutant components starting at a random index.
Vector crossover_exp(std::span<const double> target, std::span<const double> mutant, double CR, RandomStream& rng);

/// Three distinct indices, all different from target.
std::array<std::size_t, 3> pick_donors(std::size_t pop_size, std::size_t target, RandomStream& rng);

// ---------------------------------------------------------------------------
// Runs

struct Confusion {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    Confusion& operator+=(const Confusion& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }
    bool operator==(const Confusion&) const = default;
};

struct GenerationLog {
    int generation = 0;  // 0-based DE generation
    std::int64_t evaluations = 0;  // ledger.used after the generation
    double best = 0.0;             // population best after the generation
    std::size_t accepted = 0;
    std::size_t discarded = 0;
    std::size_t evaluated = 0;
    bool warmup = false;  // filter inactive for the whole generation
    Confusion confusion;  // shadow mode only
};

enum class Termination { budget, no_improvement };
std::string_view to_string(Termination t);

struct RunRecord {
    std::vector<CurvePoint> curve;
    std::vector<GenerationLog> generations;
    std::int64_t init_evaluations = 0;
    double init_best = 0.0;
    Confusion confusion;
    Termination termination = Termination::budget;
    std::int64_t evaluations = 0;
    double best_fitness = 0.0;
    Vector best_x;
    std::size_t surrogate_fits = 0;
    bool shadow = false;
};

/// Mutable state of a run between generations.
struct RunState {
    DEConfig cfg;
    const Problem* problem = nullptr;
    ChallengerFilter* filter = nullptr;
    RngStreams* streams = nullptr;
    EvaluationLedger ledger{0};
    std::vector<EvaluatedSolution> population;
    int generation = 0;
    int idle_generations = 0;
    double best = std::numeric_limits<double>::infinity();
    RunRecord record;
};

RunState start_run(const DEConfig& cfg, const Problem& problem, ChallengerFilter& filter, RngStreams& streams);

/// One generation: propose, filter, evaluate the accepted batch, replace, ingest, retrain.
/// Returns false once the run has terminated.
bool run_generation(RunState& state);

RunRecord run_optimization(const DEConfig& cfg, const Problem& problem, ChallengerFilter& filter, RngStreams& streams);

/// Every challenger is truly evaluated while the search still follows the filter.
RunRecord run_shadow(DEConfig cfg, const Problem& problem, ChallengerFilter& filter, RngStreams& streams);

}  // namespace sade
