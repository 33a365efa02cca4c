#pragma once

#include <optional>

#include "sade/optimizer.hpp"

namespace sade {

struct CurveSample {
    std::int64_t evaluations = 0;
    double best = 0.0;
};

/// Best-so-far curve of a run, one sample per true evaluation.
std::vector<CurveSample> best_curve(const RunRecord& record);

struct DeltaE {
    std::int64_t value = 0;  // m - n
    std::int64_t n = 0;
    std::int64_t m = 0;
    bool censored = false;  // baseline never reached the surrogate's value; m is its last index
    /// n at which the surrogate first reached its best-at-n.
    std::int64_t n_first = 0;
};

/// Evaluation savings at n: m is the first baseline evaluation whose best is <= the surrogate's best at n.
/// The surrogate side uses the first evaluation at which that best was reached, so identical curves give 0.
DeltaE delta_e(std::span<const CurveSample> surrogate, std::span<const CurveSample> baseline, std::int64_t n);

/// n / m.
double delta_e_ratio(std::int64_t n, std::int64_t m);

/// (evaluations, best) after i generations; i = 0 is the initial population.
CurveSample generation_state(const RunRecord& record, int i);

/// ln(|best(i) - best(i - d)| / (evals(i) - evals(i - d))), window clipped at generation 0.
/// Empty when nothing was evaluated or nothing improved in the window.
std::optional<double> zeta(const RunRecord& record, int d, int i);

struct ConfusionRates {
    std::optional<double> accuracy;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
};

ConfusionRates confusion_rates(std::int64_t tp, std::int64_t fp, std::int64_t tn, std::int64_t fn);
inline ConfusionRates confusion_rates(const Confusion& c) { return confusion_rates(c.tp, c.fp, c.tn, c.fn); }

}  // namespace sade
