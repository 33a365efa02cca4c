#include "sade/metrics.hpp"

#include <cmath>

namespace sade {

std::vector<CurveSample> best_curve(const RunRecord& record) {
    std::vector<CurveSample> out;
    out.reserve(record.curve.size());
    for (const auto& p : record.curve) out.push_back({p.eval_index, p.best});
    return out;
}

DeltaE delta_e(std::span<const CurveSample> surrogate, std::span<const CurveSample> baseline, std::int64_t n) {
    if (n < 1 || surrogate.empty() || n > surrogate.back().evaluations)
        throw std::invalid_argument("delta_e: n = " + std::to_string(n) + " is outside the surrogate curve");
    if (baseline.empty()) throw std::invalid_argument("delta_e: empty baseline curve");

    // last surrogate sample with evaluations <= n
    std::size_t k = 0;
    while (k + 1 < surrogate.size() && surrogate[k + 1].evaluations <= n) ++k;
    if (surrogate[k].evaluations > n) throw std::invalid_argument("delta_e: surrogate curve starts after n");
    const double target = surrogate[k].best;
    std::size_t first = k;
    while (first > 0 && surrogate[first - 1].best == target) --first;

    DeltaE r;
    r.n = n;
    r.n_first = surrogate[first].evaluations;
    r.m = baseline.back().evaluations;
    r.censored = true;
    for (const auto& b : baseline) {
        if (b.best <= target) {
            r.m = b.evaluations;
            r.censored = false;
            break;
        }
    }
    r.value = r.m - r.n_first;
    return r;
}

double delta_e_ratio(std::int64_t n, std::int64_t m) {
    if (m < 1) throw std::invalid_argument("delta_e_ratio: m must be at least 1");
    return static_cast<double>(n) / static_cast<double>(m);
}

CurveSample generation_state(const RunRecord& record, int i) {
    if (i < 0 || static_cast<std::size_t>(i) > record.generations.size())
        throw std::invalid_argument("generation_state: generation " + std::to_string(i) + " out of range");
    if (i == 0) return {record.init_evaluations, record.init_best};
    const auto& g = record.generations[static_cast<std::size_t>(i - 1)];
    return {g.evaluations, g.best};
}

std::optional<double> zeta(const RunRecord& record, int d, int i) {
    if (i < 1) throw std::invalid_argument("zeta: i must be at least 1");
    if (d < 1) throw std::invalid_argument("zeta: window must be at least 1");
    const auto now = generation_state(record, i);
    const auto then = generation_state(record, std::max(0, i - d));
    const auto evals = now.evaluations - then.evaluations;
    const double gain = std::abs(now.best - then.best);
    if (evals <= 0 || !(gain > 0.0)) return std::nullopt;
    return std::log(gain / static_cast<double>(evals));
}

ConfusionRates confusion_rates(std::int64_t tp, std::int64_t fp, std::int64_t tn, std::int64_t fn) {
    if (tp < 0 || fp < 0 || tn < 0 || fn < 0) throw std::invalid_argument("confusion_rates: negative count");
    ConfusionRates r;
    const auto total = tp + fp + tn + fn;
    if (total > 0) r.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
    if (tp + fn > 0) r.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (tn + fp > 0) r.specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
    return r;
}

}  // namespace sade
