#include "sade/core.hpp"

#include <algorithm>
#include <cmath>

namespace sade {

Bounds Bounds::uniform(std::size_t dim, double lo, double hi) {
    Bounds b;
    b.lower.assign(dim, lo);
    b.upper.assign(dim, hi);
    b.validate();
    return b;
}

bool Bounds::contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
    return true;
}

void Bounds::validate() const {
    if (lower.size() != upper.size()) throw std::invalid_argument("bounds: lower/upper length mismatch");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] <= upper[i])) throw std::invalid_argument("bounds: lower > upper at dimension " + std::to_string(i));
}

bool is_better(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidFitness("non-finite fitness in comparison");
    return a < b;
}

Vector clamp(std::span<const double> v, const Bounds& bounds) {
    if (v.size() != bounds.dim())
        throw std::invalid_argument("clamp: vector has " + std::to_string(v.size()) + " components, bounds have " +
                                    std::to_string(bounds.dim()));
    Vector out(v.begin(), v.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], bounds.lower[i], bounds.upper[i]);
    return out;
}

double euclidean(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("euclidean: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

EvaluationLedger::EvaluationLedger(std::int64_t budget_limit) : limit_(budget_limit) {
    if (budget_limit < 0) throw std::invalid_argument("ledger: negative budget");
    curve_.reserve(static_cast<std::size_t>(std::min<std::int64_t>(budget_limit, 1 << 16)));
}

void EvaluationLedger::record(double fitness) {
    if (used_ >= limit_) throw BudgetExhausted("evaluation budget of " + std::to_string(limit_) + " exhausted");
    if (!std::isfinite(fitness)) throw InvalidFitness("non-finite fitness recorded");
    ++used_;
    best_ = std::min(best_, fitness);
    curve_.push_back({used_, fitness, best_});
}

}  // namespace sade
