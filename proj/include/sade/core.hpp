#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sade {

/// A point in the D-dimensional search space.
using Vector = std::vector<double>;

/// Per-dimension box constraints.
struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    static Bounds uniform(std::size_t dim, double lo, double hi);

    std::size_t dim() const { return lower.size(); }
    bool contains(std::span<const double> x) const;
    double width(std::size_t i) const { return upper[i] - lower[i]; }
    void validate() const;
};

struct EvaluatedSolution {
    Vector x;
    double fitness = std::numeric_limits<double>::infinity();
    std::int64_t eval_index = 0;
};

class InvalidFitness : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class BudgetExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Strict "being better than" for minimisation. Throws InvalidFitness on non-finite input.
bool is_better(double a, double b);

/// Projects every component into its [lower, upper] interval.
Vector clamp(std::span<const double> v, const Bounds& bounds);

/// Euclidean distance; lengths must match.
double euclidean(std::span<const double> a, std::span<const double> b);

struct CurvePoint {
    std::int64_t eval_index = 0;  // 1-based count of true evaluations
    double fitness = 0.0;         // value returned by that evaluation
    double best = 0.0;            // best-so-far after it
};

/// Budget accounting for true quality-function calls.
class EvaluationLedger {
public:
    explicit EvaluationLedger(std::int64_t budget_limit);

    /// Records one true evaluation. Throws BudgetExhausted when the limit is already reached.
    void record(double fitness);

    std::int64_t budget_limit() const { return limit_; }
    std::int64_t used() const { return used_; }
    std::int64_t remaining() const { return limit_ - used_; }
    bool exhausted() const { return used_ >= limit_; }
    double best() const { return best_; }
    const std::vector<CurvePoint>& curve() const { return curve_; }

private:
    std::int64_t limit_;
    std::int64_t used_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
    std::vector<CurvePoint> curve_;
};

}  // namespace sade
