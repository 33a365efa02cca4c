#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sade {

/// rows = problems, columns = configurations.
using ResultMatrix = std::vector<std::vector<double>>;

void validate_matrix(const ResultMatrix& m);

/// Ascending mid-ranks of one row (1 = lowest).
std::vector<double> rank_row(std::span<const double> row);

/// Mean rank per column.
std::vector<double> average_ranking(const ResultMatrix& m);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Friedman chi-square on the column ranks, with a chi-square(k - 1) tail.
TestResult friedman_test(const ResultMatrix& m);

struct WilcoxonResult {
    double w = 0.0;        // smaller of the positive and negative rank sums
    double w_plus = 0.0;   // rank sum of positive differences a - b
    double w_minus = 0.0;  // rank sum of negative differences
    double p_value = 1.0;  // two-sided
    std::size_t n = 0;     // non-zero differences
    bool exact = false;
};

inline constexpr std::size_t kWilcoxonExactLimit = 25;

/// Signed-rank test on a - b. Zero differences are dropped; exact null distribution up to
/// 25 non-zero differences, normal approximation with continuity and tie correction above.
/// Throws when fewer than 5 non-zero differences remain (all-zero input gives p = 1).
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Holm step-down adjustment, returned in input order.
std::vector<double> holm_correction(std::span<const double> p_values);

}  // namespace sade
