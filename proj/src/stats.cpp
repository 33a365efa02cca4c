#include "sade/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sade {

void validate_matrix(const ResultMatrix& m) {
    if (m.size() < 2) throw std::invalid_argument("result matrix needs at least 2 rows");
    const auto k = m.front().size();
    if (k < 2) throw std::invalid_argument("result matrix needs at least 2 columns");
    for (const auto& row : m) {
        if (row.size() != k) throw std::invalid_argument("result matrix rows differ in length");
        for (double v : row)
            if (std::isnan(v)) throw std::invalid_argument("result matrix has a missing entry");
    }
}

std::vector<double> rank_row(std::span<const double> row) {
    std::vector<std::size_t> order(row.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
    std::vector<double> ranks(row.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && row[order[j + 1]] == row[order[i]]) ++j;
        const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
        i = j + 1;
    }
    return ranks;
}

std::vector<double> average_ranking(const ResultMatrix& m) {
    validate_matrix(m);
    std::vector<double> mean(m.front().size(), 0.0);
    for (const auto& row : m) {
        const auto r = rank_row(row);
        for (std::size_t j = 0; j < r.size(); ++j) mean[j] += r[j];
    }
    for (auto& v : mean) v /= static_cast<double>(m.size());
    return mean;
}

TestResult friedman_test(const ResultMatrix& m) {
    const auto avg = average_ranking(m);
    const double n = static_cast<double>(m.size());
    const double k = static_cast<double>(avg.size());
    double sum_sq = 0.0;
    for (double r : avg) sum_sq += r * r;
    double stat = 12.0 * n / (k * (k + 1.0)) * sum_sq - 3.0 * n * (k + 1.0);
    if (std::abs(stat) < 1e-12) stat = 0.0;
    TestResult out;
    out.statistic = stat;
    out.p_value = stat <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(boost::math::chi_squared(k - 1.0), stat));
    return out;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: samples differ in length");
    std::vector<double> diff;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (std::isnan(d)) throw std::invalid_argument("wilcoxon: NaN difference");
        if (d != 0.0) diff.push_back(d);
    }
    WilcoxonResult r;
    r.n = diff.size();
    if (diff.empty()) return r;  // identical samples
    if (diff.size() < 5)
        throw std::invalid_argument("wilcoxon: need at least 5 non-zero differences, got " +
                                    std::to_string(diff.size()));

    std::vector<double> mags(diff.size());
    for (std::size_t i = 0; i < diff.size(); ++i) mags[i] = std::abs(diff[i]);
    const auto ranks = rank_row(mags);
    for (std::size_t i = 0; i < diff.size(); ++i) (diff[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];
    r.w = std::min(r.w_plus, r.w_minus);
    const std::size_t n = diff.size();

    if (n <= kWilcoxonExactLimit) {
        // Null distribution of the positive rank sum over all 2^n sign patterns; ranks are
        // doubled so mid-ranks stay integral.
        r.exact = true;
        std::vector<long> doubled(n);
        long total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = std::lround(2.0 * ranks[i]);
            total += doubled[i];
        }
        std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
        count[0] = 1.0;
        for (long v : doubled)
            for (long s = total; s >= v; --s) count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - v)];
        const long observed = std::lround(2.0 * r.w);
        double tail = 0.0;
        for (long s = 0; s <= observed; ++s) tail += count[static_cast<std::size_t>(s)];
        r.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(n)));
        return r;
    }

    const double dn = static_cast<double>(n);
    const double mean = dn * (dn + 1.0) / 4.0;
    double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0;
    // tie correction
    auto sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        var -= (t * t * t - t) / 48.0;
        i = j + 1;
    }
    const double z = (std::abs(r.w - mean) - 0.5) / std::sqrt(var);
    const boost::math::normal normal;
    r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(normal, std::max(z, 0.0))));
    return r;
}

std::vector<double> holm_correction(std::span<const double> p_values) {
    const std::size_t m = p_values.size();
    for (double p : p_values)
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("holm: p-value outside [0, 1]");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::vector<double> adjusted(m);
    double running = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double v = std::min(1.0, static_cast<double>(m - j) * p_values[order[j]]);
        running = std::max(running, v);
        adjusted[order[j]] = running;
    }
    return adjusted;
}

}  // namespace sade
