#include "sade/strategies.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace sade {

void StrategyFlags::validate() const {
    if (!(p_base > 0.0 && p_base < 1.0)) throw std::invalid_argument("p_base must lie in (0, 1)");
}

std::string StrategyFlags::label() const {
    std::string out;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += '+';
        out += name;
    };
    add(use_prob, "prob");
    add(use_qual, "qual");
    add(use_diver, "diver");
    return out.empty() ? "default" : out;
}

StrategyFlags StrategyFlags::parse(std::string_view text) {
    StrategyFlags f;
    if (text.empty() || text == "default") return f;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find('+', start), text.size());
        const auto part = text.substr(start, end - start);
        if (part == "prob")
            f.use_prob = true;
        else if (part == "qual")
            f.use_qual = true;
        else if (part == "diver")
            f.use_diver = true;
        else
            throw std::invalid_argument("unknown strategy '" + std::string(part) + "'");
        start = end + 1;
    }
    return f;
}

bool default_accept_surface(double q_hat_challenger, double q_current) { return q_hat_challenger < q_current; }

bool prob_accept(RandomStream& rng, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("prob_accept: p outside [0, 1]");
    return rng.bernoulli(p);
}

double quality_distance_prob(double d, double d_bar, std::int64_t d_count, double p_base) {
    if (d < 0 || d_bar < 0) throw std::invalid_argument("quality_distance_prob: negative distance");
    if (d == 0.0) return 1.0;
    if (d_count == 0 || d_bar == 0.0) return p_base;
    return std::pow(p_base, d / d_bar);
}

double diversity_distance(std::span<const double> x, std::span<const Vector> evaluated) {
    if (evaluated.empty()) throw std::invalid_argument("diversity_distance: empty evaluated set");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : evaluated) best = std::min(best, euclidean(s, x));
    return best;
}

double diversity_prob(double v, double v_bar, std::int64_t v_count, double p_base) {
    if (v < 0 || v_bar < 0) throw std::invalid_argument("diversity_prob: negative distance");
    if (v == 0.0) return 0.0;
    if (v_count == 0 || v_bar == 0.0) return p_base;
    return 1.0 - std::pow(1.0 - p_base, v / v_bar);
}

bool combined_accept(bool surrogate_verdict, const StrategyFlags& flags, const RunningMeans& means,
                     const StrategyInputs& inputs, RandomStream& rng) {
    bool accept = surrogate_verdict;
    if (flags.use_prob) accept = prob_accept(rng, flags.p_base) || accept;
    if (flags.use_qual) {
        if (!inputs.quality_distance) throw std::invalid_argument("combined_accept: quality distance missing");
        accept = prob_accept(rng, quality_distance_prob(*inputs.quality_distance, means.d_bar, means.d_count,
                                                        flags.p_base)) ||
                 accept;
    }
    if (flags.use_diver) {
        if (!inputs.diversity_distance) throw std::invalid_argument("combined_accept: diversity distance missing");
        accept = prob_accept(rng, diversity_prob(*inputs.diversity_distance, means.v_bar, means.v_count,
                                                 flags.p_base)) ||
                 accept;
    }
    return accept;
}

RunningMeans update_means(RunningMeans means, std::optional<double> pair_distance, std::optional<double> nn_distance) {
    if (pair_distance) {
        if (*pair_distance < 0) throw std::invalid_argument("update_means: negative pair distance");
        ++means.d_count;
        means.d_bar += (*pair_distance - means.d_bar) / static_cast<double>(means.d_count);
    }
    if (nn_distance) {
        if (*nn_distance < 0) throw std::invalid_argument("update_means: negative neighbour distance");
        ++means.v_count;
        means.v_bar += (*nn_distance - means.v_bar) / static_cast<double>(means.v_count);
    }
    return means;
}

}  // namespace sade
