#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sade/core.hpp"
#include "sade/rng.hpp"

namespace sade {

struct StrategyFlags {
    bool use_prob = false;
    bool use_qual = false;
    bool use_diver = false;
    double p_base = 0.2;

    void validate() const;
    bool any() const { return use_prob || use_qual || use_diver; }
    /// "default", "prob", "qual+diver", ...
    std::string label() const;
    static StrategyFlags parse(std::string_view text);
};

struct RunningMeans {
    double d_bar = 0.0;
    std::int64_t d_count = 0;
    double v_bar = 0.0;
    std::int64_t v_count = 0;
};

/// q̂(x') < q(x).
bool default_accept_surface(double q_hat_challenger, double q_current);

/// Bernoulli(p) draw.
bool prob_accept(RandomStream& rng, double p);

/// 0.2^(d / d̄): 1 at d = 0, p_base at d = d̄. Falls back to p_base without a usable mean.
double quality_distance_prob(double d, double d_bar, std::int64_t d_count = 1, double p_base = 0.2);

/// Distance from x to the closest point of the set.
double diversity_distance(std::span<const double> x, std::span<const Vector> evaluated);

/// 1 - 0.8^(v / v̄): 0 at v = 0, p_base at v = v̄. Falls back to p_base without a usable mean.
double diversity_prob(double v, double v_bar, std::int64_t v_count = 1, double p_base = 0.2);

/// Quantities the relaxations need for one challenger; unset when the criterion is off.
struct StrategyInputs {
    std::optional<double> quality_distance;    // d
    std::optional<double> diversity_distance;  // v
};

/// Surrogate verdict OR'ed with one independent draw per enabled relaxation.
/// Draws happen for every enabled relaxation even when the verdict is already true,
/// so the stream position does not depend on the surrogate.
bool combined_accept(bool surrogate_verdict, const StrategyFlags& flags, const RunningMeans& means,
                     const StrategyInputs& inputs, RandomStream& rng);

RunningMeans update_means(RunningMeans means, std::optional<double> pair_distance, std::optional<double> nn_distance);

}  // namespace sade
