#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace sade {

/// Deterministic random stream. Distributions are implemented here rather than
/// taken from <random> so that draws are identical across standard libraries.
class RandomStream {
public:
    RandomStream() = default;
    explicit RandomStream(std::uint64_t seed);

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n);
    bool bernoulli(double p) { return uniform() < p; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::mt19937_64 engine_;
};

std::uint64_t fnv1a(std::string_view text);

/// Stream derived from (base_seed, run_index, name); independent of any other stream.
RandomStream make_stream(std::uint64_t base_seed, std::uint64_t run_index, std::string_view name);

/// The named streams used by one optimisation run.
struct RngStreams {
    RandomStream population_init;
    RandomStream de_operators;
    RandomStream strategy_bernoulli;
    RandomStream learner_training;

    static RngStreams for_run(std::uint64_t base_seed, std::uint64_t run_index);
};

}  // namespace sade
