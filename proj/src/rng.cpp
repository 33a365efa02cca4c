#include "sade/rng.hpp"

#include <stdexcept>

namespace sade {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : engine_(seed) {}

double RandomStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t RandomStream::index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("RandomStream::index: empty range");
    // rejection sampling, unbiased for any n
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t r;
    do {
        r = engine_();
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RandomStream make_stream(std::uint64_t base_seed, std::uint64_t run_index, std::string_view name) {
    std::uint64_t s = splitmix64(base_seed);
    s = splitmix64(s ^ run_index);
    s = splitmix64(s ^ fnv1a(name));
    return RandomStream(s);
}

RngStreams RngStreams::for_run(std::uint64_t base_seed, std::uint64_t run_index) {
    return {make_stream(base_seed, run_index, "population_init"), make_stream(base_seed, run_index, "de_operators"),
            make_stream(base_seed, run_index, "strategy_bernoulli"),
            make_stream(base_seed, run_index, "learner_training")};
}

}  // namespace sade
