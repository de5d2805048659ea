#pragma once

#include <cstdint>
#include <random>

namespace dtc {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Top 53 bits mapped to [0, 1).
constexpr double to_unit_interval(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Seed of substream `stream` derived from a user seed.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
}

/// mt19937_64 with a portable uniform draw. std::uniform_real_distribution
/// is implementation-defined, so draws are converted by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : engine_(substream_seed(seed, stream)) {}

    double uniform() { return to_unit_interval(engine_()); }
    bool bernoulli(double p) { return uniform() < p; }
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace dtc
