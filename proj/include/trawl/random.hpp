#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace trawl {

/// Seeded 64-bit Mersenne Twister stream. Independent streams for parallel
/// paths come from (seed, stream index) fed through std::seed_seq, so path i
/// of a run is reproducible regardless of which worker draws it.
class RandomStream
{
  public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          0x74726177u};
        engine_.seed(seq);
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Exponential with the given rate.
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  private:
    std::mt19937_64 engine_;
};

} // namespace trawl
