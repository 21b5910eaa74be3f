#pragma once

#include <cstdint>

namespace evcount {

/// xoshiro256** seeded through splitmix64. All distributions are hand-rolled
/// on top of next_u64 so seeded runs reproduce bit-identically across
/// standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    double uniform(double lo, double hi);

    /// Uniform integer in [lo, hi], inclusive. Rejection-sampled, unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    bool bernoulli(double p);

    /// Exponential inter-arrival time for the given rate (events per unit time).
    double exponential(double rate);

    /// Poisson draw; Knuth's product method, chunked so large means don't underflow.
    std::uint64_t poisson(double mean);

private:
    std::uint64_t state_[4];
};

} // namespace evcount
