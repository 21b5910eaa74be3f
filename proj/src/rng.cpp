#include "evcount/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace evcount {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
}

} // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_)
        word = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi)
        throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = std::uint64_t(hi) - std::uint64_t(lo) + 1;
    if (span == 0) // full 64-bit range
        return std::int64_t(next_u64());
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return std::int64_t(std::uint64_t(lo) + v % span);
}

bool Rng::bernoulli(double p) {
    if (p <= 0.0)
        return false;
    if (p >= 1.0)
        return true;
    return uniform() < p;
}

double Rng::exponential(double rate) {
    if (rate <= 0.0)
        throw std::invalid_argument("exponential: rate must be positive");
    double u;
    do {
        u = uniform();
    } while (u <= 0.0);
    return -std::log(u) / rate;
}

std::uint64_t Rng::poisson(double mean) {
    if (mean < 0.0)
        throw std::invalid_argument("poisson: mean must be non-negative");
    std::uint64_t total = 0;
    // Knuth's method is exact but its e^-mean term underflows for large
    // means; Poisson(a+b) = Poisson(a)+Poisson(b) lets us draw in chunks.
    constexpr double kChunk = 64.0;
    while (mean > 0.0) {
        const double m = mean > kChunk ? kChunk : mean;
        mean -= m;
        const double threshold = std::exp(-m);
        std::uint64_t k = 0;
        double product = 1.0;
        for (;;) {
            product *= uniform();
            if (product <= threshold)
                break;
            ++k;
        }
        total += k;
    }
    return total;
}

} // namespace evcount
