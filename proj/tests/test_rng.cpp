#include <doctest.h>

#include <cmath>
#include <initializer_list>

#include "evcount/rng.hpp"

using evcount::Rng;

TEST_CASE("seeded sequences are reproducible") {
    Rng a(42), b(42), c(43);
    bool all_equal = true;
    bool any_differs = false;
    for (int i = 0; i < 1000; ++i) {
        const auto va = a.next_u64();
        all_equal &= va == b.next_u64();
        any_differs |= va != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_differs);
}

TEST_CASE("uniform stays in range") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 10000; ++i) {
        const auto v = rng.uniform_int(-3, 9);
        CHECK(v >= -3);
        CHECK(v <= 9);
    }
}

TEST_CASE("poisson matches its mean, small and chunked regimes") {
    Rng rng(11);
    for (double mean : {0.02, 3.0, 92.0, 400.0}) {
        const int trials = 20000;
        double sum = 0.0;
        for (int i = 0; i < trials; ++i)
            sum += double(rng.poisson(mean));
        const double sample_mean = sum / trials;
        // stddev of the sample mean is sqrt(mean/trials); allow 6 sigma
        const double tol = 6.0 * std::sqrt(mean / trials) + 1e-9;
        CHECK(std::abs(sample_mean - mean) < tol);
    }
    CHECK(rng.poisson(0.0) == 0);
}

TEST_CASE("exponential inter-arrival has the right scale") {
    Rng rng(13);
    const double rate = 4.0;
    double sum = 0.0;
    const int trials = 50000;
    for (int i = 0; i < trials; ++i)
        sum += rng.exponential(rate);
    CHECK(std::abs(sum / trials - 1.0 / rate) < 0.01);
}
