// Shared helpers for the unit tests: seeded generators and small numeric utilities.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace relax::test {

// Every property test draws from its own fixed seed so failures reproduce exactly.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::uint64_t bits(unsigned n) { return std::uniform_int_distribution<std::uint64_t>(0, (std::uint64_t{1} << n) - 1)(rng_); }

    // Sorted spectrum with a unique ground level at 0.
    std::vector<double> spectrum(std::size_t size) {
        std::vector<double> e{0.0};
        double last = uniform(0.1, 2.0);
        e.push_back(last);
        while (e.size() < size) {
            last += uniform(0.0, 1.0);
            e.push_back(last);
        }
        return e;
    }

private:
    std::mt19937_64 rng_;
};

inline double rel_diff(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline double binomial(unsigned n, unsigned k) {
    double r = 1.0;
    for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

} // namespace relax::test
