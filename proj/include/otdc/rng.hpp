#pragma once
// Seeded deterministic sampling. mt19937_64 is fully specified by the
// standard and the uniform draw avoids std::uniform_real_distribution, whose
// output is implementation-defined, so identical seeds give identical
// streams on every platform.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace otdc {

class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform draw in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    // Inverse-CDF draw from an unnormalized non-negative weight vector.
    std::size_t sample_index(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("sample_index: zero total weight");
        double r = uniform01() * total;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            last_positive = i;
            r -= weights[i];
            if (r < 0.0) return i;
        }
        return last_positive; // guards against accumulated rounding
    }

  private:
    std::mt19937_64 gen_;
};

} // namespace otdc
