#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace geodrop {

// SplitMix64: counter-based, trivially seedable, identical stream on every
// platform. All randomness in the toolkit flows through instances of this
// type; there is no global generator. Sub-tasks (trials, masks, members)
// derive their own seed via mix() so results do not depend on scheduling.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform double in [0,1), 53-bit resolution
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // standard normal via Box-Muller (cosine branch); consumes two draws
    double normal() {
        double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // uniform integer in [0,n) (Lemire reduction; negligible bias, fully
    // deterministic, no rejection loop)
    std::uint64_t below(std::uint64_t n) {
        return std::uint64_t((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

    // Deterministic seed derivation for sub-tasks: one SplitMix finalizer
    // over a combination of the base seed and up to two task indices.
    static std::uint64_t mix(std::uint64_t base, std::uint64_t a,
                             std::uint64_t b = 0) {
        std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (a + 1) +
                          0xC2B2AE3D27D4EB4Full * (b + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t state_;
};

} // namespace geodrop
