#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace selest {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

// Seeded stream over std::mt19937_64 with hand-rolled value mappings, so the
// produced sequences are identical on every platform (the std distributions
// are implementation-defined). Substreams derive deterministically from the
// parent seed plus a salt, letting independent pipeline stages (data,
// workload, subpopulations, sample) vary separately.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n) {
        return static_cast<std::size_t>(engine_() % static_cast<std::uint64_t>(n));
    }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 1.0 - uniform01(); // (0, 1], keeps log finite
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    RandomStream substream(std::uint64_t salt) const {
        return RandomStream(detail::splitmix64(seed_ ^ detail::splitmix64(salt)));
    }

    RandomStream substream(std::string_view name) const {
        return substream(detail::fnv1a(name));
    }

  private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

} // namespace selest
