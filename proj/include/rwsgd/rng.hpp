// rng.hpp — seeded random streams.
//
// Every experiment is driven by a single 64-bit master seed. Independent
// named streams ("graph", "data", "init", "walk", "privacy") are derived
// from it with SplitMix64 so that two variants run under the same seed
// share every stream except the ones where the algorithms differ.
#pragma once
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace rwsgd {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a, used only to turn a stream name into a salt.
inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) noexcept {
    return splitmix64(master ^ splitmix64(fnv1a(stream)));
}

// Thin wrapper over mt19937_64 with the few draws the library needs.
// Uniform and normal draws are implemented here rather than through
// <random> distributions so that streams are bit-identical across
// standard library implementations.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t master, std::string_view stream) : engine_(derive_seed(master, stream)) {}

    static constexpr result_type min() noexcept { return std::mt19937_64::min(); }
    static constexpr result_type max() noexcept { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1); safe as a log() argument.
    double uniform_open() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    // Uniform integer in [0, n) by rejection (no modulo bias).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = max() - (max() % n + 1) % n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r > limit);
        return r % n;
    }

    bool coin() { return (engine_() >> 63) != 0; }

    // Standard normal via the Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rwsgd
