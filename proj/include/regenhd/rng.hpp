#pragma once

#include <cmath>
#include <cstdint>

namespace regenhd {

// Deterministic RNG used everywhere in this project. We deliberately avoid
// <random> distributions: their output is not pinned across standard library
// implementations, and reproducibility across toolchains is a hard
// requirement here. xoshiro256++ for the raw stream, splitmix64 for seeding
// and substream derivation, Box-Muller for gaussians. Same seed, same
// platform-independent sequence.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Collapses (root seed, stream id) into a fresh seed. Streams derived from
// the same root with different ids are statistically independent.
inline std::uint64_t derive_stream_seed(std::uint64_t root, std::uint64_t stream) {
    std::uint64_t s = root;
    std::uint64_t a = splitmix64_next(s);
    s ^= stream * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL;
    std::uint64_t b = splitmix64_next(s);
    return a ^ (b + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    // Independent generator for substream `stream` of `root`.
    static Rng substream(std::uint64_t root, std::uint64_t stream) {
        return Rng(derive_stream_seed(root, stream));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Standard normal via Box-Muller; second value of each pair is cached.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so log() is finite.
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace regenhd
