#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace raschmix {

// SplitMix64 finalizer; used for seed derivation only.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed splitting rule: two SplitMix64 rounds keyed by (stream, substream).
// Every parallel unit of work (EM start, simulation replication) gets its
// own derived seed, so results do not depend on scheduling or ordering.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t substream = 0) {
    std::uint64_t s = splitmix64(master ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
    return splitmix64(s ^ (0xC2B2AE3D27D4EB4FULL * (substream + 1)));
}

// xoshiro256++ generator with fully pinned output transforms.  All draws
// (uniform, normal, dirichlet) are defined here in terms of raw 64-bit
// outputs, so a given seed reproduces the same stream on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s = splitmix64(s);
            word = s;
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform on [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1); safe as a log argument
    double uniform_pos() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; consumes two uniforms per pair
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    // symmetric Dirichlet(1): normalized exponentials
    std::vector<double> dirichlet_uniform(int k) {
        std::vector<double> p(static_cast<std::size_t>(k));
        double total = 0.0;
        for (auto& v : p) {
            v = -std::log(uniform_pos());
            total += v;
        }
        for (auto& v : p) v /= total;
        return p;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace raschmix
