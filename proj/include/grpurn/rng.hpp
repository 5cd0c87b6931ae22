#pragma once

#include <cstdint>
#include <span>

#include "grpurn/errors.hpp"

namespace grpurn {

// SplitMix64 step, used both as a seed expander and as the replica-stream hash.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream seed for replica r. XOR with a hashed index keeps streams decorrelated
// while remaining reproducible across platforms.
inline std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t replica_index) {
    return base_seed ^ splitmix64(replica_index);
}

// xoshiro256++ with splitmix64 seed expansion. Self-contained so that sequences
// are identical on every platform (std::uniform_real_distribution is not).
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
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

    // Uniform on [0, 1) with 53 random bits.
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4];
};

// Cumulative-sum inversion. A draw u that lands exactly on a bin boundary is
// assigned to the lower bin.
inline int categorical_from_uniform(std::span<const double> probs, double u) {
    if (probs.empty()) throw DomainError("categorical draw from empty probability vector");
    double cum = 0.0;
    const int k = static_cast<int>(probs.size());
    for (int i = 0; i < k - 1; ++i) {
        cum += probs[i];
        if (u <= cum) return i;
    }
    return k - 1;
}

inline int sample_categorical(RandomStream& stream, std::span<const double> probs) {
    return categorical_from_uniform(probs, stream.next_uniform());
}

}  // namespace grpurn
