#pragma once
// Reproducible stream splitting: each trajectory (and the environment
// generator) gets its own mt19937_64 seeded through a splitmix64 hop from
// (master seed, stream id). Streams are therefore independent of scheduling
// order and thread count.

#include <cstdint>
#include <random>

namespace tdrw {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// stream ids: walks use their batch index; reserved offsets below keep
// environment randomness disjoint from walk randomness for any batch size.
constexpr uint64_t kEnvStream = 0x8000000000000000ull;

inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
    uint64_t s = master;
    (void)splitmix64(s);  // decorrelate masters that differ in low bits
    s ^= 0xD1B54A32D192ED03ull * (stream + 1);
    uint64_t a = splitmix64(s);
    uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

inline std::mt19937_64 make_rng(uint64_t master, uint64_t stream) {
    return std::mt19937_64(derive_seed(master, stream));
}

}  // namespace tdrw
