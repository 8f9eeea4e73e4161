#pragma once

#include <cstdint>
#include <initializer_list>

// Counter-based random numbers built on the splitmix64 finalizer.
//
// Every draw in the project is a pure function of a key and a counter, so any
// value can be regenerated in isolation: environment site x is keyed by
// (seed, x), a walker's step n by (master_seed, replica, walker, n). Streams
// never share state, which is what makes window extension, replays and
// parallel replicas exactly reproducible.

namespace rwre::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

// Fold one component into a key. Chained folds give distinct keys for
// distinct (component...) paths.
constexpr std::uint64_t fold(std::uint64_t key, std::uint64_t v) {
    return mix64(key ^ (v + kGolden + (key << 6) + (key >> 2)));
}

constexpr std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t k = mix64(seed + kGolden);
    for (std::uint64_t v : path) k = fold(k, v);
    return k;
}

// splitmix64 sequence for a given key, random-accessible at any counter.
constexpr std::uint64_t word_at(std::uint64_t key, std::uint64_t counter) {
    return mix64(key + kGolden * (counter + 1));
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

constexpr double unit_at(std::uint64_t key, std::uint64_t counter) {
    return to_unit(word_at(key, counter));
}

// A stream = a key plus the path it was derived from; counters are supplied
// by the caller (walkers use the time coordinate).
struct Stream {
    std::uint64_t key = 0;

    double unit(std::uint64_t counter) const { return unit_at(key, counter); }
    std::uint64_t word(std::uint64_t counter) const { return word_at(key, counter); }
};

// Salts keeping unrelated draw families apart even under equal seeds.
inline constexpr std::uint64_t kSaltEnvironmentSite = 0x5e3a1c9d2b7f4681ull;
inline constexpr std::uint64_t kSaltWalker = 0x9d2c5680f0b3a1full;
inline constexpr std::uint64_t kSaltEnvironmentOfExperiment = 0x2545f4914f6cdd1dull;
inline constexpr std::uint64_t kSaltBootstrap = 0x6c62272e07bb0142ull;

inline Stream walker_stream(std::uint64_t master_seed, std::uint64_t replica, std::uint64_t walker) {
    return Stream{derive_key(master_seed, {kSaltWalker, replica, walker})};
}

inline std::uint64_t environment_seed(std::uint64_t master_seed, std::uint64_t env_index) {
    return derive_key(master_seed, {kSaltEnvironmentOfExperiment, env_index});
}

} // namespace rwre::rng
