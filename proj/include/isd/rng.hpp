#pragma once

#include <cstdint>

// Counter-based uniform generation: every draw is a pure function of
// (seed, index), so disjoint index ranges can be filled concurrently
// and the stream is reproducible regardless of execution order.

namespace isd::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index * 0xd1342543de82ef95ULL + 1));
}

// Uniform in the open interval (0,1); never returns 0 or 1, so it is
// safe to feed through inverse CDFs.
inline double uniform01(std::uint64_t seed, std::uint64_t index) {
    return (static_cast<double>(mix(seed, index) >> 11) + 0.5) * 0x1p-53;
}

// Stable per-replicate seed for Monte Carlo runs.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t n, std::uint64_t replicate) {
    return splitmix64(splitmix64(master ^ 0x517cc1b727220a95ULL) ^ splitmix64(n) ^ mix(n, replicate));
}

} // namespace isd::rng
