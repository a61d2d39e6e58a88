#pragma once

#include <cstdint>

namespace snse {

// splitmix64 finalizer; the whole generator is counter based so that any
// (seed, counter...) tuple can be evaluated independently of draw order.
inline std::uint64_t sm64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return sm64(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
}

// Uniform in (0,1]; never returns 0 so log() is safe.
inline double u64_to_unit_open(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 1.0) * (1.0 / 9007199254740993.0);
}

// Uniform in [0,1).
inline double u64_to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * (1.0 / 9007199254740992.0);
}

// Standard normal keyed by (seed, a, b); Box-Muller, cosine branch.
double gaussian(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

// Pair of independent standard normals for the same key (both Box-Muller
// branches), used where complex Gaussians are needed.
void gaussian_pair(std::uint64_t seed, std::uint64_t a, std::uint64_t b, double& g1, double& g2);

// Seed for path `index` within an ensemble started from `base_seed`.
inline std::uint64_t path_seed(std::uint64_t base_seed, int index) {
    return hash_combine(base_seed, 0x7061746855ULL + static_cast<std::uint64_t>(index));
}

}  // namespace snse
