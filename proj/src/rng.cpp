#include "snse/rng.hpp"

#include <cmath>

namespace snse {

namespace {
constexpr double kTwoPiRng = 6.283185307179586476925286766559;

inline std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = sm64(seed);
    h = hash_combine(h, a);
    h = hash_combine(h, b);
    return h;
}
}  // namespace

void gaussian_pair(std::uint64_t seed, std::uint64_t a, std::uint64_t b, double& g1, double& g2) {
    const std::uint64_t h = key(seed, a, b);
    const double u1 = u64_to_unit_open(sm64(h));
    const double u2 = u64_to_unit(sm64(h ^ 0xD1B54A32D192ED03ULL));
    const double r = std::sqrt(-2.0 * std::log(u1));
    g1 = r * std::cos(kTwoPiRng * u2);
    g2 = r * std::sin(kTwoPiRng * u2);
}

double gaussian(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    double g1, g2;
    gaussian_pair(seed, a, b, g1, g2);
    return g1;
}

}  // namespace snse
