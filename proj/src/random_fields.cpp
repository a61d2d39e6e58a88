#include "snse/random_fields.hpp"

#include <cmath>

#include "snse/norms.hpp"
#include "snse/operators.hpp"
#include "snse/rng.hpp"

namespace snse {

namespace {

double profile_weight(const RandomFieldParams& p, double kabs) {
    switch (p.profile) {
        case SpectrumProfile::exp_decay:
            return std::exp(-p.decay * kabs);
        case SpectrumProfile::white_band:
            return 1.0;
        case SpectrumProfile::power_law:
            return std::pow(1.0 + kabs * kabs, -0.5 * p.decay);
    }
    return 0.0;
}

// Canonical representative of a +/-n pair: the first nonzero frequency entry
// is positive. Draws happen only at canonical modes; mirrors get conjugates.
bool canonical(const std::array<int, 3>& k) {
    for (int a = 0; a < 3; ++a) {
        if (k[a] > 0) return true;
        if (k[a] < 0) return false;
    }
    return false;  // origin; no draw
}

}  // namespace

SpectralField random_divfree_field(Workspace& ws, std::uint64_t seed,
                                   const RandomFieldParams& params) {
    const Grid& g = ws.grid();
    SpectralField f(g, g.dim);
    const double rmax = params.band_radius > 0.0 ? params.band_radius
                                                 : std::sqrt(3.0) * g.max_mode() + 1.0;
    for (std::int64_t m = 0; m < g.points(); ++m) {
        if (on_nyquist(g, m)) continue;
        auto k = wavevector(g, m);
        if (!canonical(k)) continue;
        const double kabs = std::sqrt(wavevector_sq(k));
        if (kabs > rmax) continue;
        bool inband = true;
        for (int a = 0; a < g.dim; ++a)
            if (std::abs(k[a]) > g.max_mode()) inband = false;
        if (!inband) continue;

        const double w = params.amplitude * profile_weight(params, kabs);
        std::array<int, 3> neg{-k[0], -k[1], -k[2]};
        const std::int64_t mn = flat_index(g, neg);
        for (int c = 0; c < g.dim; ++c) {
            double g1, g2;
            gaussian_pair(seed, static_cast<std::uint64_t>(m),
                          0x636f6d70ULL + static_cast<std::uint64_t>(c), g1, g2);
            const cplx z = w * cplx{g1, g2} * 0.70710678118654752440;
            f.at(c, m) = z;
            f.at(c, mn) = std::conj(z);
        }
    }
    leray_project(f);
    if (params.target_l3 > 0.0) {
        const double l3 = lebesgue_norm(ws, f, 3.0);
        if (l3 > 0.0) f *= params.target_l3 / l3;
    }
    return f;
}

SpectralField taylor_green(const Grid& g) {
    // u = (sin x cos y, -cos x sin y):
    //   u1 = -1/4 ( e^{i(x+y)} + e^{i(x-y)} - e^{-i(x-y)} - e^{-i(x+y)} ) ... assembled below
    SpectralField f(g, g.dim);
    const cplx i{0.0, 1.0};
    // sin x cos y = ( e^{ix} - e^{-ix} ) ( e^{iy} + e^{-iy} ) / (4i)
    const cplx q = 1.0 / (4.0 * i);
    f.at(0, {1, 1, 0}) += q;
    f.at(0, {1, -1, 0}) += q;
    f.at(0, {-1, 1, 0}) -= q;
    f.at(0, {-1, -1, 0}) -= q;
    // -cos x sin y = -( e^{ix} + e^{-ix} ) ( e^{iy} - e^{-iy} ) / (4i)
    f.at(1, {1, 1, 0}) -= q;
    f.at(1, {-1, 1, 0}) -= q;
    f.at(1, {1, -1, 0}) += q;
    f.at(1, {-1, -1, 0}) += q;
    return f;
}

SpectralField single_mode_field(const Grid& g, const std::array<int, 3>& freq, double amp) {
    SpectralField f(g, g.dim);
    // pick a unit vector e orthogonal to freq so the field is divergence-free
    std::array<double, 3> k{double(freq[0]), double(freq[1]), double(freq[2])};
    std::array<double, 3> e{-k[1], k[0], 0.0};
    double en = std::sqrt(e[0] * e[0] + e[1] * e[1]);
    if (en == 0.0) {
        e = {0.0, -k[2], k[1]};
        en = std::sqrt(e[1] * e[1] + e[2] * e[2]);
    }
    for (auto& x : e) x /= en;
    // amp * e * sin(k.x)
    const cplx q{0.0, -0.5 * amp};  // sin(k.x) = (e^{ik.x}-e^{-ik.x})/(2i)
    std::array<int, 3> neg{-freq[0], -freq[1], -freq[2]};
    for (int c = 0; c < g.dim; ++c) {
        f.at(c, freq) += q * e[c];
        f.at(c, neg) += std::conj(q) * e[c];
    }
    return f;
}

}  // namespace snse
