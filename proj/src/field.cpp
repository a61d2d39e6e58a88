#include "snse/field.hpp"

#include <cmath>

namespace snse {

void enforce_band(SpectralField& f) {
    const Grid& g = f.grid;
    for (int c = 0; c < f.ncomp; ++c) {
        auto comp = f.component(c);
        comp[0] = {0.0, 0.0};
        for (std::int64_t m = 0; m < g.points(); ++m)
            if (on_nyquist(g, m)) comp[m] = {0.0, 0.0};
    }
}

double hermitian_asymmetry(const SpectralField& f) {
    const Grid& g = f.grid;
    double worst = 0.0;
    for (int c = 0; c < f.ncomp; ++c) {
        auto comp = f.component(c);
        for (std::int64_t m = 0; m < g.points(); ++m) {
            if (on_nyquist(g, m)) continue;
            auto k = wavevector(g, m);
            std::array<int, 3> neg{-k[0], -k[1], -k[2]};
            cplx d = comp[flat_index(g, neg)] - std::conj(comp[m]);
            worst = std::max(worst, std::abs(d));
        }
    }
    return worst;
}

void hermitian_symmetrize(SpectralField& f) {
    const Grid& g = f.grid;
    for (int c = 0; c < f.ncomp; ++c) {
        auto comp = f.component(c);
        for (std::int64_t m = 0; m < g.points(); ++m) {
            if (on_nyquist(g, m)) continue;
            auto k = wavevector(g, m);
            std::array<int, 3> neg{-k[0], -k[1], -k[2]};
            std::int64_t mn = flat_index(g, neg);
            if (mn < m) continue;  // each pair handled once; mn == m is the origin
            cplx avg = 0.5 * (comp[m] + std::conj(comp[mn]));
            comp[m] = avg;
            comp[mn] = std::conj(avg);
        }
        comp[0] = cplx{comp[0].real(), 0.0};
    }
}

double max_divergence_rel(const SpectralField& f) {
    const Grid& g = f.grid;
    double div_max = 0.0;
    double amp_max = 0.0;
    for (std::int64_t m = 0; m < g.points(); ++m) {
        auto k = wavevector(g, m);
        cplx div{0.0, 0.0};
        for (int c = 0; c < f.ncomp; ++c) {
            div += double(k[c]) * f.at(c, m);
            amp_max = std::max(amp_max, std::abs(f.at(c, m)));
        }
        div_max = std::max(div_max, std::abs(div));
    }
    return div_max / std::max(1.0, amp_max);
}

double max_coeff_abs(const SpectralField& f) {
    double worst = 0.0;
    for (const auto& c : f.coeffs) worst = std::max(worst, std::abs(c));
    return worst;
}

double l2_inner(const SpectralField& a, const SpectralField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        s += a.coeffs[i].real() * b.coeffs[i].real() + a.coeffs[i].imag() * b.coeffs[i].imag();
    return s * a.grid.volume();
}

}  // namespace snse
