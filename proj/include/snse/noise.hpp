#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "snse/field.hpp"
#include "snse/fourier.hpp"

namespace snse {

// Multiplicative noise operator sigma(t,u) acting on a truncated cylindrical
// Wiener process with `modes()` scalar components. The diagonal-spectral model
// maps the k-th direction to
//     sigma(t,u) e_k = a(t) * c_k * P( chi_k * u )
// where chi_k is a low-pass filter with the per-axis triangle (Fejer product)
// symbol  m_r(n) = prod_i max(0, 1 - |n_i|/r_k).  The physical kernel of m_r
// is nonnegative with mass 1, so  K = a_max * sqrt(sum_k c_k^2)  is a true
// 𝕃^p Lipschitz constant for the family acting on divergence-free fields.
// Linear in u, hence sigma(t,0) = 0; preserves mean-zero and divergence-free.
class NoiseModel {
public:
    enum class Kind { zero, diagonal_spectral };
    enum class Envelope { constant, cosine };  // a(t) = 1 or (1+cos t)/2

    static NoiseModel zero();
    static NoiseModel diagonal(std::vector<double> c, std::vector<double> radius,
                               Envelope env = Envelope::constant);
    // Default family: c_k = c0 * decay^{-k}, radius_k = radius0 + radius_step*k.
    static NoiseModel diagonal_family(int modes, double c0, double c_decay, double radius0,
                                      double radius_step, Envelope env = Envelope::constant);
    // Single column, c = 1, symbol identically 1 on the band: sigma(u)e_0 = u.
    static NoiseModel identity();

    Kind kind() const { return kind_; }
    int modes() const { return static_cast<int>(c_.size()); }
    double envelope(double t) const;
    double envelope_sup() const { return 1.0; }  // both envelopes have sup 1

    // Declared Lipschitz constant K with  ||sigma(t,u)-sigma(t,v)||_HS(L^p)
    // <= K ||u-v||_{L^p},  valid for p in {3,6} on divergence-free fields.
    double lipschitz() const;

    // Filter symbol of column k at wavevector n.
    double symbol(int k, const std::array<int, 3>& freq) const;

    // out = sigma(t,u) e_k.
    void column(double t, const SpectralField& u, int k, SpectralField& out) const;
    void columns(double t, const SpectralField& u, std::vector<SpectralField>& out) const;

    // accum += scale * sum_k sigma(t,u) e_k dW_k. Single pass over modes.
    void apply_increment(double t, const SpectralField& u, std::span<const double> dW,
                         double scale, SpectralField& accum) const;

    // accum += scale * sum_k [sigma(t,a)-sigma(t,b)] e_k dW_k  (level noise).
    void apply_increment_diff(double t, const SpectralField& a, const SpectralField& b,
                              std::span<const double> dW, double scale,
                              SpectralField& accum) const;

    // sum_k ||sigma(t,u) e_k||_{L^2}^2, the Ito isometry rate at u.
    double hs_l2_sq(double t, const SpectralField& u) const;

private:
    Kind kind_ = Kind::zero;
    Envelope env_ = Envelope::constant;
    std::vector<double> c_;
    std::vector<double> radius_;  // <=0 means symbol identically 1
};

// Empirical check of the Lipschitz axiom: samples `trials` pairs of
// divergence-free fields, returns max over pairs of
//   ||sigma(u)-sigma(v)||_{HS(L^p)} / (K ||u-v||_{L^p}).
// Must be <= 1 + tolerance for an honest K. Includes near-equality cases
// (single low modes) where the ratio approaches the symbol value.
struct LipschitzAudit {
    double worst_ratio = 0.0;
    double near_equality_ratio = 0.0;  // single-mode case, should approach 1 for identity-like columns
    int trials = 0;
};
LipschitzAudit lipschitz_audit(Workspace& ws, const NoiseModel& model, double p, int trials,
                               std::uint64_t seed);

// Wiener increments for one path: component k over step s is
// N(0, dt), realized as the sum of `substeps` micro increments so that
// coarse/fine discretizations of the same path are consistent. Counter-based:
// (seed, micro index, mode) determines every draw.
class WienerPath {
public:
    WienerPath(std::uint64_t seed, double dt, int n_steps, int modes, int substeps = 1);

    void increments(int step, std::span<double> dW) const;
    // W_k(t_s) for t_s = s*dt (sum of all increments before s).
    void cumulative(int step, std::span<double> W) const;

    double dt() const { return dt_; }
    int steps() const { return n_steps_; }
    int modes() const { return modes_; }
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    double dt_;
    int n_steps_;
    int modes_;
    int substeps_;
    double micro_sd_;
};

// Monte Carlo check of the Ito isometry / lowest BDG bound at a frozen state:
//   E | int_0^dt sigma(u) dW |_{L^2}^2  ==  dt * sum_k ||sigma(u)e_k||_{L^2}^2.
struct IsometryReport {
    double empirical = 0.0;
    double predicted = 0.0;
    double stderr_ = 0.0;
    double z = 0.0;  // (empirical - predicted) / stderr
    int samples = 0;
};
IsometryReport ito_isometry_check(const NoiseModel& model, const SpectralField& u, double dt,
                                  int samples, std::uint64_t seed);

}  // namespace snse
