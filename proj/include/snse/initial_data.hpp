#pragma once

#include <vector>

#include "snse/field.hpp"
#include "snse/fourier.hpp"
#include "snse/norms.hpp"

namespace snse {

// Norm pair steering the splitting: the critical norm measures smallness of
// the remainder, the subcritical one the size of the bulk.
enum class SplitNorm {
    L3,   // critical L^3, subcritical L^6
    H12,  // critical H^{1/2}, subcritical H^1
};

double critical_norm(Workspace& ws, const SpectralField& f, SplitNorm n);
double subcritical_norm(Workspace& ws, const SpectralField& f, SplitNorm n);
// Exponent turning the critical norm into the energy functional (3 resp. 2).
double critical_power(SplitNorm n);
double subcritical_power(SplitNorm n);

// Splitting of a divergence-free datum u0 into a smooth bulk w_bar0 (Euclidean
// low-pass at the minimal radius r such that the tail is small) and the
// remainder w0 = u0 - w_bar0 with critical norm <= epsilon0.
struct SplitResult {
    SpectralField w_bar0;
    SpectralField w0;
    int radius = 0;        // minimal shell radius achieving the tail target
    double w0_crit = 0.0;  // realized critical norm of w0
    double K0 = 0.0;       // subcritical norm of w_bar0
};

// Searches r = 0,1,...,max_radius for the smallest radius whose high-pass tail
// meets the epsilon0 target. max_radius < 0 means the dealias radius. Throws
// InfeasibleError when even the cap fails, reporting the best achievable tail
// and a resolution estimate extrapolated from the spectral decay of u0.
SplitResult split_initial_datum(Workspace& ws, const SpectralField& u0, double epsilon0,
                                int max_radius = -1, SplitNorm norm = SplitNorm::L3);

struct LevelCertificate {
    int level = 0;
    int radius = 0;      // level k occupies the shell r_{k-1} < |n| <= r_k
    double crit = 0.0;   // critical norm of v0^(k)
    double subcrit = 0.0;
    double crit_bound = 0.0;  // certified bound this level must satisfy
    bool ok = false;
};

// Dyadic decomposition of the small part: w0 = sum_{k=0..K} v0^(k) + residual
// (K = K_max, so K_max + 1 levels). Levels are disjoint Euclidean shells
// chosen greedily so that, in the critical norm,
//   ||v0^(0)|| <= 2 ||w0||,
//   ||v0^(k)|| <= ||w0|| / 4^k        (k >= 1),
//   ||residual|| <= ||w0|| / (3 * 4^K).
// Shell tails are budgeted at ||w0||/(5*4^k), which implies the above with
// margin. Reconstruction sum v0^(k) + residual == w0 holds exactly (the
// shells partition the band); once the band is exhausted the later levels are
// zero fields, which the bounds allow.
struct DecompositionResult {
    SpectralField u0;  // the decomposed datum, kept for reconstruction checks
    SpectralField w_bar0;
    std::vector<SpectralField> levels;
    SpectralField residual;
    std::vector<LevelCertificate> certificates;
    SplitNorm norm = SplitNorm::L3;
    double epsilon0 = 0.0;
    double K0 = 0.0;
    double w0_crit = 0.0;
    double residual_crit = 0.0;
    double residual_bound = 0.0;
    int split_radius = 0;
};

std::vector<SpectralField> dyadic_decompose(Workspace& ws, const SpectralField& w0, int K_max,
                                            SplitNorm norm = SplitNorm::L3,
                                            std::vector<LevelCertificate>* certs = nullptr,
                                            SpectralField* residual = nullptr);

// split + dyadic decomposition + certificates in one call.
DecompositionResult decompose_initial_datum(Workspace& ws, const SpectralField& u0,
                                            double epsilon0, int K_max, int max_radius = -1,
                                            SplitNorm norm = SplitNorm::L3);

}  // namespace snse
