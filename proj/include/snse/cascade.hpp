#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "snse/field.hpp"
#include "snse/fourier.hpp"
#include "snse/initial_data.hpp"
#include "snse/integrator.hpp"
#include "snse/ledger.hpp"
#include "snse/noise.hpp"
#include "snse/operators.hpp"

namespace snse {

// Plateau cutoff: 1 on [0,1], 0 on [2,inf), quintic in between so the first
// two derivatives vanish at both ends. theta(s) = 1 - smoothstep5(s-1).
double theta(double s);

enum class CascadeMode { L3, H12 };

CascadeMode cascade_mode_from_string(const std::string& s);
std::string to_string(CascadeMode m);

// Resolved cascade parameters. K1 > 2*K0; M_k grows like 2^k with a floor so
// the level-k subcritical cutoff starts well inside its plateau.
struct CascadeParams {
    double epsilon0 = 0.05;
    double epsilon1 = 0.2;
    double K0 = 0.0;
    double K1 = 0.0;            // default rule: 2*K0 + 1
    std::vector<double> M;      // per level
    CascadeMode mode = CascadeMode::L3;
    int levels = 0;

    // K1_fixed <= 0 applies the default rule 2*K0 + 1. M_k comes from the
    // decomposition certificates: M_k = 2^k * max(M_floor, M_margin * ||v0^(k)||_subcrit).
    static CascadeParams resolve(const DecompositionResult& dec, double epsilon1,
                                 CascadeMode mode, double M_floor, double M_margin,
                                 double K1_fixed = -1.0);
};

// Scalar functionals of one field that feed the cutoffs. In L3 mode the
// integral entries stay 0 and only the sup norms matter; in H12 mode the
// running integrals enter the cutoff arguments additively.
struct CutoffInput {
    double crit = 0.0;      // ||.||_{L^3}  or  ||.||_{H^{1/2}}
    double subcrit = 0.0;   // ||.||_{L^6}  or  ||.||_{H^1}
    double crit_int = 0.0;  // (int ||.||_{H^{3/2}}^2)^{1/2}, H12 only
    double sub_int = 0.0;   // (int ||.||_{H^2}^2)^{1/2},     H12 only
};

struct LevelCutoffs {
    double psi = 1.0;      // subcritical size of v^(k) against M_k
    double phi = 1.0;      // critical size of v^(k) against epsilon1/2^k
    double zeta = 1.0;     // prod_{i<k} psi_i (1 for k = 0)
    double psi_wbar = 1.0; // subcritical size of w_bar against K1
};

LevelCutoffs evaluate_cutoffs(const CascadeParams& par, int k, const CutoffInput& level,
                              const CutoffInput& wbar, const std::vector<double>& psi_below);

// Level-k right-hand side (drift excluding the Laplacian) of the truncated
// system: all bilinear couplings carry psi^2 phi^2; couplings to the partial
// sum w^(k-1) additionally carry zeta; couplings to w_bar carry psi_wbar.
// Caches must be filled from the current (left endpoint) states.
void assemble_level_drift(Workspace& ws, const AdvectionCache& v, const AdvectionCache& w_prev,
                          const AdvectionCache& wbar, const LevelCutoffs& c, SpectralField& out);

// Level-k noise increment: prefactor psi^2 phi^2 zeta psi_wbar times
// [sigma(v + w_prev + wbar) - sigma(w_prev + wbar)] dW, accumulated into out.
void accumulate_level_noise(const NoiseModel& model, double t, const LevelCutoffs& c,
                            const SpectralField& sum_with_v, const SpectralField& sum_without_v,
                            std::span<const double> dW, SpectralField& out);

struct LevelStopRecord {
    double tau = -1.0;   // critical threshold epsilon1/2^k first hit (<0: never)
    double rho = -1.0;   // subcritical threshold M_k first hit
    double min_psi = 1.0, min_phi = 1.0;
    double max_crit = 0.0;  // running max of the critical cutoff argument * (eps1/2^k)
    int bound_violations = 0;  // pointwise certified-bound breaches (must stay 0)
};

struct CascadeConfig {
    double epsilon0 = 0.05;
    double epsilon1 = 0.2;
    double M_floor = 1.0;
    double M_margin = 8.0;
    double K1_fixed = -1.0;  // <= 0: default rule
    CascadeMode mode = CascadeMode::L3;
    Scheme scheme = Scheme::exponential_em;
    double T = 0.5;
    double dt = 1e-3;
    int ledger_stride = 1;
    bool record_ledgers = true;
};

struct CascadeResult {
    CascadeParams params;
    // trajectories' tracked functionals
    EnergyLedger u_ledger, w_ledger, wbar_ledger;
    std::vector<EnergyLedger> level_ledgers;
    std::vector<LevelStopRecord> stops;
    double tau_wbar = -1.0;  // w_bar freeze time (<0: never fired)
    double tau_w = -1.0;     // min over levels of min(tau_k, rho_k)
    double tau = -1.0;       // min(tau_w, tau_wbar); horizon if none fired
    bool tau_fired = false;
    double min_cutoff = 1.0;    // smallest cutoff value seen anywhere
    SpectralField u_final;      // w_bar + sum_k v^(k) at T
    SpectralField wbar_final;
    std::vector<SpectralField> v_final;
    double reconstruction_rel = 0.0;  // |u - wbar - sum v - residual| / |u0| at t=0
};

// Lockstep solve of the bulk system (w_bar) and all truncated level systems
// over [0,T]. All couplings are evaluated at the left endpoint of each step,
// so co-advancing the levels is equivalent to solving them in sequence
// against stored trajectories. The same WienerPath drives every level (the
// systems share one cylindrical Wiener process).
CascadeResult run_cascade(Workspace& ws, const DecompositionResult& dec,
                          const CascadeConfig& cfg, const NoiseModel& model,
                          const WienerPath& path);

// Monolithic remainder check: advance (w_bar, w) with the full remainder
// system under the same path and compare w against sum_k v^(k) from the
// cascade at t = T. Used by the consistency tests; returns the L^2 difference.
double cascade_vs_monolithic(Workspace& ws, const DecompositionResult& dec,
                             const CascadeConfig& cfg, const NoiseModel& model,
                             const WienerPath& path, double* rel = nullptr);

}  // namespace snse
