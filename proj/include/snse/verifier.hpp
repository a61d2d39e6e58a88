#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snse/cascade.hpp"
#include "snse/field.hpp"
#include "snse/noise.hpp"
#include "snse/random_fields.hpp"

#include "json.hpp"

namespace snse {

// Scalars extracted from one cascade path; everything the Monte Carlo
// aggregation needs, so full ledgers can be dropped after summarization.
struct PathSummary {
    int index = 0;
    std::uint64_t seed = 0;
    double tau = -1.0, tau_w = -1.0, tau_wbar = -1.0;
    bool tau_fired = false;
    double min_cutoff = 1.0;
    int bound_violations = 0;

    // Energy functionals. "a" tracks the critical exponent (p=3 resp.
    // H^{1/2}-squared), "b" the subcritical one (p=6 resp. H^1-squared).
    double u_sup_a = 0.0, u_int_a = 0.0;        // sup_{<=tau}, int_0^{tau_wbar}
    double wbar_sup_b = 0.0, wbar_int_b = 0.0;  // both at tau_wbar
    double wbar_sup_a = 0.0, wbar_int_a = 0.0;
    double w_sup_a = 0.0, w_int_a = 0.0;        // both at tau
    double w_sup_crit_norm = 0.0;               // sup_{<=tau} critical norm of w
    double wbar_sup_subcrit_norm = 0.0;
    std::vector<double> level_sup_a, level_int_a;  // horizon [0,T]
    std::vector<double> level_sup_b, level_int_b;
    std::vector<double> level_init_a, level_init_b;  // ||v0^(k)|| functionals

    // initial data functionals
    double u0_a = 0.0;     // ||u0||_3^3 or ||u0||_{H^{1/2}}^2
    double wbar0_b = 0.0;  // ||wbar0||_6^6 or ||wbar0||_{H^1}^2
    double wbar0_a = 0.0;
    double w0_a = 0.0;

    double epsilon0 = 0.0, epsilon1 = 0.0;  // thresholds the bounds refer to
    CascadeMode mode = CascadeMode::L3;
};

PathSummary summarize_path(const CascadeResult& res, int index, std::uint64_t seed);

// One verified inequality: Monte Carlo mean of the path functional against
// its declared bound. `implied` is mean_lhs / rhs; `implied_half` the same
// from the first half of the paths. Stability criterion: implied within
// [0.5, 2] of implied_half (both zero counts as stable).
struct InequalityReport {
    std::string name;
    double mean_lhs = 0.0;
    double stderr_lhs = 0.0;
    double rhs = 0.0;  // normalizer (deterministic or MC mean)
    double implied = 0.0;
    double implied_half = 0.0;
    double stability_ratio = 1.0;
    int n_paths = 0;
    bool pass = false;
    std::string note;
};

nlohmann::json to_json(const InequalityReport& r);

// The energy-inequality family over a summarized ensemble. Produces one
// report per inequality plus the per-level family with its slope fit.
struct EnergyVerification {
    std::vector<InequalityReport> reports;
    // weighted LS fit of log(implied_k) against k; uniformity requires
    // slope <= 0 within two standard errors.
    double level_slope = 0.0;
    double level_slope_stderr = 0.0;
    bool level_uniform = false;
    std::vector<double> level_implied;
    bool all_pass = false;
};

EnergyVerification verify_energy_inequalities(const std::vector<PathSummary>& paths);

// Pathwise uniform bounds (max over the ensemble, reported with their
// thresholds): ||w||_crit <= 4*eps1 style consequences of the cutoffs.
struct UniformBoundsReport {
    double max_w_crit = 0.0, bound_w_crit = 0.0;
    double max_wbar_subcrit = 0.0, bound_wbar_subcrit = 0.0;
    int total_violations = 0;
    bool pass = false;
};
UniformBoundsReport verify_uniform_bounds(const std::vector<PathSummary>& paths,
                                          const CascadeParams& par);

// Empirical survival of the stopping time: P[tau <= delta] for a grid of
// small delta, with the linear-in-delta bound P[tau <= delta] <= C delta
// fitted on the ensemble. Doubling the ensemble must keep C stable.
struct SurvivalReport {
    std::vector<double> delta;
    std::vector<double> p_full, p_half;
    double C_emp = 0.0, C_half = 0.0;
    double fraction_fired = 0.0;
    bool pass = false;  // monotone survival + stable C + P[tau>0]=1 realized
};
SurvivalReport stopping_time_survival(const std::vector<PathSummary>& paths, double T,
                                      std::span<const double> delta_grid);

// Stochastic heat equation test bench:  du = (Delta u + div f) dt + g dW with
// f, g frozen coefficient fields. The L^p energy estimate is checked against
// a closed-form Ornstein-Uhlenbeck oracle in the single-mode case and by
// Monte Carlo otherwise.
struct HeatBenchConfig {
    Grid grid;
    double p = 2.0;
    double T = 0.5;
    double dt = 1e-3;
    int n_paths = 64;
    std::uint64_t seed = 1;
    double g_amp = 0.4;   // single constant noise column amplitude
    double f_amp = 0.0;   // deterministic forcing row amplitude (0: off)
};
struct HeatBenchReport {
    double mean_lhs = 0.0, stderr_lhs = 0.0;
    double rhs = 0.0;              // K_p [ E||u0||_p^p + E int int (|f|^2 + ||g||^2) |u|^{p-2} ]
    double implied = 0.0, implied_half = 0.0;
    double oracle_sup = 0.0;       // closed-form E sup bound proxy (p=2 single mode)
    double oracle_err = 0.0;       // relative error of E||u(T)||_2^2 vs OU formula
    bool pass = false;
};
HeatBenchReport heat_energy_bench(Workspace& ws, const HeatBenchConfig& cfg);

// Pathwise uniqueness diagnostic: two solves from initial data differing by a
// small divergence-free perturbation, driven by the same Wiener path.
// Reports sup_{t<=T'} ||difference||_crit / ||initial difference||_crit over
// a dyadic list of horizons.
struct UniquenessReport {
    std::vector<double> horizons;
    std::vector<double> growth;  // max ratio per horizon
    double worst = 0.0;
    bool pass = false;  // bounded growth: worst <= pinned factor
};
UniquenessReport uniqueness_diagnostic(Workspace& ws, const DecompositionResult& dec,
                                       const CascadeConfig& cfg, const NoiseModel& model,
                                       std::uint64_t seed, double perturbation, int n_pairs);

// Weak-form residual of a dense trajectory: the Riemann-Ito sums of the
// distributional identity evaluated at a coarse stride. For test functions a
// fixed set of low-mode trig polynomials is used. Returns the max residual
// over test functions, components and coarse checkpoints.
double weak_form_residual(Workspace& ws, const DenseOutput& dense, const NoiseModel& model,
                          int coarsen, double t_stop = -1.0);

// Interpolation-inequality survey: distribution of poincare_ratio over random
// divergence-free fields; reports the max (the empirical constant).
struct PoincareSurvey {
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
    int n_fields = 0;
};
PoincareSurvey poincare_survey(Workspace& ws, double p, int n_fields, SpectrumProfile profile,
                               std::uint64_t seed);

}  // namespace snse
