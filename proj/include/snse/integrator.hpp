#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "snse/field.hpp"
#include "snse/fourier.hpp"
#include "snse/ledger.hpp"
#include "snse/noise.hpp"
#include "snse/norms.hpp"

namespace snse {

enum class Scheme {
    exponential_em,   // uhat <- e^{-|n|^2 dt} (uhat + dt Fhat + noisehat)
    semi_implicit_em, // uhat <- (uhat + dt Fhat + noisehat) / (1 + |n|^2 dt)
};

Scheme scheme_from_string(const std::string& s);
std::string to_string(Scheme s);

// Norm magnitude beyond which a path is declared blown up.
inline constexpr double kBlowUpThreshold = 1e6;

// One Euler-Maruyama step of  du = (Laplacian u + F) dt + sigma dW  with the
// Laplacian treated by the scheme's stabilizing factor and everything else
// explicit. `drift` is F(t,u) excluding the Laplacian; `noise_increment` is
// sum_k sigma(u)e_k dW_k, already assembled. Viscosity is 1.
void em_step(Scheme scheme, double dt, SpectralField& u, const SpectralField& drift,
             const SpectralField& noise_increment);

// Right-hand side of an abstract evolution: fills `drift` (F excluding the
// Laplacian) and the assembled noise increment for this step.
struct Evolution {
    std::function<void(Workspace&, double t, const SpectralField& u, SpectralField& drift)>
        drift;
    // Default: model.apply_increment on the state. Overridable for systems
    // whose noise is not sigma(u) itself (cascade levels use differences).
    std::function<void(double t, const SpectralField& u, std::span<const double> dW,
                       SpectralField& accum)>
        noise;
    NoiseModel model = NoiseModel::zero();
};

// Exact solution check hook and dense storage for the weak-form machinery.
struct DenseOutput {
    int stride = 1;  // record every `stride` micro steps
    std::vector<double> t;
    std::vector<SpectralField> u;
    std::vector<std::vector<double>> W;  // cumulative Wiener values at t
};

struct SimulateOptions {
    Scheme scheme = Scheme::exponential_em;
    bool record_ledger = true;
    int ledger_stride = 1;
    DenseOutput* dense = nullptr;   // optional dense recording
    // Stop-and-freeze monitor: returns true when the path must freeze. Checked
    // after every step on the fresh norm bundle; once frozen the state stays
    // constant to the horizon and the ledger repeats its values.
    std::function<bool(double t, const NormBundle& b, const SpectralField& u)> freeze_when;
};

struct PathResult {
    SpectralField u_final;
    EnergyLedger ledger;
    double freeze_time = -1.0;  // <0: never froze
    bool frozen = false;
};

// Drive one path of du = (Laplacian u + F)dt + sigma dW from u0 over
// path.steps() steps of path.dt(). Throws NumericalError on blow-up or
// non-finite values.
PathResult simulate_path(Workspace& ws, const SpectralField& u0, const Evolution& evo,
                         const WienerPath& path, const SimulateOptions& opts = {});

// Convenience evolutions.
Evolution navier_stokes_evolution(const NoiseModel& model);  // F = -P((u.grad)u)
Evolution heat_evolution(const NoiseModel& model);           // F = 0

}  // namespace snse
