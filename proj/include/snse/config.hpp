#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "snse/cascade.hpp"
#include "snse/integrator.hpp"
#include "snse/noise.hpp"
#include "snse/random_fields.hpp"

#include "json.hpp"

namespace snse {

// Run configuration. Parsing is strict: unknown keys and type mismatches are
// hard errors with the offending path in the message. Every field has a
// default; the resolved form (all defaults materialized) is what the manifest
// records.
struct GridConfig {
    int dim = 2;
    int n_per_axis = 64;
};

struct TimeConfig {
    double T = 0.5;
    double dt = 1e-3;
    Scheme scheme = Scheme::exponential_em;
};

struct InitialDataConfig {
    enum class Kind { random_divfree, taylor_green, single_mode, zero, file };
    Kind kind = Kind::random_divfree;
    std::uint64_t seed = 7;
    double amplitude = 1.0;
    double decay = 0.35;
    SpectrumProfile profile = SpectrumProfile::exp_decay;
    double target_l3 = -1.0;          // >0: normalize ||u0||_{L^3}
    std::array<int, 3> mode{1, 2, 0}; // single_mode only
    std::string path;                 // file only
};

struct NoiseConfig {
    NoiseModel::Kind kind = NoiseModel::Kind::diagonal_spectral;
    int modes = 8;
    double c0 = 0.5;
    double c_decay = 2.0;     // c_k = c0 * c_decay^{-k}
    double radius0 = 2.0;
    double radius_step = 2.0; // r_k = radius0 + radius_step * k
    NoiseModel::Envelope envelope = NoiseModel::Envelope::constant;
};

struct DecompositionConfig {
    double epsilon0 = 0.05;
    int K_max = 12;
};

struct CascadeBlockConfig {
    double epsilon1 = 0.2;
    std::string K1_rule = "2K0+1";  // or "fixed"
    double K1_fixed = -1.0;
    double M_floor = 1.0;
    double M_margin = 8.0;
    CascadeMode mode = CascadeMode::L3;
};

struct EnsembleConfig {
    int n_paths = 1;
    std::uint64_t base_seed = 1234;
};

struct RunConfig {
    GridConfig grid;
    TimeConfig time;
    InitialDataConfig initial_data;
    NoiseConfig noise;
    DecompositionConfig decomposition;
    CascadeBlockConfig cascade;
    EnsembleConfig ensemble;
    std::string run_kind = "cascade";  // or "direct"
    std::string output_dir;            // empty: no files

    Grid make_grid_checked() const;
    NoiseModel make_noise() const;
};

RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
// Round trip: config_from_json(resolved_json(c)) == c, all defaults explicit.
nlohmann::json resolved_json(const RunConfig& c);

// Builds u0 from the initial_data block (`file` kind reads relative to cwd).
SpectralField build_initial_datum(Workspace& ws, const RunConfig& c);

}  // namespace snse
