#include "snse/config.hpp"

#include <set>

#include "snse/errors.hpp"
#include "snse/io.hpp"

namespace snse {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config error at " + (path.empty() ? "<root>" : path) + ": " + what);
}

void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

// strict key check: every present key must be consumed by the caller
void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& [key, val] : j.items())
        if (!allowed.contains(key)) fail(path + "." + key, "unknown key");
}

template <typename T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        fail(path + "." + key, "wrong type");
    }
}

std::string get_str(const json& j, const std::string& path, const char* key,
                    const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) fail(path + "." + key, "expected a string");
    return j.at(key).get<std::string>();
}

InitialDataConfig::Kind id_kind_from_string(const std::string& s, const std::string& path) {
    if (s == "random_divfree") return InitialDataConfig::Kind::random_divfree;
    if (s == "taylor_green") return InitialDataConfig::Kind::taylor_green;
    if (s == "single_mode") return InitialDataConfig::Kind::single_mode;
    if (s == "zero") return InitialDataConfig::Kind::zero;
    if (s == "file") return InitialDataConfig::Kind::file;
    fail(path, "unknown initial data kind '" + s + "'");
}

std::string to_string(InitialDataConfig::Kind k) {
    switch (k) {
        case InitialDataConfig::Kind::random_divfree: return "random_divfree";
        case InitialDataConfig::Kind::taylor_green: return "taylor_green";
        case InitialDataConfig::Kind::single_mode: return "single_mode";
        case InitialDataConfig::Kind::zero: return "zero";
        case InitialDataConfig::Kind::file: return "file";
    }
    return "random_divfree";
}

SpectrumProfile profile_from_string(const std::string& s, const std::string& path) {
    if (s == "exp_decay") return SpectrumProfile::exp_decay;
    if (s == "white_band") return SpectrumProfile::white_band;
    if (s == "power_law") return SpectrumProfile::power_law;
    fail(path, "unknown spectrum profile '" + s + "'");
}

std::string to_string(SpectrumProfile p) {
    switch (p) {
        case SpectrumProfile::exp_decay: return "exp_decay";
        case SpectrumProfile::white_band: return "white_band";
        case SpectrumProfile::power_law: return "power_law";
    }
    return "exp_decay";
}

NoiseModel::Kind noise_kind_from_string(const std::string& s, const std::string& path) {
    if (s == "zero") return NoiseModel::Kind::zero;
    if (s == "diagonal_spectral") return NoiseModel::Kind::diagonal_spectral;
    fail(path, "unknown noise kind '" + s + "'");
}

NoiseModel::Envelope envelope_from_string(const std::string& s, const std::string& path) {
    if (s == "constant") return NoiseModel::Envelope::constant;
    if (s == "cosine") return NoiseModel::Envelope::cosine;
    fail(path, "unknown noise envelope '" + s + "'");
}

}  // namespace

Grid RunConfig::make_grid_checked() const { return make_grid(grid.dim, grid.n_per_axis); }

NoiseModel RunConfig::make_noise() const {
    if (noise.kind == NoiseModel::Kind::zero) return NoiseModel::zero();
    return NoiseModel::diagonal_family(noise.modes, noise.c0, noise.c_decay, noise.radius0,
                                       noise.radius_step, noise.envelope);
}

RunConfig config_from_json(const json& j) {
    expect_object(j, "");
    check_keys(j, "", {"grid", "time", "initial_data", "noise", "decomposition", "cascade",
                       "ensemble", "run_kind", "output_dir"});
    RunConfig c;

    if (j.contains("grid")) {
        const json& b = j.at("grid");
        expect_object(b, "grid");
        check_keys(b, "grid", {"dim", "n_per_axis"});
        c.grid.dim = get_or(b, "grid", "dim", c.grid.dim);
        c.grid.n_per_axis = get_or(b, "grid", "n_per_axis", c.grid.n_per_axis);
    }
    if (j.contains("time")) {
        const json& b = j.at("time");
        expect_object(b, "time");
        check_keys(b, "time", {"T", "dt", "scheme"});
        c.time.T = get_or(b, "time", "T", c.time.T);
        c.time.dt = get_or(b, "time", "dt", c.time.dt);
        if (b.contains("scheme"))
            c.time.scheme = scheme_from_string(get_str(b, "time", "scheme", ""));
        if (c.time.T <= 0.0 || c.time.dt <= 0.0) fail("time", "T and dt must be positive");
        if (c.time.dt > c.time.T) fail("time.dt", "dt exceeds the horizon");
    }
    if (j.contains("initial_data")) {
        const json& b = j.at("initial_data");
        expect_object(b, "initial_data");
        check_keys(b, "initial_data",
                   {"kind", "seed", "amplitude", "decay", "profile", "target_l3", "mode", "path"});
        if (b.contains("kind"))
            c.initial_data.kind = id_kind_from_string(get_str(b, "initial_data", "kind", ""),
                                                      "initial_data.kind");
        c.initial_data.seed = get_or(b, "initial_data", "seed", c.initial_data.seed);
        c.initial_data.amplitude = get_or(b, "initial_data", "amplitude", c.initial_data.amplitude);
        c.initial_data.decay = get_or(b, "initial_data", "decay", c.initial_data.decay);
        if (b.contains("profile"))
            c.initial_data.profile = profile_from_string(
                get_str(b, "initial_data", "profile", ""), "initial_data.profile");
        c.initial_data.target_l3 = get_or(b, "initial_data", "target_l3", c.initial_data.target_l3);
        if (b.contains("mode")) {
            const json& m = b.at("mode");
            if (!m.is_array() || m.size() > 3) fail("initial_data.mode", "expected up to 3 ints");
            c.initial_data.mode = {0, 0, 0};
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (!m[i].is_number_integer()) fail("initial_data.mode", "expected integers");
                c.initial_data.mode[i] = m[i].get<int>();
            }
        }
        c.initial_data.path = get_str(b, "initial_data", "path", c.initial_data.path);
        if (c.initial_data.kind == InitialDataConfig::Kind::file && c.initial_data.path.empty())
            fail("initial_data.path", "required for kind 'file'");
    }
    if (j.contains("noise")) {
        const json& b = j.at("noise");
        expect_object(b, "noise");
        check_keys(b, "noise",
                   {"kind", "modes", "c0", "c_decay", "radius0", "radius_step", "envelope"});
        if (b.contains("kind"))
            c.noise.kind = noise_kind_from_string(get_str(b, "noise", "kind", ""), "noise.kind");
        c.noise.modes = get_or(b, "noise", "modes", c.noise.modes);
        c.noise.c0 = get_or(b, "noise", "c0", c.noise.c0);
        c.noise.c_decay = get_or(b, "noise", "c_decay", c.noise.c_decay);
        c.noise.radius0 = get_or(b, "noise", "radius0", c.noise.radius0);
        c.noise.radius_step = get_or(b, "noise", "radius_step", c.noise.radius_step);
        if (b.contains("envelope"))
            c.noise.envelope =
                envelope_from_string(get_str(b, "noise", "envelope", ""), "noise.envelope");
        if (c.noise.modes < 0) fail("noise.modes", "must be >= 0");
        if (c.noise.c_decay <= 0.0) fail("noise.c_decay", "must be positive");
    }
    if (j.contains("decomposition")) {
        const json& b = j.at("decomposition");
        expect_object(b, "decomposition");
        check_keys(b, "decomposition", {"epsilon0", "K_max"});
        c.decomposition.epsilon0 = get_or(b, "decomposition", "epsilon0", c.decomposition.epsilon0);
        c.decomposition.K_max = get_or(b, "decomposition", "K_max", c.decomposition.K_max);
        if (c.decomposition.epsilon0 <= 0.0) fail("decomposition.epsilon0", "must be positive");
        if (c.decomposition.K_max < 0) fail("decomposition.K_max", "must be >= 0");
    }
    if (j.contains("cascade")) {
        const json& b = j.at("cascade");
        expect_object(b, "cascade");
        check_keys(b, "cascade",
                   {"epsilon1", "K1_rule", "K1_fixed", "M_floor", "M_margin", "mode"});
        c.cascade.epsilon1 = get_or(b, "cascade", "epsilon1", c.cascade.epsilon1);
        c.cascade.K1_rule = get_str(b, "cascade", "K1_rule", c.cascade.K1_rule);
        c.cascade.K1_fixed = get_or(b, "cascade", "K1_fixed", c.cascade.K1_fixed);
        c.cascade.M_floor = get_or(b, "cascade", "M_floor", c.cascade.M_floor);
        c.cascade.M_margin = get_or(b, "cascade", "M_margin", c.cascade.M_margin);
        if (b.contains("mode"))
            c.cascade.mode = cascade_mode_from_string(get_str(b, "cascade", "mode", ""));
        if (c.cascade.K1_rule != "2K0+1" && c.cascade.K1_rule != "fixed")
            fail("cascade.K1_rule", "expected '2K0+1' or 'fixed'");
        if (c.cascade.K1_rule == "fixed" && c.cascade.K1_fixed <= 0.0)
            fail("cascade.K1_fixed", "must be positive when K1_rule is 'fixed'");
        if (c.cascade.epsilon1 <= 0.0) fail("cascade.epsilon1", "must be positive");
    }
    if (j.contains("ensemble")) {
        const json& b = j.at("ensemble");
        expect_object(b, "ensemble");
        check_keys(b, "ensemble", {"n_paths", "base_seed"});
        c.ensemble.n_paths = get_or(b, "ensemble", "n_paths", c.ensemble.n_paths);
        c.ensemble.base_seed = get_or(b, "ensemble", "base_seed", c.ensemble.base_seed);
        if (c.ensemble.n_paths < 1) fail("ensemble.n_paths", "must be >= 1");
    }
    c.run_kind = get_str(j, "", "run_kind", c.run_kind);
    if (c.run_kind != "cascade" && c.run_kind != "direct")
        fail("run_kind", "expected 'cascade' or 'direct'");
    c.output_dir = get_str(j, "", "output_dir", c.output_dir);

    make_grid(c.grid.dim, c.grid.n_per_axis);  // validates dim and parity
    return c;
}

RunConfig load_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
    return config_from_json(j);
}

nlohmann::json resolved_json(const RunConfig& c) {
    json j;
    j["grid"] = {{"dim", c.grid.dim}, {"n_per_axis", c.grid.n_per_axis}};
    j["time"] = {{"T", c.time.T}, {"dt", c.time.dt}, {"scheme", to_string(c.time.scheme)}};
    j["initial_data"] = {{"kind", to_string(c.initial_data.kind)},
                         {"seed", c.initial_data.seed},
                         {"amplitude", c.initial_data.amplitude},
                         {"decay", c.initial_data.decay},
                         {"profile", to_string(c.initial_data.profile)},
                         {"target_l3", c.initial_data.target_l3},
                         {"mode", c.initial_data.mode},
                         {"path", c.initial_data.path}};
    j["noise"] = {{"kind", c.noise.kind == NoiseModel::Kind::zero ? "zero" : "diagonal_spectral"},
                  {"modes", c.noise.modes},
                  {"c0", c.noise.c0},
                  {"c_decay", c.noise.c_decay},
                  {"radius0", c.noise.radius0},
                  {"radius_step", c.noise.radius_step},
                  {"envelope",
                   c.noise.envelope == NoiseModel::Envelope::constant ? "constant" : "cosine"}};
    j["decomposition"] = {{"epsilon0", c.decomposition.epsilon0},
                          {"K_max", c.decomposition.K_max}};
    j["cascade"] = {{"epsilon1", c.cascade.epsilon1}, {"K1_rule", c.cascade.K1_rule},
                    {"K1_fixed", c.cascade.K1_fixed}, {"M_floor", c.cascade.M_floor},
                    {"M_margin", c.cascade.M_margin}, {"mode", to_string(c.cascade.mode)}};
    j["ensemble"] = {{"n_paths", c.ensemble.n_paths}, {"base_seed", c.ensemble.base_seed}};
    j["run_kind"] = c.run_kind;
    j["output_dir"] = c.output_dir;
    return j;
}

SpectralField build_initial_datum(Workspace& ws, const RunConfig& c) {
    const Grid g = c.make_grid_checked();
    switch (c.initial_data.kind) {
        case InitialDataConfig::Kind::taylor_green: {
            if (g.dim != 2) throw ConfigError("taylor_green initial data requires dim = 2");
            SpectralField f = taylor_green(g);
            f *= c.initial_data.amplitude;
            return f;
        }
        case InitialDataConfig::Kind::single_mode:
            return single_mode_field(g, c.initial_data.mode, c.initial_data.amplitude);
        case InitialDataConfig::Kind::zero:
            return zero_field(g, g.dim);
        case InitialDataConfig::Kind::file: {
            SpectralField f = read_field(c.initial_data.path);
            if (f.grid.dim != g.dim || f.grid.n != g.n)
                throw ConfigError("initial data file grid does not match the configured grid");
            return f;
        }
        case InitialDataConfig::Kind::random_divfree:
        default: {
            RandomFieldParams rp;
            rp.profile = c.initial_data.profile;
            rp.amplitude = c.initial_data.amplitude;
            rp.decay = c.initial_data.decay;
            rp.target_l3 = c.initial_data.target_l3;
            return random_divfree_field(ws, c.initial_data.seed, rp);
        }
    }
}

}  // namespace snse
