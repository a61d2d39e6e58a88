#include "snse/driver.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <thread>

#include "snse/errors.hpp"
#include "snse/initial_data.hpp"
#include "snse/norms.hpp"
#include "snse/rng.hpp"

namespace snse {

namespace {

using nlohmann::json;

SplitNorm split_norm_of(CascadeMode m) {
    return m == CascadeMode::L3 ? SplitNorm::L3 : SplitNorm::H12;
}

CascadeConfig cascade_config_of(const RunConfig& cfg) {
    CascadeConfig cc;
    cc.epsilon0 = cfg.decomposition.epsilon0;
    cc.epsilon1 = cfg.cascade.epsilon1;
    cc.M_floor = cfg.cascade.M_floor;
    cc.M_margin = cfg.cascade.M_margin;
    cc.K1_fixed = cfg.cascade.K1_rule == "fixed" ? cfg.cascade.K1_fixed : -1.0;
    cc.mode = cfg.cascade.mode;
    cc.scheme = cfg.time.scheme;
    cc.T = cfg.time.T;
    cc.dt = cfg.time.dt;
    return cc;
}

// Everything the per-path workers share. The decomposition happens once; the
// paths differ only in their Wiener seed.
struct EnsembleSetup {
    Grid grid;
    DecompositionResult dec;
    CascadeConfig ccfg;
    CascadeParams params;
    NoiseModel model;
    json realized;
};

EnsembleSetup make_setup(Workspace& ws, const RunConfig& cfg) {
    EnsembleSetup s{cfg.make_grid_checked(), {}, cascade_config_of(cfg), {}, cfg.make_noise(), {}};
    SpectralField u0 = build_initial_datum(ws, cfg);
    s.dec = decompose_initial_datum(ws, u0, cfg.decomposition.epsilon0, cfg.decomposition.K_max,
                                    -1, split_norm_of(s.ccfg.mode));
    s.params = CascadeParams::resolve(s.dec, s.ccfg.epsilon1, s.ccfg.mode, s.ccfg.M_floor,
                                      s.ccfg.M_margin, s.ccfg.K1_fixed);

    json certs = json::array();
    for (const auto& c : s.dec.certificates)
        certs.push_back({{"level", c.level},
                         {"radius", c.radius},
                         {"crit", c.crit},
                         {"subcrit", c.subcrit},
                         {"crit_bound", c.crit_bound},
                         {"ok", c.ok}});
    s.realized = {{"mode", to_string(s.params.mode)},
                  {"epsilon0", s.params.epsilon0},
                  {"epsilon1", s.params.epsilon1},
                  {"K0", s.params.K0},
                  {"K1", s.params.K1},
                  {"M", s.params.M},
                  {"levels", s.params.levels},
                  {"split_radius", s.dec.split_radius},
                  {"w0_crit", s.dec.w0_crit},
                  {"residual_crit", s.dec.residual_crit},
                  {"residual_bound", s.dec.residual_bound},
                  {"certificates", certs},
                  {"noise_modes", s.model.modes()},
                  {"noise_lipschitz", s.model.lipschitz()}};
    return s;
}

// Static pool over path indices. Each worker owns a Workspace (FFTW plan
// creation is serialized inside; execution is thread safe). `body` must not
// throw: per-path failures are recorded, not propagated.
void for_each_path(const Grid& g, int n_paths, int workers,
                   const std::function<void(int, Workspace&)>& body) {
    const int nw = std::max(1, std::min(workers, n_paths));
    if (nw == 1) {
        Workspace ws(g);
        for (int i = 0; i < n_paths; ++i) body(i, ws);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nw));
    for (int w = 0; w < nw; ++w)
        pool.emplace_back([&]() {
            Workspace ws(g);
            for (int i = next.fetch_add(1); i < n_paths; i = next.fetch_add(1)) body(i, ws);
        });
    for (auto& th : pool) th.join();
}

using FileStash = std::vector<std::pair<std::string, std::string>>;

void stash_field(FileStash& files, const std::string& rel, const SpectralField& f) {
    std::string bytes = field_to_bytes(f);
    json side{{"format", "snse-field-v1"}, {"dim", f.grid.dim},   {"n_per_axis", f.grid.n},
              {"ncomp", f.ncomp},          {"bytes", bytes.size()}, {"fnv1a64", fnv1a64_hex(bytes)}};
    files.emplace_back(rel + ".json", side.dump(2) + "\n");
    files.emplace_back(rel, std::move(bytes));
}

std::string path_dir(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ledgers/path_%04d", index);
    return buf;
}

json outcome_row(const PathOutcome& oc) {
    json r{{"index", oc.index}, {"seed", oc.seed}};
    if (oc.summary) {
        r["tau"] = oc.summary->tau;
        r["tau_w"] = oc.summary->tau_w;
        r["tau_wbar"] = oc.summary->tau_wbar;
        r["tau_fired"] = oc.summary->tau_fired;
        r["min_cutoff"] = oc.summary->min_cutoff;
        r["bound_violations"] = oc.summary->bound_violations;
    } else {
        r["error"] = oc.error;
    }
    return r;
}

void finalize_outcomes(EnsembleResult& out) {
    json rows = json::array();
    for (const auto& oc : out.outcomes) {
        if (oc.summary) {
            out.summaries.push_back(*oc.summary);
            ++out.n_clean;
        } else {
            ++out.n_failed;
        }
        rows.push_back(outcome_row(oc));
    }
    out.realized["paths"] = std::move(rows);
    out.realized["n_clean"] = out.n_clean;
    out.realized["n_failed"] = out.n_failed;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int resolve_workers(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("SNSE_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    return 1;
}

EnsembleResult run_cascade_ensemble(const RunConfig& cfg, int workers, OutputWriter* writer) {
    const Grid g = cfg.make_grid_checked();
    Workspace ws(g);
    EnsembleSetup setup = make_setup(ws, cfg);

    EnsembleResult out;
    out.params = setup.params;
    out.realized = setup.realized;
    const int n_paths = cfg.ensemble.n_paths;
    const int n_steps = static_cast<int>(std::llround(cfg.time.T / cfg.time.dt));
    out.outcomes.resize(static_cast<std::size_t>(n_paths));

    const int keep = writer ? std::min(n_paths, 4) : 0;
    std::vector<FileStash> stash(static_cast<std::size_t>(keep));

    for_each_path(g, n_paths, workers, [&](int i, Workspace& wks) {
        PathOutcome& oc = out.outcomes[static_cast<std::size_t>(i)];
        oc.index = i;
        oc.seed = path_seed(cfg.ensemble.base_seed, i);
        try {
            WienerPath path(oc.seed, setup.ccfg.dt, n_steps, setup.model.modes());
            CascadeResult res = run_cascade(wks, setup.dec, setup.ccfg, setup.model, path);
            oc.summary = summarize_path(res, i, oc.seed);
            if (i < keep) {
                FileStash& files = stash[static_cast<std::size_t>(i)];
                const std::string dir = path_dir(i);
                files.emplace_back(dir + "/u.csv", ledger_to_csv(res.u_ledger));
                files.emplace_back(dir + "/w.csv", ledger_to_csv(res.w_ledger));
                files.emplace_back(dir + "/wbar.csv", ledger_to_csv(res.wbar_ledger));
                for (std::size_t k = 0; k < res.level_ledgers.size(); ++k)
                    files.emplace_back(dir + "/level_" + std::to_string(k) + ".csv",
                                       ledger_to_csv(res.level_ledgers[k]));
                if (i == 0) {
                    stash_field(files, "fields/path_0000_u_final.bin", res.u_final);
                    stash_field(files, "fields/path_0000_wbar_final.bin", res.wbar_final);
                }
            }
        } catch (const std::exception& e) {
            oc.error = e.what();
        }
    });

    finalize_outcomes(out);
    if (writer) {
        FileStash head;
        stash_field(head, "fields/u0.bin", setup.dec.u0);
        stash_field(head, "fields/wbar0.bin", setup.dec.w_bar0);
        for (auto& [rel, bytes] : head) writer->add(rel, std::move(bytes));
        for (auto& files : stash)
            for (auto& [rel, bytes] : files) writer->add(rel, std::move(bytes));
    }
    return out;
}

EnsembleResult run_direct_ensemble(const RunConfig& cfg, int workers, OutputWriter* writer,
                                   DenseOutput* dense_path0) {
    const Grid g = cfg.make_grid_checked();
    Workspace ws(g);
    const SpectralField u0 = build_initial_datum(ws, cfg);
    const NoiseModel model = cfg.make_noise();
    const Evolution evo = navier_stokes_evolution(model);
    const int n_paths = cfg.ensemble.n_paths;
    const int n_steps = static_cast<int>(std::llround(cfg.time.T / cfg.time.dt));

    EnsembleResult out;
    out.outcomes.resize(static_cast<std::size_t>(n_paths));
    out.realized = {{"mode", "direct"},
                    {"u0_l2_sq", sobolev_sq_l2(u0, 0.0)},
                    {"noise_modes", model.modes()}};

    const int keep = writer ? std::min(n_paths, 4) : 0;
    std::vector<FileStash> stash(static_cast<std::size_t>(keep));

    for_each_path(g, n_paths, workers, [&](int i, Workspace& wks) {
        PathOutcome& oc = out.outcomes[static_cast<std::size_t>(i)];
        oc.index = i;
        oc.seed = path_seed(cfg.ensemble.base_seed, i);
        try {
            WienerPath path(oc.seed, cfg.time.dt, n_steps, model.modes());
            SimulateOptions so;
            so.scheme = cfg.time.scheme;
            so.ledger_stride = std::max(1, n_steps / 500);
            if (i == 0 && dense_path0) so.dense = dense_path0;
            PathResult pr = simulate_path(wks, u0, evo, path, so);
            if (i < keep) {
                FileStash& files = stash[static_cast<std::size_t>(i)];
                files.emplace_back(path_dir(i) + "/u.csv", ledger_to_csv(pr.ledger));
                if (i == 0) stash_field(files, "fields/path_0000_u_final.bin", pr.u_final);
            }
        } catch (const std::exception& e) {
            oc.error = e.what();
        }
    });

    json rows = json::array();
    for (const auto& oc : out.outcomes) {
        if (oc.error.empty())
            ++out.n_clean;
        else
            ++out.n_failed;
        json r{{"index", oc.index}, {"seed", oc.seed}};
        if (!oc.error.empty()) r["error"] = oc.error;
        rows.push_back(r);
    }
    out.realized["paths"] = std::move(rows);
    out.realized["n_clean"] = out.n_clean;
    out.realized["n_failed"] = out.n_failed;

    if (writer) {
        FileStash head;
        stash_field(head, "fields/u0.bin", u0);
        for (auto& [rel, bytes] : head) writer->add(rel, std::move(bytes));
        for (auto& files : stash)
            for (auto& [rel, bytes] : files) writer->add(rel, std::move(bytes));
    }
    return out;
}

nlohmann::json run_verification(const RunConfig& cfg, int workers, OutputWriter* writer) {
    const auto wall0 = std::chrono::steady_clock::now();
    json v;
    v["format"] = "snse-verification-v1";
    v["version"] = version_string();
    v["config"] = resolved_json(cfg);
    v["config"].erase("output_dir");

    // Monte Carlo cascade ensemble; ledgers are summarized per path and
    // dropped, only the first paths' CSVs would go to disk (not needed here).
    EnsembleResult ens = run_cascade_ensemble(cfg, workers, nullptr);
    if (ens.n_clean == 0)
        throw NumericalError("verification: all " + std::to_string(cfg.ensemble.n_paths) +
                             " cascade paths failed");
    v["realized"] = ens.realized;
    v["ensemble"] = {{"n_paths", cfg.ensemble.n_paths},
                     {"n_clean", ens.n_clean},
                     {"n_failed", ens.n_failed},
                     {"base_seed", cfg.ensemble.base_seed}};

    const EnergyVerification ev = verify_energy_inequalities(ens.summaries);
    json ereports = json::array();
    for (const auto& r : ev.reports) ereports.push_back(to_json(r));
    v["energy"] = {{"reports", std::move(ereports)}, {"pass", ev.all_pass}};
    v["level_slope"] = {{"slope", ev.level_slope},
                        {"stderr", ev.level_slope_stderr},
                        {"implied", ev.level_implied},
                        {"pass", ev.level_uniform}};

    const UniformBoundsReport ub = verify_uniform_bounds(ens.summaries, ens.params);
    v["uniform_bounds"] = {{"max_w_crit", ub.max_w_crit},
                           {"bound_w_crit", ub.bound_w_crit},
                           {"max_wbar_subcrit", ub.max_wbar_subcrit},
                           {"bound_wbar_subcrit", ub.bound_wbar_subcrit},
                           {"violations", ub.total_violations},
                           {"pass", ub.pass}};

    const double T = cfg.time.T;
    const std::vector<double> deltas{T / 16.0, T / 8.0, T / 4.0, T / 2.0};
    const SurvivalReport sv = stopping_time_survival(ens.summaries, T, deltas);
    v["survival"] = {{"delta", sv.delta},
                     {"p_full", sv.p_full},
                     {"p_half", sv.p_half},
                     {"C_emp", sv.C_emp},
                     {"C_half", sv.C_half},
                     {"fraction_fired", sv.fraction_fired},
                     {"pass", sv.pass}};
    const double t_ensemble = seconds_since(wall0);

    // Heat-equation bench: p = 2 against the Ornstein-Uhlenbeck closed form,
    // p = 3 with a deterministic flux so the |u|^{p-2} weight machinery runs.
    const auto heat_json = [](const HeatBenchReport& r) {
        return json{{"mean_lhs", r.mean_lhs}, {"stderr_lhs", r.stderr_lhs},
                    {"rhs", r.rhs},           {"implied", r.implied},
                    {"implied_half", r.implied_half}, {"oracle_sup", r.oracle_sup},
                    {"oracle_err", r.oracle_err},     {"pass", r.pass}};
    };
    HeatBenchConfig hb;
    hb.grid = Grid{2, 32};
    hb.p = 2.0;
    hb.T = 0.5;
    hb.dt = 1e-3;
    hb.n_paths = 256;
    hb.seed = hash_combine(cfg.ensemble.base_seed, 0x68656174ULL);
    hb.g_amp = 0.4;
    hb.f_amp = 0.0;
    Workspace bench_ws(hb.grid);
    const HeatBenchReport h2 = heat_energy_bench(bench_ws, hb);
    hb.p = 3.0;
    hb.T = 0.4;
    hb.n_paths = 48;
    hb.f_amp = 0.3;
    const HeatBenchReport h3 = heat_energy_bench(bench_ws, hb);
    v["heat_bench"] = {{"p2", heat_json(h2)}, {"p3", heat_json(h3)}, {"pass", h2.pass && h3.pass}};
    const double t_heat = seconds_since(wall0) - t_ensemble;

    // Weak-form residual scaling: dense micro trajectories on a small grid,
    // Riemann-Ito sums at three coarse strides. The residual is dominated by
    // the martingale part, so halving the stride should shrink the mean by
    // about sqrt(2); the full 4x span is gated, adjacent ratios are recorded.
    json wf;
    {
        // self-contained regime: weak datum, strong noise, so the martingale
        // part of the residual dominates the Riemann part and the sqrt(step)
        // scaling is visible between the tested strides
        RunConfig sub = cfg;
        sub.grid = GridConfig{2, 32};
        sub.time.T = 0.1;
        sub.time.dt = 1.25e-4;
        sub.initial_data = InitialDataConfig{};
        sub.initial_data.kind = InitialDataConfig::Kind::random_divfree;
        sub.initial_data.seed = hash_combine(cfg.ensemble.base_seed, 0x7766ULL);
        sub.initial_data.decay = 0.6;
        sub.initial_data.amplitude = 0.35;
        sub.noise = NoiseConfig{};
        sub.noise.modes = 6;
        sub.noise.c0 = 1.6;
        const Grid gw = sub.make_grid_checked();
        Workspace wws(gw);
        const SpectralField u0 = build_initial_datum(wws, sub);
        const NoiseModel model = sub.make_noise();
        const Evolution evo = navier_stokes_evolution(model);
        const int n_steps = static_cast<int>(std::llround(sub.time.T / sub.time.dt));
        const std::vector<int> coarsen{16, 8, 4};
        const int wf_paths = 6;
        std::vector<std::vector<double>> resid(coarsen.size());
        std::vector<double> span_ratio;
        for (int pth = 0; pth < wf_paths; ++pth) {
            WienerPath path(path_seed(hash_combine(cfg.ensemble.base_seed, 0x77665ULL), pth),
                            sub.time.dt, n_steps, model.modes());
            DenseOutput dense;
            dense.stride = 1;
            SimulateOptions so;
            so.scheme = sub.time.scheme;
            so.record_ledger = false;
            so.dense = &dense;
            simulate_path(wws, u0, evo, path, so);
            for (std::size_t c = 0; c < coarsen.size(); ++c)
                resid[c].push_back(weak_form_residual(wws, dense, model, coarsen[c]));
            if (resid.back().back() > 0.0)
                span_ratio.push_back(resid.front().back() / resid.back().back());
        }
        std::vector<double> mean_resid(coarsen.size(), 0.0);
        std::vector<double> delta(coarsen.size(), 0.0);
        for (std::size_t c = 0; c < coarsen.size(); ++c) {
            for (double r : resid[c]) mean_resid[c] += r;
            mean_resid[c] /= static_cast<double>(wf_paths);
            delta[c] = coarsen[c] * sub.time.dt;
        }
        double gm_span = 0.0;
        for (double r : span_ratio) gm_span += std::log(r);
        gm_span = span_ratio.empty() ? 0.0 : std::exp(gm_span / static_cast<double>(span_ratio.size()));
        const bool pass = !span_ratio.empty() && mean_resid.front() > mean_resid.back() &&
                          gm_span >= 1.3 && gm_span <= 3.2;
        wf = {{"delta", delta},
              {"mean_resid", mean_resid},
              {"span_ratio", gm_span},
              {"micro_dt", sub.time.dt},
              {"n_paths", wf_paths},
              {"pass", pass}};
    }
    v["weak_form"] = wf;
    const double t_weak = seconds_since(wall0) - t_ensemble - t_heat;

    // Pathwise uniqueness and the interpolation-constant survey run on the
    // configured grid and noise.
    {
        Workspace uws(cfg.make_grid_checked());
        SpectralField u0 = build_initial_datum(uws, cfg);
        const SplitNorm sn = split_norm_of(cfg.cascade.mode);
        DecompositionResult dec = decompose_initial_datum(
            uws, u0, cfg.decomposition.epsilon0, cfg.decomposition.K_max, -1, sn);
        const double pert = 1e-3 * std::max(critical_norm(uws, u0, sn), 1e-8);
        const UniquenessReport uq =
            uniqueness_diagnostic(uws, dec, cascade_config_of(cfg), cfg.make_noise(),
                                  hash_combine(cfg.ensemble.base_seed, 0x756eULL), pert, 2);
        v["uniqueness"] = {{"horizons", uq.horizons},
                           {"growth", uq.growth},
                           {"worst", uq.worst},
                           {"perturbation", pert},
                           {"pass", uq.pass}};

        const PoincareSurvey ps =
            poincare_survey(uws, 3.0, 40, SpectrumProfile::exp_decay,
                            hash_combine(cfg.ensemble.base_seed, 0x706fULL));
        const bool ps_ok = std::isfinite(ps.max_ratio) && ps.max_ratio > 0.0;
        v["poincare"] = {{"p", 3.0},
                         {"max_ratio", ps.max_ratio},
                         {"mean_ratio", ps.mean_ratio},
                         {"n_fields", ps.n_fields},
                         {"pass", ps_ok}};
    }

    v["timing"] = {{"ensemble_s", t_ensemble},
                   {"heat_bench_s", t_heat},
                   {"weak_form_s", t_weak},
                   {"total_s", seconds_since(wall0)}};

    bool all = true;
    for (const char* key : {"energy", "level_slope", "uniform_bounds", "survival", "heat_bench",
                            "weak_form", "uniqueness", "poincare"})
        all = all && v.at(key).at("pass").get<bool>();
    v["all_pass"] = all;

    if (writer) {
        writer->add("verification.json", v.dump(2) + "\n");
        writer->add("verification.txt", render_verification_text(v));
        writer->add("survival.csv", survival_csv(v));
        writer->add("implied_vs_k.csv", implied_vs_k_csv(v));
    }
    return v;
}

bool verification_all_pass(const nlohmann::json& verification) {
    return verification.value("all_pass", false);
}

namespace {

const char* pf(bool ok) { return ok ? "ok" : "FAIL"; }

void appendf(std::string& s, const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    s += buf;
}

}  // namespace

std::string render_verification_text(const nlohmann::json& v) {
    std::string s;
    const auto& ens = v.at("ensemble");
    appendf(s, "verification (%d paths, %d clean, %d failed)\n",
            ens.at("n_paths").get<int>(), ens.at("n_clean").get<int>(),
            ens.at("n_failed").get<int>());

    appendf(s, "energy inequalities\n");
    appendf(s, "  %-28s %12s %12s %9s %9s  %s\n", "name", "mean lhs", "rhs", "implied",
            "stability", "");
    for (const auto& r : v.at("energy").at("reports")) {
        appendf(s, "  %-28s %12.5g %12.5g %9.3g %9.3g  %s\n",
                r.at("name").get<std::string>().c_str(), r.at("mean_lhs").get<double>(),
                r.at("rhs").get<double>(), r.at("implied_constant").get<double>(),
                r.at("stability_ratio").get<double>(), pf(r.at("pass").get<bool>()));
    }
    const auto& ls = v.at("level_slope");
    appendf(s, "level family: slope %.3g +- %.3g -> %s\n", ls.at("slope").get<double>(),
            ls.at("stderr").get<double>(), pf(ls.at("pass").get<bool>()));

    const auto& ub = v.at("uniform_bounds");
    appendf(s, "uniform bounds: max |w|_crit %.4g <= %.4g, max |wbar|_sub %.4g <= %.4g, "
               "violations %d -> %s\n",
            ub.at("max_w_crit").get<double>(), ub.at("bound_w_crit").get<double>(),
            ub.at("max_wbar_subcrit").get<double>(), ub.at("bound_wbar_subcrit").get<double>(),
            ub.at("violations").get<int>(), pf(ub.at("pass").get<bool>()));

    const auto& sv = v.at("survival");
    appendf(s, "stopping survival: C_emp %.4g (half %.4g), fired fraction %.3g -> %s\n",
            sv.at("C_emp").get<double>(), sv.at("C_half").get<double>(),
            sv.at("fraction_fired").get<double>(), pf(sv.at("pass").get<bool>()));

    const auto& hb = v.at("heat_bench");
    appendf(s, "heat bench p=2: oracle err %.3g, implied %.3g -> %s\n",
            hb.at("p2").at("oracle_err").get<double>(), hb.at("p2").at("implied").get<double>(),
            pf(hb.at("p2").at("pass").get<bool>()));
    appendf(s, "heat bench p=3: implied %.3g -> %s\n", hb.at("p3").at("implied").get<double>(),
            pf(hb.at("p3").at("pass").get<bool>()));

    const auto& wf = v.at("weak_form");
    s += "weak form residual:";
    for (std::size_t i = 0; i < wf.at("delta").size(); ++i)
        appendf(s, " %.4g@dt=%.4g", wf.at("mean_resid")[i].get<double>(),
                wf.at("delta")[i].get<double>());
    appendf(s, ", span ratio %.3g -> %s\n", wf.at("span_ratio").get<double>(),
            pf(wf.at("pass").get<bool>()));

    const auto& uq = v.at("uniqueness");
    appendf(s, "uniqueness: worst growth %.4g -> %s\n", uq.at("worst").get<double>(),
            pf(uq.at("pass").get<bool>()));

    const auto& ps = v.at("poincare");
    appendf(s, "interpolation survey p=%g: max ratio %.4g over %d fields\n",
            ps.at("p").get<double>(), ps.at("max_ratio").get<double>(),
            ps.at("n_fields").get<int>());

    appendf(s, "overall: %s\n", v.at("all_pass").get<bool>() ? "ALL PASS" : "FAIL");
    return s;
}

std::string survival_csv(const nlohmann::json& v) {
    const auto& sv = v.at("survival");
    std::string s = "delta,p_full,p_half\n";
    for (std::size_t i = 0; i < sv.at("delta").size(); ++i) {
        s += format_double(sv.at("delta")[i].get<double>()) + ",";
        s += format_double(sv.at("p_full")[i].get<double>()) + ",";
        s += format_double(sv.at("p_half")[i].get<double>()) + "\n";
    }
    return s;
}

std::string implied_vs_k_csv(const nlohmann::json& v) {
    const auto& impl = v.at("level_slope").at("implied");
    std::string s = "level,implied_constant\n";
    for (std::size_t k = 0; k < impl.size(); ++k) {
        s += std::to_string(k) + "," + format_double(impl[k].get<double>()) + "\n";
    }
    return s;
}

namespace {

RunConfig config_for_cmd(const CmdOptions& opt) {
    RunConfig cfg = opt.config_path.empty() ? RunConfig{} : load_config(opt.config_path);
    if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
    if (!opt.mode.empty()) cfg.cascade.mode = cascade_mode_from_string(opt.mode);
    if (!opt.input_field.empty()) {
        cfg.initial_data.kind = InitialDataConfig::Kind::file;
        cfg.initial_data.path = opt.input_field;
    }
    if (opt.seeds != 0) cfg.ensemble.base_seed = opt.seeds;
    if (opt.paths > 0) cfg.ensemble.n_paths = opt.paths;
    return cfg;
}

RunManifest base_manifest(const RunConfig& cfg, json realized) {
    RunManifest m;
    m.code_version = version_string();
    m.config = resolved_json(cfg);
    m.config.erase("output_dir");  // manifests are location independent
    m.realized = std::move(realized);
    return m;
}

}  // namespace

int cmd_decompose(const CmdOptions& opt) {
    const RunConfig cfg = config_for_cmd(opt);
    Workspace ws(cfg.make_grid_checked());
    const SpectralField u0 = build_initial_datum(ws, cfg);
    const SplitNorm sn = split_norm_of(cfg.cascade.mode);
    DecompositionResult dec = decompose_initial_datum(ws, u0, cfg.decomposition.epsilon0,
                                                      cfg.decomposition.K_max, -1, sn);
    const CascadeParams par =
        CascadeParams::resolve(dec, cfg.cascade.epsilon1, cfg.cascade.mode, cfg.cascade.M_floor,
                               cfg.cascade.M_margin,
                               cfg.cascade.K1_rule == "fixed" ? cfg.cascade.K1_fixed : -1.0);

    SpectralField recon = dec.w_bar0;
    for (const auto& lv : dec.levels) recon += lv;
    recon += dec.residual;
    recon -= dec.u0;
    const double u0_l2 = std::sqrt(sobolev_sq_l2(dec.u0, 0.0));
    const double recon_rel = u0_l2 > 0.0 ? std::sqrt(sobolev_sq_l2(recon, 0.0)) / u0_l2 : 0.0;

    std::printf("decomposition (%s mode, epsilon0 = %g)\n", to_string(cfg.cascade.mode).c_str(),
                cfg.decomposition.epsilon0);
    std::printf("  split radius %d, K0 %.6g, ||w0||_crit %.6g\n", dec.split_radius, dec.K0,
                dec.w0_crit);
    std::printf("  %5s %6s %12s %12s %12s  %s\n", "level", "radius", "crit", "subcrit", "bound",
                "");
    bool certs_ok = true;
    for (const auto& c : dec.certificates) {
        std::printf("  %5d %6d %12.5g %12.5g %12.5g  %s\n", c.level, c.radius, c.crit, c.subcrit,
                    c.crit_bound, pf(c.ok));
        certs_ok = certs_ok && c.ok;
    }
    std::printf("  residual crit %.6g <= %.6g, reconstruction rel %.3g\n", dec.residual_crit,
                dec.residual_bound, recon_rel);
    std::printf("  cascade thresholds: K1 %.6g, levels %d\n", par.K1, par.levels);

    json realized{{"mode", to_string(cfg.cascade.mode)},
                  {"epsilon0", cfg.decomposition.epsilon0},
                  {"split_radius", dec.split_radius},
                  {"K0", dec.K0},
                  {"K1", par.K1},
                  {"w0_crit", dec.w0_crit},
                  {"residual_crit", dec.residual_crit},
                  {"residual_bound", dec.residual_bound},
                  {"reconstruction_rel", recon_rel},
                  {"levels", par.levels},
                  {"M", par.M}};
    json certs = json::array();
    for (const auto& c : dec.certificates)
        certs.push_back({{"level", c.level},
                         {"radius", c.radius},
                         {"crit", c.crit},
                         {"subcrit", c.subcrit},
                         {"crit_bound", c.crit_bound},
                         {"ok", c.ok}});
    realized["certificates"] = std::move(certs);

    if (!cfg.output_dir.empty()) {
        OutputWriter w(cfg.output_dir);
        FileStash files;
        stash_field(files, "fields/u0.bin", dec.u0);
        stash_field(files, "fields/wbar0.bin", dec.w_bar0);
        for (std::size_t k = 0; k < dec.levels.size(); ++k)
            stash_field(files, "fields/level_" + std::to_string(k) + ".bin", dec.levels[k]);
        stash_field(files, "fields/residual.bin", dec.residual);
        for (auto& [rel, bytes] : files) w.add(rel, std::move(bytes));
        w.add("decomposition.json", realized.dump(2) + "\n");
        w.commit(base_manifest(cfg, realized));
        std::printf("  wrote %s\n", cfg.output_dir.c_str());
    }
    if (!certs_ok) throw NumericalError("decomposition certificates violated");
    return 0;
}

int cmd_simulate(const CmdOptions& opt) {
    const RunConfig cfg = config_for_cmd(opt);
    const int workers = resolve_workers(opt.workers);

    std::unique_ptr<OutputWriter> writer;
    if (!cfg.output_dir.empty()) writer = std::make_unique<OutputWriter>(cfg.output_dir);

    EnsembleResult ens;
    DenseOutput dense;
    if (cfg.run_kind == "direct") {
        ens = run_direct_ensemble(cfg, workers, writer.get(),
                                  opt.dense_output ? &dense : nullptr);
        std::printf("direct ensemble: %d paths, %d clean, %d failed\n", cfg.ensemble.n_paths,
                    ens.n_clean, ens.n_failed);
    } else {
        ens = run_cascade_ensemble(cfg, workers, writer.get());
        std::printf("cascade ensemble: %d paths, %d clean, %d failed\n", cfg.ensemble.n_paths,
                    ens.n_clean, ens.n_failed);
        std::printf("  levels %d, K0 %.6g, K1 %.6g, epsilon0 %g, epsilon1 %g\n",
                    ens.params.levels, ens.params.K0, ens.params.K1, ens.params.epsilon0,
                    ens.params.epsilon1);
        int fired = 0;
        for (const auto& s : ens.summaries) fired += s.tau_fired ? 1 : 0;
        std::printf("  tau fired on %d/%d clean paths\n", fired, ens.n_clean);
        const int show = std::min<int>(static_cast<int>(ens.outcomes.size()), 10);
        std::printf("  %5s %22s %10s %10s %10s %11s\n", "path", "seed", "tau", "tau_w",
                    "tau_wbar", "min_cutoff");
        for (int i = 0; i < show; ++i) {
            const PathOutcome& oc = ens.outcomes[static_cast<std::size_t>(i)];
            if (oc.summary)
                std::printf("  %5d %22llu %10.5g %10.5g %10.5g %11.4g\n", oc.index,
                            static_cast<unsigned long long>(oc.seed), oc.summary->tau,
                            oc.summary->tau_w, oc.summary->tau_wbar, oc.summary->min_cutoff);
            else
                std::printf("  %5d %22llu  failed: %s\n", oc.index,
                            static_cast<unsigned long long>(oc.seed), oc.error.c_str());
        }
        if (show < static_cast<int>(ens.outcomes.size())) std::printf("  ...\n");
    }

    if (writer) {
        if (opt.dense_output && cfg.run_kind == "direct" && !dense.t.empty()) {
            FileStash files;
            stash_field(files, "fields/dense_final.bin", dense.u.back());
            std::string csv = "t";
            const std::size_t m = dense.W.empty() ? 0 : dense.W.front().size();
            for (std::size_t k = 0; k < m; ++k) csv += ",W" + std::to_string(k);
            csv += "\n";
            for (std::size_t i = 0; i < dense.t.size(); ++i) {
                csv += format_double(dense.t[i]);
                for (std::size_t k = 0; k < m; ++k) csv += "," + format_double(dense.W[i][k]);
                csv += "\n";
            }
            files.emplace_back("dense_wiener.csv", std::move(csv));
            for (auto& [rel, bytes] : files) writer->add(rel, std::move(bytes));
        }
        writer->commit(base_manifest(cfg, ens.realized));
        std::printf("wrote %s\n", cfg.output_dir.c_str());
    }
    if (ens.n_clean == 0) throw NumericalError("all paths failed");
    return 0;
}

int cmd_verify(const CmdOptions& opt) {
    const RunConfig cfg = config_for_cmd(opt);
    const int workers = resolve_workers(opt.workers);

    std::unique_ptr<OutputWriter> writer;
    if (!cfg.output_dir.empty()) writer = std::make_unique<OutputWriter>(cfg.output_dir);

    const json v = run_verification(cfg, workers, writer.get());
    std::fputs(render_verification_text(v).c_str(), stdout);
    if (writer) {
        writer->commit(base_manifest(cfg, v.at("realized")));
        std::printf("wrote %s\n", cfg.output_dir.c_str());
    }
    return verification_all_pass(v) ? 0 : 3;
}

int cmd_report(const CmdOptions& opt) {
    std::string dir = opt.out_dir;
    if (dir.empty() && !opt.config_path.empty()) dir = config_for_cmd(opt).output_dir;
    if (dir.empty()) throw ConfigError("report: no directory (use --out)");

    json mj;
    try {
        mj = json::parse(read_text_file(dir + "/manifest.json"));
    } catch (const json::exception& e) {
        throw ConfigError("report: bad manifest.json: " + std::string(e.what()));
    }
    const RunManifest man = RunManifest::from_json(mj);

    std::printf("run at %s (%s)\n", dir.c_str(), man.code_version.c_str());
    const auto& c = man.config;
    if (c.contains("grid"))
        std::printf("  grid %dd n=%d, T=%g dt=%g, mode %s, %d paths\n",
                    c.at("grid").at("dim").get<int>(), c.at("grid").at("n_per_axis").get<int>(),
                    c.at("time").at("T").get<double>(), c.at("time").at("dt").get<double>(),
                    c.at("cascade").at("mode").get<std::string>().c_str(),
                    c.at("ensemble").at("n_paths").get<int>());

    int bad = 0;
    for (const auto& e : man.files) {
        std::string bytes;
        try {
            bytes = read_text_file(dir + "/" + e.path);
        } catch (const ConfigError&) {
            std::printf("  MISSING %s\n", e.path.c_str());
            ++bad;
            continue;
        }
        const bool ok = fnv1a64_hex(bytes) == e.hash;
        if (!ok) {
            std::printf("  CORRUPT %s\n", e.path.c_str());
            ++bad;
        }
    }
    std::printf("  %zu files, %d bad\n", man.files.size(), bad);
    if (bad > 0) throw ConfigError("report: inventory does not match the manifest");

    if (man.realized.contains("n_clean"))
        std::printf("  paths: %d clean, %d failed\n", man.realized.at("n_clean").get<int>(),
                    man.realized.value("n_failed", 0));

    bool has_verification = false;
    for (const auto& e : man.files) has_verification |= e.path == "verification.json";
    if (has_verification) {
        const json v = json::parse(read_text_file(dir + "/verification.json"));
        std::fputs(render_verification_text(v).c_str(), stdout);
        return verification_all_pass(v) ? 0 : 3;
    }
    return 0;
}

}  // namespace snse
