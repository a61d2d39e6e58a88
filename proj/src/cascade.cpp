#include "snse/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

#include "snse/errors.hpp"
#include "snse/norms.hpp"
#include "snse/operators.hpp"

namespace snse {

double theta(double s) {
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    const double x = s - 1.0;
    const double y = 1.0 - x;
    return y * y * y * (6.0 * x * x + 3.0 * x + 1.0);
}

CascadeMode cascade_mode_from_string(const std::string& s) {
    if (s == "l3") return CascadeMode::L3;
    if (s == "h12") return CascadeMode::H12;
    throw ConfigError("unknown cascade mode '" + s + "' (expected l3 or h12)");
}

std::string to_string(CascadeMode m) { return m == CascadeMode::L3 ? "l3" : "h12"; }

CascadeParams CascadeParams::resolve(const DecompositionResult& dec, double epsilon1,
                                     CascadeMode mode, double M_floor, double M_margin,
                                     double K1_fixed) {
    if (epsilon1 <= 0.0) throw ConfigError("epsilon1 must be positive");
    if (M_floor <= 0.0 || M_margin <= 0.0) throw ConfigError("M_floor and M_margin must be positive");
    const bool mode_matches = (mode == CascadeMode::L3) == (dec.norm == SplitNorm::L3);
    if (!mode_matches) throw ConfigError("cascade mode does not match the decomposition norm");

    CascadeParams par;
    par.epsilon0 = dec.epsilon0;
    par.epsilon1 = epsilon1;
    par.K0 = dec.K0;
    par.K1 = K1_fixed > 0.0 ? K1_fixed : 2.0 * dec.K0 + 1.0;
    if (par.K1 <= dec.K0)
        throw ConfigError("K1 must exceed K0 so the bulk starts strictly inside its plateau");
    par.mode = mode;
    par.levels = static_cast<int>(dec.levels.size());
    par.M.resize(dec.levels.size());
    for (std::size_t k = 0; k < dec.levels.size(); ++k) {
        const double sub = k < dec.certificates.size() ? dec.certificates[k].subcrit : 0.0;
        par.M[k] = std::ldexp(std::max(M_floor, M_margin * sub), static_cast<int>(k));
    }
    return par;
}

LevelCutoffs evaluate_cutoffs(const CascadeParams& par, int k, const CutoffInput& level,
                              const CutoffInput& wbar, const std::vector<double>& psi_below) {
    LevelCutoffs c;
    c.zeta = 1.0;
    for (std::size_t i = 0; i < psi_below.size() && i < static_cast<std::size_t>(k); ++i)
        c.zeta *= psi_below[i];
    const double Mk = par.M[static_cast<std::size_t>(k)];
    // In L3 mode the *_int entries are zero, so both modes share one formula.
    c.psi = theta((level.subcrit + level.sub_int) / Mk);
    c.phi = theta(std::ldexp(level.crit + level.crit_int, k) / par.epsilon1);
    c.psi_wbar = theta((wbar.subcrit + wbar.sub_int) / par.K1);
    return c;
}

void assemble_level_drift(Workspace& ws, const AdvectionCache& v, const AdvectionCache& w_prev,
                          const AdvectionCache& wbar, const LevelCutoffs& c, SpectralField& out) {
    const double pref = c.psi * c.psi * c.phi * c.phi;
    if (pref == 0.0) {
        out.set_zero();
        return;
    }
    const Grid& g = v.grid;
    std::vector<std::vector<double>> acc(static_cast<std::size_t>(g.dim));
    for (auto& a : acc) a.assign(static_cast<std::size_t>(g.points()), 0.0);
    accumulate_advection(v, v, pref, acc);
    if (c.zeta != 0.0) {
        accumulate_advection(w_prev, v, pref * c.zeta, acc);
        accumulate_advection(v, w_prev, pref * c.zeta, acc);
    }
    if (c.psi_wbar != 0.0) {
        accumulate_advection(wbar, v, pref * c.psi_wbar, acc);
        accumulate_advection(v, wbar, pref * c.psi_wbar, acc);
    }
    finish_advect(ws, acc, out);
}

void accumulate_level_noise(const NoiseModel& model, double t, const LevelCutoffs& c,
                            const SpectralField& sum_with_v, const SpectralField& sum_without_v,
                            std::span<const double> dW, SpectralField& out) {
    const double pref = c.psi * c.psi * c.phi * c.phi * c.zeta * c.psi_wbar;
    if (pref == 0.0) return;
    model.apply_increment_diff(t, sum_with_v, sum_without_v, dW, pref, out);
}

namespace {

// Running trapezoid integrals attached to one tracked field. `advance` takes
// the bundle at the new time and the elapsed dt since the previous advance.
struct IntAcc {
    double d3 = 0.0, d6 = 0.0, h32 = 0.0, h2 = 0.0;
    double prev_d3 = 0.0, prev_d6 = 0.0, prev_h32 = 0.0, prev_h2 = 0.0;

    void prime(const NormBundle& b) {
        prev_d3 = b.d3;
        prev_d6 = b.d6;
        prev_h32 = b.h32_sq;
        prev_h2 = b.h2_sq;
    }
    void advance_dissip(const NormBundle& b, double dt) {
        d3 += 0.5 * dt * (prev_d3 + b.d3);
        d6 += 0.5 * dt * (prev_d6 + b.d6);
        prev_d3 = b.d3;
        prev_d6 = b.d6;
    }
    void advance_sobolev(const NormBundle& b, double dt) {
        h32 += 0.5 * dt * (prev_h32 + b.h32_sq);
        h2 += 0.5 * dt * (prev_h2 + b.h2_sq);
        prev_h32 = b.h32_sq;
        prev_h2 = b.h2_sq;
    }
};

void append_row(EnergyLedger& led, double t, const NormBundle& b, const IntAcc& acc, bool frozen,
                std::span<const double> cutoffs) {
    led.t.push_back(t);
    led.l3.push_back(b.l3);
    led.l6.push_back(b.l6);
    led.h05.push_back(b.h05);
    led.h1.push_back(b.h1);
    led.dissip3.push_back(acc.d3);
    led.dissip6.push_back(acc.d6);
    led.h32_int.push_back(acc.h32);
    led.h2_int.push_back(acc.h2);
    led.frozen.push_back(frozen ? 1 : 0);
    for (std::size_t i = 0; i < cutoffs.size(); ++i) led.cutoff_cols[i].push_back(cutoffs[i]);
}

struct LevelState {
    SpectralField v;
    AdvectionCache cache;
    SpectralField drift, noise;
    bool active = false;
    // cutoff inputs at the current time; *_int entries are sqrt of the running
    // integrals and stay 0 in L3 mode
    CutoffInput in;
    double crit_int_sq = 0.0, sub_int_sq = 0.0;
    NormBundle bundle;  // refreshed per step (cheap part) and per record (full)
    IntAcc acc;
    EnergyLedger ledger;
    LevelStopRecord stop;
};

void check_finite(const NormBundle& b, const char* what, double t) {
    const double m = std::max(std::max(b.l3, b.l6), std::max(b.h05, b.h1));
    if (!std::isfinite(m) || m > kBlowUpThreshold) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s blew up at t = %.6g", what, t);
        throw NumericalError(buf, t);
    }
}

}  // namespace

CascadeResult run_cascade(Workspace& ws, const DecompositionResult& dec, const CascadeConfig& cfg,
                          const NoiseModel& model, const WienerPath& path) {
    const Grid& g = dec.w_bar0.grid;
    const int ncomp = dec.w_bar0.ncomp;
    const int n_lev = static_cast<int>(dec.levels.size());
    const double dt = path.dt();
    const int n_steps = path.steps();
    const bool want_lp_per_step = cfg.mode == CascadeMode::L3;
    const bool h12 = cfg.mode == CascadeMode::H12;

    CascadeResult res;
    res.params = CascadeParams::resolve(dec, cfg.epsilon1, cfg.mode, cfg.M_floor, cfg.M_margin,
                                        cfg.K1_fixed);
    const CascadeParams& par = res.params;

    // reconstruction audit of the stored decomposition at t = 0
    {
        SpectralField sum = dec.w_bar0;
        for (const auto& v : dec.levels) sum += v;
        sum += dec.residual;
        sum -= dec.u0;
        const double num = std::sqrt(l2_inner(sum, sum));
        const double den = std::sqrt(l2_inner(dec.u0, dec.u0));
        res.reconstruction_rel = den > 0.0 ? num / den : num;
    }

    // state
    SpectralField wbar = dec.w_bar0;
    AdvectionCache wbar_cache;
    SpectralField wbar_drift(g, ncomp), wbar_noise(g, ncomp);
    bool wbar_frozen = false;
    bool wbar_cache_fresh = false;
    CutoffInput wbar_in;
    double wbar_sub_int_sq = 0.0;
    double wbar_dissip_t = 0.0;  // time of the last dissipation-integral advance
    NormBundle wbar_bundle;
    IntAcc wbar_acc;

    std::vector<LevelState> lev(static_cast<std::size_t>(n_lev));
    for (int k = 0; k < n_lev; ++k) {
        lev[k].v = dec.levels[static_cast<std::size_t>(k)];
        lev[k].active = max_coeff_abs(lev[k].v) > 0.0;
        lev[k].drift = SpectralField(g, ncomp);
        lev[k].noise = SpectralField(g, ncomp);
    }

    // ledgers
    auto make_ledger = [&](std::initializer_list<const char*> names) {
        EnergyLedger led;
        for (const char* n : names) led.cutoff_names.emplace_back(n);
        led.cutoff_cols.resize(led.cutoff_names.size());
        led.reserve(static_cast<std::size_t>(n_steps / std::max(1, cfg.ledger_stride) + 2));
        return led;
    };
    res.u_ledger = make_ledger({});
    res.w_ledger = make_ledger({});
    res.wbar_ledger = make_ledger({"psi_wbar"});
    res.level_ledgers.resize(static_cast<std::size_t>(n_lev));
    for (auto& s : lev) s.ledger = make_ledger({"psi", "phi", "zeta", "psi_wbar"});
    res.stops.resize(static_cast<std::size_t>(n_lev));
    IntAcc u_acc, w_acc;

    // scratch
    SpectralField u_sum(g, ncomp), w_sum(g, ncomp);
    SpectralField noise_base(g, ncomp);   // w_bar + sum_{i<k} v_i
    SpectralField noise_with(g, ncomp);   // noise_base + v_k
    AdvectionCache w_prev_cache;
    std::vector<double> dW(static_cast<std::size_t>(model.modes()));
    std::vector<double> psi_below;
    psi_below.reserve(static_cast<std::size_t>(n_lev));
    std::vector<LevelCutoffs> cuts(static_cast<std::size_t>(n_lev));

    const auto fill_inputs_from_bundle = [&](const NormBundle& b, double cis, double sis,
                                             CutoffInput& in) {
        if (h12) {
            in.crit = b.h05;
            in.subcrit = b.h1;
            in.crit_int = std::sqrt(cis);
            in.sub_int = std::sqrt(sis);
        } else {
            in.crit = b.l3;
            in.subcrit = b.l6;
            in.crit_int = 0.0;
            in.sub_int = 0.0;
        }
    };

    const auto record_rows = [&](double t) {
        if (!cfg.record_ledgers) return;
        // full bundles; the per-step path keeps the cheap entries fresh, the
        // record path adds the transform-heavy ones and the sums
        w_sum.set_zero();
        psi_below.clear();
        for (int k = 0; k < n_lev; ++k) {
            LevelState& s = lev[static_cast<std::size_t>(k)];
            if (s.active) {
                partial_bundle(ws, s.v, true, true, s.bundle);
                add_scaled(w_sum, s.v, 1.0);
            } else {
                s.bundle = NormBundle{};
            }
            s.acc.advance_dissip(s.bundle, t - (s.ledger.t.empty() ? t : s.ledger.t.back()));
            const LevelCutoffs c = evaluate_cutoffs(par, k, s.in, wbar_in, psi_below);
            psi_below.push_back(c.psi);
            const double cols[4] = {c.psi, c.phi, c.zeta, c.psi_wbar};
            append_row(s.ledger, t, s.bundle, s.acc, false, cols);
        }
        const double dt_rec = t - (res.u_ledger.t.empty() ? t : res.u_ledger.t.back());
        if (!wbar_frozen) {
            partial_bundle(ws, wbar, true, true, wbar_bundle);
            wbar_acc.advance_dissip(wbar_bundle, t - wbar_dissip_t);
            wbar_dissip_t = t;
        }
        {
            const double col = theta((wbar_in.subcrit + wbar_in.sub_int) / par.K1);
            const double cols[1] = {col};
            append_row(res.wbar_ledger, t, wbar_bundle, wbar_acc, wbar_frozen, cols);
        }
        u_sum = w_sum;
        u_sum += wbar;
        NormBundle bu, bw;
        partial_bundle(ws, u_sum, true, true, bu);
        partial_bundle(ws, w_sum, true, true, bw);
        u_acc.advance_dissip(bu, dt_rec);
        u_acc.advance_sobolev(bu, dt_rec);
        w_acc.advance_dissip(bw, dt_rec);
        w_acc.advance_sobolev(bw, dt_rec);
        append_row(res.u_ledger, t, bu, u_acc, false, {});
        append_row(res.w_ledger, t, bw, w_acc, false, {});
    };

    // t = 0 bookkeeping
    for (auto& s : lev) {
        if (s.active) partial_bundle(ws, s.v, want_lp_per_step, false, s.bundle);
        fill_inputs_from_bundle(s.bundle, 0.0, 0.0, s.in);
        s.acc.prime(s.bundle);
    }
    partial_bundle(ws, wbar, want_lp_per_step, false, wbar_bundle);
    fill_inputs_from_bundle(wbar_bundle, 0.0, 0.0, wbar_in);
    wbar_acc.prime(wbar_bundle);
    record_rows(0.0);

    for (int s = 0; s < n_steps; ++s) {
        const double t = s * dt;

        // cutoffs at the left endpoint drive this step
        psi_below.clear();
        for (int k = 0; k < n_lev; ++k) {
            LevelState& L = lev[static_cast<std::size_t>(k)];
            cuts[static_cast<std::size_t>(k)] = evaluate_cutoffs(par, k, L.in, wbar_in, psi_below);
            const LevelCutoffs& c = cuts[static_cast<std::size_t>(k)];
            psi_below.push_back(c.psi);
            L.stop.min_psi = std::min(L.stop.min_psi, c.psi);
            L.stop.min_phi = std::min(L.stop.min_phi, c.phi);
            if (L.active)
                res.min_cutoff =
                    std::min(res.min_cutoff, std::min(std::min(c.psi, c.phi), c.psi_wbar));
        }

        // caches at the left endpoint
        if (!wbar_cache_fresh) {
            fill_advection_cache(ws, wbar, wbar_cache);
            wbar_cache_fresh = wbar_frozen;  // frozen state never changes again
        }
        for (auto& L : lev)
            if (L.active) fill_advection_cache(ws, L.v, L.cache);

        // drifts; w_prev_cache accumulates the partial sums as k ascends
        if (!wbar_frozen) nonlinear_term(ws, wbar, wbar_drift);
        w_prev_cache.grid = g;
        w_prev_cache.ncomp = ncomp;
        if (w_prev_cache.comp.empty()) {
            w_prev_cache.comp.resize(static_cast<std::size_t>(ncomp));
            w_prev_cache.grad.resize(static_cast<std::size_t>(ncomp * g.dim));
            for (auto& v : w_prev_cache.comp) v.assign(static_cast<std::size_t>(g.points()), 0.0);
            for (auto& v : w_prev_cache.grad) v.assign(static_cast<std::size_t>(g.points()), 0.0);
        } else {
            w_prev_cache.set_zero();
        }
        for (int k = 0; k < n_lev; ++k) {
            LevelState& L = lev[static_cast<std::size_t>(k)];
            if (L.active) {
                assemble_level_drift(ws, L.cache, w_prev_cache, wbar_cache,
                                     cuts[static_cast<std::size_t>(k)], L.drift);
                w_prev_cache.add(L.cache);
            }
        }

        // one Wiener draw drives the bulk and every level
        path.increments(s, dW);
        wbar_noise.set_zero();
        if (!wbar_frozen && model.kind() != NoiseModel::Kind::zero)
            model.apply_increment(t, wbar, dW, 1.0, wbar_noise);
        noise_base = wbar;
        for (int k = 0; k < n_lev; ++k) {
            LevelState& L = lev[static_cast<std::size_t>(k)];
            if (!L.active) continue;
            L.noise.set_zero();
            if (model.kind() != NoiseModel::Kind::zero) {
                noise_with = noise_base;
                noise_with += L.v;
                accumulate_level_noise(model, t, cuts[static_cast<std::size_t>(k)], noise_with,
                                       noise_base, dW, L.noise);
                std::swap(noise_base.coeffs, noise_with.coeffs);
            }
        }

        // advance
        if (!wbar_frozen) em_step(cfg.scheme, dt, wbar, wbar_drift, wbar_noise);
        for (auto& L : lev)
            if (L.active) em_step(cfg.scheme, dt, L.v, L.drift, L.noise);
        const double t_new = (s + 1) * dt;

        // refresh the cheap norms, advance the running integrals, detect stops
        if (!wbar_frozen) {
            partial_bundle(ws, wbar, want_lp_per_step, false, wbar_bundle);
            check_finite(wbar_bundle, "bulk field", t_new);
            if (h12)
                wbar_sub_int_sq += 0.5 * dt * (wbar_acc.prev_h2 + wbar_bundle.h2_sq);
            wbar_acc.advance_sobolev(wbar_bundle, dt);
            fill_inputs_from_bundle(wbar_bundle, 0.0, wbar_sub_int_sq, wbar_in);
            if (wbar_in.subcrit + wbar_in.sub_int >= par.K1) {
                wbar_frozen = true;
                res.tau_wbar = t_new;
                wbar_cache_fresh = false;  // rebuild once more from the frozen state
                // capture the full bundle and close the dissipation integrals at
                // the freeze instant; later rows repeat these values
                partial_bundle(ws, wbar, true, true, wbar_bundle);
                wbar_acc.advance_dissip(wbar_bundle, t_new - wbar_dissip_t);
                wbar_dissip_t = t_new;
            }
        }
        for (int k = 0; k < n_lev; ++k) {
            LevelState& L = lev[static_cast<std::size_t>(k)];
            if (!L.active) continue;
            partial_bundle(ws, L.v, want_lp_per_step, false, L.bundle);
            check_finite(L.bundle, "cascade level", t_new);
            if (h12) {
                L.crit_int_sq += 0.5 * dt * (L.acc.prev_h32 + L.bundle.h32_sq);
                L.sub_int_sq += 0.5 * dt * (L.acc.prev_h2 + L.bundle.h2_sq);
            }
            L.acc.advance_sobolev(L.bundle, dt);
            fill_inputs_from_bundle(L.bundle, L.crit_int_sq, L.sub_int_sq, L.in);

            const double crit_fn = L.in.crit + L.in.crit_int;
            const double sub_fn = L.in.subcrit + L.in.sub_int;
            const double tau_thresh = std::ldexp(par.epsilon1, -k);
            L.stop.max_crit = std::max(L.stop.max_crit, crit_fn);
            if (L.stop.tau < 0.0 && crit_fn >= tau_thresh) L.stop.tau = t_new;
            if (L.stop.rho < 0.0 && sub_fn >= par.M[static_cast<std::size_t>(k)])
                L.stop.rho = t_new;
            // certified hard bound: the cutoffs keep the critical functional
            // below twice the stop threshold for all time
            if (crit_fn > 2.0 * tau_thresh * (1.0 + 1e-9)) {
                ++L.stop.bound_violations;
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              "level %d critical functional %.6g exceeded its certified bound "
                              "%.6g at t = %.6g",
                              k, crit_fn, 2.0 * tau_thresh, t_new);
                throw NumericalError(buf, t_new);
            }
        }

        if ((s + 1) % std::max(1, cfg.ledger_stride) == 0 || s + 1 == n_steps)
            record_rows(t_new);
    }

    // stop-time summary
    res.tau_w = -1.0;
    for (const auto& L : lev) {
        for (double cand : {L.stop.tau, L.stop.rho})
            if (cand >= 0.0 && (res.tau_w < 0.0 || cand < res.tau_w)) res.tau_w = cand;
    }
    double tau = n_steps * dt;
    res.tau_fired = false;
    for (double cand : {res.tau_w, res.tau_wbar})
        if (cand >= 0.0 && cand < tau) {
            tau = cand;
            res.tau_fired = true;
        }
    res.tau = tau;
    for (int k = 0; k < n_lev; ++k) {
        res.stops[static_cast<std::size_t>(k)] = lev[k].stop;
        res.level_ledgers[static_cast<std::size_t>(k)] = std::move(lev[k].ledger);
    }

    res.wbar_final = std::move(wbar);
    res.v_final.reserve(static_cast<std::size_t>(n_lev));
    for (auto& L : lev) res.v_final.push_back(std::move(L.v));
    res.u_final = res.wbar_final;
    for (const auto& v : res.v_final) res.u_final += v;
    return res;
}

double cascade_vs_monolithic(Workspace& ws, const DecompositionResult& dec,
                             const CascadeConfig& cfg, const NoiseModel& model,
                             const WienerPath& path, double* rel) {
    CascadeResult cas = run_cascade(ws, dec, cfg, model, path);

    const Grid& g = dec.w_bar0.grid;
    const int ncomp = dec.w_bar0.ncomp;
    const double dt = path.dt();
    const bool h12 = cfg.mode == CascadeMode::H12;
    const CascadeParams par = CascadeParams::resolve(dec, cfg.epsilon1, cfg.mode, cfg.M_floor,
                                                     cfg.M_margin, cfg.K1_fixed);

    SpectralField wbar = dec.w_bar0;
    SpectralField w(g, ncomp);
    for (const auto& v : dec.levels) w += v;

    SpectralField wbar_drift(g, ncomp), w_drift(g, ncomp);
    SpectralField wbar_noise(g, ncomp), w_noise(g, ncomp);
    SpectralField sum(g, ncomp);
    AdvectionCache wc, bc;
    std::vector<double> dW(static_cast<std::size_t>(model.modes()));
    bool frozen = false;
    NormBundle wb;
    double sub_int_sq = 0.0, prev_h2 = 0.0;
    partial_bundle(ws, wbar, !h12, false, wb);
    prev_h2 = wb.h2_sq;

    std::vector<std::vector<double>> acc(static_cast<std::size_t>(g.dim));
    for (int s = 0; s < path.steps(); ++s) {
        const double t = s * dt;
        fill_advection_cache(ws, w, wc);
        fill_advection_cache(ws, wbar, bc);
        if (!frozen) nonlinear_term(ws, wbar, wbar_drift);
        for (auto& a : acc) a.assign(static_cast<std::size_t>(g.points()), 0.0);
        accumulate_advection(wc, wc, 1.0, acc);
        accumulate_advection(wc, bc, 1.0, acc);
        accumulate_advection(bc, wc, 1.0, acc);
        finish_advect(ws, acc, w_drift);

        path.increments(s, dW);
        wbar_noise.set_zero();
        w_noise.set_zero();
        if (model.kind() != NoiseModel::Kind::zero) {
            if (!frozen) model.apply_increment(t, wbar, dW, 1.0, wbar_noise);
            sum = wbar;
            sum += w;
            model.apply_increment_diff(t, sum, wbar, dW, 1.0, w_noise);
        }
        if (!frozen) em_step(cfg.scheme, dt, wbar, wbar_drift, wbar_noise);
        em_step(cfg.scheme, dt, w, w_drift, w_noise);

        if (!frozen) {
            partial_bundle(ws, wbar, !h12, false, wb);
            double sub_fn;
            if (h12) {
                sub_int_sq += 0.5 * dt * (prev_h2 + wb.h2_sq);
                prev_h2 = wb.h2_sq;
                sub_fn = wb.h1 + std::sqrt(sub_int_sq);
            } else {
                sub_fn = wb.l6;
            }
            if (sub_fn >= par.K1) frozen = true;
        }
    }

    sum.set_zero();
    for (const auto& v : cas.v_final) sum += v;
    sum -= w;
    const double diff = std::sqrt(l2_inner(sum, sum));
    if (rel != nullptr) {
        const double den = std::sqrt(l2_inner(w, w));
        *rel = den > 0.0 ? diff / den : diff;
    }
    return diff;
}

}  // namespace snse
