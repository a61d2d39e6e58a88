#include <cmath>
#include <vector>

#include "doctest.h"
#include "snse/cascade.hpp"
#include "snse/errors.hpp"
#include "snse/initial_data.hpp"
#include "snse/operators.hpp"
#include "snse/random_fields.hpp"
#include "snse/rng.hpp"
#include "test_util.hpp"

using namespace snse;
using namespace snse::test;

namespace {

DecompositionResult standard_dec(Workspace& ws, std::uint64_t seed, double eps0 = 0.2,
                                 int K_max = 3, SplitNorm norm = SplitNorm::L3) {
    RandomFieldParams p;
    p.decay = 0.6;
    const SpectralField u0 = random_divfree_field(ws, seed, p);
    return decompose_initial_datum(ws, u0, eps0, K_max, -1, norm);
}

}  // namespace

TEST_CASE("the plateau cutoff is flat, monotone and C1") {
    CHECK(theta(-1.0) == 1.0);
    CHECK(theta(0.0) == 1.0);
    CHECK(theta(1.0) == 1.0);
    CHECK(theta(2.0) == 0.0);
    CHECK(theta(5.0) == 0.0);
    CHECK(theta(1.5) == doctest::Approx(0.5).epsilon(1e-12));

    double prev = 1.0;
    for (int i = 1; i <= 100; ++i) {
        const double v = theta(1.0 + i / 50.0);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
    // one-sided derivatives vanish at both plateau edges
    const double h = 1e-5;
    CHECK(std::abs(theta(1.0 + h) - theta(1.0)) / h < 1e-4);
    CHECK(std::abs(theta(2.0) - theta(2.0 - h)) / h < 1e-4);
}

TEST_CASE("parameter resolution follows the certificates") {
    const Grid g{2, 32};
    Workspace ws(g);
    const DecompositionResult dec = standard_dec(ws, 3);
    const double M_floor = 1.5, M_margin = 8.0;
    const CascadeParams par =
        CascadeParams::resolve(dec, 0.25, CascadeMode::L3, M_floor, M_margin);

    CHECK(par.epsilon0 == dec.epsilon0);
    CHECK(par.epsilon1 == 0.25);
    CHECK(par.K0 == dec.K0);
    CHECK(par.K1 == 2.0 * dec.K0 + 1.0);
    CHECK(par.levels == static_cast<int>(dec.levels.size()));
    REQUIRE(par.M.size() == dec.levels.size());
    for (std::size_t k = 0; k < par.M.size(); ++k) {
        const double expect =
            std::ldexp(std::max(M_floor, M_margin * dec.certificates[k].subcrit),
                       static_cast<int>(k));
        CHECK(par.M[k] == expect);
    }

    const CascadeParams fixed =
        CascadeParams::resolve(dec, 0.25, CascadeMode::L3, M_floor, M_margin, 30.0);
    CHECK(fixed.K1 == 30.0);

    CHECK_THROWS_AS(CascadeParams::resolve(dec, -1.0, CascadeMode::L3, 1.0, 8.0), ConfigError);
    CHECK_THROWS_AS(CascadeParams::resolve(dec, 0.25, CascadeMode::H12, 1.0, 8.0), ConfigError);
    CHECK_THROWS_AS(CascadeParams::resolve(dec, 0.25, CascadeMode::L3, 1.0, 8.0, dec.K0 * 0.5),
                    ConfigError);
}

TEST_CASE("cutoff evaluation: arguments, plateaus and the cascade product") {
    const Grid g{2, 32};
    Workspace ws(g);
    const DecompositionResult dec = standard_dec(ws, 4);
    const CascadeParams par = CascadeParams::resolve(dec, 0.2, CascadeMode::L3, 1.0, 8.0);

    // deep inside every plateau all cutoffs are exactly 1
    CutoffInput quiet{1e-6, 1e-6, 0.0, 0.0};
    LevelCutoffs c = evaluate_cutoffs(par, 1, quiet, quiet, {1.0});
    CHECK(c.psi == 1.0);
    CHECK(c.phi == 1.0);
    CHECK(c.zeta == 1.0);
    CHECK(c.psi_wbar == 1.0);

    // far beyond the knees everything is exactly 0
    CutoffInput loud{1e9, 1e9, 0.0, 0.0};
    c = evaluate_cutoffs(par, 1, loud, loud, {0.5});
    CHECK(c.psi == 0.0);
    CHECK(c.phi == 0.0);
    CHECK(c.psi_wbar == 0.0);
    CHECK(c.zeta == 0.5);  // product of the levels below

    // the arguments are the scaled functionals
    const int k = 2;
    CutoffInput level{0.3, 0.4, 0.05, 0.07};
    CutoffInput wbar{0.1, 0.6, 0.0, 0.2};
    c = evaluate_cutoffs(par, k, level, wbar, {0.9, 0.8});
    CHECK(c.psi == doctest::Approx(theta((0.4 + 0.07) / par.M[2])).epsilon(1e-14));
    CHECK(c.phi == doctest::Approx(theta(4.0 * (0.3 + 0.05) / par.epsilon1)).epsilon(1e-14));
    CHECK(c.psi_wbar == doctest::Approx(theta((0.6 + 0.2) / par.K1)).epsilon(1e-14));
    CHECK(c.zeta == doctest::Approx(0.72).epsilon(1e-14));
}

TEST_CASE("level drift carries each coupling with its own prefactor") {
    const Grid g{2, 32};
    Workspace ws(g);
    RandomFieldParams p;
    p.decay = 0.6;
    const SpectralField v = random_divfree_field(ws, 101, p);
    const SpectralField w_prev = random_divfree_field(ws, 102, p);
    const SpectralField wbar = random_divfree_field(ws, 103, p);

    AdvectionCache cv, cw, cb;
    fill_advection_cache(ws, v, cv);
    fill_advection_cache(ws, w_prev, cw);
    fill_advection_cache(ws, wbar, cb);

    LevelCutoffs c;
    c.psi = 0.9;
    c.phi = 0.7;
    c.zeta = 0.6;
    c.psi_wbar = 0.4;

    SpectralField got(g, 2);
    assemble_level_drift(ws, cv, cw, cb, c, got);

    // expected: -(psi^2 phi^2) [ (v.g)v + zeta((w.g)v + (v.g)w) + pw((wb.g)v + (v.g)wb) ]
    const double pref = c.psi * c.psi * c.phi * c.phi;
    SpectralField term(g, 2), expect(g, 2);
    advect(ws, v, v, term);
    add_scaled(expect, term, -pref);
    advect(ws, w_prev, v, term);
    add_scaled(expect, term, -pref * c.zeta);
    advect(ws, v, w_prev, term);
    add_scaled(expect, term, -pref * c.zeta);
    advect(ws, wbar, v, term);
    add_scaled(expect, term, -pref * c.psi_wbar);
    advect(ws, v, wbar, term);
    add_scaled(expect, term, -pref * c.psi_wbar);

    double scale = max_coeff_abs(expect);
    CHECK(max_coeff_diff(got, expect) < 1e-12 * std::max(1.0, scale));

    // a zero prefactor short-circuits to the zero field
    c.phi = 0.0;
    assemble_level_drift(ws, cv, cw, cb, c, got);
    CHECK(max_coeff_abs(got) == 0.0);
}

TEST_CASE("level noise is the cutoff-weighted increment difference") {
    const Grid g{2, 32};
    Workspace ws(g);
    RandomFieldParams p;
    p.decay = 0.6;
    const SpectralField sum_with = random_divfree_field(ws, 111, p);
    const SpectralField sum_without = random_divfree_field(ws, 112, p);
    const NoiseModel model = NoiseModel::diagonal_family(4, 0.5, 2.0, 2.0, 2.0);
    std::vector<double> dW{0.03, -0.02, 0.05, 0.01};

    LevelCutoffs c;
    c.psi = 0.9;
    c.phi = 0.8;
    c.zeta = 0.7;
    c.psi_wbar = 0.6;
    const double pref = c.psi * c.psi * c.phi * c.phi * c.zeta * c.psi_wbar;

    SpectralField got(g, 2), expect(g, 2);
    accumulate_level_noise(model, 0.1, c, sum_with, sum_without, dW, got);
    model.apply_increment_diff(0.1, sum_with, sum_without, dW, pref, expect);
    CHECK(max_coeff_diff(got, expect) < 1e-15);

    c.zeta = 0.0;
    SpectralField zero(g, 2);
    accumulate_level_noise(model, 0.1, c, sum_with, sum_without, dW, zero);
    CHECK(max_coeff_abs(zero) == 0.0);
}

TEST_CASE("in the plateau regime the cascade telescopes to the monolithic remainder") {
    const Grid g{2, 32};
    Workspace ws(g);
    const DecompositionResult dec = standard_dec(ws, 7, 0.2, 3);

    CascadeConfig cfg;
    cfg.epsilon0 = dec.epsilon0;
    cfg.epsilon1 = 50.0;   // thresholds far away: every cutoff stays at 1
    cfg.M_floor = 1e3;
    cfg.M_margin = 8.0;
    cfg.K1_fixed = 1e4;
    cfg.T = 0.03;
    cfg.dt = 1e-3;

    const NoiseModel model = NoiseModel::diagonal_family(4, 0.4, 2.0, 2.0, 2.0);
    const WienerPath path(2024, cfg.dt, 30, model.modes());

    double rel = 0.0;
    cascade_vs_monolithic(ws, dec, cfg, model, path, &rel);
    CHECK(rel < 1e-12);

    const CascadeResult res = run_cascade(ws, dec, cfg, model, path);
    CHECK(res.min_cutoff == 1.0);
    CHECK_FALSE(res.tau_fired);
    CHECK(res.tau == doctest::Approx(cfg.T).epsilon(1e-12));
    CHECK(res.reconstruction_rel < 1e-12);
    for (const auto& s : res.stops) {
        CHECK(s.tau < 0.0);
        CHECK(s.rho < 0.0);
        CHECK(s.bound_violations == 0);
    }
}

TEST_CASE("assembled state and ledgers stay mutually consistent") {
    const Grid g{2, 32};
    Workspace ws(g);
    const DecompositionResult dec = standard_dec(ws, 8, 0.2, 2);

    CascadeConfig cfg;
    cfg.epsilon0 = dec.epsilon0;
    cfg.epsilon1 = 0.4;
    cfg.T = 0.05;
    cfg.dt = 1e-3;

    const NoiseModel model = NoiseModel::diagonal_family(4, 0.3, 2.0, 2.0, 2.0);
    const CascadeResult res = run_cascade(ws, dec, cfg, model, WienerPath(5, cfg.dt, 50, 4));

    const std::size_t rows = static_cast<std::size_t>(50 + 1);
    CHECK(res.u_ledger.rows() == rows);
    CHECK(res.w_ledger.rows() == rows);
    CHECK(res.wbar_ledger.rows() == rows);
    REQUIRE(res.level_ledgers.size() == dec.levels.size());
    for (const auto& lk : res.level_ledgers) CHECK(lk.rows() == rows);

    // cutoff columns are attached where they belong
    CHECK(res.u_ledger.cutoff_names.empty());
    CHECK(res.w_ledger.cutoff_names.empty());
    REQUIRE(res.wbar_ledger.cutoff_names == std::vector<std::string>{"psi_wbar"});
    const std::vector<std::string> lvl_names{"psi", "phi", "zeta", "psi_wbar"};
    for (const auto& lk : res.level_ledgers) {
        CHECK(lk.cutoff_names == lvl_names);
        for (const auto& col : lk.cutoff_cols) CHECK(col.size() == rows);
    }

    // the final assembled field is bulk + levels
    SpectralField sum = res.wbar_final;
    for (const auto& v : res.v_final) sum += v;
    CHECK(max_coeff_diff(sum, res.u_final) < 1e-12);

    // the initial ledger rows are the functionals of the initial pieces; the
    // assembled state omits the residual, so the u row agrees only up to it
    CHECK(rel_diff(res.u_ledger.l3.front(), lebesgue_norm(ws, dec.u0, 3.0)) <
          2.0 * dec.residual_bound);
    CHECK(rel_diff(res.wbar_ledger.h1.front(),
                   std::sqrt(sobolev_sq_l2(dec.w_bar0, 1.0))) < 1e-10);

    // time is uniform in every ledger
    for (std::size_t r = 1; r < rows; ++r)
        CHECK(res.u_ledger.t[r] - res.u_ledger.t[r - 1] == doctest::Approx(cfg.dt).epsilon(1e-9));
}

TEST_CASE("a tight critical threshold fires the stopping time without breaching the cap") {
    const Grid g{2, 32};
    Workspace ws(g);
    const DecompositionResult dec = standard_dec(ws, 9, 0.2, 2);

    // epsilon1 placed so level 0 starts between its stopping threshold and the
    // certified 2x cap: the stop fires right away, the cap still holds.
    // Deeper levels must start under their caps too (their data shrink by 4^k
    // while the caps shrink by 2^k, so the max below is taken by level 0).
    double eps1 = 0.0;
    for (std::size_t k = 0; k < dec.certificates.size(); ++k)
        eps1 = std::max(eps1, std::pow(2.0, static_cast<double>(k) - 1.0) *
                                  dec.certificates[k].crit * 1.05);
    REQUIRE(eps1 < dec.certificates[0].crit);  // level 0 sits beyond the threshold

    CascadeConfig cfg;
    cfg.epsilon0 = dec.epsilon0;
    cfg.epsilon1 = eps1;
    cfg.T = 0.02;
    cfg.dt = 1e-3;

    const NoiseModel model = NoiseModel::diagonal_family(3, 0.05, 2.0, 2.0, 2.0);
    const CascadeResult res = run_cascade(ws, dec, cfg, model, WienerPath(6, cfg.dt, 20, 3));

    CHECK(res.tau_fired);
    CHECK(res.tau_w >= 0.0);
    CHECK(res.tau == std::min(res.tau_w, res.tau_wbar < 0 ? res.tau_w : res.tau_wbar));
    CHECK(res.min_cutoff < 1.0);

    bool any_level_fired = false;
    for (std::size_t k = 0; k < res.stops.size(); ++k) {
        const auto& s = res.stops[k];
        const double thresh = cfg.epsilon1 / std::pow(2.0, static_cast<double>(k));
        if (s.tau >= 0.0) any_level_fired = true;
        // certified hard cap: the critical functional never exceeds twice the
        // threshold (beyond the knee the cutoff has killed the dynamics)
        CHECK(s.max_crit <= 2.0 * thresh * (1.0 + 1e-9));
        CHECK(s.bound_violations == 0);
    }
    CHECK(any_level_fired);
}

TEST_CASE("the bulk freeze stops w_bar but the levels keep evolving") {
    const Grid g{2, 32};
    Workspace ws(g);
    const DecompositionResult dec = standard_dec(ws, 10, 0.2, 2);

    CascadeConfig cfg;
    cfg.epsilon0 = dec.epsilon0;
    cfg.epsilon1 = 10.0;
    // K1 barely above K0: the bulk subcritical functional immediately leaves
    // the plateau once the noise pushes it
    cfg.K1_fixed = dec.K0 * 1.0001;
    cfg.T = 0.05;
    cfg.dt = 1e-3;

    const NoiseModel model = NoiseModel::diagonal_family(3, 1.5, 2.0, 3.0, 2.0);
    const CascadeResult res = run_cascade(ws, dec, cfg, model, WienerPath(11, cfg.dt, 50, 3));

    REQUIRE(res.tau_wbar >= 0.0);
    const auto& wb = res.wbar_ledger;
    std::size_t first_frozen = wb.rows();
    for (std::size_t r = 0; r < wb.rows(); ++r)
        if (wb.frozen[r] != 0) {
            first_frozen = r;
            break;
        }
    REQUIRE(first_frozen < wb.rows());
    for (std::size_t r = first_frozen + 1; r < wb.rows(); ++r) {
        CHECK(wb.h1[r] == wb.h1[first_frozen]);
        CHECK(wb.frozen[r] != 0);
    }
    // levels are not frozen by the bulk stop
    for (const auto& lk : res.level_ledgers) CHECK(lk.frozen.back() == 0);
}

TEST_CASE("the Sobolev-mode cascade runs with its own functionals") {
    const Grid g{2, 32};
    Workspace ws(g);
    const DecompositionResult dec = standard_dec(ws, 12, 0.3, 2, SplitNorm::H12);

    CascadeConfig cfg;
    cfg.epsilon0 = dec.epsilon0;
    cfg.epsilon1 = 0.6;
    cfg.mode = CascadeMode::H12;
    cfg.T = 0.02;
    cfg.dt = 1e-3;

    const NoiseModel model = NoiseModel::diagonal_family(3, 0.3, 2.0, 2.0, 2.0);
    const CascadeResult res = run_cascade(ws, dec, cfg, model, WienerPath(13, cfg.dt, 20, 3));

    CHECK(res.reconstruction_rel < 1e-12);
    CHECK(res.u_ledger.rows() == 21);
    // H12 mode keeps the running Sobolev integrals that feed the cutoffs
    CHECK(res.u_ledger.h32_int.back() > 0.0);
    CHECK(res.u_ledger.h2_int.back() > 0.0);
    for (const auto& s : res.stops) CHECK(s.bound_violations == 0);
}
