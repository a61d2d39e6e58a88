#include <cmath>
#include <vector>

#include "doctest.h"
#include "snse/errors.hpp"
#include "snse/integrator.hpp"
#include "snse/operators.hpp"
#include "snse/random_fields.hpp"
#include "snse/rng.hpp"
#include "test_util.hpp"

using namespace snse;
using namespace snse::test;

namespace {

SpectralField random_divfree(Workspace& ws, std::uint64_t seed, double amp = 1.0) {
    RandomFieldParams p;
    p.decay = 0.5;
    p.amplitude = amp;
    return random_divfree_field(ws, seed, p);
}

}  // namespace

TEST_CASE("scheme names round-trip and junk is rejected") {
    CHECK(scheme_from_string("exponential_em") == Scheme::exponential_em);
    CHECK(scheme_from_string("semi_implicit_em") == Scheme::semi_implicit_em);
    CHECK(to_string(Scheme::exponential_em) == "exponential_em");
    CHECK(to_string(Scheme::semi_implicit_em) == "semi_implicit_em");
    CHECK_THROWS_AS(scheme_from_string("euler"), ConfigError);
}

TEST_CASE("a single step applies the stabilizing factor mode by mode") {
    const Grid g{2, 16};
    const SpectralField u0 = random_band_field(g, 2, 3);
    const SpectralField drift = random_band_field(g, 2, 4);
    const SpectralField noise = random_band_field(g, 2, 5);
    const double dt = 2e-3;

    for (const Scheme sch : {Scheme::exponential_em, Scheme::semi_implicit_em}) {
        SpectralField u = u0;
        em_step(sch, dt, u, drift, noise);
        double worst = 0.0;
        for (int c = 0; c < 2; ++c)
            for (std::int64_t m = 0; m < u.modes(); ++m) {
                const double k2 = wavevector_sq(wavevector(g, m));
                const cplx inner = u0.at(c, m) + dt * drift.at(c, m) + noise.at(c, m);
                const cplx expect = sch == Scheme::exponential_em
                                        ? std::exp(-k2 * dt) * inner
                                        : inner / (1.0 + k2 * dt);
                worst = std::max(worst, std::abs(u.at(c, m) - expect));
            }
        CHECK(worst < 1e-15);
    }
}

TEST_CASE("drift-free noise-free paths decay exactly per mode") {
    for (const Grid g : {Grid{2, 16}, Grid{3, 8}}) {
        Workspace ws(g);
        const SpectralField u0 = random_divfree(ws, 8);
        const double dt = 1e-3, T = 0.1;
        const int steps = 100;
        const Evolution evo = heat_evolution(NoiseModel::zero());
        const WienerPath path(1, dt, steps, 1);
        const PathResult res = simulate_path(ws, u0, evo, path);

        double worst = 0.0;
        for (int c = 0; c < g.dim; ++c)
            for (std::int64_t m = 0; m < u0.modes(); ++m) {
                const double k2 = wavevector_sq(wavevector(g, m));
                const cplx expect = u0.at(c, m) * std::exp(-k2 * T);
                worst = std::max(worst, std::abs(res.u_final.at(c, m) - expect));
            }
        CHECK(worst < 1e-13);
        CHECK_FALSE(res.frozen);
        CHECK(res.ledger.rows() == static_cast<std::size_t>(steps + 1));
        CHECK(res.ledger.t.front() == 0.0);
        CHECK(res.ledger.t.back() == doctest::Approx(T).epsilon(1e-12));
    }
}

TEST_CASE("the semi-implicit factor compounds as a rational power") {
    const Grid g{2, 16};
    Workspace ws(g);
    const SpectralField u0 = random_divfree(ws, 12);
    const double dt = 1e-3;
    const int steps = 50;
    const Evolution evo = heat_evolution(NoiseModel::zero());
    SimulateOptions opts;
    opts.scheme = Scheme::semi_implicit_em;
    const PathResult res = simulate_path(ws, u0, evo, WienerPath(1, dt, steps, 1), opts);
    double worst = 0.0;
    for (int c = 0; c < 2; ++c)
        for (std::int64_t m = 0; m < u0.modes(); ++m) {
            const double k2 = wavevector_sq(wavevector(g, m));
            const cplx expect = u0.at(c, m) / std::pow(1.0 + k2 * dt, steps);
            worst = std::max(worst, std::abs(res.u_final.at(c, m) - expect));
        }
    CHECK(worst < 1e-13);
}

TEST_CASE("identical seeds reproduce a stochastic path bit for bit") {
    const Grid g{2, 16};
    Workspace ws(g);
    const SpectralField u0 = random_divfree(ws, 20);
    const NoiseModel model = NoiseModel::diagonal_family(4, 0.4, 2.0, 2.0, 2.0);
    const Evolution evo = navier_stokes_evolution(model);
    const WienerPath path(42, 1e-3, 50, model.modes());

    const PathResult a = simulate_path(ws, u0, evo, path);
    const PathResult b = simulate_path(ws, u0, evo, path);
    CHECK(max_coeff_diff(a.u_final, b.u_final) == 0.0);
    CHECK(a.ledger.l3 == b.ledger.l3);

    const PathResult c = simulate_path(ws, u0, evo, WienerPath(43, 1e-3, 50, model.modes()));
    CHECK(max_coeff_diff(a.u_final, c.u_final) > 0.0);
}

TEST_CASE("the nonlinear evolution drift is the projected advection term") {
    const Grid g{2, 16};
    Workspace ws(g);
    const SpectralField u = random_divfree(ws, 33);
    const Evolution evo = navier_stokes_evolution(NoiseModel::zero());
    SpectralField drift(g, 2), expect(g, 2);
    evo.drift(ws, 0.0, u, drift);
    nonlinear_term(ws, u, expect);
    CHECK(max_coeff_diff(drift, expect) < 1e-15);
}

TEST_CASE("freeze monitor stops the path and carries the state constantly") {
    const Grid g{2, 16};
    Workspace ws(g);
    const SpectralField u0 = random_divfree(ws, 44);
    const double dt = 1e-3;
    const int steps = 60;
    const Evolution evo = heat_evolution(NoiseModel::zero());

    // freeze as soon as t passes 0.02; from then on the ledger must repeat
    SimulateOptions opts;
    opts.freeze_when = [](double t, const NormBundle&, const SpectralField&) { return t >= 0.02; };
    const PathResult res = simulate_path(ws, u0, evo, WienerPath(9, dt, steps, 1), opts);

    CHECK(res.frozen);
    CHECK(res.freeze_time >= 0.02 - 1e-12);
    CHECK(res.freeze_time <= 0.02 + dt + 1e-12);
    REQUIRE(res.ledger.rows() == static_cast<std::size_t>(steps + 1));
    CHECK(res.ledger.frozen.front() == 0);
    CHECK(res.ledger.frozen.back() != 0);
    // flags are monotone and the tracked values stop moving once set
    std::size_t first_frozen = res.ledger.rows();
    for (std::size_t r = 0; r < res.ledger.rows(); ++r) {
        if (res.ledger.frozen[r] != 0) {
            first_frozen = std::min(first_frozen, r);
        } else {
            CHECK(first_frozen == res.ledger.rows());  // no flag before the freeze
        }
    }
    REQUIRE(first_frozen < res.ledger.rows());
    for (std::size_t r = first_frozen; r < res.ledger.rows(); ++r) {
        CHECK(res.ledger.l3[r] == res.ledger.l3[first_frozen]);
        CHECK(res.ledger.h1[r] == res.ledger.h1[first_frozen]);
    }
    // the frozen state is the heat solution at the freeze time
    const double k2_11 = 2.0;
    const cplx expect = u0.at(0, {1, 1, 0}) * std::exp(-k2_11 * res.freeze_time);
    CHECK(std::abs(res.u_final.at(0, {1, 1, 0}) - expect) < 1e-12);
}

TEST_CASE("dense recording honors the stride and mirrors the Wiener path") {
    const Grid g{2, 16};
    Workspace ws(g);
    const SpectralField u0 = random_divfree(ws, 50);
    const NoiseModel model = NoiseModel::diagonal_family(3, 0.3, 2.0, 2.0, 2.0);
    const Evolution evo = heat_evolution(model);
    const double dt = 1e-3;
    const int steps = 40;
    const WienerPath path(77, dt, steps, model.modes());

    DenseOutput dense;
    dense.stride = 4;
    SimulateOptions opts;
    opts.dense = &dense;
    simulate_path(ws, u0, evo, path, opts);

    REQUIRE(dense.t.size() == static_cast<std::size_t>(steps / 4 + 1));
    REQUIRE(dense.u.size() == dense.t.size());
    REQUIRE(dense.W.size() == dense.t.size());
    std::vector<double> w(static_cast<std::size_t>(model.modes()));
    for (std::size_t i = 0; i < dense.t.size(); ++i) {
        CHECK(dense.t[i] == doctest::Approx(4.0 * i * dt).epsilon(1e-12));
        path.cumulative(static_cast<int>(4 * i), w);
        REQUIRE(dense.W[i].size() == w.size());
        for (std::size_t k = 0; k < w.size(); ++k) CHECK(std::abs(dense.W[i][k] - w[k]) < 1e-14);
    }
    // the first dense snapshot is the initial state
    CHECK(max_coeff_diff(dense.u.front(), u0) == 0.0);
}

TEST_CASE("ledger stride reduces the recorded rows") {
    const Grid g{2, 16};
    Workspace ws(g);
    const SpectralField u0 = random_divfree(ws, 51);
    SimulateOptions opts;
    opts.ledger_stride = 5;
    const PathResult res =
        simulate_path(ws, u0, heat_evolution(NoiseModel::zero()), WienerPath(1, 1e-3, 40, 1), opts);
    CHECK(res.ledger.rows() == static_cast<std::size_t>(40 / 5 + 1));
}

TEST_CASE("blow-up raises a numerical error with the failure time") {
    const Grid g{2, 16};
    Workspace ws(g);
    const SpectralField u0 = random_divfree(ws, 60, 2.0e6);  // above the blow-up threshold
    try {
        simulate_path(ws, u0, heat_evolution(NoiseModel::zero()), WienerPath(1, 1e-3, 10, 1));
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.t >= 0.0);
    }
}
