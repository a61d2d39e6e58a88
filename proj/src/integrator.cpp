#include "snse/integrator.hpp"

#include <cmath>

#include "snse/errors.hpp"
#include "snse/norms.hpp"
#include "snse/operators.hpp"

namespace snse {

Scheme scheme_from_string(const std::string& s) {
    if (s == "exponential-em") return Scheme::exponential_em;
    if (s == "semi-implicit-em") return Scheme::semi_implicit_em;
    throw ConfigError("unknown scheme '" + s + "' (exponential-em | semi-implicit-em)");
}

std::string to_string(Scheme s) {
    return s == Scheme::exponential_em ? "exponential-em" : "semi-implicit-em";
}

void em_step(Scheme scheme, double dt, SpectralField& u, const SpectralField& drift,
             const SpectralField& noise_increment) {
    const Grid& g = u.grid;
    for (std::int64_t m = 0; m < g.points(); ++m) {
        const double k2 = wavevector_sq(wavevector(g, m));
        const double factor =
            scheme == Scheme::exponential_em ? std::exp(-k2 * dt) : 1.0 / (1.0 + k2 * dt);
        for (int c = 0; c < u.ncomp; ++c) {
            cplx v = u.at(c, m) + dt * drift.at(c, m) + noise_increment.at(c, m);
            u.at(c, m) = factor * v;
        }
    }
}

namespace {

// Running trapezoid integrals of the dissipation-rate functionals; advanced
// every step so the ledger stride does not change the integrals.
struct Accumulators {
    double d3 = 0.0, d6 = 0.0, h32 = 0.0, h2 = 0.0;

    void advance(const NormBundle& prev, const NormBundle& b, double dt) {
        d3 += 0.5 * (prev.d3 + b.d3) * dt;
        d6 += 0.5 * (prev.d6 + b.d6) * dt;
        h32 += 0.5 * (prev.h32_sq + b.h32_sq) * dt;
        h2 += 0.5 * (prev.h2_sq + b.h2_sq) * dt;
    }
};

void append_row(EnergyLedger& led, double t, const NormBundle& b, const Accumulators& acc,
                bool frozen) {
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
}

}  // namespace

PathResult simulate_path(Workspace& ws, const SpectralField& u0, const Evolution& evo,
                         const WienerPath& path, const SimulateOptions& opts) {
    const double dt = path.dt();
    PathResult res;
    res.u_final = u0;
    SpectralField& u = res.u_final;
    SpectralField drift(u.grid, u.ncomp);
    SpectralField noise_incr(u.grid, u.ncomp);
    std::vector<double> dW(static_cast<std::size_t>(path.modes()));
    std::vector<double> Wcum(static_cast<std::size_t>(path.modes()), 0.0);

    NormBundle prev = norm_bundle(ws, u);
    Accumulators acc;
    if (opts.record_ledger) {
        res.ledger.reserve(static_cast<std::size_t>(path.steps()) + 1);
        append_row(res.ledger, 0.0, prev, acc, false);
    }
    if (opts.dense) {
        opts.dense->t.push_back(0.0);
        opts.dense->u.push_back(u);
        opts.dense->W.push_back(Wcum);
    }

    double t = 0.0;
    for (int step = 0; step < path.steps(); ++step) {
        path.increments(step, dW);
        for (std::size_t k = 0; k < dW.size(); ++k) Wcum[k] += dW[k];

        if (!res.frozen) {
            evo.drift(ws, t, u, drift);
            noise_incr.set_zero();
            if (evo.noise) {
                evo.noise(t, u, dW, noise_incr);
            } else {
                evo.model.apply_increment(t, u, dW, 1.0, noise_incr);
            }
            em_step(opts.scheme, dt, u, drift, noise_incr);
        }
        t = (step + 1) * dt;

        NormBundle b = prev;
        if (!res.frozen) {
            b = norm_bundle(ws, u);
            if (!std::isfinite(b.l3) || b.l3 > kBlowUpThreshold || b.l6 > kBlowUpThreshold)
                throw NumericalError("blow-up: L^p norm exceeded threshold at t = " +
                                         std::to_string(t),
                                     t);
            acc.advance(prev, b, dt);
        }
        if (opts.record_ledger &&
            ((step + 1) % opts.ledger_stride == 0 || step + 1 == path.steps()))
            append_row(res.ledger, t, b, acc, res.frozen);
        if (!res.frozen && opts.freeze_when && opts.freeze_when(t, b, u)) {
            res.frozen = true;
            res.freeze_time = t;
        }
        prev = b;

        if (opts.dense && (step + 1) % opts.dense->stride == 0) {
            opts.dense->t.push_back(t);
            opts.dense->u.push_back(u);
            opts.dense->W.push_back(Wcum);
        }
    }
    return res;
}

Evolution navier_stokes_evolution(const NoiseModel& model) {
    Evolution evo;
    evo.model = model;
    evo.drift = [](Workspace& ws, double, const SpectralField& u, SpectralField& drift) {
        nonlinear_term(ws, u, drift);
    };
    return evo;
}

Evolution heat_evolution(const NoiseModel& model) {
    Evolution evo;
    evo.model = model;
    evo.drift = [](Workspace&, double, const SpectralField& u, SpectralField& drift) {
        drift = SpectralField(u.grid, u.ncomp);
    };
    return evo;
}

}  // namespace snse
