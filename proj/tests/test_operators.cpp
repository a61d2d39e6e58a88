#include <cmath>
#include <vector>

#include "doctest.h"
#include "snse/field.hpp"
#include "snse/fourier.hpp"
#include "snse/operators.hpp"
#include "snse/random_fields.hpp"
#include "test_util.hpp"

using namespace snse;
using namespace snse::test;

namespace {

SpectralField random_divfree(Workspace& ws, std::uint64_t seed, double decay = 0.4) {
    RandomFieldParams p;
    p.decay = decay;
    return random_divfree_field(ws, seed, p);
}

}  // namespace

TEST_CASE("Leray projection of a single gradient-bearing mode, by hand") {
    // f = e1 at n0 = (1,2):  (P f)(n0) = e1 - n0 (n0.e1)/|n0|^2 = (4/5, -2/5)
    const Grid g{2, 16};
    SpectralField f(g, 2);
    f.at(0, {1, 2, 0}) = cplx{1.0, 0.0};
    f.at(0, {-1, -2, 0}) = cplx{1.0, 0.0};
    leray_project(f);
    CHECK(std::abs(f.at(0, {1, 2, 0}) - cplx{0.8, 0.0}) < 1e-15);
    CHECK(std::abs(f.at(1, {1, 2, 0}) - cplx{-0.4, 0.0}) < 1e-15);
    CHECK(std::abs(f.at(0, {-1, -2, 0}) - cplx{0.8, 0.0}) < 1e-15);
    CHECK(std::abs(f.at(1, {-1, -2, 0}) - cplx{-0.4, 0.0}) < 1e-15);
}

TEST_CASE("Leray projector is idempotent, self-adjoint and a contraction") {
    for (const Grid g : {Grid{2, 16}, Grid{3, 8}}) {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const SpectralField f = random_band_field(g, g.dim, seed);
            const SpectralField pf = leray_projected(f);
            CHECK(max_divergence_rel(pf) < 1e-13);
            const SpectralField ppf = leray_projected(pf);
            CHECK(max_coeff_diff(pf, ppf) < 1e-14);

            const SpectralField h = random_band_field(g, g.dim, seed + 1000);
            const double lhs = l2_inner(pf, h);
            const double rhs = l2_inner(f, leray_projected(h));
            CHECK(rel_diff(lhs, rhs) < 1e-11);

            CHECK(l2_inner(pf, pf) <= l2_inner(f, f) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("projection leaves divergence-free fields untouched") {
    const Grid g{2, 16};
    Workspace ws(g);
    const SpectralField u = random_divfree(ws, 7);
    const SpectralField pu = leray_projected(u);
    CHECK(max_coeff_diff(u, pu) < 1e-14);
}

TEST_CASE("advection of crossed shear modes matches the hand computation") {
    // u = (sin y, 0), b = (0, sin x):  (u.grad) b = (0, sin y cos x)
    //   sin y cos x = [sin(x+y) - sin(x-y)]/2
    // so ghat_2 = -i/4 at (1,1), +i/4 at (1,-1), and conjugates.
    // After projection: at (1,1) P g = (i/8, -i/8); at (1,-1) P g = (i/8, i/8).
    const Grid g{2, 16};
    Workspace ws(g);
    SpectralField u(g, 2), b(g, 2);
    u.at(0, {0, 1, 0}) = cplx{0.0, -0.5};  // sin y
    u.at(0, {0, -1, 0}) = cplx{0.0, 0.5};
    b.at(1, {1, 0, 0}) = cplx{0.0, -0.5};  // sin x
    b.at(1, {-1, 0, 0}) = cplx{0.0, 0.5};

    SpectralField out(g, 2);
    advect(ws, u, b, out);

    CHECK(std::abs(out.at(0, {1, 1, 0}) - cplx{0.0, 0.125}) < 1e-14);
    CHECK(std::abs(out.at(1, {1, 1, 0}) - cplx{0.0, -0.125}) < 1e-14);
    CHECK(std::abs(out.at(0, {1, -1, 0}) - cplx{0.0, 0.125}) < 1e-14);
    CHECK(std::abs(out.at(1, {1, -1, 0}) - cplx{0.0, 0.125}) < 1e-14);
    CHECK(std::abs(out.at(0, {-1, -1, 0}) - cplx{0.0, -0.125}) < 1e-14);
    CHECK(std::abs(out.at(1, {-1, -1, 0}) - cplx{0.0, 0.125}) < 1e-14);
    CHECK(std::abs(out.at(0, {-1, 1, 0}) - cplx{0.0, -0.125}) < 1e-14);
    CHECK(std::abs(out.at(1, {-1, 1, 0}) - cplx{0.0, -0.125}) < 1e-14);

    // everything else is zero
    double rest = 0.0;
    for (std::int64_t m = 0; m < out.modes(); ++m) {
        const auto fr = wavevector(g, m);
        if (std::abs(fr[0]) == 1 && std::abs(fr[1]) == 1) continue;
        rest = std::max(rest, std::max(std::abs(out.at(0, m)), std::abs(out.at(1, m))));
    }
    CHECK(rest < 1e-14);
}

TEST_CASE("the Taylor-Green nonlinearity is a pure gradient") {
    const Grid g{2, 32};
    Workspace ws(g);
    const SpectralField u = taylor_green(g);
    SpectralField out(g, 2);
    nonlinear_term(ws, u, out);
    CHECK(max_coeff_abs(out) < 1e-14);
}

TEST_CASE("advection is bilinear") {
    const Grid g{2, 16};
    Workspace ws(g);
    const SpectralField a = random_divfree(ws, 21);
    const SpectralField b = random_divfree(ws, 22);
    const SpectralField c = random_divfree(ws, 23);

    SpectralField ab(g, 2), cb(g, 2), sum_b(g, 2);
    advect(ws, a, b, ab);
    advect(ws, c, b, cb);
    SpectralField ac = a;
    ac += c;
    advect(ws, ac, b, sum_b);
    SpectralField expect = ab;
    expect += cb;
    CHECK(max_coeff_diff(sum_b, expect) < 1e-12);
}

TEST_CASE("cache-based advection agrees with the convenience overload") {
    const Grid g{2, 16};
    Workspace ws(g);
    const SpectralField a = random_divfree(ws, 31);
    const SpectralField b = random_divfree(ws, 32);

    AdvectionCache ca, cb;
    fill_advection_cache(ws, a, ca);
    fill_advection_cache(ws, b, cb);
    SpectralField via_cache(g, 2), direct(g, 2);
    advect(ws, ca, cb, via_cache);
    advect(ws, a, b, direct);
    CHECK(max_coeff_diff(via_cache, direct) < 1e-14);

    // accumulate_advection is drift-signed: finishing it yields -P((a.grad)b)
    std::vector<std::vector<double>> acc(2);
    for (auto& v : acc) v.assign(static_cast<std::size_t>(g.points()), 0.0);
    accumulate_advection(ca, cb, 1.0, acc);
    SpectralField drift(g, 2);
    finish_advect(ws, acc, drift);
    SpectralField neg = direct;
    neg *= -1.0;
    CHECK(max_coeff_diff(drift, neg) < 1e-13);

    // cache addition distributes over the velocity slot
    AdvectionCache cab = ca;
    cab.add(cb, 2.0);
    SpectralField mixed(g, 2);
    advect(ws, cab, cb, mixed);
    SpectralField bb(g, 2);
    advect(ws, cb, cb, bb);
    SpectralField expect = direct;  // (a.grad)b
    add_scaled(expect, bb, 2.0);
    CHECK(max_coeff_diff(mixed, expect) < 1e-12);
}

TEST_CASE("energy flux of the projected nonlinearity cancels") {
    for (const Grid g : {Grid{2, 16}, Grid{2, 32}, Grid{3, 12}}) {
        Workspace ws(g);
        for (std::uint64_t seed = 100; seed < 112; ++seed) {
            const SpectralField u = random_divfree(ws, seed);
            const double e = std::pow(l2_inner(u, u), 1.5);
            CHECK(std::abs(energy_flux(ws, u)) <= 1e-9 * std::max(1.0, e));
        }
    }
}

TEST_CASE("shell filters partition and dealiasing truncates per axis") {
    const Grid g{2, 16};
    const SpectralField f = random_band_field(g, 2, 77);

    SpectralField low = f, high = f;
    lowpass_shell(low, 3.0);
    highpass_shell(high, 3.0);
    for (std::int64_t m = 0; m < f.modes(); ++m) {
        const double k = std::sqrt(wavevector_sq(wavevector(g, m)));
        for (int c = 0; c < 2; ++c) {
            if (k <= 3.0) {
                CHECK(low.at(c, m) == f.at(c, m));
                CHECK(std::abs(high.at(c, m)) == 0.0);
            } else {
                CHECK(std::abs(low.at(c, m)) == 0.0);
                CHECK(high.at(c, m) == f.at(c, m));
            }
        }
    }
    SpectralField sum = low;
    sum += high;
    CHECK(max_coeff_diff(sum, f) == 0.0);

    SpectralField d = f;
    dealias_truncate(d);
    const int cap = g.dealias_mode();
    for (std::int64_t m = 0; m < f.modes(); ++m) {
        const auto fr = wavevector(g, m);
        const bool outside = std::abs(fr[0]) > cap || std::abs(fr[1]) > cap;
        for (int c = 0; c < 2; ++c) {
            if (outside)
                CHECK(std::abs(d.at(c, m)) == 0.0);
            else
                CHECK(d.at(c, m) == f.at(c, m));
        }
    }
}

TEST_CASE("radial multipliers act mode by mode") {
    const Grid g{2, 16};
    SpectralField f = random_band_field(g, 1, 55);
    const SpectralField orig = f;
    apply_multiplier(f, [](double k2) { return std::exp(-0.1 * k2); });
    for (std::int64_t m = 0; m < f.modes(); ++m) {
        const double k2 = wavevector_sq(wavevector(g, m));
        CHECK(std::abs(f.at(0, m) - orig.at(0, m) * std::exp(-0.1 * k2)) < 1e-15);
    }
}
