#include "snse/operators.hpp"

#include <cassert>
#include <cmath>

namespace snse {

void leray_project(SpectralField& f) {
    const Grid& g = f.grid;
    for (std::int64_t m = 0; m < g.points(); ++m) {
        auto k = wavevector(g, m);
        const double k2 = wavevector_sq(k);
        if (k2 == 0.0) {
            for (int c = 0; c < f.ncomp; ++c) f.at(c, m) = {0.0, 0.0};
            continue;
        }
        cplx kdotf{0.0, 0.0};
        for (int c = 0; c < f.ncomp; ++c) kdotf += double(k[c]) * f.at(c, m);
        kdotf /= k2;
        for (int c = 0; c < f.ncomp; ++c) f.at(c, m) -= double(k[c]) * kdotf;
    }
}

SpectralField leray_projected(const SpectralField& f) {
    SpectralField g = f;
    leray_project(g);
    return g;
}

void apply_multiplier(SpectralField& f, const std::function<double(double)>& m) {
    const Grid& g = f.grid;
    for (std::int64_t i = 0; i < g.points(); ++i) {
        const double w = m(wavevector_sq(wavevector(g, i)));
        for (int c = 0; c < f.ncomp; ++c) f.at(c, i) *= w;
    }
}

void lowpass_shell(SpectralField& f, double r) {
    const Grid& g = f.grid;
    const double r2 = r * r;
    for (std::int64_t i = 0; i < g.points(); ++i) {
        if (wavevector_sq(wavevector(g, i)) > r2)
            for (int c = 0; c < f.ncomp; ++c) f.at(c, i) = {0.0, 0.0};
    }
}

void highpass_shell(SpectralField& f, double r) {
    const Grid& g = f.grid;
    const double r2 = r * r;
    for (std::int64_t i = 0; i < g.points(); ++i) {
        if (wavevector_sq(wavevector(g, i)) <= r2)
            for (int c = 0; c < f.ncomp; ++c) f.at(c, i) = {0.0, 0.0};
    }
}

void dealias_truncate(SpectralField& f) {
    const Grid& g = f.grid;
    const int kd = g.dealias_mode();
    for (std::int64_t i = 0; i < g.points(); ++i) {
        auto k = wavevector(g, i);
        bool keep = true;
        for (int a = 0; a < g.dim; ++a)
            if (std::abs(k[a]) > kd) keep = false;
        if (!keep)
            for (int c = 0; c < f.ncomp; ++c) f.at(c, i) = {0.0, 0.0};
    }
}

void AdvectionCache::add(const AdvectionCache& o, double s) {
    for (std::size_t i = 0; i < comp.size(); ++i)
        for (std::size_t j = 0; j < comp[i].size(); ++j) comp[i][j] += s * o.comp[i][j];
    for (std::size_t i = 0; i < grad.size(); ++i)
        for (std::size_t j = 0; j < grad[i].size(); ++j) grad[i][j] += s * o.grad[i][j];
}

void AdvectionCache::set_zero() {
    for (auto& v : comp) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : grad) std::fill(v.begin(), v.end(), 0.0);
}

void fill_advection_cache(Workspace& ws, const SpectralField& u, AdvectionCache& out) {
    const Grid& g = u.grid;
    const std::size_t npts = static_cast<std::size_t>(g.points());
    out.grid = g;
    out.ncomp = u.ncomp;
    out.comp.resize(u.ncomp);
    out.grad.resize(static_cast<std::size_t>(u.ncomp) * g.dim);

    std::vector<cplx> tmp(npts);
    for (int c = 0; c < u.ncomp; ++c) {
        auto src = u.component(c);
        // dealiased copy: products of two such fields are alias-free
        for (std::int64_t m = 0; m < g.points(); ++m) {
            auto k = wavevector(g, m);
            bool keep = !on_nyquist(g, m);
            for (int a = 0; a < g.dim && keep; ++a)
                if (std::abs(k[a]) > g.dealias_mode()) keep = false;
            tmp[m] = keep ? src[m] : cplx{0.0, 0.0};
        }
        out.comp[c].resize(npts);
        ws.to_physical(tmp, 1, out.comp[c]);

        for (int a = 0; a < g.dim; ++a) {
            std::vector<cplx> der(npts);
            for (std::int64_t m = 0; m < g.points(); ++m) {
                auto k = wavevector(g, m);
                der[m] = tmp[m] * cplx{0.0, double(k[a])};
            }
            auto& dst = out.grad[static_cast<std::size_t>(c) * g.dim + a];
            dst.resize(npts);
            ws.to_physical(der, 1, dst);
        }
    }
}

void accumulate_advection(const AdvectionCache& a, const AdvectionCache& b, double s,
                          std::vector<std::vector<double>>& phys_accum) {
    const int dim = a.grid.dim;
    const std::size_t npts = a.comp[0].size();
    for (int i = 0; i < dim; ++i) {
        double* acc = phys_accum[i].data();
        for (int ax = 0; ax < dim; ++ax) {
            const double* vel = a.comp[ax].data();
            const double* gr = b.grad[static_cast<std::size_t>(i) * dim + ax].data();
            for (std::size_t j = 0; j < npts; ++j) acc[j] -= s * vel[j] * gr[j];
        }
    }
}

void finish_advect(Workspace& ws, const std::vector<std::vector<double>>& phys_accum,
                   SpectralField& out) {
    const Grid& g = ws.grid();
    out = SpectralField(g, g.dim);
    for (int i = 0; i < g.dim; ++i) ws.to_coeffs(phys_accum[i], out.component(i));
    dealias_truncate(out);
    out.component(0)[0] = {0.0, 0.0};  // advection of mean-zero fields keeps no mean
    for (int c = 1; c < out.ncomp; ++c) out.component(c)[0] = {0.0, 0.0};
    leray_project(out);
}

void advect(Workspace& ws, const AdvectionCache& a, const AdvectionCache& b, SpectralField& out) {
    const Grid& g = a.grid;
    const std::size_t npts = a.comp[0].size();
    std::vector<std::vector<double>> accum(g.dim, std::vector<double>(npts, 0.0));
    accumulate_advection(a, b, -1.0, accum);  // accumulate is drift-signed
    finish_advect(ws, accum, out);
}

void advect(Workspace& ws, const SpectralField& a, const SpectralField& b, SpectralField& out) {
    AdvectionCache ca, cb;
    fill_advection_cache(ws, a, ca);
    if (&a == &b) {
        advect(ws, ca, ca, out);
    } else {
        fill_advection_cache(ws, b, cb);
        advect(ws, ca, cb, out);
    }
}

void nonlinear_term(Workspace& ws, const SpectralField& u, SpectralField& out) {
    advect(ws, u, u, out);
    out *= -1.0;
}

double energy_flux(Workspace& ws, const SpectralField& u) {
    SpectralField adv;
    advect(ws, u, u, adv);
    return l2_inner(adv, u);
}

}  // namespace snse
