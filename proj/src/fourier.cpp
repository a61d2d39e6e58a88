#include "snse/fourier.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

namespace snse {

namespace {
// fftw planning is not thread safe; execution on distinct plans is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct Workspace::Plans {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    std::int64_t npts = 0;
    std::vector<std::int64_t> embed;  // base flat mode -> flat index on this grid

    ~Plans() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (inv) fftw_destroy_plan(inv);
        if (in) fftw_free(in);
        if (out) fftw_free(out);
    }
};

Workspace::Workspace(const Grid& g) : grid_(g), scratch_(8) {}
Workspace::~Workspace() = default;

Workspace::Plans& Workspace::plans_for(int oversample) {
    auto it = plans_.find(oversample);
    if (it != plans_.end()) return *it->second;

    auto p = std::make_unique<Plans>();
    const int big_n = grid_.n * oversample;
    std::int64_t npts = 1;
    int dims[3] = {big_n, big_n, big_n};
    for (int a = 0; a < grid_.dim; ++a) npts *= big_n;
    p->npts = npts;
    p->in = fftw_alloc_complex(static_cast<std::size_t>(npts));
    p->out = fftw_alloc_complex(static_cast<std::size_t>(npts));
    {
        // FFTW_ESTIMATE: plan choice must not depend on runtime timings, so
        // repeated runs produce bit-identical results.
        std::lock_guard<std::mutex> lock(plan_mutex());
        p->fwd = fftw_plan_dft(grid_.dim, dims, p->in, p->out, FFTW_FORWARD, FFTW_ESTIMATE);
        p->inv = fftw_plan_dft(grid_.dim, dims, p->in, p->out, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    Grid big{grid_.dim, big_n};
    p->embed.resize(static_cast<std::size_t>(grid_.points()));
    for (std::int64_t m = 0; m < grid_.points(); ++m) {
        auto k = wavevector(grid_, m);
        p->embed[m] = on_nyquist(grid_, m) ? -1 : flat_index(big, k);
    }

    auto& ref = *p;
    plans_.emplace(oversample, std::move(p));
    return ref;
}

void Workspace::to_physical(std::span<const cplx> coeffs, int oversample, std::span<double> out) {
    Plans& p = plans_for(oversample);
    std::memset(p.in, 0, sizeof(fftw_complex) * static_cast<std::size_t>(p.npts));
    for (std::int64_t m = 0; m < grid_.points(); ++m) {
        const std::int64_t big = p.embed[m];
        if (big < 0) continue;
        p.in[big][0] = coeffs[m].real();
        p.in[big][1] = coeffs[m].imag();
    }
    fftw_execute(p.inv);
    for (std::int64_t i = 0; i < p.npts; ++i) out[i] = p.out[i][0];
}

void Workspace::to_spectrum(std::span<const double> phys, int oversample, std::span<cplx> spectrum) {
    Plans& p = plans_for(oversample);
    for (std::int64_t i = 0; i < p.npts; ++i) {
        p.in[i][0] = phys[i];
        p.in[i][1] = 0.0;
    }
    fftw_execute(p.fwd);
    const double scale = 1.0 / static_cast<double>(p.npts);
    for (std::int64_t i = 0; i < p.npts; ++i)
        spectrum[i] = cplx{p.out[i][0] * scale, p.out[i][1] * scale};
}

void Workspace::to_coeffs(std::span<const double> phys, std::span<cplx> coeffs) {
    Plans& p = plans_for(1);
    for (std::int64_t i = 0; i < p.npts; ++i) {
        p.in[i][0] = phys[i];
        p.in[i][1] = 0.0;
    }
    fftw_execute(p.fwd);
    const double scale = 1.0 / static_cast<double>(p.npts);
    for (std::int64_t m = 0; m < grid_.points(); ++m) {
        if (on_nyquist(grid_, m)) {
            coeffs[m] = cplx{0.0, 0.0};
        } else {
            coeffs[m] = cplx{p.out[m][0] * scale, p.out[m][1] * scale};
        }
    }
}

void Workspace::spectrum_to_physical(std::span<const cplx> spectrum, int oversample,
                                     std::span<double> out) {
    Plans& p = plans_for(oversample);
    for (std::int64_t i = 0; i < p.npts; ++i) {
        p.in[i][0] = spectrum[i].real();
        p.in[i][1] = spectrum[i].imag();
    }
    fftw_execute(p.inv);
    for (std::int64_t i = 0; i < p.npts; ++i) out[i] = p.out[i][0];
}

std::vector<double>& Workspace::scratch_real(int which) {
    return scratch_.at(static_cast<std::size_t>(which));
}

}  // namespace snse
