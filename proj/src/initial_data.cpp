#include "snse/initial_data.hpp"

#include <cmath>

#include "snse/errors.hpp"
#include "snse/operators.hpp"

namespace snse {

double critical_norm(Workspace& ws, const SpectralField& f, SplitNorm n) {
    return n == SplitNorm::L3 ? lebesgue_norm(ws, f, 3.0) : std::sqrt(sobolev_sq_l2(f, 0.5));
}

double subcritical_norm(Workspace& ws, const SpectralField& f, SplitNorm n) {
    return n == SplitNorm::L3 ? lebesgue_norm(ws, f, 6.0) : std::sqrt(sobolev_sq_l2(f, 1.0));
}

double critical_power(SplitNorm n) { return n == SplitNorm::L3 ? 3.0 : 2.0; }
double subcritical_power(SplitNorm n) { return n == SplitNorm::L3 ? 6.0 : 2.0; }

namespace {

double tail_norm(Workspace& ws, const SpectralField& u0, int r, SplitNorm norm) {
    SpectralField tail = u0;
    highpass_shell(tail, static_cast<double>(r));
    return critical_norm(ws, tail, norm);
}

int dealias_radius(const Grid& g) { return g.dealias_mode(); }

}  // namespace

SplitResult split_initial_datum(Workspace& ws, const SpectralField& u0, double epsilon0,
                                int max_radius, SplitNorm norm) {
    if (epsilon0 <= 0.0) throw ConfigError("epsilon0 must be positive");
    const Grid& g = u0.grid;
    const int cap = max_radius >= 0 ? max_radius : dealias_radius(g);

    int found = -1;
    double found_tail = 0.0;
    for (int r = 0; r <= cap; ++r) {
        const double t = tail_norm(ws, u0, r, norm);
        if (t <= epsilon0) {
            found = r;
            found_tail = t;
            break;
        }
    }
    if (found < 0) {
        const double best = tail_norm(ws, u0, cap, norm);
        // extrapolate the tail decay over the last octave to guess a workable
        // resolution; fall back to doubling when the tail is flat
        const double half = tail_norm(ws, u0, cap / 2, norm);
        int suggested = 2 * g.n;
        if (best > 0.0 && half > best) {
            const double beta = std::log(half / best) / (cap - cap / 2);
            const double r_need = cap + std::log(best / epsilon0) / beta;
            suggested = static_cast<int>(std::ceil((3.0 * r_need + 1.0) / 2.0)) * 2;
            suggested = std::max(suggested, g.n + 2);
        }
        throw InfeasibleError("epsilon0 target " + std::to_string(epsilon0) +
                                  " unreachable at n_per_axis " + std::to_string(g.n) +
                                  "; best achievable tail " + std::to_string(best) +
                                  ", suggested n_per_axis " + std::to_string(suggested),
                              best, suggested);
    }

    SplitResult res;
    res.w_bar0 = u0;
    lowpass_shell(res.w_bar0, static_cast<double>(found));
    res.w0 = u0;
    res.w0 -= res.w_bar0;
    res.radius = found;
    res.w0_crit = found_tail;
    res.K0 = subcritical_norm(ws, res.w_bar0, norm);
    return res;
}

std::vector<SpectralField> dyadic_decompose(Workspace& ws, const SpectralField& w0, int K_max,
                                            SplitNorm norm, std::vector<LevelCertificate>* certs,
                                            SpectralField* residual_out) {
    if (K_max < 0) throw ConfigError("K_max must be nonnegative");
    const Grid& g = w0.grid;
    const double w0_crit = critical_norm(ws, w0, norm);
    const int band = static_cast<int>(std::floor(std::sqrt(3.0) * g.max_mode())) + 1;

    std::vector<SpectralField> levels;
    if (certs) certs->clear();

    SpectralField remaining = w0;  // highpass tail after the shells taken so far
    int prev_radius = -1;
    for (int k = 0; k <= K_max; ++k) {
        const double target = w0_crit / (5.0 * std::pow(4.0, k));
        int r = std::max(prev_radius, 0);
        double tail = critical_norm(ws, remaining, norm);
        while (tail > target && r < band) {
            ++r;
            SpectralField t = remaining;
            highpass_shell(t, static_cast<double>(r));
            tail = critical_norm(ws, t, norm);
        }
        SpectralField level = remaining;
        lowpass_shell(level, static_cast<double>(r));
        remaining -= level;

        if (certs) {
            LevelCertificate c;
            c.level = k;
            c.radius = r;
            c.crit = critical_norm(ws, level, norm);
            c.subcrit = subcritical_norm(ws, level, norm);
            c.crit_bound = k == 0 ? 2.0 * w0_crit : w0_crit / std::pow(4.0, k);
            c.ok = c.crit <= c.crit_bound * (1.0 + 1e-12);
            certs->push_back(c);
        }
        levels.push_back(std::move(level));
        prev_radius = r;
    }
    if (residual_out) *residual_out = std::move(remaining);
    return levels;
}

DecompositionResult decompose_initial_datum(Workspace& ws, const SpectralField& u0,
                                            double epsilon0, int K_max, int max_radius,
                                            SplitNorm norm) {
    SplitResult split = split_initial_datum(ws, u0, epsilon0, max_radius, norm);
    DecompositionResult res;
    res.u0 = u0;
    res.norm = norm;
    res.epsilon0 = epsilon0;
    res.K0 = split.K0;
    res.w0_crit = split.w0_crit;
    res.split_radius = split.radius;
    res.w_bar0 = std::move(split.w_bar0);
    res.levels = dyadic_decompose(ws, split.w0, K_max, norm, &res.certificates, &res.residual);
    res.residual_crit = critical_norm(ws, res.residual, norm);
    res.residual_bound = res.w0_crit / (3.0 * std::pow(4.0, K_max));
    return res;
}

}  // namespace snse
