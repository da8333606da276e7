#pragma once

// Single-trajectory Euler-Maruyama step shared by the parallel engine and the serial reference.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "sr1d/kernels.hpp"
#include "sr1d/models.hpp"
#include "sr1d/twa.hpp"

namespace sr1d::twa::detail {

struct NoiseModes {
    std::vector<double> amplitude;           // sqrt(Gamma_nu / 2)
    std::vector<std::vector<cplx>> profile;  // b_nu
};

inline NoiseModes collective_noise(const ReservoirModel& model) {
    NoiseModes nm;
    for (const auto& mode : jump_mode_decomposition(model)) {
        if (mode.rate <= 0.0) continue;
        nm.amplitude.push_back(std::sqrt(0.5 * mode.rate));
        nm.profile.emplace_back(mode.profile.data(), mode.profile.data() + mode.profile.size());
    }
    return nm;
}

struct Workspace {
    std::vector<cplx> h, dcoh, xi;
    std::vector<double> dinv;
    explicit Workspace(int n) : h(n), dcoh(n), xi(n), dinv(n) {}
};

/// Advance one trajectory by h. `apply_field(coh, out)` computes the collective field.
template <class FieldFn>
void step(const ReservoirModel& model, const NoiseModes& modes, TrajectoryState& s,
          std::mt19937_64& rng, double h, bool noise, Workspace& ws, FieldFn&& apply_field) {
    const int n = model.n_atoms;
    apply_field(std::span<const cplx>(s.coh), std::span<cplx>(ws.h));
    kernels::drift(model, s.coh, s.inv, ws.h, ws.dcoh, ws.dinv);
    if (!noise) {
        for (int a = 0; a < n; ++a) {
            s.coh[a] += h * ws.dcoh[a];
            s.inv[a] += h * ws.dinv[a];
        }
        return;
    }

    boost::random::normal_distribution<double> gauss(0.0, 1.0);  // ziggurat
    const double sq = std::sqrt(0.5 * h);  // complex increment with E|dW|^2 = h
    std::fill(ws.xi.begin(), ws.xi.end(), cplx{0.0, 0.0});
    for (std::size_t nu = 0; nu < modes.amplitude.size(); ++nu) {
        const double re = gauss(rng), im = gauss(rng);
        const cplx dw = modes.amplitude[nu] * sq * cplx(re, im);
        const auto& b = modes.profile[nu];
        for (int a = 0; a < n; ++a) ws.xi[a] += b[a] * dw;
    }

    const double decay = model.gamma_1d() + model.gamma_prime();
    const double pump = model.pump();
    const double eta_rate = 0.5 * (model.gamma_prime() + pump);
    for (int a = 0; a < n; ++a) {
        const double z = s.inv[a];
        const cplx c = s.coh[a];
        const double eta_re = gauss(rng), eta_im = gauss(rng), zeta = gauss(rng);
        // local complements of the on-site collective noise, with 2z^2 and |c|^2 at their
        // spin-1/2 Weyl values of 1/2
        const double d_eta = eta_rate;
        const double d_zeta = std::max(0.0, z * (decay - pump) + eta_rate);
        const cplx eta = std::sqrt(d_eta) * sq * cplx(eta_re, eta_im);
        s.coh[a] = c + h * ws.dcoh[a] + 2.0 * z * ws.xi[a] + eta;
        s.inv[a] = z + h * ws.dinv[a] - 2.0 * (std::conj(c) * ws.xi[a]).real() +
                   std::sqrt(d_zeta * h) * zeta;
    }
}

inline bool finite(const TrajectoryState& s) {
    for (std::size_t a = 0; a < s.inv.size(); ++a)
        if (!std::isfinite(s.inv[a]) || !std::isfinite(s.coh[a].real()) ||
            !std::isfinite(s.coh[a].imag()))
            return false;
    return true;
}

/// Number of steps and the length of the last one for reaching t_end from t0.
struct StepPlan {
    long steps = 0;
    double last = 0.0;
};

inline StepPlan plan_steps(double t0, double t_end, double dt) {
    StepPlan p;
    const double span = t_end - t0;
    if (span <= 0.0) return p;
    p.steps = std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
    p.last = span - (p.steps - 1) * dt;
    return p;
}

}  // namespace sr1d::twa::detail
