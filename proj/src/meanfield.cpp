#include "sr1d/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace sr1d::meanfield {

namespace {

constexpr cplx I{0.0, 1.0};

struct CartesianSystem {
    const ReservoirModel& model;
    kernels::CollectiveField field;
    std::vector<cplx> h;

    explicit CartesianSystem(const ReservoirModel& m) : model(m), field(m), h(m.n_atoms) {}

    void rhs(const SpinArrays& s, SpinArrays& d) {
        field.apply(s.coh, h);
        kernels::drift(model, s.coh, s.inv, h, d.coh, d.inv);
    }
};

SpinArrays zeros_like(int n) { return {std::vector<cplx>(n), std::vector<double>(n)}; }

// out = s + c * d
void axpy(const SpinArrays& s, double c, const SpinArrays& d, SpinArrays& out) {
    for (std::size_t a = 0; a < s.inv.size(); ++a) {
        out.coh[a] = s.coh[a] + c * d.coh[a];
        out.inv[a] = s.inv[a] + c * d.inv[a];
    }
}

double max_norm(const SpinArrays& d) {
    double m = 0.0;
    for (std::size_t a = 0; a < d.inv.size(); ++a)
        m = std::max({m, std::abs(d.coh[a]), std::abs(d.inv[a])});
    return m;
}

bool all_finite(const SpinArrays& s) {
    for (std::size_t a = 0; a < s.inv.size(); ++a)
        if (!std::isfinite(s.inv[a]) || !std::isfinite(s.coh[a].real()) ||
            !std::isfinite(s.coh[a].imag()))
            return false;
    return true;
}

}  // namespace

MeanFieldDerivative mf_derivative(const MeanFieldState& state, const ReservoirModel& model) {
    const int n = state.size();
    if (n != model.n_atoms) throw Error("mf_derivative: state size does not match model");
    const double kappa = model.local_rate();
    const double source = 0.5 * (model.pump() - model.gamma_prime() - model.gamma_1d());
    MeanFieldDerivative d;
    d.ds_z.assign(n, 0.0);
    d.ds_perp.assign(n, 0.0);
    d.dphi.assign(n, 0.0);
    for (int l = 0; l < n; ++l) {
        // sums over m != l of s_perp_m (Gamma cos + 2J sin)(phi_m - phi_l) and (... sin, cos)
        double in_phase = 0.0, quadrature = 0.0;
        for (int m = 0; m < n; ++m) {
            if (m == l) continue;
            const double dphi = state.phi[m] - state.phi[l];
            const double g = model.Gamma(l, m), j = model.J(l, m);
            in_phase += state.s_perp[m] * (g * std::cos(dphi) + 2.0 * j * std::sin(dphi));
            quadrature += state.s_perp[m] * (g * std::sin(dphi) - 2.0 * j * std::cos(dphi));
        }
        d.ds_z[l] = -kappa * state.s_z[l] + source - state.s_perp[l] * in_phase;
        d.ds_perp[l] = -0.5 * kappa * state.s_perp[l] + state.s_z[l] * in_phase;
        if (state.s_perp[l] < kPoleCoherence) {
            d.pole_atoms.push_back(l);
        } else {
            d.dphi[l] = state.s_z[l] / state.s_perp[l] * quadrature;
        }
    }
    return d;
}

SpinArrays to_cartesian(const MeanFieldState& state) {
    const int n = state.size();
    SpinArrays s = zeros_like(n);
    for (int a = 0; a < n; ++a) {
        s.coh[a] = std::polar(state.s_perp[a], -state.phi[a]);
        s.inv[a] = state.s_z[a];
    }
    return s;
}

MeanFieldState to_polar(const SpinArrays& spins) {
    const std::size_t n = spins.inv.size();
    MeanFieldState st;
    st.s_z = spins.inv;
    st.s_perp.resize(n);
    st.phi.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
        st.s_perp[a] = std::abs(spins.coh[a]);
        st.phi[a] = -std::arg(spins.coh[a]);
    }
    return st;
}

bool is_physical(const MeanFieldState& state, double tol) {
    for (int a = 0; a < state.size(); ++a)
        if (state.s_perp[a] < -tol ||
            state.s_perp[a] * state.s_perp[a] + state.s_z[a] * state.s_z[a] > 0.25 + tol)
            return false;
    return true;
}

double max_time_step(const ReservoirModel& model) {
    return 0.01 / (model.n_atoms * model.gamma_1d());
}

Trajectory integrate_mf(const MeanFieldState& state0, const ReservoirModel& model, double t_end,
                        double dt, const IntegrateOptions& opts) {
    return integrate_mf(to_cartesian(state0), model, t_end, dt, opts);
}

Trajectory integrate_mf(const SpinArrays& state0, const ReservoirModel& model, double t_end,
                        double dt, const IntegrateOptions& opts) {
    const int n = model.n_atoms;
    if (static_cast<int>(state0.inv.size()) != n || static_cast<int>(state0.coh.size()) != n)
        throw Error("integrate_mf: state size does not match model");
    if (!(dt > 0.0)) throw Error("integrate_mf: dt must be positive");
    if (dt > max_time_step(model) * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "integrate_mf: dt = " << dt << " exceeds the stability limit 0.01/(N Gamma_1D) = "
            << max_time_step(model);
        throw Error(msg.str());
    }
    if (t_end < 0.0) throw Error("integrate_mf: t_end must be non-negative");

    const long steps = std::lround(std::ceil(t_end / dt - 1e-9));
    CartesianSystem sys(model);
    SpinArrays s = state0;
    SpinArrays k1 = zeros_like(n), k2 = zeros_like(n), k3 = zeros_like(n), k4 = zeros_like(n);
    SpinArrays tmp = zeros_like(n);

    Trajectory out;
    auto record = [&](double t) {
        out.times.push_back(t);
        out.samples.push_back(to_polar(s));
    };
    record(0.0);

    for (long step = 1; step <= steps; ++step) {
        const double h = std::min(dt, t_end - (step - 1) * dt);
        if (opts.scheme == Scheme::Euler) {
            sys.rhs(s, k1);
            axpy(s, h, k1, s);
        } else {
            sys.rhs(s, k1);
            axpy(s, 0.5 * h, k1, tmp);
            sys.rhs(tmp, k2);
            axpy(s, 0.5 * h, k2, tmp);
            sys.rhs(tmp, k3);
            axpy(s, h, k3, tmp);
            sys.rhs(tmp, k4);
            for (int a = 0; a < n; ++a) {
                s.coh[a] += h / 6.0 * (k1.coh[a] + 2.0 * k2.coh[a] + 2.0 * k3.coh[a] + k4.coh[a]);
                s.inv[a] += h / 6.0 * (k1.inv[a] + 2.0 * k2.inv[a] + 2.0 * k3.inv[a] + k4.inv[a]);
            }
        }
        if (!all_finite(s)) {
            std::ostringstream msg;
            msg << "integrate_mf: non-finite state at step " << step << " (t = " << step * dt << ")";
            throw Error(msg.str());
        }
        const bool last = step == steps;
        if (last || (opts.stride > 0 && step % opts.stride == 0))
            record(last ? t_end : step * dt);
    }

    sys.rhs(s, k1);
    out.final_derivative_norm = max_norm(k1);
    out.steady = out.final_derivative_norm < opts.steady_tol;
    out.final_state = std::move(s);
    return out;
}

double pump_balanced_inversion(const ReservoirModel& model) {
    return 0.5 * (model.pump() - model.gamma_1d() - model.gamma_prime()) / model.local_rate();
}

MeanFieldState random_initial_state(const ReservoirModel& model, std::uint64_t seed,
                                    double seed_coherence) {
    const int n = model.n_atoms;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    MeanFieldState st;
    st.s_z.assign(n, pump_balanced_inversion(model));
    st.s_perp.assign(n, seed_coherence);
    st.phi.resize(n);
    for (auto& p : st.phi) p = phase(rng);
    return st;
}

double OrderParameters::max_amplitude() const {
    switch (kind) {
        case ModelKind::SingleModeCavity:
            return r;
        case ModelKind::RingCavity:
            return std::max(r_left, r_right);
        case ModelKind::Waveguide: {
            double m = 0.0;
            for (double v : r_right_local) m = std::max(m, v);
            for (double v : r_left_local) m = std::max(m, v);
            return m;
        }
    }
    return 0.0;
}

OrderParameters order_parameters(const SpinArrays& spins, const ReservoirModel& model) {
    const int n = model.n_atoms;
    OrderParameters op;
    op.kind = model.kind;
    auto plane = [&](int a, double sign) { return std::exp(sign * I * (model.k * model.positions[a])); };
    switch (model.kind) {
        case ModelKind::SingleModeCavity: {
            cplx e = 0.0;
            for (int a = 0; a < n; ++a) e += spins.coh[a];
            op.r = std::abs(e);
            op.psi = -std::arg(e);
            break;
        }
        case ModelKind::RingCavity: {
            cplx el = 0.0, er = 0.0;
            for (int a = 0; a < n; ++a) {
                el += plane(a, +1.0) * spins.coh[a];
                er += plane(a, -1.0) * spins.coh[a];
            }
            op.r_left = std::abs(el);
            op.phi_left = -std::arg(el);
            op.r_right = std::abs(er);
            op.phi_right = -std::arg(er);
            break;
        }
        case ModelKind::Waveguide: {
            op.r_right_local.assign(n, 0.0);
            op.phi_right_local.assign(n, 0.0);
            op.r_left_local.assign(n, 0.0);
            op.phi_left_local.assign(n, 0.0);
            for (int l = 0; l < n; ++l) {
                cplx er = 0.0, el = 0.0;
                for (int a = 0; a < n; ++a) {
                    if (model.positions[a] < model.positions[l]) er += plane(a, -1.0) * spins.coh[a];
                    if (model.positions[a] > model.positions[l]) el += plane(a, +1.0) * spins.coh[a];
                }
                op.r_right_local[l] = std::abs(er);
                op.phi_right_local[l] = -std::arg(er);
                op.r_left_local[l] = std::abs(el);
                op.phi_left_local[l] = -std::arg(el);
            }
            break;
        }
    }
    return op;
}

OrderParameters order_parameters(const MeanFieldState& state, const ReservoirModel& model) {
    return order_parameters(to_cartesian(state), model);
}

double wrap_phase(double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double y = std::fmod(x, two_pi);
    if (y <= -std::numbers::pi) y += two_pi;
    if (y > std::numbers::pi) y -= two_pi;
    return y;
}

std::vector<double> magnetization(const std::vector<double>& phi, double kd) {
    if (phi.size() < 2) throw Error("magnetization: needs at least two atoms");
    if (std::abs(std::sin(kd)) < 1e-12)
        throw Error("magnetization: kd must not be a multiple of pi");
    // only kd in (0, pi) distinguishes the two orders; fold other spacings into it
    const double kd_eff = std::abs(wrap_phase(kd));
    std::vector<double> m(phi.size() - 1);
    for (std::size_t n = 1; n < phi.size(); ++n) {
        const double d = wrap_phase(phi[n] - phi[n - 1]);
        m[n - 1] = (std::abs(d - kd_eff) - std::abs(d + kd_eff)) / (2.0 * kd_eff);
    }
    return m;
}

std::vector<SyncProbe> sync_window_probe(const ReservoirModel& model,
                                         const std::vector<double>& w_grid,
                                         const ProbeOptions& opts) {
    for (std::size_t i = 0; i < w_grid.size(); ++i) {
        if (!(w_grid[i] > 0.0)) throw Error("sync_window_probe: pump rates must be positive");
        if (i > 0 && !(w_grid[i] > w_grid[i - 1]))
            throw Error("sync_window_probe: pump grid must be increasing");
    }
    const double threshold = opts.threshold_fraction * model.n_atoms * 0.5;
    const double dt = opts.dt > 0.0 ? opts.dt : max_time_step(model);
    std::vector<SyncProbe> out(w_grid.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < w_grid.size(); ++i) {
        const ReservoirModel m = model.with_pump(w_grid[i]);
        const auto traj = integrate_mf(random_initial_state(m, opts.seed), m, opts.t_end, dt);
        SyncProbe p;
        p.pump = w_grid[i];
        p.order = order_parameters(traj.final_state, m);
        p.max_amplitude = p.order.max_amplitude();
        p.threshold = threshold;
        p.synchronized = p.max_amplitude > threshold;
        out[i] = std::move(p);
    }
    return out;
}

}  // namespace sr1d::meanfield
