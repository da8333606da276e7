#pragma once

#include <cstdint>
#include <vector>

#include "sr1d/kernels.hpp"
#include "sr1d/models.hpp"

namespace sr1d::meanfield {

/// Per-atom inversion s_z = <sigma_z>/2, coherence s_perp and phase phi with
/// s_perp e^{i phi} = <sigma_eg>.
struct MeanFieldState {
    std::vector<double> s_z;
    std::vector<double> s_perp;
    std::vector<double> phi;

    int size() const { return static_cast<int>(s_z.size()); }
};

/// Below this coherence the phase is undefined and its derivative is reported as zero.
constexpr double kPoleCoherence = 1e-12;

struct MeanFieldDerivative {
    std::vector<double> ds_z;
    std::vector<double> ds_perp;
    std::vector<double> dphi;
    std::vector<int> pole_atoms;  // atoms whose dphi was zeroed
};

/// The three coupled mean-field equations in (s_z, s_perp, phi) form.
MeanFieldDerivative mf_derivative(const MeanFieldState& state, const ReservoirModel& model);

SpinArrays to_cartesian(const MeanFieldState& state);
MeanFieldState to_polar(const SpinArrays& spins);

/// Bloch-sphere bound s_perp^2 + s_z^2 <= 1/4 for every atom.
bool is_physical(const MeanFieldState& state, double tol = 1e-8);

enum class Scheme { RK4, Euler };

struct IntegrateOptions {
    Scheme scheme = Scheme::RK4;
    int stride = 0;               // steps between stored samples; 0 keeps only the endpoints
    double steady_tol = 1e-8;     // on the max-norm of the Cartesian derivative
};

struct Trajectory {
    std::vector<double> times;
    std::vector<MeanFieldState> samples;
    SpinArrays final_state;
    bool steady = false;
    double final_derivative_norm = 0.0;
};

/// Largest step accepted by the integrators, 0.01 / (N Gamma_1D).
double max_time_step(const ReservoirModel& model);

/// Fixed-step integration of the mean-field system (carried out in Cartesian variables,
/// which stay regular at the poles). Throws on a non-finite state, naming the step.
Trajectory integrate_mf(const MeanFieldState& state0, const ReservoirModel& model, double t_end,
                        double dt, const IntegrateOptions& opts = {});
Trajectory integrate_mf(const SpinArrays& state0, const ReservoirModel& model, double t_end,
                        double dt, const IntegrateOptions& opts = {});

/// Inversion balancing pump against local decay, (w - Gamma_1D - Gamma') / (2 kappa).
double pump_balanced_inversion(const ReservoirModel& model);

/// Default disordered start: s_z at the pump-balanced value, s_perp = 1e-3,
/// phases uniform in [0, 2 pi) drawn from `seed`.
MeanFieldState random_initial_state(const ReservoirModel& model, std::uint64_t seed,
                                    double seed_coherence = 1e-3);

struct OrderParameters {
    ModelKind kind = ModelKind::SingleModeCavity;
    // cavity: E = r e^{-i psi}
    double r = 0.0, psi = 0.0;
    // ring: E_{L/R} = r_{L/R} e^{-i phi_{L/R}}
    double r_left = 0.0, phi_left = 0.0, r_right = 0.0, phi_right = 0.0;
    // waveguide: local fields seen by atom l (empty sums give zero)
    std::vector<double> r_right_local, phi_right_local, r_left_local, phi_left_local;

    /// Largest order amplitude of whatever kind this is.
    double max_amplitude() const;
};

OrderParameters order_parameters(const SpinArrays& spins, const ReservoirModel& model);
OrderParameters order_parameters(const MeanFieldState& state, const ReservoirModel& model);

/// Wrap an angle into (-pi, pi].
double wrap_phase(double x);

/// M(n) = (|dphi_n - kd| - |dphi_n + kd|) / (2 kd) for n = 2..N (returned 0-based, N-1 entries),
/// with dphi_n = phi_n - phi_{n-1} wrapped to (-pi, pi]. +1 is right order, -1 left order.
std::vector<double> magnetization(const std::vector<double>& phi, double kd);

struct SyncProbe {
    double pump = 0.0;
    bool synchronized = false;
    double max_amplitude = 0.0;
    double threshold = 0.0;
    OrderParameters order;
};

struct ProbeOptions {
    double t_end = 20.0;
    double dt = 0.0;  // 0 picks max_time_step
    double threshold_fraction = 0.1;
    std::uint64_t seed = 1;
};

/// For each pump rate integrate from disordered phases and test whether the largest order
/// amplitude exceeds threshold_fraction * N * 1/2 (1/2 being the largest possible s_perp).
std::vector<SyncProbe> sync_window_probe(const ReservoirModel& model,
                                         const std::vector<double>& w_grid,
                                         const ProbeOptions& opts = {});

}  // namespace sr1d::meanfield
