#pragma once

#include <vector>

#include "sr1d/models.hpp"

namespace sr1d::superspin {

/// Commensurate ring array with spacing kd = pi m / p split into p permutation-symmetric groups.
///
/// Atom n (0-based) belongs to group n mod p; its wavelength index is c_n = n / p + 1 and it
/// enters the group's collective lowering operator with sign (-1)^{m (c_n + 1)}.
struct Partition {
    int n_atoms = 0;
    int m = 0;
    int p = 0;
    int group_size = 0;
    double kd = 0.0;
    double gamma_1d = 1.0;
    std::vector<int> group;
    std::vector<int> wavelength_index;
    std::vector<int> sign;
    RealMatrix gamma;  // p x p, Gamma_1D cos(kd (alpha - beta))

    std::vector<int> members(int alpha) const;
};

Partition build_partition(int n_atoms, int m, int p, double gamma_1d = 1.0);

/// Largest entry of |sum_mu Gamma_amu Gamma_mux - (p/2) Gamma_1D Gamma_ax|.
double circulant_identity_residual(const Partition& part);

/// Ring-cavity model with the partition's atom spacing.
ReservoirModel ring_model(const Partition& part, Rates rates);

/// Second-order cumulants: jz = <J_z^a>, jpm = <J_+^a J_-^a>, cross(a, x) = <J_+^a J_-^x> for a != x
/// (diagonal of cross unused). Real for real initial data.
struct CumulantState {
    std::vector<double> jz;
    std::vector<double> jpm;
    RealMatrix cross;
};

struct CumulantOptions {
    /// Keep the w / N_a source in the jpm equation. Dropping it gives the large-N form.
    bool pump_source = true;
};

CumulantState cumulant_derivatives(const CumulantState& state, const Partition& part,
                                   const Rates& rates, const CumulantOptions& opts = {});

/// Inversion at the no-coherence value, jpm = seed and cross(a, x) = seed Gamma_ax / Gamma_1D.
CumulantState seed_state(const Partition& part, const Rates& rates, double seed = 1e-3);

/// R_a = sum_mu (Gamma_mua / Gamma_1D) <J_+^mu J_-^a>, the mu = a term being jpm.
double group_rate(const CumulantState& state, const Partition& part, int alpha);

/// Physical emission rate sum_nm Gamma_nm <sigma_eg^n sigma_ge^m> = N_s^2 sum_{a,x} Gamma_ax <J_+^a J_-^x>.
double emission_rate(const CumulantState& state, const Partition& part);

/// Mean excited-state population per atom, mean_a jz + 1/2.
double excited_fraction(const CumulantState& state);

struct CumulantSteady {
    CumulantState state;
    double t = 0.0;
    double residual = 0.0;  // max-norm of the derivative at the end
    bool converged = false;
};

/// Fixed-step RK4 until the derivative max-norm falls below tol or t_max is reached.
/// dt <= 0 picks 0.05 / (N Gamma_1D + Gamma' + w); t_max <= 0 picks 2000 / (Gamma' + w).
CumulantSteady integrate_to_steady(CumulantState state, const Partition& part, const Rates& rates,
                                   const CumulantOptions& opts = {}, double tol = 1e-12,
                                   double dt = 0.0, double t_max = 0.0);

struct ReducedSteady {
    double jz = 0.0;
    double r_alpha = 0.0;
    bool synchronized = false;
};

/// Two-variable ring system
///   d jz = -Gamma_1D N_s R - (Gamma' + w) jz + (w - Gamma')/2
///   d R  = -(Gamma' + w) R + N Gamma_1D jz R
/// steady state; the trivial branch jz = (w - Gamma') / (2 (w + Gamma')) outside [Gamma', N Gamma_1D / 2].
ReducedSteady reduced_steady_state(int n_atoms, int p, double gamma_1d, double gamma_prime, double w);

/// Same for the single-mode cavity (p = 1) laser pair, with 2 N Gamma_1D in the R equation.
ReducedSteady cavity_steady_state(int n_atoms, double gamma_1d, double gamma_prime, double w);

/// RK4 integration of the two-variable system from jz at the no-coherence value and R = seed,
/// until the derivative max-norm drops below tol. p = 1 uses the cavity pair.
ReducedSteady integrate_reduced(int n_atoms, int p, double gamma_1d, double gamma_prime, double w,
                                double seed = 1e-3, double tol = 1e-13);

struct ThresholdPoint {
    double w = 0.0;
    double emission_rate = 0.0;            // physical units
    double excited_fraction = 0.0;         // per atom, from the reduced steady state
    double excited_fraction_printed = 0.0; // closed form carrying the extra factor p (ring)
};

struct Thresholds {
    ModelKind kind = ModelKind::RingCavity;
    int n_atoms = 0;
    int p = 1;
    double w_lower = 0.0;
    double w_upper = 0.0;
    double w_opt = 0.0;        // nominal N Gamma_1D / 2 (cavity) or / 4 (ring)
    double r_max = 0.0;        // nominal N^2 Gamma_1D / 8 (cavity) or / 16 (ring)
    double w_opt_exact = 0.0;  // maximum of the closed-form R(w) including Gamma'
    double r_max_exact = 0.0;
    bool empty_window = false;
    std::vector<ThresholdPoint> curve;
};

/// Closed-form thresholds and steady-state curves. Waveguide is rejected.
Thresholds analytic_thresholds(ModelKind kind, int n_atoms, int p, double gamma_1d,
                               double gamma_prime, const std::vector<double>& w_grid = {});

struct WaveguideEstimates {
    double w_upper_bar = 0.0;
    double w_opt_bar = 0.0;
    double r_max_est = 0.0;
};

WaveguideEstimates waveguide_estimates(int n_atoms, double gamma_1d);

}  // namespace sr1d::superspin
