#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "sr1d/kernels.hpp"
#include "sr1d/models.hpp"

namespace sr1d::twa {

/// Phase-space variables of one trajectory: coh ~ <sigma_ge^n>, inv ~ <sigma_z^n>/2.
struct TrajectoryState {
    std::vector<cplx> coh;
    std::vector<double> inv;
};

enum class InitialState { AllGround, AllExcited };

/// Discrete Wigner sample of a product state: inv = -+1/2, coh = s_x - i s_y with
/// s_x, s_y independently +-1/2 (variance 1/4 per quadrature).
TrajectoryState sample_initial(const ReservoirModel& model, InitialState spec, std::mt19937_64& rng);

/// M trajectories, each with its own random stream derived from (seed, trajectory id),
/// so the result never depends on how trajectories are split across threads.
struct Ensemble {
    int n_atoms = 0;
    std::uint64_t seed = 0;
    double t = 0.0;
    std::vector<TrajectoryState> states;
    std::vector<std::mt19937_64> streams;

    int size() const { return static_cast<int>(states.size()); }
};

std::mt19937_64 trajectory_stream(std::uint64_t seed, std::uint64_t trajectory);

Ensemble make_ensemble(const ReservoirModel& model, InitialState spec, int n_traj,
                       std::uint64_t seed);
/// Every trajectory starts from the same classical state (used for drift-only runs).
Ensemble make_ensemble(const SpinArrays& start, int n_traj, std::uint64_t seed);

struct IntegrateOptions {
    bool noise = true;
    int tap_every = 0;  // steps between calls of on_tap; 0 disables taps
    std::function<void(const Ensemble&)> on_tap;
};

/// Euler-Maruyama integration of every trajectory up to absolute time t_end.
///
/// Drift is the mean-field drift. Collective noise follows the jump-mode decomposition of
/// Gamma; local channels (Gamma', w and the remainder of Gamma_1D) get independent
/// increments per atom. Throws with the trajectory id and step on a non-finite state.
void integrate_ensemble(const ReservoirModel& model, Ensemble& ensemble, double t_end, double dt,
                        const IntegrateOptions& opts = {});

/// Serial reference with the O(N^2) dense field; same random draws, so it agrees with
/// integrate_ensemble up to rounding.
void integrate_ensemble_reference(const ReservoirModel& model, Ensemble& ensemble, double t_end,
                                  double dt, bool noise = true);

struct EnsembleObservables {
    double t = 0.0;
    int samples = 0;
    bool low_statistics = false;  // fewer than 100 trajectories
    double emission_rate = 0.0;     // R = sum_nu Gamma_nu b^dag C b
    double collective_rate = 0.0;   // sum_{n != m} Gamma_nm Re C_nm
    double excited_fraction = 0.0;  // Pe
    std::vector<double> excited_per_atom;
    ComplexMatrix correlations;     // empty unless requested
};

/// Per-trajectory contributions whose means are R, the collective part of R and Pe.
struct TrajectoryRates {
    std::vector<double> emission;
    std::vector<double> collective;
    std::vector<double> excited;
};

TrajectoryRates trajectory_rates(const Ensemble& ensemble, const ReservoirModel& model);

/// C_nm = mean conj(coh_n) coh_m for n != m; C_nn = mean inv_n + 1/2.
EnsembleObservables ensemble_observables(const Ensemble& ensemble, const ReservoirModel& model,
                                         bool with_correlations = true);

/// <E^dag E> for the field E = sum_n weights[n] sigma_ge^n with the diagonal ordering
/// correction applied.
double field_intensity(const Ensemble& ensemble, const ComplexVector& weights);

struct CorrelatorOptions {
    double dt = 0.0;                   // 0 picks the mean-field stability limit
    bool require_stationary = true;
    double stationarity_tol = 0.25;    // allowed relative drift of R over the tau window
};

struct CorrelatorResult {
    std::vector<double> tau;
    std::vector<cplx> g1;
    std::vector<double> emission_rate;  // R along the tau window
    double relative_drift = 0.0;        // fitted slope of R times the window, over mean R
    bool stationary = true;
};

/// g1(tau) = <E^dag(t_ss + tau) E(t_ss)> from the classical product of field amplitudes,
/// plus the single-atom ordering term carried along with the per-atom autocorrelation.
/// The ensemble is copied; the input is left at t_ss.
CorrelatorResult two_time_field_correlator(const ReservoirModel& model, const Ensemble& ensemble_ss,
                                           const FieldCoefficients& field,
                                           const std::vector<double>& tau_grid,
                                           const CorrelatorOptions& opts = {});

/// Classical field amplitude E = sum_n weights[n] coh_n for each trajectory.
std::vector<cplx> field_samples(const Ensemble& ensemble, const FieldCoefficients& field);

struct Histogram2D {
    double extent = 0.0;  // covers [-extent, extent]^2
    int bins = 0;
    std::vector<double> density;  // row-major [iy * bins + ix], integrates to 1
    int samples = 0;
    int outside = 0;

    double center(int i) const { return -extent + (i + 0.5) * 2.0 * extent / bins; }
};

/// extent <= 0 picks 1.2 times the largest sample magnitude.
Histogram2D field_histogram(const Ensemble& ensemble, const FieldCoefficients& field, int bins = 41,
                            double extent = 0.0);

/// Counts of |E| in [0, r_max) split into equal bins.
std::vector<int> radial_histogram(const std::vector<cplx>& samples, int bins, double r_max);
/// Counts of arg E in [-pi, pi) split into equal bins.
std::vector<int> angular_histogram(const std::vector<cplx>& samples, int bins);

}  // namespace sr1d::twa
