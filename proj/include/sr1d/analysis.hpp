#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sr1d/models.hpp"
#include "sr1d/twa.hpp"

namespace sr1d::analysis {

// ---------------------------------------------------------------- linewidth

struct LinewidthOptions {
    double tail_fraction = 0.2;  // share of the tau range used to estimate the noise floor
    double floor_factor = 3.0;   // fit only where |g1| exceeds this multiple of the floor
    int min_samples = 20;
    int min_window = 5;
    // noise-free correlators (exact solver) have no floor; subtracting a tail estimate there
    // only biases the slope
    bool subtract_floor = true;
};

struct SpectrumEstimate {
    std::vector<double> tau;
    std::vector<cplx> g1;
    bool ok = false;
    double linewidth = 0.0;  // full width, twice the amplitude decay rate of g1
    double fit_tau_min = 0.0;
    double fit_tau_max = 0.0;
    int window_samples = 0;
    double residual = 0.0;   // weighted RMS of the log fit
    double noise_floor = 0.0;
    std::string diagnostics;
};

/// Exponential fit of |g1(tau)| after subtracting the tail noise floor.
/// Weighted least squares on ln(|g1| - floor) with weights |g1| - floor over the leading
/// window where |g1| > floor_factor * floor.
SpectrumEstimate fit_linewidth(const std::vector<double>& tau, const std::vector<cplx>& g1,
                               const LinewidthOptions& opts = {});

/// S(nu) = 2 Re int_0^tau_max g1(tau) e^{i nu tau} dtau by the trapezoid rule.
std::vector<double> spectrum_from_correlator(const std::vector<double>& tau,
                                             const std::vector<cplx>& g1,
                                             const std::vector<double>& detuning);

struct MinLinewidth {
    bool fit_ok = false;
    double w_min = 0.0;
    double dnu_min = 0.0;
    double curvature = 0.0;       // coefficient of w^2
    double coeffs[3] = {0, 0, 0}; // c0 + c1 w + c2 w^2
    std::string reason;
};

/// Quadratic least squares through (w, linewidth) pairs; needs 5 or more points and an
/// interior minimum with positive curvature.
MinLinewidth min_linewidth_scan(const std::vector<std::pair<double, double>>& pairs);

// ---------------------------------------------------------------- waveguide ansatz

/// Probability that atom n (1-based) of N locks to the left-propagating order:
///   1/2 + beta tanh(alpha (1/2 - (n-1)/(N-1))) / (2 tanh(alpha/2)).
double ansatz_probability(int n, int n_atoms, double alpha, double beta);

struct AnsatzModel {
    double alpha = 1.0;
    double beta = 0.0;
    double gamma_w = 1.0;    // only gamma_w * amplitude is identifiable; the fit reports
    double amplitude = 1.0;  // gamma_w = 1 and puts the product into amplitude
    double residual = 0.0;
    bool degenerate = false;
    std::string diagnostics;
};

/// C_nm = amplitude gamma [P_n P_m e^{+ik(z_n - z_m)} + (1 - P_n)(1 - P_m) e^{-ik(z_n - z_m)}]
/// with P_n = ansatz_probability; the left-order term carries the left-domain phase k(z_n - z_m).
ComplexMatrix ansatz_correlations(double alpha, double beta, double gamma_w, double amplitude,
                                  const std::vector<double>& positions, double k = 1.0);

struct AnsatzFitOptions {
    std::vector<double> alpha_starts{1.0, 2.5, 5.0};
    std::vector<double> beta_starts{0.3, 0.6, 0.9};
};

/// Fit (alpha, beta) to the phases of C with weights |C_nm| (Levenberg-Marquardt on the
/// difference of unit phasors, all pairs n < m), then amplitude * gamma to the magnitudes.
AnsatzModel fit_ansatz(const ComplexMatrix& c, const std::vector<double>& positions, double k = 1.0,
                       const AnsatzFitOptions& opts = {});

// ---------------------------------------------------------------- correlation collapse

struct CollapsePoint {
    int d = 0;
    int n = 0;  // 1-based row of the lower atom in the pair (n + d, n)
    double n_prime = 0.0;
    double arg = 0.0;
    double magnitude = 0.0;
};

/// Every pair (n + d, n) mapped to n' = (2(n-1) + d) / (2(N-1)) with arg C_{(n+d) n}.
std::vector<CollapsePoint> correlation_collapse(const ComplexMatrix& c);

/// Phases phi_n built up from arg C_{n,n-1} = phi_n - phi_{n-1}, with phi_1 = 0.
std::vector<double> phases_from_correlations(const ComplexMatrix& c);

// ---------------------------------------------------------------- steady states and scans

struct SteadyAverageOptions {
    int n_traj = 100;
    double dt = 0.0;         // 0 picks the stability limit
    double t_relax = 0.0;    // 0 picks max(2, 40 / (w + Gamma' + Gamma_1D))
    double t_average = 0.0;  // 0 picks t_relax / 2
    int samples = 20;        // snapshots across the averaging window
    bool correlations = false;
    std::uint64_t seed = 1;
};

struct SteadyAverage {
    double emission_rate = 0.0;
    double emission_rate_err = 0.0;  // standard error across trajectories
    double collective_rate = 0.0;
    double collective_rate_err = 0.0;
    double excited_fraction = 0.0;
    double excited_fraction_err = 0.0;
    bool converged = false;  // first and second half of the window agree within errors
    ComplexMatrix correlations;  // time-averaged, when requested
    twa::Ensemble ensemble;      // state at the end of the window
    double t_relax = 0.0;
    double t_average = 0.0;
};

/// Relax an all-ground ensemble under pumping, then time-average R, Pe (and C) over a window.
SteadyAverage twa_steady_average(const ReservoirModel& model, const SteadyAverageOptions& opts);

struct ThresholdEstimates {
    double w_peak = 0.0;
    double r_max = 0.0;
    double w_lower = 0.0;
    double w_upper = 0.0;
    bool lower_found = false;
    bool upper_found = false;
};

/// Knees of a scan: linear extrapolation of the rising and falling flanks to zero.
ThresholdEstimates estimate_thresholds(const std::vector<double>& w, const std::vector<double>& rate);

enum class ScanSolver { TWA, Superspin };

struct ScanPoint {
    double w = 0.0;
    double emission_rate = 0.0;
    double emission_rate_err = 0.0;
    double collective_rate = 0.0;
    double excited_fraction = 0.0;
    bool converged = false;
    double analytic_rate = 0.0;  // closed form where one exists, else NaN
    double analytic_excited = 0.0;
};

struct IntensityScan {
    ScanSolver solver = ScanSolver::TWA;
    std::vector<ScanPoint> points;
    ThresholdEstimates estimates;  // from the collective rate
};

struct ScanOptions {
    SteadyAverageOptions twa;
    int superspin_m = 1;  // commensurate spacing kd = pi m / p for the superspin solver
    int superspin_p = 1;
    bool pump_source = false;
};

IntensityScan intensity_scan(const ReservoirModel& model, const std::vector<double>& w_grid,
                             ScanSolver solver, const ScanOptions& opts = {});

// ---------------------------------------------------------------- TWA linewidth

struct LinewidthRunOptions {
    SteadyAverageOptions steady;
    double tau_max = 3.0;
    int tau_samples = 61;
    LinewidthOptions fit;
};

struct LinewidthRun {
    double w = 0.0;
    SpectrumEstimate spectrum;
    twa::CorrelatorResult correlator;
};

/// Relax, then compute and fit g1 for the far field in `dir`.
LinewidthRun twa_linewidth(const ReservoirModel& model, FieldDirection dir,
                           const LinewidthRunOptions& opts);

}  // namespace sr1d::analysis
