#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "sr1d/models.hpp"

namespace sr1d::exact {

constexpr int kMaxAtoms = 8;
/// Above this size the steady state comes from time integration instead of a sparse LU.
constexpr int kMaxNullSpaceAtoms = 8;

using DensityMatrix = ComplexMatrix;
using SparseOp = Eigen::SparseMatrix<cplx>;

/// Computational basis: bit n of the index set <=> atom n excited.
DensityMatrix ground_state(int n_atoms);
DensityMatrix excited_state(int n_atoms);
/// sigma_ge^n, the lowering operator of atom n, as a sparse 2^N x 2^N matrix.
SparseOp lowering(int n_atoms, int atom);

/// Generator of the master equation for a fixed model.
///
/// L[rho] = -i (H_eff rho - rho H_eff^dag) + sum_nu Gamma_nu O_nu rho O_nu^dag
///          + Gamma' sum_n s-_n rho s+_n + w sum_n s+_n rho s-_n
class Liouvillian {
public:
    explicit Liouvillian(const ReservoirModel& model);

    int n_atoms() const { return n_atoms_; }
    int dim() const { return dim_; }

    DensityMatrix apply(const DensityMatrix& rho) const;

    /// Column-major vectorized generator, vec(L[rho]) = L vec(rho).
    SparseOp vectorized() const;

private:
    struct Jump {
        double rate;
        SparseOp op;
        SparseOp op_adj;
    };
    int n_atoms_;
    int dim_;
    SparseOp h_eff_;
    SparseOp h_eff_adj_;
    std::vector<Jump> jumps_;
};

DensityMatrix apply_liouvillian(const ReservoirModel& model, const DensityMatrix& rho);

/// Fixed-step RK4 evolution of rho (or any operator, as used by quantum regression).
DensityMatrix evolve(const Liouvillian& lv, DensityMatrix rho, double t, double dt);

/// Largest single-step rate of the generator; used to pick stable step sizes.
double generator_rate_bound(const ReservoirModel& model);

struct SteadyStateInfo {
    double residual = 0.0;  // Frobenius norm of L[rho_ss]
    bool from_integration = false;
};

/// Unique steady state. Throws Error when the null space is degenerate.
DensityMatrix steady_state(const ReservoirModel& model, SteadyStateInfo* info = nullptr);

struct Observables {
    double emission_rate = 0.0;            // R = sum_nu Gamma_nu <O^dag O>
    double excited_fraction = 0.0;         // (1/N) sum_n <sigma_ee^n>
    std::vector<double> excited_per_atom;  // <sigma_ee^n>
    ComplexMatrix correlations;            // C_nm = <sigma_eg^n sigma_ge^m>
};

Observables observables(const ReservoirModel& model, const DensityMatrix& rho);

/// <sigma_eg^n sigma_ge^m> for every pair.
ComplexMatrix correlation_matrix(const DensityMatrix& rho, int n_atoms);

/// Mean of E^dag E for E = sum_n weights[n] sigma_ge^n.
double field_intensity(const DensityMatrix& rho, const ComplexVector& weights);

/// <A^dag(t_ss + tau) B(t_ss)> with A = sum_n left[n] sigma_ge^n and B = sum_n right[n]
/// sigma_ge^n, by quantum regression: evolve B rho_ss under the generator and trace
/// against A^dag. Throws when rho_ss is not stationary (||L[rho]|| above 1e-8).
/// dt <= 0 selects a step from generator_rate_bound.
std::vector<cplx> two_time_correlator(const ReservoirModel& model, const DensityMatrix& rho_ss,
                                      const ComplexVector& left, const ComplexVector& right,
                                      const std::vector<double>& tau_grid, double dt = 0.0);

/// Field autocorrelation g1(tau) = <E^dag(t_ss + tau) E(t_ss)>.
inline std::vector<cplx> two_time_correlator(const ReservoirModel& model,
                                             const DensityMatrix& rho_ss,
                                             const ComplexVector& weights,
                                             const std::vector<double>& tau_grid,
                                             double dt = 0.0) {
    return two_time_correlator(model, rho_ss, weights, weights, tau_grid, dt);
}

}  // namespace sr1d::exact
