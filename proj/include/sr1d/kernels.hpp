#pragma once

#include <span>
#include <vector>

#include "sr1d/models.hpp"

namespace sr1d {

/// Classical counterpart of one atom per entry: coh[n] ~ <sigma_ge^n>, inv[n] ~ <sigma_z^n>/2.
struct SpinArrays {
    std::vector<cplx> coh;
    std::vector<double> inv;
};

namespace kernels {

/// Local field felt by each atom from all others:
///   h_l = sum_{m != l} (Gamma_lm / 2 + i J_lm) coh_m.
///
/// `apply` uses the plane-wave structure of each reservoir to run in O(N);
/// `apply_dense` is the O(N^2) reference kept for testing and benchmarking.
class CollectiveField {
public:
    explicit CollectiveField(const ReservoirModel& model);

    int size() const { return n_; }
    void apply(std::span<const cplx> coh, std::span<cplx> h) const;
    void apply_dense(std::span<const cplx> coh, std::span<cplx> h) const;

private:
    ModelKind kind_;
    int n_;
    double half_gamma_;
    std::vector<cplx> plane_;  // e^{i k z_n}
    std::vector<int> order_;   // atom indices sorted by position
    ComplexMatrix dense_;      // Gamma/2 + iJ with zero diagonal
};

/// Mean-field drift in Cartesian variables:
///   d coh_l = -(kappa/2) coh_l + 2 inv_l h_l
///   d inv_l = -kappa inv_l + (w - Gamma_1D - Gamma')/2 - 2 Re(conj(coh_l) h_l)
/// with kappa = Gamma_1D + Gamma' + w and h from CollectiveField.
void drift(const ReservoirModel& model, std::span<const cplx> coh, std::span<const double> inv,
           std::span<const cplx> h, std::span<cplx> dcoh, std::span<double> dinv);

}  // namespace kernels
}  // namespace sr1d
