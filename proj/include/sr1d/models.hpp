#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sr1d {

using cplx = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Raised for invalid parameters or inputs to any sr1d routine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ModelKind { SingleModeCavity, RingCavity, Waveguide };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Rates shared by every reservoir model. All in the same (arbitrary) rate units.
struct Rates {
    double gamma_1d = 1.0;
    double gamma_prime = 0.0;
    double pump = 0.0;
};

/// Atoms coupled to a one-dimensional reservoir. Immutable once built.
///
/// Positions are in units of 1/k with k = 1, so the phase between atoms n and m
/// is simply k * (z_n - z_m). J has zero diagonal; the diagonal of Gamma is gamma_1d.
struct ReservoirModel {
    ModelKind kind = ModelKind::SingleModeCavity;
    int n_atoms = 0;
    std::vector<double> positions;
    double k = 1.0;
    Rates rates;
    RealMatrix J;
    RealMatrix Gamma;

    double gamma_1d() const { return rates.gamma_1d; }
    double gamma_prime() const { return rates.gamma_prime; }
    double pump() const { return rates.pump; }

    /// Total single-atom damping rate of the coherence, doubled: Gamma_1D + Gamma' + w.
    double local_rate() const { return rates.gamma_1d + rates.gamma_prime + rates.pump; }

    /// Same coupling geometry with a different pump rate.
    ReservoirModel with_pump(double pump) const;
};

/// Build the coupling matrices for a reservoir model.
///
/// Without `positions_override` atoms sit on z_n = n * spacing_kd (n = 1..N, k = 1).
ReservoirModel build_model(ModelKind kind, int n_atoms, double spacing_kd, Rates rates,
                           const std::optional<std::vector<double>>& positions_override = {});

struct JumpMode {
    double rate = 0.0;
    ComplexVector profile;
};

/// Eigen-decomposition of Gamma into collective jump operators O = sum_n b_n sigma_ge^n,
/// sorted by descending rate. Rates below 1e-10 N Gamma_1D are clamped to zero.
/// When the two brightest modes are degenerate and the plane waves e^{+-ikz}/sqrt(N)
/// span their subspace, the profiles are rotated onto them (left first, then right).
std::vector<JumpMode> jump_mode_decomposition(const ReservoirModel& model);

enum class FieldDirection { Right, Left, Cavity };

std::string to_string(FieldDirection dir);
FieldDirection field_direction_from_string(const std::string& name);

/// Emitted-field operator E^+ = prefactor * sum_n coeffs[n] sigma_ge^n.
struct FieldCoefficients {
    FieldDirection direction = FieldDirection::Cavity;
    double z = 0.0;
    ComplexVector coeffs;
    double prefactor = 0.0;

    /// prefactor * coeffs, the weights multiplying sigma_ge^n.
    ComplexVector weights() const { return prefactor * coeffs; }
};

FieldCoefficients field_coefficients(const ReservoirModel& model, FieldDirection dir, double z);

/// Observation point far outside the array on the side the field propagates to.
FieldCoefficients far_field(const ReservoirModel& model, FieldDirection dir);

/// Sanity checks on a built model: symmetry, trace, PSD, rank for 1D reservoirs.
/// Returns an empty string when all hold, otherwise a description of the first violation.
std::string check_model_invariants(const ReservoirModel& model);

}  // namespace sr1d
