#include "sr1d/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace sr1d {

namespace {

constexpr cplx I{0.0, 1.0};

void require_rates(const Rates& r) {
    if (!(r.gamma_1d > 0.0)) throw Error("gamma_1d must be positive");
    if (r.gamma_prime < 0.0) throw Error("gamma_prime must be non-negative");
    if (r.pump < 0.0) throw Error("pump must be non-negative");
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::SingleModeCavity: return "cavity";
        case ModelKind::RingCavity: return "ring";
        case ModelKind::Waveguide: return "waveguide";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "cavity" || name == "single_mode_cavity") return ModelKind::SingleModeCavity;
    if (name == "ring" || name == "ring_cavity") return ModelKind::RingCavity;
    if (name == "waveguide") return ModelKind::Waveguide;
    throw Error("unknown model kind '" + name + "'");
}

std::string to_string(FieldDirection dir) {
    switch (dir) {
        case FieldDirection::Right: return "right";
        case FieldDirection::Left: return "left";
        case FieldDirection::Cavity: return "cavity";
    }
    return "unknown";
}

FieldDirection field_direction_from_string(const std::string& name) {
    if (name == "right") return FieldDirection::Right;
    if (name == "left") return FieldDirection::Left;
    if (name == "cavity") return FieldDirection::Cavity;
    throw Error("unknown field direction '" + name + "'");
}

ReservoirModel ReservoirModel::with_pump(double pump) const {
    if (pump < 0.0) throw Error("pump must be non-negative");
    ReservoirModel out = *this;
    out.rates.pump = pump;
    return out;
}

ReservoirModel build_model(ModelKind kind, int n_atoms, double spacing_kd, Rates rates,
                           const std::optional<std::vector<double>>& positions_override) {
    if (n_atoms < 1) throw Error("n_atoms must be at least 1");
    require_rates(rates);

    ReservoirModel m;
    m.kind = kind;
    m.n_atoms = n_atoms;
    m.rates = rates;
    if (positions_override) {
        if (static_cast<int>(positions_override->size()) != n_atoms)
            throw Error("positions override has wrong length");
        m.positions = *positions_override;
    } else {
        m.positions.resize(n_atoms);
        for (int n = 0; n < n_atoms; ++n) m.positions[n] = (n + 1) * spacing_kd;
    }

    const double g = rates.gamma_1d;
    m.J = RealMatrix::Zero(n_atoms, n_atoms);
    m.Gamma = RealMatrix::Constant(n_atoms, n_atoms, g);
    if (kind == ModelKind::SingleModeCavity) return m;

    for (int a = 0; a < n_atoms; ++a) {
        for (int b = a + 1; b < n_atoms; ++b) {
            const double phase = m.k * std::abs(m.positions[a] - m.positions[b]);
            const double gab = g * std::cos(phase);
            m.Gamma(a, b) = m.Gamma(b, a) = gab;
            if (kind == ModelKind::Waveguide) {
                // self-Lamb shift (n == m) is absorbed into the resonance
                const double jab = 0.5 * g * std::sin(phase);
                m.J(a, b) = m.J(b, a) = jab;
            }
        }
    }
    return m;
}

std::vector<JumpMode> jump_mode_decomposition(const ReservoirModel& model) {
    const int n = model.n_atoms;
    const double clamp = 1e-10 * n * model.gamma_1d();
    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(model.Gamma);
    if (eig.info() != Eigen::Success) throw Error("eigen-decomposition of Gamma failed");

    std::vector<JumpMode> modes(n);
    for (int i = 0; i < n; ++i) {
        // eigenvalues come ascending
        const int src = n - 1 - i;
        double rate = eig.eigenvalues()(src);
        modes[i].rate = rate < clamp ? 0.0 : rate;
        modes[i].profile = eig.eigenvectors().col(src).cast<cplx>();
    }

    const bool two_bright = n >= 2 && modes[1].rate > clamp;
    const double degeneracy_tol = 1e-9 * n * model.gamma_1d();
    if (model.kind != ModelKind::SingleModeCavity && two_bright &&
        std::abs(modes[0].rate - modes[1].rate) < degeneracy_tol) {
        ComplexVector left(n), right(n);
        for (int a = 0; a < n; ++a) {
            const double kz = model.k * model.positions[a];
            left(a) = std::exp(I * kz) / std::sqrt(double(n));
            right(a) = std::exp(-I * kz) / std::sqrt(double(n));
        }
        ComplexMatrix basis(n, 2);
        basis.col(0) = modes[0].profile;
        basis.col(1) = modes[1].profile;
        auto in_span = [&](const ComplexVector& v) {
            const ComplexVector proj = basis * (basis.adjoint() * v);
            return (proj - v).norm() < 1e-8 && std::abs(left.dot(right)) < 1e-8;
        };
        if (in_span(left) && in_span(right)) {
            modes[0].profile = left;
            modes[1].profile = right;
        }
    }
    return modes;
}

FieldCoefficients field_coefficients(const ReservoirModel& model, FieldDirection dir, double z) {
    const int n = model.n_atoms;
    FieldCoefficients f;
    f.direction = dir;
    f.z = z;
    f.coeffs = ComplexVector::Zero(n);
    const double g = model.gamma_1d();

    switch (model.kind) {
        case ModelKind::SingleModeCavity:
            if (dir != FieldDirection::Cavity)
                throw Error("single-mode cavity only supports the cavity field");
            f.coeffs.setConstant(I);
            f.prefactor = g / 2.0;
            return f;
        case ModelKind::RingCavity:
        case ModelKind::Waveguide:
            if (dir == FieldDirection::Cavity)
                throw Error("cavity field requested for a " + to_string(model.kind) + " model");
            break;
    }

    const bool guided = model.kind == ModelKind::Waveguide;
    f.prefactor = guided ? g / 2.0 : g / 4.0;
    for (int a = 0; a < n; ++a) {
        const double zn = model.positions[a];
        if (dir == FieldDirection::Right) {
            if (!guided || z > zn) f.coeffs(a) = I * std::exp(I * model.k * (z - zn));
        } else {
            if (!guided || z < zn) f.coeffs(a) = I * std::exp(I * model.k * (zn - z));
        }
    }
    return f;
}

FieldCoefficients far_field(const ReservoirModel& model, FieldDirection dir) {
    if (model.kind == ModelKind::SingleModeCavity) return field_coefficients(model, dir, 0.0);
    const auto [lo, hi] = std::minmax_element(model.positions.begin(), model.positions.end());
    const double margin = 1.0 + (*hi - *lo);
    const double z = dir == FieldDirection::Right ? *hi + margin : *lo - margin;
    return field_coefficients(model, dir, z);
}

std::string check_model_invariants(const ReservoirModel& model) {
    const int n = model.n_atoms;
    const double g = model.gamma_1d();
    const double tol = 1e-10 * n * g;
    std::ostringstream err;
    if ((model.Gamma - model.Gamma.transpose()).cwiseAbs().maxCoeff() > 1e-14 * g)
        return "Gamma is not symmetric";
    if ((model.J - model.J.transpose()).cwiseAbs().maxCoeff() > 1e-14 * g)
        return "J is not symmetric";
    for (int a = 0; a < n; ++a) {
        if (std::abs(model.Gamma(a, a) - g) > 1e-14 * g) return "Gamma diagonal differs from gamma_1d";
        if (model.J(a, a) != 0.0) return "J has a non-zero diagonal";
    }
    if (model.kind != ModelKind::Waveguide && model.J.cwiseAbs().maxCoeff() > 0.0)
        return "J must vanish for cavity models";
    if (std::abs(model.Gamma.trace() - n * g) > tol) return "trace(Gamma) != N gamma_1d";

    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(model.Gamma, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    if (ev.minCoeff() < -tol) {
        err << "Gamma not positive semidefinite (min eigenvalue " << ev.minCoeff() << ")";
        return err.str();
    }
    if (model.kind != ModelKind::SingleModeCavity && n >= 3 && ev(n - 3) > tol) {
        err << "Gamma rank exceeds 2 (third eigenvalue " << ev(n - 3) << ")";
        return err.str();
    }
    return {};
}

}  // namespace sr1d
