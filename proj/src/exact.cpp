#include "sr1d/exact.hpp"

#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <bit>
#include <unsupported/Eigen/KroneckerProduct>

namespace sr1d::exact {

namespace {

constexpr cplx I{0.0, 1.0};

void require_size(int n_atoms) {
    if (n_atoms < 1) throw Error("exact solver needs at least one atom");
    if (n_atoms > kMaxAtoms)
        throw Error("exact solver limited to N <= " + std::to_string(kMaxAtoms) + " (got " +
                    std::to_string(n_atoms) + ")");
}

SparseOp identity(int dim) {
    SparseOp id(dim, dim);
    id.setIdentity();
    return id;
}

// trace(A rho) where A = sigma_eg^n sigma_ge^m in the bit basis
cplx expect_pair(const DensityMatrix& rho, int n, int m) {
    const int dim = static_cast<int>(rho.rows());
    const int bn = 1 << n, bm = 1 << m;
    cplx acc = 0.0;
    for (int j = 0; j < dim; ++j) {
        if (!(j & bm)) continue;
        int jp = j & ~bm;
        if (jp & bn) continue;
        jp |= bn;
        // <j| rho A |j> with A|j> = |jp>
        acc += rho(j, jp);
    }
    return acc;
}

}  // namespace

DensityMatrix ground_state(int n_atoms) {
    require_size(n_atoms);
    const int dim = 1 << n_atoms;
    DensityMatrix rho = DensityMatrix::Zero(dim, dim);
    rho(0, 0) = 1.0;
    return rho;
}

DensityMatrix excited_state(int n_atoms) {
    require_size(n_atoms);
    const int dim = 1 << n_atoms;
    DensityMatrix rho = DensityMatrix::Zero(dim, dim);
    rho(dim - 1, dim - 1) = 1.0;
    return rho;
}

SparseOp lowering(int n_atoms, int atom) {
    require_size(n_atoms);
    if (atom < 0 || atom >= n_atoms) throw Error("atom index out of range");
    const int dim = 1 << n_atoms;
    const int bit = 1 << atom;
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(dim / 2);
    for (int j = 0; j < dim; ++j)
        if (j & bit) trip.emplace_back(j & ~bit, j, 1.0);
    SparseOp op(dim, dim);
    op.setFromTriplets(trip.begin(), trip.end());
    return op;
}

Liouvillian::Liouvillian(const ReservoirModel& model)
    : n_atoms_(model.n_atoms), dim_(1 << model.n_atoms) {
    require_size(n_atoms_);
    const int n = n_atoms_;
    std::vector<SparseOp> lower(n), raise(n);
    for (int a = 0; a < n; ++a) {
        lower[a] = lowering(n, a);
        raise[a] = SparseOp(lower[a].adjoint());
    }

    // H_eff = sum_nm (J_nm - i Gamma_nm / 2) s+_n s-_m - (i/2) sum_n (Gamma' s+s- + w s-s+)
    SparseOp h(dim_, dim_);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const cplx c = model.J(a, b) - 0.5 * I * model.Gamma(a, b);
            if (c == cplx{0.0}) continue;
            h += c * SparseOp(raise[a] * lower[b]);
        }
        h += (-0.5 * I * model.gamma_prime()) * SparseOp(raise[a] * lower[a]);
        h += (-0.5 * I * model.pump()) * SparseOp(lower[a] * raise[a]);
    }
    h.prune(cplx{0.0});
    h_eff_ = h;
    h_eff_adj_ = SparseOp(h.adjoint());

    for (const auto& mode : jump_mode_decomposition(model)) {
        if (mode.rate <= 0.0) continue;
        SparseOp op(dim_, dim_);
        for (int a = 0; a < n; ++a) op += mode.profile(a) * lower[a];
        op.prune(cplx{0.0});
        jumps_.push_back({mode.rate, op, SparseOp(op.adjoint())});
    }
    for (int a = 0; a < n; ++a) {
        if (model.gamma_prime() > 0.0) jumps_.push_back({model.gamma_prime(), lower[a], raise[a]});
        if (model.pump() > 0.0) jumps_.push_back({model.pump(), raise[a], lower[a]});
    }
}

DensityMatrix Liouvillian::apply(const DensityMatrix& rho) const {
    if (rho.rows() != dim_ || rho.cols() != dim_) throw Error("density matrix dimension mismatch");
    DensityMatrix out = -I * (h_eff_ * rho);
    out += I * (rho * h_eff_adj_);
    DensityMatrix tmp(dim_, dim_);
    for (const auto& j : jumps_) {
        tmp.noalias() = j.op * rho;
        out.noalias() += j.rate * (tmp * j.op_adj);
    }
    return out;
}

SparseOp Liouvillian::vectorized() const {
    const SparseOp id = identity(dim_);
    // vec(A rho B) = (B^T kron A) vec(rho)
    SparseOp gen = Eigen::kroneckerProduct(id, SparseOp(-I * h_eff_)).eval();
    gen += Eigen::kroneckerProduct(SparseOp(h_eff_adj_.transpose()), id).eval() * I;
    for (const auto& j : jumps_) {
        const SparseOp conj_op = j.op.conjugate();
        gen += j.rate * Eigen::kroneckerProduct(conj_op, j.op).eval();
    }
    gen.prune(cplx{0.0});
    gen.makeCompressed();
    return gen;
}

DensityMatrix apply_liouvillian(const ReservoirModel& model, const DensityMatrix& rho) {
    return Liouvillian(model).apply(rho);
}

DensityMatrix evolve(const Liouvillian& lv, DensityMatrix rho, double t, double dt) {
    if (t <= 0.0) return rho;
    if (!(dt > 0.0)) throw Error("time step must be positive");
    const int steps = static_cast<int>(std::ceil(t / dt - 1e-12));
    const double h = t / steps;
    for (int s = 0; s < steps; ++s) {
        const DensityMatrix k1 = lv.apply(rho);
        const DensityMatrix k2 = lv.apply(rho + 0.5 * h * k1);
        const DensityMatrix k3 = lv.apply(rho + 0.5 * h * k2);
        const DensityMatrix k4 = lv.apply(rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return rho;
}

double generator_rate_bound(const ReservoirModel& model) {
    const int n = model.n_atoms;
    double coupling = 0.0;
    for (int a = 0; a < n; ++a) {
        double row = 0.0;
        for (int b = 0; b < n; ++b) row += std::abs(model.Gamma(a, b)) + 2.0 * std::abs(model.J(a, b));
        coupling = std::max(coupling, row);
    }
    return n * (model.gamma_prime() + model.pump()) + n * coupling;
}

namespace {

constexpr int kIterativeSectorSize = 4000;  // C(14, 7) = 3432 still factorizes quickly

DensityMatrix hermitize(const DensityMatrix& rho) {
    DensityMatrix out = 0.5 * (rho + rho.adjoint());
    return out / out.trace().real();
}

DensityMatrix null_space_solve(const Liouvillian& lv) {
    const int dim = lv.dim();
    const SparseOp gen = lv.vectorized();

    // Every term changes the excitation number of ket and bra together, so a unique steady state
    // lives in the sector popcount(i) == popcount(j): C(2N, N) unknowns instead of 4^N.
    std::vector<int> sector_of(static_cast<std::size_t>(dim) * dim, -1);
    std::vector<int> members;
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i)
            if (std::popcount(static_cast<unsigned>(i)) == std::popcount(static_cast<unsigned>(j))) {
                sector_of[static_cast<std::size_t>(j) * dim + i] = static_cast<int>(members.size());
                members.push_back(j * dim + i);
            }
    const int sec_dim = static_cast<int>(members.size());

    // Replace the ground-population row by the trace functional. Replacing a single row lowers
    // the nullity by at most one, so the bordered system is regular iff the null space is a line.
    const int row = 0;
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(gen.nonZeros() / 2 + dim);
    for (int col = 0; col < gen.outerSize(); ++col) {
        const int c = sector_of[col];
        if (c < 0) continue;
        for (SparseOp::InnerIterator it(gen, col); it; ++it) {
            const int r = sector_of[it.row()];
            if (r >= 0 && r != row) trip.emplace_back(r, c, it.value());
        }
    }
    for (int d = 0; d < dim; ++d) trip.emplace_back(row, sector_of[static_cast<std::size_t>(d) * dim + d], 1.0);
    SparseOp a(sec_dim, sec_dim);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(sec_dim);
    rhs(row) = 1.0;

    auto accept = [&](const Eigen::VectorXcd& x) {
        return x.allFinite() && x.norm() < 1e6 && (a * x - rhs).norm() < 1e-9;
    };
    Eigen::VectorXcd x;
    bool ok = false;
    if (sec_dim > kIterativeSectorSize) {
        // LU fill-in from the collective jumps makes direct factorization impractical here
        Eigen::BiCGSTAB<SparseOp, Eigen::IncompleteLUT<cplx>> it;
        it.preconditioner().setDroptol(1e-4);
        it.preconditioner().setFillfactor(20);
        it.setTolerance(1e-12);
        it.setMaxIterations(5000);
        it.compute(a);
        if (it.info() == Eigen::Success) {
            x = it.solve(rhs);
            ok = it.info() == Eigen::Success && accept(x);
        }
    }
    if (!ok) {
        Eigen::SparseLU<SparseOp> lu;
        lu.compute(a);
        if (lu.info() == Eigen::Success) {
            x = lu.solve(rhs);
            ok = lu.info() == Eigen::Success && accept(x);
        }
    }
    if (!ok) throw Error("steady state is not unique (degenerate null space)");
    DensityMatrix rho = DensityMatrix::Zero(dim, dim);
    for (int k = 0; k < sec_dim; ++k) rho(members[k] % dim, members[k] / dim) = x(k);
    return hermitize(rho);
}

DensityMatrix integrate_to_steady(const ReservoirModel& model, const Liouvillian& lv) {
    const int dim = lv.dim();
    DensityMatrix rho = DensityMatrix::Identity(dim, dim) / double(dim);
    double dt = 0.05 / generator_rate_bound(model);
    const double t_max = 5e4 / model.gamma_1d();
    double t = 0.0;
    // Step-doubling RK4; accept when the two estimates agree to 1e-12 relative.
    while (t < t_max) {
        const DensityMatrix full = evolve(lv, rho, dt, dt);
        const DensityMatrix half = evolve(lv, rho, dt, 0.5 * dt);
        const double err = (full - half).norm();
        if (err > 1e-12) {
            dt *= 0.5;
            continue;
        }
        rho = hermitize(half);
        t += dt;
        if (lv.apply(rho).norm() < 1e-11) return rho;
        if (err < 1e-14) dt = std::min(dt * 1.5, 2.0 / model.gamma_1d());
    }
    throw Error("steady-state integration did not converge");
}

}  // namespace

DensityMatrix steady_state(const ReservoirModel& model, SteadyStateInfo* info) {
    require_size(model.n_atoms);
    const Liouvillian lv(model);
    const bool integrate = model.n_atoms > kMaxNullSpaceAtoms;
    DensityMatrix rho = integrate ? integrate_to_steady(model, lv) : null_space_solve(lv);
    if (info) {
        info->residual = lv.apply(rho).norm();
        info->from_integration = integrate;
    }
    return rho;
}

ComplexMatrix correlation_matrix(const DensityMatrix& rho, int n_atoms) {
    require_size(n_atoms);
    if (rho.rows() != (1 << n_atoms)) throw Error("density matrix dimension mismatch");
    ComplexMatrix c(n_atoms, n_atoms);
    for (int a = 0; a < n_atoms; ++a)
        for (int b = 0; b < n_atoms; ++b) c(a, b) = expect_pair(rho, a, b);
    return c;
}

Observables observables(const ReservoirModel& model, const DensityMatrix& rho) {
    const int n = model.n_atoms;
    Observables obs;
    obs.correlations = correlation_matrix(rho, n);
    obs.excited_per_atom.resize(n);
    double pe = 0.0;
    for (int a = 0; a < n; ++a) {
        obs.excited_per_atom[a] = obs.correlations(a, a).real();
        pe += obs.excited_per_atom[a];
    }
    obs.excited_fraction = pe / n;
    // R = sum_nu Gamma_nu <O_nu^dag O_nu>, O_nu = sum_n b^n sigma_ge^n
    double r = 0.0;
    for (const auto& mode : jump_mode_decomposition(model)) {
        if (mode.rate <= 0.0) continue;
        const cplx q = mode.profile.adjoint() * obs.correlations * mode.profile;
        r += mode.rate * q.real();
    }
    obs.emission_rate = r;
    return obs;
}

double field_intensity(const DensityMatrix& rho, const ComplexVector& weights) {
    const int n = static_cast<int>(weights.size());
    const ComplexMatrix c = correlation_matrix(rho, n);
    cplx acc = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) acc += std::conj(weights(a)) * weights(b) * c(a, b);
    return acc.real();
}

std::vector<cplx> two_time_correlator(const ReservoirModel& model, const DensityMatrix& rho_ss,
                                      const ComplexVector& left, const ComplexVector& right,
                                      const std::vector<double>& tau_grid, double dt) {
    const int n = model.n_atoms;
    if (left.size() != n || right.size() != n) throw Error("field weights have wrong length");
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        if (tau_grid[i] < 0.0 || (i > 0 && tau_grid[i] <= tau_grid[i - 1]))
            throw Error("tau grid must be non-negative and increasing");
    }
    const Liouvillian lv(model);
    if (lv.apply(rho_ss).norm() > 1e-8) throw Error("input density matrix is not stationary");
    if (dt <= 0.0) dt = 0.1 / generator_rate_bound(model);

    const int dim = lv.dim();
    SparseOp b(dim, dim), a(dim, dim);
    for (int at = 0; at < n; ++at) {
        const SparseOp low = lowering(n, at);
        b += right(at) * low;
        a += left(at) * low;
    }
    const SparseOp a_dag = a.adjoint();

    DensityMatrix x = b * rho_ss;
    std::vector<cplx> out;
    out.reserve(tau_grid.size());
    double t = 0.0;
    for (double tau : tau_grid) {
        x = evolve(lv, x, tau - t, dt);
        t = tau;
        out.push_back((a_dag * x).trace());
    }
    return out;
}

}  // namespace sr1d::exact
