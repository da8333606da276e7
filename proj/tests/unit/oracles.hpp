#pragma once

// Brute-force references built straight from the Gamma and J matrices, without the jump-mode
// decomposition or any sparse machinery. Small N only.

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "sr1d/models.hpp"

namespace oracle {

using sr1d::cplx;
using Mat = Eigen::MatrixXcd;

// sigma_ge of atom `atom` with bit `atom` of the basis index marking it excited
inline Mat lowering(int n, int atom) {
    const int dim = 1 << n;
    Mat s = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
        if (i & (1 << atom)) s(i ^ (1 << atom), i) = 1.0;
    return s;
}

// column-major vec: vec(A X B) = (B^T kron A) vec(X)
inline Mat superoperator(const sr1d::ReservoirModel& m) {
    const int n = m.n_atoms, dim = 1 << n;
    const Mat id = Mat::Identity(dim, dim);
    std::vector<Mat> s(n);
    for (int a = 0; a < n; ++a) s[a] = lowering(n, a);
    Mat h = Mat::Zero(dim, dim);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (a != b) h += m.J(a, b) * s[a].adjoint() * s[b];
    auto kron = [](const Mat& a, const Mat& b) {
        Mat out = Eigen::kroneckerProduct(a, b);
        return out;
    };
    Mat l = -cplx(0, 1) * (kron(id, h) - kron(h.transpose(), id));
    auto dissipator = [&](const Mat& left, const Mat& right, double rate) {
        // rate (right rho left^dag - 1/2 {left^dag right, rho})
        const Mat lr = left.adjoint() * right;
        Mat out = rate * (kron(left.conjugate(), right) - 0.5 * kron(id, lr) - 0.5 * kron(lr.transpose(), id));
        return out;
    };
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) l += dissipator(s[a], s[b], m.Gamma(a, b));
    for (int a = 0; a < n; ++a) {
        l += dissipator(s[a], s[a], m.gamma_prime());
        l += dissipator(s[a].adjoint(), s[a].adjoint(), m.pump());
    }
    return l;
}

inline Mat unvec(const Eigen::VectorXcd& v, int dim) { return Eigen::Map<const Mat>(v.data(), dim, dim); }
inline Eigen::VectorXcd vec(const Mat& rho) { return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size()); }

inline Mat steady_state(const sr1d::ReservoirModel& m) {
    const int dim = 1 << m.n_atoms;
    Eigen::JacobiSVD<Mat> svd(superoperator(m), Eigen::ComputeFullV);
    const Eigen::VectorXcd v = svd.matrixV().col(svd.matrixV().cols() - 1);
    Mat rho = unvec(v, dim);
    rho /= rho.trace();
    return 0.5 * (rho + rho.adjoint());
}

inline Mat evolve(const sr1d::ReservoirModel& m, const Mat& rho, double t) {
    const Mat prop = (superoperator(m) * t).exp();
    return unvec(prop * vec(rho), rho.rows());
}

// product state from per-atom (coh = <sigma_ge>, inv = <sigma_z>/2)
inline Mat product_state(const std::vector<cplx>& coh, const std::vector<double>& inv) {
    Mat rho = Mat::Ones(1, 1);
    for (std::size_t a = 0; a < coh.size(); ++a) {
        Mat r(2, 2);  // basis (g, e)
        r << 0.5 - inv[a], std::conj(coh[a]), coh[a], 0.5 + inv[a];
        Mat next = Eigen::kroneckerProduct(r, rho);
        rho = next;
    }
    return rho;
}

inline cplx expect(const Mat& rho, const Mat& op) { return (rho * op).trace(); }

}  // namespace oracle
