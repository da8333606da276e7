#include "sr1d/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sr1d::kernels {

namespace {
constexpr cplx I{0.0, 1.0};
}

CollectiveField::CollectiveField(const ReservoirModel& model)
    : kind_(model.kind), n_(model.n_atoms), half_gamma_(0.5 * model.gamma_1d()) {
    plane_.resize(n_);
    for (int a = 0; a < n_; ++a) plane_[a] = std::exp(I * (model.k * model.positions[a]));
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](int a, int b) { return model.positions[a] < model.positions[b]; });
    dense_ = 0.5 * model.Gamma.cast<cplx>() + I * model.J.cast<cplx>();
    dense_.diagonal().setZero();
}

void CollectiveField::apply(std::span<const cplx> coh, std::span<cplx> h) const {
    switch (kind_) {
        case ModelKind::SingleModeCavity: {
            cplx total = 0.0;
            for (int a = 0; a < n_; ++a) total += coh[a];
            for (int a = 0; a < n_; ++a) h[a] = half_gamma_ * (total - coh[a]);
            return;
        }
        case ModelKind::RingCavity: {
            // cos(k(z_l - z_m)) = (e^{ikz_l} e^{-ikz_m} + c.c.) / 2
            cplx plus = 0.0, minus = 0.0;
            for (int a = 0; a < n_; ++a) {
                plus += plane_[a] * coh[a];
                minus += std::conj(plane_[a]) * coh[a];
            }
            const double q = 0.5 * half_gamma_;
            for (int a = 0; a < n_; ++a)
                h[a] = q * (plane_[a] * minus + std::conj(plane_[a]) * plus) - half_gamma_ * coh[a];
            return;
        }
        case ModelKind::Waveguide: {
            // (Gamma_1D/2) e^{ik|z_l - z_m|}: prefix sum from the left, suffix sum from the right
            cplx left = 0.0;
            for (int i = 0; i < n_; ++i) {
                const int a = order_[i];
                h[a] = plane_[a] * left;
                left += std::conj(plane_[a]) * coh[a];
            }
            cplx right = 0.0;
            for (int i = n_ - 1; i >= 0; --i) {
                const int a = order_[i];
                h[a] = half_gamma_ * (h[a] + std::conj(plane_[a]) * right);
                right += plane_[a] * coh[a];
            }
            return;
        }
    }
}

void CollectiveField::apply_dense(std::span<const cplx> coh, std::span<cplx> h) const {
    for (int a = 0; a < n_; ++a) {
        cplx acc = 0.0;
        for (int b = 0; b < n_; ++b) acc += dense_(a, b) * coh[b];
        h[a] = acc;
    }
}

void drift(const ReservoirModel& model, std::span<const cplx> coh, std::span<const double> inv,
           std::span<const cplx> h, std::span<cplx> dcoh, std::span<double> dinv) {
    const double kappa = model.local_rate();
    const double source = 0.5 * (model.pump() - model.gamma_1d() - model.gamma_prime());
    const std::size_t n = coh.size();
    for (std::size_t a = 0; a < n; ++a) {
        dcoh[a] = -0.5 * kappa * coh[a] + 2.0 * inv[a] * h[a];
        dinv[a] = -kappa * inv[a] + source - 2.0 * (std::conj(coh[a]) * h[a]).real();
    }
}

}  // namespace sr1d::kernels
