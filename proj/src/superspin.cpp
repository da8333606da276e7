#include "sr1d/superspin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace sr1d::superspin {

std::vector<int> Partition::members(int alpha) const {
    std::vector<int> out;
    for (int n = 0; n < n_atoms; ++n)
        if (group[n] == alpha) out.push_back(n);
    return out;
}

Partition build_partition(int n_atoms, int m, int p, double gamma_1d) {
    if (n_atoms < 1) throw Error("build_partition: need at least one atom");
    if (p < 1 || m < 1) throw Error("build_partition: m and p must be positive");
    if (n_atoms % p != 0) throw Error("build_partition: N must be divisible by p");
    if (p > 1 && std::gcd(m, p) != 1)
        throw Error("build_partition: m and p must be coprime for p groups to be distinct");
    if (!(gamma_1d > 0.0)) throw Error("build_partition: gamma_1d must be positive");

    Partition part;
    part.n_atoms = n_atoms;
    part.m = m;
    part.p = p;
    part.group_size = n_atoms / p;
    part.kd = std::numbers::pi * m / p;
    part.gamma_1d = gamma_1d;
    part.group.resize(n_atoms);
    part.wavelength_index.resize(n_atoms);
    part.sign.resize(n_atoms);
    for (int n = 0; n < n_atoms; ++n) {
        part.group[n] = n % p;
        part.wavelength_index[n] = n / p + 1;
        part.sign[n] = (m * (part.wavelength_index[n] + 1)) % 2 == 0 ? 1 : -1;
    }
    part.gamma.resize(p, p);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) part.gamma(a, b) = gamma_1d * std::cos(part.kd * (a - b));
    return part;
}

double circulant_identity_residual(const Partition& part) {
    const RealMatrix lhs = part.gamma * part.gamma;
    const RealMatrix rhs = 0.5 * part.p * part.gamma_1d * part.gamma;
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

ReservoirModel ring_model(const Partition& part, Rates rates) {
    rates.gamma_1d = part.gamma_1d;
    return build_model(ModelKind::RingCavity, part.n_atoms, part.kd, rates);
}

CumulantState cumulant_derivatives(const CumulantState& s, const Partition& part,
                                   const Rates& rates, const CumulantOptions& opts) {
    const int p = part.p;
    const double ns = part.group_size;
    const double g1d = part.gamma_1d;
    const double loss = rates.gamma_prime + rates.pump;
    const RealMatrix& G = part.gamma;

    CumulantState d;
    d.jz.assign(p, 0.0);
    d.jpm.assign(p, 0.0);
    d.cross = RealMatrix::Zero(p, p);
    for (int a = 0; a < p; ++a) {
        double exchange = 0.0;
        for (int mu = 0; mu < p; ++mu)
            if (mu != a) exchange += G(a, mu) * ns * (s.cross(a, mu) + s.cross(mu, a));
        d.jz[a] = -0.5 * exchange - g1d * ns * s.jpm[a] - loss * s.jz[a] +
                  0.5 * (rates.pump - rates.gamma_prime);
        d.jpm[a] = s.jz[a] * (2.0 * g1d * ns * s.jpm[a] + exchange) - loss * s.jpm[a] +
                   (opts.pump_source ? rates.pump / ns : 0.0);
    }
    for (int a = 0; a < p; ++a) {
        for (int x = 0; x < p; ++x) {
            if (x == a) continue;
            double v = g1d * s.cross(a, x) * (ns * s.jz[a] + ns * s.jz[x]) +
                       G(x, a) * (ns * s.jpm[x] * s.jz[a] + ns * s.jpm[a] * s.jz[x]);
            for (int mu = 0; mu < p; ++mu) {
                if (mu == a || mu == x) continue;
                v += ns * (G(mu, a) * s.cross(mu, x) * s.jz[a] + G(x, mu) * s.cross(a, mu) * s.jz[x]);
            }
            d.cross(a, x) = v - loss * s.cross(a, x);
        }
    }
    return d;
}

CumulantState seed_state(const Partition& part, const Rates& rates, double seed) {
    const int p = part.p;
    const double sum = rates.pump + rates.gamma_prime;
    CumulantState s;
    s.jz.assign(p, sum > 0.0 ? 0.5 * (rates.pump - rates.gamma_prime) / sum : -0.5);
    s.jpm.assign(p, seed);
    s.cross = seed / part.gamma_1d * part.gamma;
    s.cross.diagonal().setZero();
    return s;
}

double group_rate(const CumulantState& s, const Partition& part, int alpha) {
    double r = s.jpm[alpha];
    for (int mu = 0; mu < part.p; ++mu)
        if (mu != alpha) r += part.gamma(mu, alpha) / part.gamma_1d * s.cross(mu, alpha);
    return r;
}

double emission_rate(const CumulantState& s, const Partition& part) {
    double acc = 0.0;
    for (int a = 0; a < part.p; ++a)
        for (int x = 0; x < part.p; ++x)
            acc += part.gamma(a, x) * (a == x ? s.jpm[a] : s.cross(a, x));
    const double ns = part.group_size;
    return ns * ns * acc;
}

double excited_fraction(const CumulantState& s) {
    double acc = 0.0;
    for (double v : s.jz) acc += v;
    return acc / static_cast<double>(s.jz.size()) + 0.5;
}

namespace {

void axpy(const CumulantState& s, double c, const CumulantState& d, CumulantState& out) {
    for (std::size_t a = 0; a < s.jz.size(); ++a) {
        out.jz[a] = s.jz[a] + c * d.jz[a];
        out.jpm[a] = s.jpm[a] + c * d.jpm[a];
    }
    out.cross = s.cross + c * d.cross;
}

double max_norm(const CumulantState& d) {
    double m = d.cross.size() ? d.cross.cwiseAbs().maxCoeff() : 0.0;
    for (std::size_t a = 0; a < d.jz.size(); ++a) m = std::max({m, std::abs(d.jz[a]), std::abs(d.jpm[a])});
    return m;
}

}  // namespace

CumulantSteady integrate_to_steady(CumulantState s, const Partition& part, const Rates& rates,
                                   const CumulantOptions& opts, double tol, double dt,
                                   double t_max) {
    const double loss = rates.gamma_prime + rates.pump;
    if (dt <= 0.0) dt = 0.05 / (part.n_atoms * part.gamma_1d + loss);
    if (t_max <= 0.0) t_max = 2000.0 / std::max(loss, 1e-3 * part.gamma_1d);
    CumulantSteady out;
    CumulantState tmp = s;
    const long max_steps = static_cast<long>(std::ceil(t_max / dt));
    for (long step = 0; step < max_steps; ++step) {
        const CumulantState k1 = cumulant_derivatives(s, part, rates, opts);
        if (step % 64 == 0) {
            out.residual = max_norm(k1);
            if (out.residual < tol) {
                out.converged = true;
                break;
            }
        }
        axpy(s, 0.5 * dt, k1, tmp);
        const CumulantState k2 = cumulant_derivatives(tmp, part, rates, opts);
        axpy(s, 0.5 * dt, k2, tmp);
        const CumulantState k3 = cumulant_derivatives(tmp, part, rates, opts);
        axpy(s, dt, k3, tmp);
        const CumulantState k4 = cumulant_derivatives(tmp, part, rates, opts);
        for (int a = 0; a < part.p; ++a) {
            s.jz[a] += dt / 6.0 * (k1.jz[a] + 2.0 * k2.jz[a] + 2.0 * k3.jz[a] + k4.jz[a]);
            s.jpm[a] += dt / 6.0 * (k1.jpm[a] + 2.0 * k2.jpm[a] + 2.0 * k3.jpm[a] + k4.jpm[a]);
        }
        s.cross += dt / 6.0 * (k1.cross + 2.0 * k2.cross + 2.0 * k3.cross + k4.cross);
        out.t += dt;
        if (!std::isfinite(s.jz[0]) || !std::isfinite(s.jpm[0]))
            throw Error("superspin::integrate_to_steady: non-finite cumulants");
    }
    out.residual = max_norm(cumulant_derivatives(s, part, rates, opts));
    out.converged = out.residual < tol;
    out.state = std::move(s);
    return out;
}

ReducedSteady reduced_steady_state(int n_atoms, int p, double gamma_1d, double gamma_prime,
                                   double w) {
    if (n_atoms < 1 || p < 1 || n_atoms % p != 0)
        throw Error("reduced_steady_state: N must be a positive multiple of p");
    if (gamma_1d <= 0.0 || gamma_prime < 0.0 || w < 0.0)
        throw Error("reduced_steady_state: rates must be non-negative (gamma_1d positive)");
    const double ns = static_cast<double>(n_atoms) / p;
    const double n_gamma = n_atoms * gamma_1d;
    ReducedSteady out;
    if (w >= gamma_prime && w <= 0.5 * n_gamma && w > 0.0) {
        const double r = w / (2.0 * ns * gamma_1d) *
                         (1.0 - gamma_prime / w - 2.0 * (w + gamma_prime) * (w + gamma_prime) / (w * n_gamma));
        if (r > 0.0) {
            out.jz = (w + gamma_prime) / n_gamma;
            out.r_alpha = r;
            out.synchronized = true;
            return out;
        }
    }
    const double sum = w + gamma_prime;
    out.jz = sum > 0.0 ? 0.5 * (w - gamma_prime) / sum : -0.5;
    return out;
}

ReducedSteady cavity_steady_state(int n_atoms, double gamma_1d, double gamma_prime, double w) {
    if (n_atoms < 1) throw Error("cavity_steady_state: need at least one atom");
    if (gamma_1d <= 0.0 || gamma_prime < 0.0 || w < 0.0)
        throw Error("cavity_steady_state: rates must be non-negative (gamma_1d positive)");
    const double n_gamma = n_atoms * gamma_1d;
    ReducedSteady out;
    if (w >= gamma_prime && w <= n_gamma && w > 0.0) {
        const double jpm = w / (2.0 * n_gamma) *
                           (1.0 - gamma_prime / w - (w + gamma_prime) * (w + gamma_prime) / (w * n_gamma));
        if (jpm > 0.0) {
            out.jz = (w + gamma_prime) / (2.0 * n_gamma);
            out.r_alpha = jpm;
            out.synchronized = true;
            return out;
        }
    }
    const double sum = w + gamma_prime;
    out.jz = sum > 0.0 ? 0.5 * (w - gamma_prime) / sum : -0.5;
    return out;
}

ReducedSteady integrate_reduced(int n_atoms, int p, double gamma_1d, double gamma_prime, double w,
                                double seed, double tol) {
    if (n_atoms < 1 || p < 1 || n_atoms % p != 0)
        throw Error("integrate_reduced: N must be a positive multiple of p");
    const double ns = static_cast<double>(n_atoms) / p;
    const double gain = (p == 1 ? 2.0 : 1.0) * n_atoms * gamma_1d;
    const double loss = gamma_prime + w;
    auto deriv = [&](double jz, double r, double& djz, double& dr) {
        djz = -gamma_1d * ns * r - loss * jz + 0.5 * (w - gamma_prime);
        dr = -loss * r + gain * jz * r;
    };
    double jz = loss > 0.0 ? 0.5 * (w - gamma_prime) / loss : -0.5;
    double r = seed;
    const double dt = 0.05 / (n_atoms * gamma_1d + loss);
    const double t_max = 4000.0 / std::max(loss, 1e-3 * gamma_1d);
    for (double t = 0.0; t < t_max; t += dt) {
        double a1, b1, a2, b2, a3, b3, a4, b4;
        deriv(jz, r, a1, b1);
        if (std::max(std::abs(a1), std::abs(b1)) < tol) break;
        deriv(jz + 0.5 * dt * a1, r + 0.5 * dt * b1, a2, b2);
        deriv(jz + 0.5 * dt * a2, r + 0.5 * dt * b2, a3, b3);
        deriv(jz + dt * a3, r + dt * b3, a4, b4);
        jz += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        r += dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    }
    ReducedSteady out;
    out.jz = jz;
    out.r_alpha = r > 1e-9 ? r : 0.0;
    out.synchronized = out.r_alpha > 0.0;
    return out;
}

Thresholds analytic_thresholds(ModelKind kind, int n_atoms, int p, double gamma_1d,
                               double gamma_prime, const std::vector<double>& w_grid) {
    if (kind == ModelKind::Waveguide)
        throw Error("analytic_thresholds: no closed form for the waveguide; use waveguide_estimates");
    if (n_atoms < 1) throw Error("analytic_thresholds: need at least one atom");
    if (gamma_1d <= 0.0 || gamma_prime < 0.0)
        throw Error("analytic_thresholds: rates must be non-negative (gamma_1d positive)");
    const bool cavity = kind == ModelKind::SingleModeCavity;
    if (cavity) p = 1;
    if (p < 1 || n_atoms % p != 0) throw Error("analytic_thresholds: N must be a multiple of p");

    const double n = n_atoms;
    const double n_gamma = n * gamma_1d;
    Thresholds th;
    th.kind = kind;
    th.n_atoms = n_atoms;
    th.p = p;
    th.w_lower = gamma_prime;
    th.w_upper = cavity ? n_gamma : 0.5 * n_gamma;
    th.w_opt = cavity ? 0.5 * n_gamma : 0.25 * n_gamma;
    th.r_max = cavity ? n * n * gamma_1d / 8.0 : n * n * gamma_1d / 16.0;
    th.empty_window = th.w_lower > th.w_upper;

    // Both closed forms collapse to R = (N w / 2)(1 - G'/w - q (w + G')^2 / (w N G)) in physical
    // units, q = 1 (cavity) or 2 (ring); its maximum sits at w = N G / (2 q) - G'.
    const double q = cavity ? 1.0 : 2.0;
    auto rate = [&](double w) {
        if (w <= 0.0) return 0.0;
        if (cavity) {
            const auto st = cavity_steady_state(n_atoms, gamma_1d, gamma_prime, w);
            return st.synchronized ? n * n * gamma_1d * st.r_alpha : 0.0;
        }
        const auto st = reduced_steady_state(n_atoms, p, gamma_1d, gamma_prime, w);
        const double ns = n / p;
        return st.synchronized ? ns * ns * gamma_1d * p * st.r_alpha : 0.0;
    };
    th.w_opt_exact = std::max(0.0, n_gamma / (2.0 * q) - gamma_prime);
    th.r_max_exact = rate(th.w_opt_exact);

    for (double w : w_grid) {
        ThresholdPoint pt;
        pt.w = w;
        pt.emission_rate = rate(w);
        const auto st = cavity ? cavity_steady_state(n_atoms, gamma_1d, gamma_prime, w)
                               : reduced_steady_state(n_atoms, p, gamma_1d, gamma_prime, w);
        pt.excited_fraction = st.jz + 0.5;
        pt.excited_fraction_printed = (cavity ? 1.0 : p) * st.jz + 0.5;
        th.curve.push_back(pt);
    }
    return th;
}

WaveguideEstimates waveguide_estimates(int n_atoms, double gamma_1d) {
    if (n_atoms < 2) throw Error("waveguide_estimates: need at least two atoms");
    if (!(gamma_1d > 0.0)) throw Error("waveguide_estimates: gamma_1d must be positive");
    const double n = n_atoms;
    return {0.25 * n * gamma_1d, 0.125 * n * gamma_1d, 9.0 * n * n * gamma_1d / 256.0};
}

}  // namespace sr1d::superspin
