#include "sr1d/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "sr1d/meanfield.hpp"
#include "sr1d/superspin.hpp"

namespace sr1d::analysis {

namespace {

constexpr cplx I{0.0, 1.0};

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms = 0.0;
};

LineFit weighted_line(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& w) {
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        ss += w[i] * r * r;
    }
    f.rms = std::sqrt(ss / sw);
    return f;
}

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double std_error(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / (v.size() - 1) / v.size());
}

}  // namespace

SpectrumEstimate fit_linewidth(const std::vector<double>& tau, const std::vector<cplx>& g1,
                               const LinewidthOptions& opts) {
    SpectrumEstimate est;
    est.tau = tau;
    est.g1 = g1;
    const int n = static_cast<int>(tau.size());
    if (g1.size() != tau.size()) {
        est.diagnostics = "tau and g1 differ in length";
        return est;
    }
    if (n < opts.min_samples) {
        est.diagnostics = "need at least " + std::to_string(opts.min_samples) + " samples";
        return est;
    }
    if (!(std::abs(g1[0]) > 0.0)) {
        est.diagnostics = "g1(0) must be positive";
        return est;
    }

    const int tail = std::max(1, static_cast<int>(std::lround(opts.tail_fraction * n)));
    double floor = 0.0;
    for (int i = n - tail; i < n; ++i) floor += std::abs(g1[i]);
    floor /= tail;
    est.noise_floor = floor;
    const double cut = opts.subtract_floor ? opts.floor_factor * floor : 1e-12 * std::abs(g1[0]);
    if (!opts.subtract_floor) floor = 0.0;

    std::vector<double> x, y, w;
    for (int i = 0; i < n; ++i) {
        const double a = std::abs(g1[i]);
        if (!(a > cut)) break;
        const double s = a - floor;
        x.push_back(tau[i]);
        y.push_back(std::log(s));
        w.push_back(s);
    }
    est.window_samples = static_cast<int>(x.size());
    if (est.window_samples < opts.min_window) {
        std::ostringstream msg;
        msg << "fit window has " << x.size() << " samples above " << cut << "; need "
            << opts.min_window;
        est.diagnostics = msg.str();
        return est;
    }
    est.fit_tau_min = x.front();
    est.fit_tau_max = x.back();
    const LineFit f = weighted_line(x, y, w);
    est.residual = f.rms;
    est.linewidth = -2.0 * f.slope;
    est.ok = est.linewidth > 0.0;
    if (!est.ok) est.diagnostics = "fitted decay rate is not positive";
    return est;
}

std::vector<double> spectrum_from_correlator(const std::vector<double>& tau,
                                             const std::vector<cplx>& g1,
                                             const std::vector<double>& detuning) {
    if (tau.size() != g1.size() || tau.size() < 2)
        throw Error("spectrum_from_correlator: need matching tau and g1 with two or more samples");
    std::vector<double> s(detuning.size());
    for (std::size_t j = 0; j < detuning.size(); ++j) {
        cplx acc = 0.0;
        for (std::size_t i = 1; i < tau.size(); ++i) {
            const cplx a = g1[i - 1] * std::exp(I * (detuning[j] * tau[i - 1]));
            const cplx b = g1[i] * std::exp(I * (detuning[j] * tau[i]));
            acc += 0.5 * (tau[i] - tau[i - 1]) * (a + b);
        }
        s[j] = 2.0 * acc.real();
    }
    return s;
}

MinLinewidth min_linewidth_scan(const std::vector<std::pair<double, double>>& pairs) {
    MinLinewidth out;
    if (pairs.size() < 5) {
        out.reason = "need at least 5 (w, linewidth) points";
        return out;
    }
    Eigen::MatrixXd a(pairs.size(), 3);
    Eigen::VectorXd b(pairs.size());
    double w_lo = std::numeric_limits<double>::infinity(), w_hi = -w_lo;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double w = pairs[i].first;
        a(i, 0) = 1.0;
        a(i, 1) = w;
        a(i, 2) = w * w;
        b(i) = pairs[i].second;
        w_lo = std::min(w_lo, w);
        w_hi = std::max(w_hi, w);
    }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
    for (int i = 0; i < 3; ++i) out.coeffs[i] = c(i);
    out.curvature = c(2);
    if (!(c(2) > 0.0)) {
        out.reason = "non-positive curvature";
        return out;
    }
    out.w_min = -c(1) / (2.0 * c(2));
    out.dnu_min = c(0) + c(1) * out.w_min + c(2) * out.w_min * out.w_min;
    if (out.w_min < w_lo || out.w_min > w_hi) {
        out.reason = "vertex outside the sampled pump range";
        return out;
    }
    out.fit_ok = true;
    return out;
}

double ansatz_probability(int n, int n_atoms, double alpha, double beta) {
    if (n_atoms < 2) throw Error("ansatz_probability: needs N >= 2");
    if (n < 1 || n > n_atoms) throw Error("ansatz_probability: n outside [1, N]");
    if (!(alpha > 0.0)) throw Error("ansatz_probability: alpha must be positive");
    if (beta < 0.0 || beta > 1.0) throw Error("ansatz_probability: beta must lie in [0, 1]");
    const double x = 0.5 - static_cast<double>(n - 1) / (n_atoms - 1);
    return 0.5 + beta * std::tanh(alpha * x) / (2.0 * std::tanh(0.5 * alpha));
}

ComplexMatrix ansatz_correlations(double alpha, double beta, double gamma_w, double amplitude,
                                  const std::vector<double>& positions, double k) {
    const int n = static_cast<int>(positions.size());
    std::vector<double> pl(n);
    for (int a = 0; a < n; ++a) pl[a] = ansatz_probability(a + 1, n, alpha, beta);
    ComplexMatrix c(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const cplx ph = std::exp(I * (k * (positions[a] - positions[b])));
            c(a, b) = amplitude * gamma_w *
                      (pl[a] * pl[b] * ph + (1.0 - pl[a]) * (1.0 - pl[b]) * std::conj(ph));
        }
    return c;
}

namespace {

// Residuals sqrt(|C_nm|) (u_model - u_meas) for unit phasors u over n < m, in the
// unconstrained parameters alpha = exp(x0), beta = logistic(x1).
struct PhaseResiduals {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    int n = 0;
    std::vector<int> rows, cols;
    std::vector<double> weight;
    std::vector<cplx> measured, plane;

    int inputs() const { return 2; }
    int values() const { return 2 * static_cast<int>(rows.size()); }

    static double alpha_of(double x) { return std::exp(std::clamp(x, -6.0, 6.0)); }
    static double beta_of(double x) { return 1.0 / (1.0 + std::exp(-x)); }

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
        const double alpha = alpha_of(x(0)), beta = beta_of(x(1));
        std::vector<double> pl(n);
        for (int a = 0; a < n; ++a) pl[a] = ansatz_probability(a + 1, n, alpha, beta);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const int a = rows[i], b = cols[i];
            const cplx model = pl[a] * pl[b] * plane[i] + (1.0 - pl[a]) * (1.0 - pl[b]) * std::conj(plane[i]);
            const double mag = std::abs(model);
            const cplx u = mag > 1e-14 ? model / mag : cplx(0.0);
            const cplx r = weight[i] * (u - measured[i]);
            f(2 * i) = r.real();
            f(2 * i + 1) = r.imag();
        }
        return 0;
    }
};

}  // namespace

AnsatzModel fit_ansatz(const ComplexMatrix& c, const std::vector<double>& positions, double k,
                       const AnsatzFitOptions& opts) {
    const int n = static_cast<int>(positions.size());
    if (c.rows() != n || c.cols() != n) throw Error("fit_ansatz: C does not match positions");
    if (n < 3) throw Error("fit_ansatz: needs at least three atoms");
    const double herm = (c - c.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-8 * std::max(1.0, c.cwiseAbs().maxCoeff()))
        throw Error("fit_ansatz: C is not Hermitian");

    PhaseResiduals res;
    res.n = n;
    const double cmax = c.cwiseAbs().maxCoeff();
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const double mag = std::abs(c(a, b));
            if (!(mag > 0.0)) continue;
            res.rows.push_back(a);
            res.cols.push_back(b);
            res.weight.push_back(std::sqrt(mag / cmax));
            res.measured.push_back(c(a, b) / mag);
            res.plane.push_back(std::exp(I * (k * (positions[a] - positions[b]))));
        }
    if (res.rows.size() < 2) throw Error("fit_ansatz: no usable correlations");

    Eigen::NumericalDiff<PhaseResiduals> numdiff(res);
    double best_cost = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best(2);
    for (double a0 : opts.alpha_starts)
        for (double b0 : opts.beta_starts) {
            Eigen::VectorXd x(2);
            x << std::log(a0), std::log(b0 / (1.0 - b0));
            Eigen::LevenbergMarquardt<Eigen::NumericalDiff<PhaseResiduals>> lm(numdiff);
            lm.parameters.maxfev = 400;
            lm.minimize(x);
            Eigen::VectorXd f(res.values());
            res(x, f);
            const double cost = f.squaredNorm();
            if (cost < best_cost) {
                best_cost = cost;
                best = x;
            }
        }

    AnsatzModel out;
    out.alpha = PhaseResiduals::alpha_of(best(0));
    out.beta = PhaseResiduals::beta_of(best(1));
    double wsum = 0.0;
    for (double w : res.weight) wsum += w * w;
    out.residual = std::sqrt(best_cost / wsum);

    Eigen::MatrixXd jac(res.values(), 2);
    numdiff.df(best, jac);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    const auto sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(1) < 1e-6 * sv(0)) {
        out.degenerate = true;
        out.diagnostics = "flat residual surface: parameters not separately identifiable";
    }
    if (std::abs(best(0)) >= 6.0) {
        out.degenerate = true;
        out.diagnostics = "alpha ran to the edge of its range";
    }

    const ComplexMatrix model = ansatz_correlations(out.alpha, out.beta, 1.0, 1.0, positions, k);
    double num = 0.0, den = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            num += std::abs(c(a, b)) * std::abs(model(a, b));
            den += std::norm(model(a, b));
        }
    out.gamma_w = 1.0;
    out.amplitude = den > 0.0 ? num / den : 0.0;
    return out;
}

std::vector<CollapsePoint> correlation_collapse(const ComplexMatrix& c) {
    const int n = static_cast<int>(c.rows());
    if (n < 2 || c.cols() != n) throw Error("correlation_collapse: need a square matrix with N >= 2");
    std::vector<CollapsePoint> out;
    out.reserve(static_cast<std::size_t>(n) * n);
    for (int d = -(n - 1); d <= n - 1; ++d)
        for (int row = 1; row <= n; ++row) {
            const int other = row + d;
            if (other < 1 || other > n) continue;
            CollapsePoint p;
            p.d = d;
            p.n = row;
            p.n_prime = (2.0 * (row - 1) + d) / (2.0 * (n - 1));
            p.arg = std::arg(c(other - 1, row - 1));
            p.magnitude = std::abs(c(other - 1, row - 1));
            out.push_back(p);
        }
    return out;
}

std::vector<double> phases_from_correlations(const ComplexMatrix& c) {
    const int n = static_cast<int>(c.rows());
    std::vector<double> phi(n, 0.0);
    for (int a = 1; a < n; ++a) phi[a] = phi[a - 1] + std::arg(c(a, a - 1));
    return phi;
}

SteadyAverage twa_steady_average(const ReservoirModel& model, const SteadyAverageOptions& opts) {
    if (opts.n_traj < 1) throw Error("twa_steady_average: need at least one trajectory");
    if (opts.samples < 2) throw Error("twa_steady_average: need at least two averaging samples");
    SteadyAverage out;
    out.t_relax = opts.t_relax > 0.0
                      ? opts.t_relax
                      : std::max(2.0, 40.0 / (model.pump() + model.gamma_prime() + model.gamma_1d()));
    out.t_average = opts.t_average > 0.0 ? opts.t_average : 0.5 * out.t_relax;
    const double dt = opts.dt > 0.0 ? opts.dt : meanfield::max_time_step(model);

    twa::Ensemble ens = twa::make_ensemble(model, twa::InitialState::AllGround, opts.n_traj, opts.seed);
    twa::integrate_ensemble(model, ens, out.t_relax, dt);

    const int m = ens.size();
    const int half = opts.samples / 2;
    std::vector<double> r_first(m, 0.0), r_second(m, 0.0), coll(m, 0.0), pe(m, 0.0);
    const int n = model.n_atoms;
    ComplexMatrix c_acc;
    if (opts.correlations) c_acc = ComplexMatrix::Zero(n, n);
    for (int s = 1; s <= opts.samples; ++s) {
        twa::integrate_ensemble(model, ens, out.t_relax + out.t_average * s / opts.samples, dt);
        const auto rates = twa::trajectory_rates(ens, model);
        auto& r_half = s <= half ? r_first : r_second;
        for (int i = 0; i < m; ++i) {
            r_half[i] += rates.emission[i];
            coll[i] += rates.collective[i];
            pe[i] += rates.excited[i];
        }
        if (opts.correlations) c_acc += twa::ensemble_observables(ens, model, true).correlations;
    }
    std::vector<double> r_all(m);
    for (int i = 0; i < m; ++i) {
        r_all[i] = (r_first[i] + r_second[i]) / opts.samples;
        r_first[i] /= half;
        r_second[i] /= opts.samples - half;
        coll[i] /= opts.samples;
        pe[i] /= opts.samples;
    }
    out.emission_rate = mean(r_all);
    out.emission_rate_err = std_error(r_all);
    out.collective_rate = mean(coll);
    out.collective_rate_err = std_error(coll);
    out.excited_fraction = mean(pe);
    out.excited_fraction_err = std_error(pe);
    const double drift = std::abs(mean(r_first) - mean(r_second));
    const double tol = 3.0 * std::hypot(std_error(r_first), std_error(r_second)) +
                       0.05 * std::abs(out.emission_rate);
    out.converged = drift <= tol;
    if (opts.correlations) out.correlations = c_acc / static_cast<double>(opts.samples);
    out.ensemble = std::move(ens);
    return out;
}

ThresholdEstimates estimate_thresholds(const std::vector<double>& w, const std::vector<double>& rate) {
    if (w.size() != rate.size() || w.size() < 2)
        throw Error("estimate_thresholds: need matching grids with two or more points");
    ThresholdEstimates est;
    const auto peak = static_cast<std::size_t>(
        std::distance(rate.begin(), std::max_element(rate.begin(), rate.end())));
    est.w_peak = w[peak];
    est.r_max = rate[peak];
    if (!(est.r_max > 0.0)) return est;

    auto zero_crossing = [&](const std::vector<std::size_t>& idx, double& out) {
        if (idx.size() < 2) return false;
        std::vector<double> x, y, wt(idx.size(), 1.0);
        for (auto i : idx) {
            x.push_back(w[i]);
            y.push_back(rate[i]);
        }
        const LineFit f = weighted_line(x, y, wt);
        if (f.slope == 0.0) return false;
        out = -f.intercept / f.slope;
        return std::isfinite(out);
    };

    std::vector<std::size_t> rising, falling;
    for (std::size_t i = 0; i < peak; ++i)
        if (rate[i] >= 0.05 * est.r_max && rate[i] <= 0.7 * est.r_max) rising.push_back(i);
    if (rising.empty() && peak > 0) rising = {peak - 1};
    if (rising.size() == 1) rising.push_back(peak);
    est.lower_found = zero_crossing(rising, est.w_lower);

    for (std::size_t i = peak + 1; i < w.size(); ++i)
        if (rate[i] >= 0.05 * est.r_max && rate[i] <= 0.7 * est.r_max) falling.push_back(i);
    if (falling.empty() && peak + 1 < w.size()) falling = {peak + 1};
    if (falling.size() == 1) falling.insert(falling.begin(), peak);
    est.upper_found = zero_crossing(falling, est.w_upper);
    return est;
}

IntensityScan intensity_scan(const ReservoirModel& model, const std::vector<double>& w_grid,
                             ScanSolver solver, const ScanOptions& opts) {
    IntensityScan scan;
    scan.solver = solver;
    const int n = model.n_atoms;
    const bool closed_form = model.kind != ModelKind::Waveguide;
    superspin::Thresholds th;
    if (closed_form)
        th = superspin::analytic_thresholds(model.kind, n, 1, model.gamma_1d(), model.gamma_prime(), w_grid);

    std::vector<double> coll;
    for (std::size_t i = 0; i < w_grid.size(); ++i) {
        const double w = w_grid[i];
        ScanPoint pt;
        pt.w = w;
        pt.analytic_rate = closed_form ? th.curve[i].emission_rate : std::nan("");
        pt.analytic_excited = closed_form ? th.curve[i].excited_fraction : std::nan("");
        if (solver == ScanSolver::TWA) {
            const auto sa = twa_steady_average(model.with_pump(w), opts.twa);
            pt.emission_rate = sa.emission_rate;
            pt.emission_rate_err = sa.emission_rate_err;
            pt.collective_rate = sa.collective_rate;
            pt.excited_fraction = sa.excited_fraction;
            pt.converged = sa.converged;
        } else {
            if (!closed_form) throw Error("intensity_scan: no superspin system for the waveguide");
            const bool cavity = model.kind == ModelKind::SingleModeCavity;
            const auto part = cavity ? superspin::build_partition(n, 1, 1, model.gamma_1d())
                                     : superspin::build_partition(n, opts.superspin_m, opts.superspin_p,
                                                                  model.gamma_1d());
            Rates rates = model.rates;
            rates.pump = w;
            superspin::CumulantOptions co;
            co.pump_source = opts.pump_source;
            const auto st = superspin::integrate_to_steady(superspin::seed_state(part, rates), part,
                                                           rates, co);
            pt.emission_rate = superspin::emission_rate(st.state, part);
            pt.collective_rate = pt.emission_rate;
            pt.excited_fraction = superspin::excited_fraction(st.state);
            pt.converged = st.converged;
        }
        coll.push_back(pt.collective_rate);
        scan.points.push_back(pt);
    }
    if (w_grid.size() >= 2) scan.estimates = estimate_thresholds(w_grid, coll);
    return scan;
}

LinewidthRun twa_linewidth(const ReservoirModel& model, FieldDirection dir,
                           const LinewidthRunOptions& opts) {
    if (opts.tau_samples < 2) throw Error("twa_linewidth: need at least two tau samples");
    LinewidthRun run;
    run.w = model.pump();
    const auto sa = twa_steady_average(model, opts.steady);
    std::vector<double> tau(opts.tau_samples);
    for (int i = 0; i < opts.tau_samples; ++i) tau[i] = opts.tau_max * i / (opts.tau_samples - 1);
    twa::CorrelatorOptions co;
    co.dt = opts.steady.dt;
    co.require_stationary = false;
    run.correlator = twa::two_time_field_correlator(model, sa.ensemble, far_field(model, dir), tau, co);
    run.spectrum = fit_linewidth(tau, run.correlator.g1, opts.fit);
    if (!run.correlator.stationary) {
        if (!run.spectrum.diagnostics.empty()) run.spectrum.diagnostics += "; ";
        run.spectrum.diagnostics += "R drifted during the correlator window";
    }
    return run;
}

}  // namespace sr1d::analysis
