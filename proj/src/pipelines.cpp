#include "sr1d/pipelines.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <omp.h>

#include "sr1d/analysis.hpp"
#include "sr1d/exact.hpp"
#include "sr1d/meanfield.hpp"
#include "sr1d/superspin.hpp"
#include "sr1d/twa.hpp"

#ifndef SR1D_VERSION
#define SR1D_VERSION "unknown"
#endif

namespace sr1d::pipelines {

namespace fs = std::filesystem;
using io::CsvWriter;
using io::json;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

FieldDirection resolve(const ReservoirModel& model, FieldDirection dir) {
    if (model.kind == ModelKind::SingleModeCavity) return FieldDirection::Cavity;
    return dir == FieldDirection::Cavity ? FieldDirection::Right : dir;
}

double step_size(const io::RunConfig& cfg, const ReservoirModel& model) {
    return cfg.dt > 0.0 ? cfg.dt : meanfield::max_time_step(model);
}

analysis::SteadyAverageOptions steady_options(const io::RunConfig& cfg) {
    analysis::SteadyAverageOptions o;
    o.n_traj = cfg.traj;
    o.dt = cfg.dt;
    o.t_relax = cfg.t_relax;
    o.t_average = cfg.t_average;
    o.samples = cfg.samples;
    o.seed = cfg.seed;
    return o;
}

struct Quartiles {
    double left = 0.0, right = 0.0;
};

// mean magnetization over the first and last quarter of the reported atoms (n = 2..N)
Quartiles quartile_means(const std::vector<double>& m) {
    Quartiles q;
    const int n = static_cast<int>(m.size());
    const int width = std::max(1, n / 4);
    for (int i = 0; i < width; ++i) {
        q.left += m[i] / width;
        q.right += m[n - 1 - i] / width;
    }
    return q;
}

bool magnetization_defined(const ReservoirModel& model, double kd) {
    return model.n_atoms >= 2 && std::abs(std::sin(kd)) > 1e-12;
}

void add_output(RunResult& r, const fs::path& dir, const std::string& name) {
    (void)dir;
    r.outputs.push_back(name);
}

ComplexMatrix steady_correlations(const io::RunConfig& cfg, const ReservoirModel& model,
                                  json& summary) {
    auto opts = steady_options(cfg);
    opts.correlations = true;
    const auto sa = analysis::twa_steady_average(model, opts);
    summary["twa_emission_rate"] = sa.emission_rate;
    summary["twa_excited_fraction"] = sa.excited_fraction;
    summary["twa_converged"] = sa.converged;
    return sa.correlations;
}

}  // namespace

RunResult cmd_exact(const io::RunConfig& cfg, const fs::path& dir) {
    RunResult res;
    if (cfg.n_atoms > exact::kMaxAtoms) {
        std::ostringstream msg;
        msg << "exact: N = " << cfg.n_atoms << " exceeds the size limit of " << exact::kMaxAtoms
            << " atoms (Hilbert space 2^N)";
        throw Error(msg.str());
    }
    const ReservoirModel model = io::make_model(cfg);
    exact::SteadyStateInfo info;
    const auto rho = exact::steady_state(model, &info);
    const auto obs = exact::observables(model, rho);
    res.summary["excited_fraction"] = obs.excited_fraction;
    res.summary["emission_rate"] = obs.emission_rate;
    res.summary["excited_per_atom"] = obs.excited_per_atom;
    res.summary["steady_state_residual"] = info.residual;
    res.summary["steady_state_from_integration"] = info.from_integration;
    io::write_matrix_csv(dir / "correlations.csv", obs.correlations);
    add_output(res, dir, "correlations.csv");

    if (cfg.spectrum) {
        const auto field = far_field(model, resolve(model, cfg.exact_field));
        const auto tau = linspace(0.0, cfg.tau_max, cfg.tau_samples);
        const auto g1 = exact::two_time_correlator(model, rho, field.weights(), tau);
        {
            CsvWriter csv(dir / "correlator.csv", {"tau", "re", "im"});
            for (std::size_t i = 0; i < tau.size(); ++i)
                csv.cell(tau[i]).cell(g1[i].real()).cell(g1[i].imag()).end_row();
        }
        add_output(res, dir, "correlator.csv");
        const auto detuning = linspace(-cfg.detuning_max, cfg.detuning_max, cfg.detuning_samples);
        const auto s = analysis::spectrum_from_correlator(tau, g1, detuning);
        {
            CsvWriter csv(dir / "spectrum.csv", {"detuning", "S"});
            for (std::size_t i = 0; i < s.size(); ++i) csv.cell(detuning[i]).cell(s[i]).end_row();
        }
        add_output(res, dir, "spectrum.csv");
        analysis::LinewidthOptions lo;
        lo.subtract_floor = false;
        const auto fit = analysis::fit_linewidth(tau, g1, lo);
        res.summary["field"] = to_string(field.direction);
        res.summary["linewidth"] = fit.linewidth;
        res.summary["linewidth_ok"] = fit.ok;
        res.summary["linewidth_diagnostics"] = fit.diagnostics;
        if (!fit.ok) res.fail("exact: linewidth fit failed: " + fit.diagnostics);
    }
    return res;
}

RunResult cmd_meanfield(const io::RunConfig& cfg, const fs::path& dir) {
    RunResult res;
    const ReservoirModel model = io::make_model(cfg);
    const int n = model.n_atoms;
    meanfield::MeanFieldState start = meanfield::random_initial_state(model, cfg.seed, cfg.seed_coherence);
    if (cfg.initial != "random") {
        const double sign = cfg.initial == "right" ? -1.0 : 1.0;
        for (int a = 0; a < n; ++a) start.phi[a] = sign * model.k * model.positions[a];
    }
    const double dt = step_size(cfg, model);
    meanfield::IntegrateOptions opts;
    opts.stride = cfg.stride;
    const auto traj = meanfield::integrate_mf(start, model, cfg.t_end, dt, opts);

    const bool with_m = magnetization_defined(model, cfg.kd);
    {
        CsvWriter csv(dir / "trajectory.csv", {"t", "atom", "s_z", "s_perp", "phi"});
        for (std::size_t k = 0; k < traj.times.size(); ++k)
            for (int a = 0; a < n; ++a)
                csv.cell(traj.times[k]).cell(a + 1).cell(traj.samples[k].s_z[a])
                    .cell(traj.samples[k].s_perp[a]).cell(traj.samples[k].phi[a]).end_row();
    }
    add_output(res, dir, "trajectory.csv");
    if (with_m) {
        CsvWriter csv(dir / "magnetization.csv", {"t", "n", "M"});
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            const auto m = meanfield::magnetization(traj.samples[k].phi, cfg.kd);
            for (std::size_t i = 0; i < m.size(); ++i) csv.cell(traj.times[k]).cell(static_cast<int>(i) + 2).cell(m[i]).end_row();
        }
        add_output(res, dir, "magnetization.csv");
    }

    const auto op = meanfield::order_parameters(traj.final_state, model);
    res.summary["steady"] = traj.steady;
    res.summary["final_derivative_norm"] = traj.final_derivative_norm;
    res.summary["max_order_amplitude"] = op.max_amplitude();
    switch (model.kind) {
        case ModelKind::SingleModeCavity:
            res.summary["r"] = op.r;
            res.summary["psi"] = op.psi;
            break;
        case ModelKind::RingCavity:
            res.summary["r_left"] = op.r_left;
            res.summary["r_right"] = op.r_right;
            res.summary["phi_left"] = op.phi_left;
            res.summary["phi_right"] = op.phi_right;
            break;
        case ModelKind::Waveguide: {
            CsvWriter csv(dir / "local_order.csv", {"atom", "r_right", "phi_right", "r_left", "phi_left"});
            for (int a = 0; a < n; ++a)
                csv.cell(a + 1).cell(op.r_right_local[a]).cell(op.phi_right_local[a])
                    .cell(op.r_left_local[a]).cell(op.phi_left_local[a]).end_row();
            add_output(res, dir, "local_order.csv");
            break;
        }
    }
    if (with_m) {
        const auto q = quartile_means(meanfield::magnetization(meanfield::to_polar(traj.final_state).phi, cfg.kd));
        res.summary["magnetization_left_quartile"] = q.left;
        res.summary["magnetization_right_quartile"] = q.right;
    }

    if (cfg.probe) {
        if (cfg.w_grid.empty()) throw Error("meanfield: probe requested but grid.w is empty");
        meanfield::ProbeOptions po;
        po.t_end = cfg.t_end;
        po.dt = dt;
        po.threshold_fraction = cfg.sync_fraction;
        po.seed = cfg.seed;
        const auto probes = meanfield::sync_window_probe(model, cfg.w_grid, po);
        CsvWriter csv(dir / "sync_probe.csv", {"w", "synchronized", "max_amplitude", "threshold"});
        for (const auto& p : probes)
            csv.cell(p.pump).cell(p.synchronized ? 1 : 0).cell(p.max_amplitude).cell(p.threshold).end_row();
        add_output(res, dir, "sync_probe.csv");
    }
    return res;
}

RunResult cmd_twa(const io::RunConfig& cfg, const fs::path& dir) {
    RunResult res;
    const ReservoirModel model = io::make_model(cfg);
    const int n = model.n_atoms;
    const double dt = step_size(cfg, model);
    twa::Ensemble ens = twa::make_ensemble(model, twa::InitialState::AllGround, cfg.traj, cfg.seed);

    const long steps = static_cast<long>(std::ceil(cfg.t_end / dt - 1e-9));
    twa::IntegrateOptions opts;
    opts.tap_every = static_cast<int>(std::max<long>(1, steps / cfg.taps));
    const double avg_from = cfg.t_end - cfg.twa_t_average;
    ComplexMatrix c_sum = ComplexMatrix::Zero(n, n);
    int c_count = 0;
    {
        CsvWriter csv(dir / "observables.csv", {"t", "R", "R_collective", "Pe"});
        auto record = [&](const twa::Ensemble& e) {
            const bool in_window = cfg.correlations && cfg.twa_t_average > 0.0 && e.t >= avg_from - 1e-12;
            const auto obs = twa::ensemble_observables(e, model, in_window);
            csv.cell(e.t).cell(obs.emission_rate).cell(obs.collective_rate).cell(obs.excited_fraction).end_row();
            if (in_window) {
                c_sum += obs.correlations;
                ++c_count;
            }
        };
        record(ens);
        opts.on_tap = record;
        twa::integrate_ensemble(model, ens, cfg.t_end, dt, opts);
    }
    add_output(res, dir, "observables.csv");

    const auto obs = twa::ensemble_observables(ens, model, cfg.correlations);
    res.summary["t"] = ens.t;
    res.summary["trajectories"] = ens.size();
    res.summary["emission_rate"] = obs.emission_rate;
    res.summary["collective_rate"] = obs.collective_rate;
    res.summary["excited_fraction"] = obs.excited_fraction;
    if (obs.low_statistics)
        res.summary["warning"] = "fewer than 100 trajectories: statistics unreliable";
    if (cfg.correlations) {
        const ComplexMatrix c = c_count > 0 ? ComplexMatrix(c_sum / c_count) : obs.correlations;
        io::write_matrix_csv(dir / "correlations.csv", c);
        add_output(res, dir, "correlations.csv");
        res.summary["correlation_snapshots"] = std::max(1, c_count);
        if (magnetization_defined(model, cfg.kd)) {
            const auto q = quartile_means(meanfield::magnetization(analysis::phases_from_correlations(c), cfg.kd));
            res.summary["magnetization_left_quartile"] = q.left;
            res.summary["magnetization_right_quartile"] = q.right;
        }
    }

    const auto field = far_field(model, resolve(model, cfg.twa_field));
    const auto hist = twa::field_histogram(ens, field, cfg.histogram_bins);
    {
        CsvWriter csv(dir / "histogram.csv", {"x", "y", "density"});
        for (int iy = 0; iy < hist.bins; ++iy)
            for (int ix = 0; ix < hist.bins; ++ix)
                csv.cell(hist.center(ix)).cell(hist.center(iy))
                    .cell(hist.density[static_cast<std::size_t>(iy) * hist.bins + ix]).end_row();
    }
    add_output(res, dir, "histogram.csv");
    res.summary["field"] = to_string(field.direction);
    res.summary["field_intensity"] = twa::field_intensity(ens, field.weights());

    if (cfg.correlator) {
        const auto tau = linspace(0.0, cfg.tau_max, cfg.tau_samples);
        twa::CorrelatorOptions co;
        co.dt = dt;
        co.require_stationary = false;
        const auto corr = twa::two_time_field_correlator(model, ens, field, tau, co);
        {
            CsvWriter csv(dir / "correlator.csv", {"tau", "re", "im", "R"});
            for (std::size_t i = 0; i < tau.size(); ++i)
                csv.cell(tau[i]).cell(corr.g1[i].real()).cell(corr.g1[i].imag()).cell(corr.emission_rate[i]).end_row();
        }
        add_output(res, dir, "correlator.csv");
        res.summary["correlator_relative_drift"] = corr.relative_drift;
        res.summary["correlator_stationary"] = corr.stationary;
        const auto fit = analysis::fit_linewidth(tau, corr.g1);
        res.summary["linewidth"] = fit.linewidth;
        res.summary["linewidth_ok"] = fit.ok;
        if (!corr.stationary)
            res.fail("twa: ensemble not stationary during the correlator window (increase run.t_end)");
    }
    return res;
}

RunResult cmd_superspin(const io::RunConfig& cfg, const fs::path& dir) {
    RunResult res;
    if (cfg.kind == ModelKind::Waveguide) throw Error("superspin: no superspin system for the waveguide");
    const int p = cfg.kind == ModelKind::SingleModeCavity ? 1 : cfg.superspin_p;
    const auto part = superspin::build_partition(cfg.n_atoms, cfg.superspin_m, p, cfg.rates.gamma_1d);
    const Rates rates = cfg.rates;

    superspin::CumulantOptions finite, large_n;
    finite.pump_source = cfg.pump_source;
    large_n.pump_source = false;
    const auto full = superspin::integrate_to_steady(superspin::seed_state(part, rates), part, rates, finite);
    const auto lim = superspin::integrate_to_steady(superspin::seed_state(part, rates), part, rates, large_n);

    const double n = cfg.n_atoms, ns = part.group_size, g = cfg.rates.gamma_1d;
    double closed_rate = 0.0, closed_jz = 0.0;
    if (p == 1) {
        const auto st = superspin::cavity_steady_state(cfg.n_atoms, g, rates.gamma_prime, rates.pump);
        closed_rate = n * n * g * st.r_alpha;
        closed_jz = st.jz;
    } else {
        const auto st = superspin::reduced_steady_state(cfg.n_atoms, p, g, rates.gamma_prime, rates.pump);
        closed_rate = ns * ns * g * p * st.r_alpha;
        closed_jz = st.jz;
        res.summary["reduced_R_alpha"] = st.r_alpha;
    }
    {
        CsvWriter csv(dir / "cumulants.csv", {"variant", "alpha", "jz", "jpm", "R_alpha"});
        for (const auto* run : {&full, &lim})
            for (int a = 0; a < p; ++a)
                csv.cell(run == &full ? std::string("configured") : std::string("large_n"))
                    .cell(a + 1).cell(run->state.jz[a]).cell(run->state.jpm[a])
                    .cell(superspin::group_rate(run->state, part, a)).end_row();
    }
    add_output(res, dir, "cumulants.csv");
    res.summary["p"] = p;
    res.summary["kd"] = part.kd;
    res.summary["circulant_identity_residual"] = superspin::circulant_identity_residual(part);
    res.summary["emission_rate"] = superspin::emission_rate(full.state, part);
    res.summary["excited_fraction"] = superspin::excited_fraction(full.state);
    res.summary["converged"] = full.converged;
    res.summary["large_n_emission_rate"] = superspin::emission_rate(lim.state, part);
    res.summary["large_n_excited_fraction"] = superspin::excited_fraction(lim.state);
    res.summary["closed_form_emission_rate"] = closed_rate;
    res.summary["closed_form_excited_fraction"] = closed_jz + 0.5;
    res.summary["closed_form_excited_fraction_printed"] = (p == 1 ? 1.0 : p) * closed_jz + 0.5;
    if (!full.converged || !lim.converged) res.fail("superspin: cumulant integration did not converge");
    return res;
}

RunResult cmd_thresholds(const io::RunConfig& cfg, const fs::path& dir) {
    RunResult res;
    if (cfg.w_grid.empty()) throw Error("thresholds: grid.w is empty");
    const ReservoirModel model = io::make_model(cfg);
    const bool closed = model.kind != ModelKind::Waveguide;
    superspin::Thresholds th;
    if (closed) {
        th = superspin::analytic_thresholds(model.kind, model.n_atoms, 1, model.gamma_1d(),
                                            model.gamma_prime(), cfg.w_grid);
        res.summary["analytic"] = {{"w_lower", th.w_lower}, {"w_upper", th.w_upper},
                                   {"w_opt", th.w_opt}, {"r_max", th.r_max},
                                   {"w_opt_exact", th.w_opt_exact}, {"r_max_exact", th.r_max_exact},
                                   {"empty_window", th.empty_window}};
    } else {
        const auto est = superspin::waveguide_estimates(model.n_atoms, model.gamma_1d());
        res.summary["waveguide_estimates"] = {{"w_upper_bar", est.w_upper_bar},
                                              {"w_opt_bar", est.w_opt_bar},
                                              {"r_max_est", est.r_max_est}};
    }

    CsvWriter csv(dir / "thresholds.csv", {"w", "R", "R_err", "R_collective", "Pe", "converged",
                                           "R_analytic", "Pe_analytic", "Pe_printed"});
    if (cfg.solver == "analytic") {
        if (!closed) throw Error("thresholds: no closed-form curve for the waveguide");
        for (const auto& pt : th.curve)
            csv.cell(pt.w).cell(pt.emission_rate).cell(0.0).cell(pt.emission_rate).cell(pt.excited_fraction)
                .cell(1).cell(pt.emission_rate).cell(pt.excited_fraction).cell(pt.excited_fraction_printed).end_row();
    } else {
        analysis::ScanOptions so;
        so.twa = steady_options(cfg);
        so.superspin_m = cfg.superspin_m;
        so.superspin_p = cfg.superspin_p;
        so.pump_source = cfg.pump_source;
        const auto solver = cfg.solver == "twa" ? analysis::ScanSolver::TWA : analysis::ScanSolver::Superspin;
        const auto scan = analysis::intensity_scan(model, cfg.w_grid, solver, so);
        for (std::size_t i = 0; i < scan.points.size(); ++i) {
            const auto& pt = scan.points[i];
            csv.cell(pt.w).cell(pt.emission_rate).cell(pt.emission_rate_err).cell(pt.collective_rate)
                .cell(pt.excited_fraction).cell(pt.converged ? 1 : 0).cell(pt.analytic_rate)
                .cell(pt.analytic_excited).cell(closed ? th.curve[i].excited_fraction_printed : std::nan(""))
                .end_row();
        }
        const auto& e = scan.estimates;
        res.summary["estimates"] = {{"w_peak", e.w_peak}, {"r_max", e.r_max},
                                    {"w_lower", e.w_lower}, {"lower_found", e.lower_found},
                                    {"w_upper", e.w_upper}, {"upper_found", e.upper_found}};
        int unconverged = 0;
        for (const auto& pt : scan.points) unconverged += pt.converged ? 0 : 1;
        res.summary["unconverged_points"] = unconverged;
    }
    csv.close();
    add_output(res, dir, "thresholds.csv");
    return res;
}

RunResult cmd_linewidth(const io::RunConfig& cfg, const fs::path& dir) {
    RunResult res;
    if (cfg.w_grid.size() < 5) {
        std::ostringstream msg;
        msg << "linewidth: needs at least 5 pump points in grid.w, got " << cfg.w_grid.size();
        throw Error(msg.str());
    }
    const ReservoirModel model = io::make_model(cfg);
    analysis::LinewidthRunOptions lo;
    lo.steady = steady_options(cfg);
    lo.tau_max = cfg.tau_max;
    lo.tau_samples = cfg.tau_samples;
    const FieldDirection dir_field = resolve(model, cfg.linewidth_field);

    std::vector<std::pair<double, double>> pairs;
    json failed = json::array();
    CsvWriter lw(dir / "linewidths.csv", {"w", "linewidth", "ok", "residual", "noise_floor",
                                          "window_samples", "relative_drift"});
    CsvWriter cc(dir / "correlators.csv", {"w", "tau", "re", "im"});
    for (double w : cfg.w_grid) {
        const auto run = analysis::twa_linewidth(model.with_pump(w), dir_field, lo);
        const auto& s = run.spectrum;
        lw.cell(w).cell(s.linewidth).cell(s.ok ? 1 : 0).cell(s.residual).cell(s.noise_floor)
            .cell(s.window_samples).cell(run.correlator.relative_drift).end_row();
        for (std::size_t i = 0; i < s.tau.size(); ++i)
            cc.cell(w).cell(s.tau[i]).cell(s.g1[i].real()).cell(s.g1[i].imag()).end_row();
        if (s.ok)
            pairs.emplace_back(w, s.linewidth);
        else
            failed.push_back({{"w", w}, {"diagnostics", s.diagnostics}});
    }
    lw.close();
    cc.close();
    add_output(res, dir, "linewidths.csv");
    add_output(res, dir, "correlators.csv");
    const auto mls = analysis::min_linewidth_scan(pairs);
    res.summary["field"] = to_string(dir_field);
    res.summary["failed_fits"] = failed;
    res.summary["fit_ok"] = mls.fit_ok;
    res.summary["w_min"] = mls.w_min;
    res.summary["linewidth_min"] = mls.dnu_min;
    res.summary["curvature"] = mls.curvature;
    res.summary["coefficients"] = {mls.coeffs[0], mls.coeffs[1], mls.coeffs[2]};
    if (!mls.fit_ok) res.fail("linewidth: quadratic minimum not found: " + mls.reason);
    return res;
}

RunResult cmd_ansatz_fit(const io::RunConfig& cfg, const fs::path& dir) {
    RunResult res;
    const ReservoirModel model = io::make_model(cfg);
    ComplexMatrix c;
    if (!cfg.ansatz_input.empty()) {
        c = io::read_matrix_csv(cfg.ansatz_input);
    } else {
        c = steady_correlations(cfg, model, res.summary);
        io::write_matrix_csv(dir / "correlations.csv", c);
        add_output(res, dir, "correlations.csv");
    }
    if (c.rows() != model.n_atoms) throw Error("ansatz-fit: correlation matrix does not match model.n_atoms");
    const auto fit = analysis::fit_ansatz(c, model.positions, model.k);
    res.summary["alpha"] = fit.alpha;
    res.summary["beta"] = fit.beta;
    res.summary["amplitude_gamma"] = fit.amplitude * fit.gamma_w;
    res.summary["residual"] = fit.residual;
    res.summary["degenerate"] = fit.degenerate;
    res.summary["diagnostics"] = fit.diagnostics;
    io::write_matrix_csv(dir / "ansatz_correlations.csv",
                         analysis::ansatz_correlations(fit.alpha, fit.beta, fit.gamma_w, fit.amplitude,
                                                       model.positions, model.k));
    add_output(res, dir, "ansatz_correlations.csv");
    if (fit.degenerate) res.fail("ansatz-fit: " + fit.diagnostics);
    return res;
}

RunResult cmd_collapse(const io::RunConfig& cfg, const fs::path& dir) {
    RunResult res;
    const ReservoirModel model = io::make_model(cfg);
    ComplexMatrix c;
    if (!cfg.collapse_input.empty()) {
        c = io::read_matrix_csv(cfg.collapse_input);
    } else {
        c = steady_correlations(cfg, model, res.summary);
        io::write_matrix_csv(dir / "correlations.csv", c);
        add_output(res, dir, "correlations.csv");
    }
    const auto pts = analysis::correlation_collapse(c);
    CsvWriter csv(dir / "collapse.csv", {"d", "n", "n_prime", "arg", "magnitude"});
    for (const auto& p : pts) csv.cell(p.d).cell(p.n).cell(p.n_prime).cell(p.arg).cell(p.magnitude).end_row();
    csv.close();
    add_output(res, dir, "collapse.csv");
    res.summary["points"] = pts.size();
    return res;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"exact",     "meanfield",  "twa",        "superspin",
                                                "thresholds", "linewidth", "ansatz-fit", "collapse"};
    return names;
}

RunResult run_command(const std::string& name, const io::RunConfig& cfg) {
    using Cmd = std::function<RunResult(const io::RunConfig&, const fs::path&)>;
    static const std::map<std::string, Cmd> table{
        {"exact", cmd_exact},         {"meanfield", cmd_meanfield}, {"twa", cmd_twa},
        {"superspin", cmd_superspin}, {"thresholds", cmd_thresholds}, {"linewidth", cmd_linewidth},
        {"ansatz-fit", cmd_ansatz_fit}, {"collapse", cmd_collapse}};
    const auto it = table.find(name);
    if (it == table.end()) throw Error("unknown command '" + name + "'");

    omp_set_num_threads(cfg.workers);
    const fs::path dir = cfg.output;
    fs::create_directories(dir);
    RunResult res;
    try {
        res = it->second(cfg, dir);
    } catch (const std::exception& e) {
        res.fail(e.what());
    }
    res.summary["status"] = res.ok ? "ok" : "failed";
    io::write_json(dir / "summary.json", res.summary);
    res.outputs.push_back("summary.json");

    json manifest;
    manifest["tool"] = "sr1d";
    manifest["version"] = SR1D_VERSION;
    manifest["command"] = name;
    manifest["config"] = io::to_json(cfg);
    manifest["status"] = res.ok ? "ok" : "failed";
    manifest["failures"] = res.failures;
    manifest["outputs"] = res.outputs;
    io::write_json(dir / "manifest.json", manifest);
    return res;
}

}  // namespace sr1d::pipelines
