#include "sr1d/twa.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "sr1d/meanfield.hpp"
#include "twa_step.hpp"

namespace sr1d::twa {

namespace {

void check_dt(const ReservoirModel& model, double dt, const char* who) {
    if (!(dt > 0.0)) throw Error(std::string(who) + ": dt must be positive");
    const double limit = meanfield::max_time_step(model);
    if (dt > limit * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << who << ": dt = " << dt << " exceeds the stability limit 0.01/(N Gamma_1D) = " << limit;
        throw Error(msg.str());
    }
}

void check_shape(const ReservoirModel& model, const Ensemble& ens) {
    if (ens.n_atoms != model.n_atoms) throw Error("ensemble atom count does not match the model");
    if (ens.streams.size() != ens.states.size()) throw Error("ensemble has no stream per trajectory");
}

[[noreturn]] void non_finite(int traj, long step, double t) {
    std::ostringstream msg;
    msg << "integrate_ensemble: non-finite state in trajectory " << traj << " at step " << step
        << " (t = " << t << ")";
    throw Error(msg.str());
}

}  // namespace

TrajectoryState sample_initial(const ReservoirModel& model, InitialState spec,
                               std::mt19937_64& rng) {
    const int n = model.n_atoms;
    TrajectoryState s;
    s.inv.assign(n, spec == InitialState::AllGround ? -0.5 : 0.5);
    s.coh.resize(n);
    for (int a = 0; a < n; ++a) {
        const std::uint64_t bits = rng();
        const double sx = (bits & 1u) ? 0.5 : -0.5;
        const double sy = (bits & 2u) ? 0.5 : -0.5;
        s.coh[a] = cplx(sx, -sy);
    }
    return s;
}

std::mt19937_64 trajectory_stream(std::uint64_t seed, std::uint64_t trajectory) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trajectory),
                      static_cast<std::uint32_t>(trajectory >> 32)};
    return std::mt19937_64(seq);
}

Ensemble make_ensemble(const ReservoirModel& model, InitialState spec, int n_traj,
                       std::uint64_t seed) {
    if (n_traj < 1) throw Error("make_ensemble: need at least one trajectory");
    Ensemble ens;
    ens.n_atoms = model.n_atoms;
    ens.seed = seed;
    ens.states.resize(n_traj);
    ens.streams.resize(n_traj);
    for (int i = 0; i < n_traj; ++i) {
        ens.streams[i] = trajectory_stream(seed, i);
        ens.states[i] = sample_initial(model, spec, ens.streams[i]);
    }
    return ens;
}

Ensemble make_ensemble(const SpinArrays& start, int n_traj, std::uint64_t seed) {
    if (n_traj < 1) throw Error("make_ensemble: need at least one trajectory");
    if (start.coh.size() != start.inv.size()) throw Error("make_ensemble: inconsistent start state");
    Ensemble ens;
    ens.n_atoms = static_cast<int>(start.inv.size());
    ens.seed = seed;
    ens.states.assign(n_traj, TrajectoryState{start.coh, start.inv});
    ens.streams.resize(n_traj);
    for (int i = 0; i < n_traj; ++i) ens.streams[i] = trajectory_stream(seed, i);
    return ens;
}

void integrate_ensemble(const ReservoirModel& model, Ensemble& ens, double t_end, double dt,
                        const IntegrateOptions& opts) {
    check_shape(model, ens);
    check_dt(model, dt, "integrate_ensemble");
    const auto plan = detail::plan_steps(ens.t, t_end, dt);
    if (plan.steps == 0) return;

    const kernels::CollectiveField field(model);
    const detail::NoiseModes modes = detail::collective_noise(model);
    const int m = ens.size();
    const double t0 = ens.t;
    const long chunk = opts.tap_every > 0 ? opts.tap_every : plan.steps;

    for (long first = 1; first <= plan.steps; first += chunk) {
        const long last = std::min(plan.steps, first + chunk - 1);
        // lowest failing trajectory id and its step; -1 when all finite
        int bad_traj = -1;
        long bad_step = 0;
#pragma omp parallel
        {
            detail::Workspace ws(model.n_atoms);
            auto apply = [&](std::span<const cplx> c, std::span<cplx> h) { field.apply(c, h); };
#pragma omp for schedule(static)
            for (int i = 0; i < m; ++i) {
                for (long s = first; s <= last; ++s) {
                    const double h = s == plan.steps ? plan.last : dt;
                    detail::step(model, modes, ens.states[i], ens.streams[i], h, opts.noise, ws,
                                 apply);
                    if (!detail::finite(ens.states[i])) {
#pragma omp critical
                        {
                            if (bad_traj < 0 || i < bad_traj) {
                                bad_traj = i;
                                bad_step = s;
                            }
                        }
                        break;
                    }
                }
            }
        }
        if (bad_traj >= 0) non_finite(bad_traj, bad_step, t0 + bad_step * dt);
        ens.t = last == plan.steps ? t_end : t0 + last * dt;
        if (opts.tap_every > 0 && opts.on_tap) opts.on_tap(ens);
    }
}

TrajectoryRates trajectory_rates(const Ensemble& ens, const ReservoirModel& model) {
    check_shape(model, ens);
    const int n = model.n_atoms;
    const int m = ens.size();
    const detail::NoiseModes modes = detail::collective_noise(model);
    TrajectoryRates out;
    out.emission.resize(m);
    out.collective.resize(m);
    out.excited.resize(m);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        const auto& c = ens.states[i].coh;
        double acc = 0.0;
        for (std::size_t nu = 0; nu < modes.amplitude.size(); ++nu) {
            const auto& b = modes.profile[nu];
            cplx proj = 0.0;
            double self = 0.0;
            for (int a = 0; a < n; ++a) {
                proj += b[a] * c[a];
                self += std::norm(b[a]) * std::norm(c[a]);
            }
            acc += 2.0 * modes.amplitude[nu] * modes.amplitude[nu] * (std::norm(proj) - self);
        }
        double pe = 0.0;
        for (int a = 0; a < n; ++a) pe += ens.states[i].inv[a] + 0.5;
        out.collective[i] = acc;
        // sum_nu Gamma_nu |b_nu,n|^2 = Gamma_nn = Gamma_1D
        out.emission[i] = acc + model.gamma_1d() * pe;
        out.excited[i] = pe / n;
    }
    return out;
}

EnsembleObservables ensemble_observables(const Ensemble& ens, const ReservoirModel& model,
                                         bool with_correlations) {
    const int n = model.n_atoms;
    const int m = ens.size();
    const TrajectoryRates rates = trajectory_rates(ens, model);

    EnsembleObservables obs;
    obs.t = ens.t;
    obs.samples = m;
    obs.low_statistics = m < 100;
    obs.excited_per_atom.assign(n, 0.0);
    for (int i = 0; i < m; ++i)
        for (int a = 0; a < n; ++a) obs.excited_per_atom[a] += ens.states[i].inv[a];
    for (int a = 0; a < n; ++a) obs.excited_per_atom[a] = obs.excited_per_atom[a] / m + 0.5;
    double r = 0.0, coll = 0.0, pe = 0.0;
    for (int i = 0; i < m; ++i) {
        r += rates.emission[i];
        coll += rates.collective[i];
        pe += rates.excited[i];
    }
    obs.emission_rate = r / m;
    obs.collective_rate = coll / m;
    obs.excited_fraction = pe / m;

    if (with_correlations) {
        ComplexMatrix c = ComplexMatrix::Zero(n, n);
        for (int i = 0; i < m; ++i) {
            const Eigen::Map<const ComplexVector> v(ens.states[i].coh.data(), n);
            c.noalias() += v.conjugate() * v.transpose();
        }
        c /= static_cast<double>(m);
        for (int a = 0; a < n; ++a) c(a, a) = obs.excited_per_atom[a];
        obs.correlations = std::move(c);
    }
    return obs;
}

double field_intensity(const Ensemble& ens, const ComplexVector& weights) {
    const int n = ens.n_atoms;
    if (weights.size() != n) throw Error("field_intensity: weight count does not match atoms");
    const int m = ens.size();
    double classical = 0.0, self = 0.0, pe = 0.0;
    for (int i = 0; i < m; ++i) {
        const auto& s = ens.states[i];
        cplx e = 0.0;
        for (int a = 0; a < n; ++a) {
            e += weights[a] * s.coh[a];
            self += std::norm(weights[a]) * std::norm(s.coh[a]);
            pe += std::norm(weights[a]) * (s.inv[a] + 0.5);
        }
        classical += std::norm(e);
    }
    return (classical - self + pe) / m;
}

std::vector<cplx> field_samples(const Ensemble& ens, const FieldCoefficients& field) {
    const ComplexVector w = field.weights();
    if (w.size() != ens.n_atoms) throw Error("field_samples: field does not match atoms");
    std::vector<cplx> out(ens.size());
    for (int i = 0; i < ens.size(); ++i) {
        cplx e = 0.0;
        for (int a = 0; a < ens.n_atoms; ++a) e += w[a] * ens.states[i].coh[a];
        out[i] = e;
    }
    return out;
}

CorrelatorResult two_time_field_correlator(const ReservoirModel& model, const Ensemble& ensemble_ss,
                                           const FieldCoefficients& field,
                                           const std::vector<double>& tau_grid,
                                           const CorrelatorOptions& opts) {
    check_shape(model, ensemble_ss);
    if (tau_grid.empty()) throw Error("two_time_field_correlator: empty tau grid");
    for (std::size_t k = 0; k < tau_grid.size(); ++k)
        if (tau_grid[k] < 0.0 || (k > 0 && tau_grid[k] <= tau_grid[k - 1]))
            throw Error("two_time_field_correlator: tau grid must be non-negative and increasing");
    const double dt = opts.dt > 0.0 ? opts.dt : meanfield::max_time_step(model);
    check_dt(model, dt, "two_time_field_correlator");

    const int n = model.n_atoms;
    const int m = ensemble_ss.size();
    const int nk = static_cast<int>(tau_grid.size());
    const ComplexVector w = field.weights();
    std::vector<double> w2(n);
    for (int a = 0; a < n; ++a) w2[a] = std::norm(w[a]);

    // per trajectory and tau: conj(E(tau)) E(0), sum |w|^2 conj(c(tau)) c(0), and the
    // collective part of R (for the stationarity check)
    std::vector<cplx> prod(static_cast<std::size_t>(m) * nk), self(prod.size());
    std::vector<double> coll(prod.size());
    std::vector<double> pe0(m, 0.0);

    const kernels::CollectiveField cf(model);
    const detail::NoiseModes modes = detail::collective_noise(model);
    std::optional<Error> failure;
    int failed_traj = m;

#pragma omp parallel
    {
        detail::Workspace ws(n);
        auto apply = [&](std::span<const cplx> c, std::span<cplx> h) { cf.apply(c, h); };
#pragma omp for schedule(static)
        for (int i = 0; i < m; ++i) {
            TrajectoryState s = ensemble_ss.states[i];
            std::mt19937_64 rng = ensemble_ss.streams[i];
            const std::vector<cplx> c0 = s.coh;
            cplx e0 = 0.0;
            double p0 = 0.0;
            for (int a = 0; a < n; ++a) {
                e0 += w[a] * c0[a];
                p0 += w2[a] * (s.inv[a] + 0.5);
            }
            pe0[i] = p0;
            double t = 0.0;
            for (int k = 0; k < nk; ++k) {
                const auto plan = detail::plan_steps(t, tau_grid[k], dt);
                for (long st = 1; st <= plan.steps; ++st)
                    detail::step(model, modes, s, rng, st == plan.steps ? plan.last : dt, true, ws,
                                 apply);
                t = std::max(t, tau_grid[k]);
                if (!detail::finite(s)) {
#pragma omp critical
                    if (i < failed_traj) {
                        failed_traj = i;
                        std::ostringstream msg;
                        msg << "two_time_field_correlator: non-finite state in trajectory " << i
                            << " near tau = " << tau_grid[k];
                        failure.emplace(msg.str());
                    }
                    break;
                }
                cplx e = 0.0, sc = 0.0;
                for (int a = 0; a < n; ++a) {
                    e += w[a] * s.coh[a];
                    sc += w2[a] * std::conj(s.coh[a]) * c0[a];
                }
                const std::size_t idx = static_cast<std::size_t>(i) * nk + k;
                prod[idx] = std::conj(e) * e0;
                self[idx] = sc;
                double acc = 0.0;
                for (std::size_t nu = 0; nu < modes.amplitude.size(); ++nu) {
                    const auto& b = modes.profile[nu];
                    cplx proj = 0.0;
                    double sq = 0.0;
                    for (int a = 0; a < n; ++a) {
                        proj += b[a] * s.coh[a];
                        sq += std::norm(b[a]) * std::norm(s.coh[a]);
                    }
                    acc += 2.0 * modes.amplitude[nu] * modes.amplitude[nu] * (std::norm(proj) - sq);
                }
                double pe = 0.0;
                for (int a = 0; a < n; ++a) pe += s.inv[a] + 0.5;
                coll[idx] = acc + model.gamma_1d() * pe;
            }
        }
    }
    if (failure) throw *failure;

    CorrelatorResult res;
    res.tau = tau_grid;
    res.g1.resize(nk);
    res.emission_rate.resize(nk);
    double pe_w = 0.0;
    for (int i = 0; i < m; ++i) pe_w += pe0[i];
    pe_w /= m;
    std::vector<cplx> s_mean(nk);
    for (int k = 0; k < nk; ++k) {
        cplx p = 0.0, sm = 0.0;
        double r = 0.0;
        for (int i = 0; i < m; ++i) {
            const std::size_t idx = static_cast<std::size_t>(i) * nk + k;
            p += prod[idx];
            sm += self[idx];
            r += coll[idx];
        }
        res.g1[k] = p / static_cast<double>(m);
        s_mean[k] = sm / static_cast<double>(m);
        res.emission_rate[k] = r / m;
    }
    // the classical product misses <sigma_ee> - <|c|^2> on each atom; carry that term with
    // the decay of the per-atom autocorrelation
    double s00 = 0.0;
    {
        double acc = 0.0;
        for (int i = 0; i < m; ++i)
            for (int a = 0; a < n; ++a) acc += w2[a] * std::norm(ensemble_ss.states[i].coh[a]);
        s00 = acc / m;
    }
    const double deficit = pe_w - s00;
    if (s00 > 0.0)
        for (int k = 0; k < nk; ++k) res.g1[k] += deficit * s_mean[k] / s00;

    if (nk >= 2) {
        double tm = 0.0, rm = 0.0;
        for (int k = 0; k < nk; ++k) {
            tm += tau_grid[k];
            rm += res.emission_rate[k];
        }
        tm /= nk;
        rm /= nk;
        double num = 0.0, den = 0.0;
        for (int k = 0; k < nk; ++k) {
            num += (tau_grid[k] - tm) * (res.emission_rate[k] - rm);
            den += (tau_grid[k] - tm) * (tau_grid[k] - tm);
        }
        const double slope = den > 0.0 ? num / den : 0.0;
        const double scale = std::max(std::abs(rm), 1e-3 * n * model.gamma_1d());
        res.relative_drift = std::abs(slope) * (tau_grid.back() - tau_grid.front()) / scale;
        res.stationary = res.relative_drift <= opts.stationarity_tol;
        if (opts.require_stationary && !res.stationary) {
            std::ostringstream msg;
            msg << "two_time_field_correlator: ensemble is not stationary (R drifts by "
                << res.relative_drift * 100.0 << "% over the tau window)";
            throw Error(msg.str());
        }
    }
    return res;
}

Histogram2D field_histogram(const Ensemble& ens, const FieldCoefficients& field, int bins,
                            double extent) {
    if (bins < 1) throw Error("field_histogram: bins must be positive");
    const auto samples = field_samples(ens, field);
    Histogram2D hist;
    hist.bins = bins;
    hist.samples = static_cast<int>(samples.size());
    if (extent <= 0.0) {
        double r = 0.0;
        for (const auto& e : samples) r = std::max({r, std::abs(e.real()), std::abs(e.imag())});
        extent = r > 0.0 ? 1.2 * r : 1.0;
    }
    hist.extent = extent;
    hist.density.assign(static_cast<std::size_t>(bins) * bins, 0.0);
    const double width = 2.0 * extent / bins;
    for (const auto& e : samples) {
        const int ix = static_cast<int>(std::floor((e.real() + extent) / width));
        const int iy = static_cast<int>(std::floor((e.imag() + extent) / width));
        if (ix < 0 || iy < 0 || ix >= bins || iy >= bins) {
            ++hist.outside;
            continue;
        }
        hist.density[static_cast<std::size_t>(iy) * bins + ix] += 1.0;
    }
    const double norm = hist.samples * width * width;
    if (norm > 0.0)
        for (auto& d : hist.density) d /= norm;
    return hist;
}

std::vector<int> radial_histogram(const std::vector<cplx>& samples, int bins, double r_max) {
    if (bins < 1 || !(r_max > 0.0)) throw Error("radial_histogram: invalid binning");
    std::vector<int> counts(bins, 0);
    for (const auto& e : samples) {
        const int b = static_cast<int>(std::abs(e) / r_max * bins);
        if (b < bins) ++counts[b];
    }
    return counts;
}

std::vector<int> angular_histogram(const std::vector<cplx>& samples, int bins) {
    if (bins < 1) throw Error("angular_histogram: bins must be positive");
    std::vector<int> counts(bins, 0);
    for (const auto& e : samples) {
        int b = static_cast<int>((std::arg(e) + std::numbers::pi) / (2.0 * std::numbers::pi) * bins);
        counts[std::clamp(b, 0, bins - 1)]++;
    }
    return counts;
}

}  // namespace sr1d::twa
