#include <sstream>

#include "sr1d/meanfield.hpp"
#include "sr1d/twa.hpp"
#include "twa_step.hpp"

namespace sr1d::twa {

void integrate_ensemble_reference(const ReservoirModel& model, Ensemble& ens, double t_end,
                                  double dt, bool noise) {
    if (ens.n_atoms != model.n_atoms) throw Error("ensemble atom count does not match the model");
    if (!(dt > 0.0) || dt > meanfield::max_time_step(model) * (1.0 + 1e-12))
        throw Error("integrate_ensemble_reference: dt outside (0, 0.01/(N Gamma_1D)]");
    const auto plan = detail::plan_steps(ens.t, t_end, dt);
    if (plan.steps == 0) return;

    const kernels::CollectiveField field(model);
    const detail::NoiseModes modes = detail::collective_noise(model);
    detail::Workspace ws(model.n_atoms);
    auto apply = [&](std::span<const cplx> c, std::span<cplx> h) { field.apply_dense(c, h); };
    for (int i = 0; i < ens.size(); ++i) {
        for (long s = 1; s <= plan.steps; ++s) {
            detail::step(model, modes, ens.states[i], ens.streams[i],
                         s == plan.steps ? plan.last : dt, noise, ws, apply);
            if (!detail::finite(ens.states[i])) {
                std::ostringstream msg;
                msg << "integrate_ensemble_reference: non-finite state in trajectory " << i
                    << " at step " << s;
                throw Error(msg.str());
            }
        }
    }
    ens.t = t_end;
}

}  // namespace sr1d::twa
