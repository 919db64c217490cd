#include "laps/kernels.hpp"

#include <cmath>
#include <limits>

namespace laps {

StepResult unadjusted_kernel(ChainState& state, const UnadjustedKernelConfig& cfg,
                             const TargetDistribution& target, RngStream& rng) {
  return mclmc_step(state, cfg.step_size, cfg.decoherence_length,
                    IntegratorScheme::get(cfg.scheme), target, rng);
}

ProposalOutcome mams_kernel(ChainState& state, const AdjustedKernelConfig& cfg,
                            const TargetDistribution& target, RngStream& rng,
                            std::vector<double>* step_deltas) {
  const IntegratorScheme& scheme = IntegratorScheme::get(cfg.scheme);

  // Full refresh: uniform direction on the sphere.
  Vector z(state.u.size());
  for (;;) {
    rng.fill_normal(std::span<double>(z.data(), static_cast<std::size_t>(z.size())));
    const double n = z.norm();
    if (n > 0.0) {
      state.u = z / n;
      break;
    }
  }

  const ChainState before = state;

  ProposalOutcome out;
  out.gradient_calls = cfg.steps_per_proposal * scheme.gradients_per_step;
  double total = 0.0;
  for (int n = 0; n < cfg.steps_per_proposal; ++n) {
    StepResult r = mclmc_step(state, cfg.step_size, cfg.partial_refresh_length, scheme, target,
                              rng, nullptr);
    if (step_deltas) step_deltas->push_back(r.delta);
    if (r.divergent) {
      out.divergent = true;
      break;
    }
    total += r.delta;
  }

  const double u_accept = rng.uniform();
  if (out.divergent) {
    out.delta = std::numeric_limits<double>::infinity();
    out.acceptance_probability = 0.0;
    out.accepted = false;
  } else {
    out.delta = total;
    out.acceptance_probability = std::min(1.0, std::exp(-total));
    out.accepted = std::log(u_accept) < -total;
  }
  if (!out.accepted) state = before;
  return out;
}

}  // namespace laps
