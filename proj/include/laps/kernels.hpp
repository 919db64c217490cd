#pragma once

#include "laps/integrator.hpp"

namespace laps {

struct UnadjustedKernelConfig {
  double step_size = 0.1;
  double decoherence_length = 1.0;
  SchemeKind scheme = SchemeKind::lf;
};

/// One microcanonical step; the returned delta feeds the ensemble EEVPD.
StepResult unadjusted_kernel(ChainState& state, const UnadjustedKernelConfig& cfg,
                             const TargetDistribution& target, RngStream& rng);

struct AdjustedKernelConfig {
  double step_size = 0.1;
  int steps_per_proposal = 15;
  double partial_refresh_length = 1.0;  // L used inside the trajectory
  SchemeKind scheme = SchemeKind::mn2;
};

struct ProposalOutcome {
  bool accepted = false;
  double delta = 0.0;  // accumulated energy error (+inf on divergence)
  double acceptance_probability = 0.0;  // min(1, exp(-delta))
  int gradient_calls = 0;
  bool divergent = false;
};

/// Metropolis-adjusted proposal: full velocity refresh, N steps with partial
/// refresh, accept with probability min(1, exp(-delta)). On rejection the
/// pre-proposal position (and its cache) is restored; the velocity is
/// refreshed at the next proposal regardless. Per-chain draw order is fixed:
/// refresh normals, per-step refresh normals, one acceptance uniform.
ProposalOutcome mams_kernel(ChainState& state, const AdjustedKernelConfig& cfg,
                            const TargetDistribution& target, RngStream& rng,
                            std::vector<double>* step_deltas = nullptr);

}  // namespace laps
