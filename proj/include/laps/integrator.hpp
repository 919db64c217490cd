#pragma once

#include <string_view>
#include <vector>

#include "laps/common.hpp"
#include "laps/rng.hpp"
#include "laps/target.hpp"

namespace laps {

/// One chain: position, unit-norm velocity, and the cached density value and
/// gradient at the current position. The cache is what makes the leapfrog-
/// style composition cost one density+gradient evaluation per position move.
struct ChainState {
  Vector x;
  Vector u;
  Vector grad;
  double logp = 0.0;
};

/// Builds a state at `x` with the cache filled (one evaluation) and an
/// arbitrary unit velocity. Throws if the density is not finite at x.
ChainState make_chain_state(Vector x, const TargetDistribution& target);

enum class SchemeKind { lf, mn2, mn4 };

/// Palindromic velocity/position splitting. b holds the velocity-stage
/// coefficients (K entries), a the position-stage coefficients (K-1 entries);
/// both sum to 1 and mirror around the midpoint. The number of fresh
/// density+gradient evaluations per step equals the number of position stages.
struct IntegratorScheme {
  SchemeKind kind;
  std::string name;
  std::vector<double> b;
  std::vector<double> a;
  int order = 2;
  int gradients_per_step = 1;

  static const IntegratorScheme& get(SchemeKind kind);
  static SchemeKind parse(std::string_view name);
};

struct SubStep {
  double delta = 0.0;  // energy change
  bool divergent = false;
};

/// x += eps * u; refreshes the cache at the new position. Divergent (non-
/// finite) evaluations leave the state at the last finite sub-state and flag
/// the step instead of throwing.
SubStep position_update(ChainState& state, double eps, const TargetDistribution& target);

/// Rotates u toward the cached gradient in the plane span{u, grad}; x is
/// unchanged. Zero gradient is the fixed point (identity, delta 0). The
/// returned delta is (d-1) * log(cosh d + (e.u) sinh d), d = eps*|g|/(d-1).
SubStep velocity_update(ChainState& state, double eps);

/// Partial velocity refresh u <- (c1 u + c2 Z)/|...|, c1 = exp(-eps/L).
/// An exactly-zero mixture (probability zero) redraws Z.
void stochastic_update(ChainState& state, double eps, double decoherence_length, RngStream& rng);

struct StepResult {
  double delta = 0.0;
  int gradient_calls = 0;
  bool divergent = false;
};

/// The deterministic palindrome B(b1 e) A(a1 e) ... B(bK e). Optionally logs
/// every sub-update energy change, in application order, into *sub_deltas.
StepResult deterministic_core(ChainState& state, double eps, const IntegratorScheme& scheme,
                              const TargetDistribution& target,
                              std::vector<double>* sub_deltas = nullptr);

/// Full kernel step: half stochastic update, deterministic palindrome, half
/// stochastic update. The stochastic halves contribute zero energy change.
StepResult mclmc_step(ChainState& state, double eps, double decoherence_length,
                      const IntegratorScheme& scheme, const TargetDistribution& target,
                      RngStream& rng, std::vector<double>* sub_deltas = nullptr);

}  // namespace laps
