#pragma once

#include <functional>
#include <optional>
#include <string>

#include "laps/common.hpp"
#include "laps/rng.hpp"

namespace laps {

/// Unnormalized target density. Evaluations must be pure functions of x:
/// they are called concurrently from many workers with no shared mutable
/// state. `log_density_gradient` is the hot path (one call yields both the
/// value and the gradient, which is what the integrator consumes).
struct TargetDistribution {
  int dim = 0;
  std::string name;
  std::function<double(const Vector&)> log_density;
  std::function<Vector(const Vector&)> gradient;
  std::function<double(const Vector&, Vector&)> log_density_gradient;
};

struct GroundTruth {
  enum class Source { analytic, direct_sampling_oracle };
  Vector second_moments;           // E[x_i^2]
  Vector second_moment_variances;  // Var[x_i^2], strictly positive
  Source source = Source::analytic;
};

struct InitialDistribution {
  std::function<Vector(RngStream&)> sample;
};

/// A target packaged with everything the harness can use: optional exact
/// second moments and an optional independent sampler for oracle checks.
struct TargetBundle {
  TargetDistribution target;
  std::optional<GroundTruth> ground_truth;
  InitialDistribution init;
  std::function<Vector(RngStream&)> direct_sampler;  // may be empty
};

/// Wraps a target in per-coordinate scaling y = x / scale:
/// logp'(y) = logp(scale .* y), grad' = scale .* grad(scale .* y).
TargetDistribution precondition_target(const TargetDistribution& target, const Vector& scale);

}  // namespace laps
