#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "laps/target.hpp"

namespace laps {

/// 2-d banana: x1 ~ N(0, 10^2), x2 | x1 ~ N(0.03*(x1^2 - 100), 1).
/// Ground truth is analytic (E[x1^2]=100, E[x2^2]=19) and the bundle carries
/// an exact direct sampler. Initialization: N(0, I).
TargetBundle banana_target();

/// Isotropic unit Gaussian, logp = -||x||^2 / 2. Initialization is a cold,
/// over-dispersed N(0, 4^2 I).
TargetBundle standard_gaussian(int dim);

/// Gaussian with covariance Q diag(lambda) Q^T: Q is the (sign-fixed) QR
/// factor of a seeded Gaussian matrix, lambda are Gamma(0.5, 1) draws
/// rescaled affinely in log-space so that lambda_max / lambda_min equals
/// `condition` exactly, centered so the spectrum spans
/// [condition^-1/2, condition^1/2].
struct IllConditionedGaussian {
  Matrix sigma;
  Matrix sigma_inv;
  Matrix q;
  Vector eigenvalues;
  TargetBundle bundle;
};

IllConditionedGaussian make_ill_conditioned_gaussian(int dim, std::uint64_t seed, double condition);

/// Convenience wrapper returning only the bundle.
TargetBundle ill_conditioned_gaussian(int dim, std::uint64_t seed, double condition);

/// By-name construction used by the CLI and the registration API.
struct TargetOptions {
  int dim = 100;
  std::uint64_t seed = 0;
  double condition = 1e5;
};

using TargetFactory = std::function<TargetBundle(const TargetOptions&)>;

/// Registers a user-supplied target under `name` (in-process; later
/// registrations replace earlier ones). Built-ins "banana", "gaussian" and
/// "icg" are pre-registered.
void register_target(const std::string& name, TargetFactory factory);
TargetBundle make_target(const std::string& name, const TargetOptions& options);
std::vector<std::string> registered_targets();

}  // namespace laps
