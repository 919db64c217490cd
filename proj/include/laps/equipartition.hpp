#pragma once

#include <vector>

#include "laps/integrator.hpp"
#include "laps/rng.hpp"

namespace laps {

enum class EquipartitionMode { diagonal, full_rank };

/// Diagonal equipartition loss (1/d) sum_i (1 - V_ii)^2 with
/// V_ii = -(1/M) sum_m (x_i - mean(x_i)) * grad_i, using the gradients cached
/// on the chain states (no extra density evaluations). Chains carrying
/// non-finite entries are excluded.
double equipartition_diag(const std::vector<ChainState>& chains);

/// Full-rank loss (1/d) |I - V|_F^2 estimated with Rademacher probes:
/// mean_z |z + (1/M) sum_m (x^m - mean(x)) (grad^m . z)|^2 / d. No d x d
/// matrix is formed; cost O(d * M * probes).
double equipartition_full(const std::vector<ChainState>& chains, int probes,
                          RngStream& probe_rng);

struct GaussianEquipartition {
  double full = 0.0;
  double diag = 0.0;
};

/// Closed forms for zero-mean Gaussians: full = (1/d) |I - S' S^-1|_F^2,
/// diag = (1/d) sum_i (1 - S'_ii / S_ii)^2, where S is the target covariance
/// and S' the ensemble covariance.
GaussianEquipartition equipartition_gaussian(const Matrix& sigma_target,
                                             const Matrix& sigma_ensemble);

}  // namespace laps
