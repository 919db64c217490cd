#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "laps/adaptation.hpp"
#include "laps/diagnostics.hpp"
#include "laps/ensemble.hpp"
#include "laps/equipartition.hpp"
#include "laps/targets_builtin.hpp"

namespace laps {

/// Step-size bracketing failed within the doubling budget.
class BisectionBracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  double C = 0.025;
  double alpha = 2.0;
  double fluctuation_threshold = 0.01;
  double window_fraction = 0.2;
  std::optional<double> acceptance_target;  // default 0.7 (mn2/lf) or 0.9 (mn4)
  double acceptance_tolerance = 0.03;
  int maxiter = 1000;  // total iteration budget across both phases
  EquipartitionMode equipartition = EquipartitionMode::diagonal;
  int hutchinson_probes = 100;
  double step_clamp_low = 0.3;
  double step_clamp_high = 3.0;
  SchemeKind unadjusted_scheme = SchemeKind::lf;
  std::optional<SchemeKind> adjusted_scheme;  // default mn2 for d <= 200, mn4 above
  int steps_per_proposal = 15;
  double partial_refresh_factor = 1.25;  // L = factor * N * eps inside proposals
  double divergence_halving_fraction = 0.01;
  int max_bracket_doublings = 20;
  int workers = 0;  // 0: available parallelism
};

struct RunResult {
  EnsembleState ensemble;  // positions in original coordinates
  std::vector<RunRecord> records;
  /// Cumulative count of ensemble reductions feeding adaptation, one entry
  /// per record; constant once the hyperparameters freeze.
  std::vector<std::int64_t> adaptation_reductions;
  Preconditioner preconditioner;  // inactive when the adjusted phase never ran
  std::optional<std::int64_t> switch_iteration;
  std::optional<std::int64_t> freeze_iteration;
  std::optional<double> frozen_step_size;
  std::vector<std::string> warnings;
};

/// Full two-phase run: unadjusted steps with ensemble-driven step-size and
/// decoherence adaptation until the second-moment fluctuations settle (or the
/// budget runs out), then diagonal preconditioning and Metropolis-adjusted
/// sampling with bisection-tuned, then frozen, step size.
RunResult laps_run(const TargetBundle& bundle, int num_chains, const RunOptions& options,
                   std::uint64_t seed);

/// Unadjusted phase only, for a fixed iteration budget; `fixed_step` disables
/// the step-size adaptation (baseline schedules). The fluctuation switch does
/// not terminate the run.
RunResult run_unadjusted(const TargetBundle& bundle, int num_chains, const RunOptions& options,
                         std::uint64_t seed, int iterations,
                         std::optional<double> fixed_step = std::nullopt);

/// Adjusted phase only (no preconditioning), for a fixed number of proposals.
RunResult run_adjusted(const TargetBundle& bundle, int num_chains, const RunOptions& options,
                       std::uint64_t seed, int iterations);

}  // namespace laps
