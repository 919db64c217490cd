#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>

#include "laps/common.hpp"
#include "laps/target.hpp"

namespace laps {

enum class Phase { unadjusted, adjusted };

const char* phase_name(Phase phase);

/// Normalized squared second-moment errors against ground truth, in original
/// coordinates: b2[i] = (mean[x_i^2] - E[x_i^2])^2 / Var[x_i^2].
struct BiasReport {
  Vector b2;
  double b2_max = 0.0;
  double b2_avg = 0.0;
  std::int64_t gradient_calls_per_chain = 0;
  std::int64_t iteration = 0;
  Phase phase = Phase::unadjusted;
};

BiasReport bias(const Vector& second_moments, const GroundTruth& truth,
                std::int64_t gradient_calls_per_chain, std::int64_t iteration, Phase phase);

/// One per-iteration diagnostics row. NaN marks a quantity that is not
/// defined for the phase (e.g. acceptance during the unadjusted phase).
struct RunRecord {
  std::int64_t iteration = 0;
  Phase phase = Phase::unadjusted;
  double step_size = 0.0;
  double decoherence_length = 0.0;
  double eevpd = std::numeric_limits<double>::quiet_NaN();
  double eevpd_wanted = std::numeric_limits<double>::quiet_NaN();
  double equipartition_loss = std::numeric_limits<double>::quiet_NaN();
  double max_fluctuation = std::numeric_limits<double>::quiet_NaN();
  double acceptance = std::numeric_limits<double>::quiet_NaN();
  std::int64_t gradient_calls_per_chain = 0;
  double divergent_fraction = 0.0;
  std::optional<BiasReport> bias;
};

enum class BiasMetric { max, avg };

/// First gradient count at which the metric drops below `threshold` and stays
/// below it for every later record that carries a bias report; nullopt when
/// that never happens.
std::optional<std::int64_t> grads_to_threshold(std::span<const RunRecord> records,
                                               double threshold, BiasMetric metric);

}  // namespace laps
