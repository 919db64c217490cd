#include "laps/diagnostics.hpp"

#include <stdexcept>

namespace laps {

const char* phase_name(Phase phase) {
  return phase == Phase::unadjusted ? "unadjusted" : "adjusted";
}

BiasReport bias(const Vector& second_moments, const GroundTruth& truth,
                std::int64_t gradient_calls_per_chain, std::int64_t iteration, Phase phase) {
  if (second_moments.size() != truth.second_moments.size()) {
    throw std::invalid_argument("bias: dimension mismatch with ground truth");
  }
  BiasReport report;
  report.b2.resize(second_moments.size());
  for (Eigen::Index i = 0; i < second_moments.size(); ++i) {
    const double err = second_moments[i] - truth.second_moments[i];
    report.b2[i] = err * err / truth.second_moment_variances[i];
  }
  report.b2_max = report.b2.maxCoeff();
  report.b2_avg = report.b2.mean();
  report.gradient_calls_per_chain = gradient_calls_per_chain;
  report.iteration = iteration;
  report.phase = phase;
  return report;
}

std::optional<std::int64_t> grads_to_threshold(std::span<const RunRecord> records,
                                               double threshold, BiasMetric metric) {
  std::optional<std::int64_t> candidate;
  for (const RunRecord& r : records) {
    if (!r.bias) continue;
    const double value = metric == BiasMetric::max ? r.bias->b2_max : r.bias->b2_avg;
    if (value < threshold) {
      if (!candidate) candidate = r.gradient_calls_per_chain;
    } else {
      candidate.reset();
    }
  }
  return candidate;
}

}  // namespace laps
