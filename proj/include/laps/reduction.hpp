#pragma once

#include <cstdint>
#include <span>

namespace laps {

/// Sum with a fixed pairwise split tree. The tree depends only on the number
/// of elements, never on thread count, so ensemble reductions are bitwise
/// reproducible for any worker configuration.
double pairwise_sum(std::span<const double> values);

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;  // unbiased (divisor n-1); 0 when n == 1
  std::int64_t used = 0;
  std::int64_t excluded = 0;
};

/// Mean and unbiased variance over the finite entries of `values`.
/// Non-finite entries are excluded and counted; throws std::invalid_argument
/// when no finite entry remains.
MeanVariance finite_mean_variance(std::span<const double> values);

double finite_mean(std::span<const double> values);

}  // namespace laps
