#include "laps/reduction.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace laps {

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t mid = n / 2;
  return pairwise_sum(values.first(mid)) + pairwise_sum(values.subspan(mid));
}

MeanVariance finite_mean_variance(std::span<const double> values) {
  std::vector<double> finite;
  finite.reserve(values.size());
  for (double v : values) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  MeanVariance out;
  out.used = static_cast<std::int64_t>(finite.size());
  out.excluded = static_cast<std::int64_t>(values.size() - finite.size());
  if (finite.empty()) throw std::invalid_argument("reduction: no finite values");
  out.mean = pairwise_sum(finite) / static_cast<double>(finite.size());
  if (finite.size() > 1) {
    std::vector<double> sq(finite.size());
    for (std::size_t i = 0; i < finite.size(); ++i) {
      const double d = finite[i] - out.mean;
      sq[i] = d * d;
    }
    out.variance = pairwise_sum(sq) / static_cast<double>(finite.size() - 1);
  }
  return out;
}

double finite_mean(std::span<const double> values) { return finite_mean_variance(values).mean; }

}  // namespace laps
