#include "laps/adaptation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace laps {

double bias_bound_F(double equip_loss) {
  if (equip_loss < 0.0) throw std::invalid_argument("bias_bound_F: negative input");
  const double root = std::sqrt(equip_loss);
  const double denom = (1.0 + root) * (1.0 + root);
  return 4.0 * equip_loss * root / denom;
}

double bias_bound_F_inverse(double value) {
  if (value < 0.0) throw std::invalid_argument("bias_bound_F_inverse: negative input");
  if (value == 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (bias_bound_F(hi) < value) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::invalid_argument("bias_bound_F_inverse: value too large");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bias_bound_F(mid) < value) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-10 * std::max(lo, 1e-300)) break;
  }
  return 0.5 * (lo + hi);
}

double step_size_update(double eps, double equip_loss, double eevpd_observed,
                        const StepSizeRule& rule) {
  if (std::isinf(eevpd_observed)) return 0.5 * eps;
  const double wanted = bias_bound_F(rule.C * equip_loss);
  if (wanted == 0.0 && eevpd_observed == 0.0) return eps;
  double ratio;
  if (eevpd_observed == 0.0) {
    ratio = rule.clamp_high;
  } else {
    ratio = std::pow(wanted / eevpd_observed, 1.0 / 6.0);
  }
  ratio = std::min(rule.clamp_high, std::max(rule.clamp_low, ratio));
  return eps * ratio;
}

double decoherence_update(double total_position_variance, double alpha, double previous) {
  if (!(total_position_variance > 0.0)) return previous;
  return alpha * std::sqrt(total_position_variance);
}

FluctuationMonitor::FluctuationMonitor(Eigen::Index dim, std::int64_t window)
    : window_(std::max<std::int64_t>(2, window)),
      history_(Matrix::Zero(std::max<std::int64_t>(2, window), dim)),
      sum_(Vector::Zero(dim)),
      sum_sq_(Vector::Zero(dim)) {}

double FluctuationMonitor::update(const Vector& values) {
  const Eigen::Index slot = static_cast<Eigen::Index>(count_ % window_);
  if (count_ >= window_) {
    sum_ -= history_.row(slot).transpose();
    sum_sq_ -= history_.row(slot).transpose().cwiseAbs2();
  }
  history_.row(slot) = values.transpose();
  sum_ += values;
  sum_sq_ += values.cwiseAbs2();
  ++count_;

  if (count_ < window_) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(window_);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double mean = sum_[i] / n;
    if (mean == 0.0) return std::numeric_limits<double>::infinity();
    const double var = std::max(0.0, (sum_sq_[i] - n * mean * mean) / (n - 1.0));
    worst = std::max(worst, std::sqrt(var) / std::abs(mean));
  }
  return worst;
}

BisectionController::BisectionController(double target_acceptance, double tolerance,
                                         int max_doublings)
    : target_(target_acceptance), tolerance_(tolerance), max_doublings_(max_doublings) {
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw std::invalid_argument("bisection: target acceptance must be in (0, 1)");
  }
}

BisectionController::Decision BisectionController::observe(double eps, double acceptance) {
  Decision decision;
  if (std::abs(acceptance - target_) <= tolerance_) {
    decision.next_step_size = eps;
    decision.frozen = true;
    return decision;
  }
  if (acceptance > target_) {
    have_low_ = true;
    eps_low_ = eps;
  } else {
    have_high_ = true;
    eps_high_ = eps;
  }
  if (have_low_ && have_high_) {
    decision.next_step_size = std::sqrt(eps_low_ * eps_high_);
    return decision;
  }
  if (++doublings_ > max_doublings_) {
    decision.failed = true;
    decision.next_step_size = eps;
    return decision;
  }
  decision.next_step_size = (acceptance > target_) ? 2.0 * eps : 0.5 * eps;
  return decision;
}

}  // namespace laps
