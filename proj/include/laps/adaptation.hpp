#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "laps/common.hpp"

namespace laps {

/// Monotone map from equipartition loss to energy-error variance:
/// F(D) = 4 D^{3/2} / (1 + sqrt(D))^2. Throws on negative input.
double bias_bound_F(double equip_loss);

/// Inverse of F by bracketing bisection to relative tolerance 1e-10.
double bias_bound_F_inverse(double value);

struct StepSizeRule {
  double C = 0.025;               // targeted asymptotic-to-total bias ratio
  double clamp_low = 0.3;         // per-iteration multiplicative bounds
  double clamp_high = 3.0;
};

/// eps_{t+1} = eps_t * clamp((F(C * D) / eevpd_observed)^{1/6}).
/// An infinite observed EEVPD (divergence sentinel) halves the step size.
double step_size_update(double eps, double equip_loss, double eevpd_observed,
                        const StepSizeRule& rule);

/// L = alpha * sqrt(sum_i Var[x_i]); a degenerate (zero-variance) ensemble
/// keeps the previous value.
double decoherence_update(double total_position_variance, double alpha, double previous);

/// Relative fluctuation of per-coordinate summary statistics over a moving
/// window of the last T observations (ring buffer; O(d) per update).
/// Reports +inf until T observations have been absorbed.
class FluctuationMonitor {
 public:
  FluctuationMonitor(Eigen::Index dim, std::int64_t window);

  /// Absorbs this iteration's per-coordinate values (ensemble means of x_i^2)
  /// and returns max_i sigma_i / mu_i. A zero mean makes that coordinate +inf.
  double update(const Vector& values);

  std::int64_t observations() const { return count_; }
  std::int64_t window() const { return window_; }

 private:
  std::int64_t window_;
  std::int64_t count_ = 0;
  Matrix history_;  // window x dim ring buffer
  Vector sum_;
  Vector sum_sq_;
};

struct Preconditioner {
  Vector scale;  // per-coordinate sqrt(Var[x_i]), floored at 1e-12

  bool active() const { return scale.size() > 0; }
  Vector to_original(const Vector& transformed) const {
    return scale.cwiseProduct(transformed);
  }
  Vector from_original(const Vector& original) const {
    return original.cwiseQuotient(scale);
  }
};

/// Root-finds the step size for a targeted acceptance rate assuming a(eps)
/// decreases in eps: doubling/halving until a bracket exists, then bisection
/// in log-space. Freezes once |a - target| <= tolerance.
class BisectionController {
 public:
  BisectionController(double target_acceptance, double tolerance, int max_doublings = 20);

  struct Decision {
    double next_step_size = 0.0;
    bool frozen = false;
    bool failed = false;
  };

  /// Consumes the acceptance observed with `eps` and proposes the next step
  /// size. `failed` is set when no bracket was found within the doubling
  /// budget.
  Decision observe(double eps, double acceptance);

  bool bracketed() const { return have_low_ && have_high_; }

 private:
  double target_;
  double tolerance_;
  int max_doublings_;
  int doublings_ = 0;
  bool have_low_ = false, have_high_ = false;
  double eps_low_ = 0.0, eps_high_ = 0.0;  // a(eps_low) > target > a(eps_high)
};

}  // namespace laps
