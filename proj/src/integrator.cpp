#include "laps/integrator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace laps {

ChainState make_chain_state(Vector x, const TargetDistribution& target) {
  ChainState s;
  s.grad.resize(x.size());
  s.logp = target.log_density_gradient(x, s.grad);
  if (!std::isfinite(s.logp) || !s.grad.allFinite()) {
    throw std::invalid_argument("make_chain_state: density not finite at the given position");
  }
  s.x = std::move(x);
  s.u = Vector::Zero(s.x.size());
  s.u[0] = 1.0;
  return s;
}

namespace {

IntegratorScheme make_lf() {
  IntegratorScheme s;
  s.kind = SchemeKind::lf;
  s.name = "lf";
  s.b = {0.5, 0.5};
  s.a = {1.0};
  s.order = 2;
  s.gradients_per_step = 1;
  return s;
}

IntegratorScheme make_mn2() {
  // Second-order minimal-norm coefficients.
  constexpr double b1 = 0.1931833275037836;
  IntegratorScheme s;
  s.kind = SchemeKind::mn2;
  s.name = "mn2";
  s.b = {b1, 1.0 - 2.0 * b1, b1};
  s.a = {0.5, 0.5};
  s.order = 2;
  s.gradients_per_step = 2;
  return s;
}

IntegratorScheme make_mn4() {
  // Fourth-order minimal-norm coefficients; the inner entries follow from
  // normalization and the mirror symmetry.
  constexpr double b1 = 0.08398315262876693;
  constexpr double b2 = 0.6822365335719091;
  constexpr double a1 = 0.2539785108410595;
  constexpr double a2 = -0.03230286765269967;
  const double b3 = 0.5 - b1 - b2;
  const double a3 = 1.0 - 2.0 * (a1 + a2);
  IntegratorScheme s;
  s.kind = SchemeKind::mn4;
  s.name = "mn4";
  s.b = {b1, b2, b3, b3, b2, b1};
  s.a = {a1, a2, a3, a2, a1};
  s.order = 4;
  s.gradients_per_step = 5;
  return s;
}

}  // namespace

const IntegratorScheme& IntegratorScheme::get(SchemeKind kind) {
  static const IntegratorScheme lf = make_lf();
  static const IntegratorScheme mn2 = make_mn2();
  static const IntegratorScheme mn4 = make_mn4();
  switch (kind) {
    case SchemeKind::lf: return lf;
    case SchemeKind::mn2: return mn2;
    case SchemeKind::mn4: return mn4;
  }
  throw std::invalid_argument("unknown integrator scheme");
}

SchemeKind IntegratorScheme::parse(std::string_view name) {
  if (name == "lf") return SchemeKind::lf;
  if (name == "mn2") return SchemeKind::mn2;
  if (name == "mn4") return SchemeKind::mn4;
  throw std::invalid_argument("unknown integrator scheme: " + std::string(name));
}

SubStep position_update(ChainState& state, double eps, const TargetDistribution& target) {
  Vector x_new = state.x + eps * state.u;
  Vector grad_new(state.x.size());
  const double logp_new = target.log_density_gradient(x_new, grad_new);
  if (!std::isfinite(logp_new) || !grad_new.allFinite()) {
    return {0.0, true};
  }
  const double delta = -logp_new + state.logp;
  state.x = std::move(x_new);
  state.grad = std::move(grad_new);
  state.logp = logp_new;
  return {delta, false};
}

SubStep velocity_update(ChainState& state, double eps) {
  const auto d = static_cast<double>(state.x.size());
  const double gnorm = state.grad.norm();
  if (!std::isfinite(gnorm)) return {0.0, true};
  if (gnorm == 0.0) return {0.0, false};  // no force: exact fixed point

  const double delta = eps * gnorm / (d - 1.0);
  const Vector e = state.grad / gnorm;
  const double c = e.dot(state.u);
  const double th = std::tanh(delta);
  const double sech = 1.0 / std::cosh(delta);
  const double denom = 1.0 + c * th;

  if (denom <= std::numeric_limits<double>::min()) {
    // Numerically antipodal to the attracting direction.
    state.u = (c < 0.0 ? -e : e).eval();
  } else {
    state.u = (sech * state.u + (th + c * (1.0 - sech)) * e) / denom;
  }
  state.u.normalize();

  double energy;
  if (delta > 20.0) {
    // log(cosh d + c sinh d) = d - log 2 + log((1+c) + (1-c) e^{-2d})
    double q = (1.0 + c) + (1.0 - c) * std::exp(-2.0 * delta);
    if (q <= 0.0) q = std::numeric_limits<double>::min();
    energy = (d - 1.0) * (delta - std::log(2.0) + std::log(q));
  } else {
    energy = (d - 1.0) * std::log(std::cosh(delta) + c * std::sinh(delta));
  }
  return {energy, false};
}

void stochastic_update(ChainState& state, double eps, double decoherence_length, RngStream& rng) {
  const double c1 = std::exp(-eps / decoherence_length);
  // Z has per-coordinate std 1/sqrt(d) so that |Z| ~ 1 matches |u|; this is
  // what reproduces the SDE's eta = sqrt(2/Ld) noise strength in the small
  // step limit. A larger Z scale would shorten the effective decoherence
  // length by the same factor.
  const double c2 = std::sqrt(std::max(0.0, (1.0 - c1) * (1.0 + c1))) /
                    std::sqrt(static_cast<double>(state.u.size()));
  Vector z(state.u.size());
  for (;;) {
    rng.fill_normal(std::span<double>(z.data(), static_cast<std::size_t>(z.size())));
    Vector w = c1 * state.u + c2 * z;
    const double n = w.norm();
    if (n > 0.0) {
      state.u = w / n;
      return;
    }
  }
}

StepResult deterministic_core(ChainState& state, double eps, const IntegratorScheme& scheme,
                              const TargetDistribution& target,
                              std::vector<double>* sub_deltas) {
  StepResult result;
  result.gradient_calls = scheme.gradients_per_step;

  SubStep sub = velocity_update(state, scheme.b[0] * eps);
  if (sub.divergent) {
    result.divergent = true;
    return result;
  }
  result.delta += sub.delta;
  if (sub_deltas) sub_deltas->push_back(sub.delta);

  for (std::size_t k = 0; k < scheme.a.size(); ++k) {
    sub = position_update(state, scheme.a[k] * eps, target);
    if (sub.divergent) {
      result.divergent = true;
      return result;
    }
    result.delta += sub.delta;
    if (sub_deltas) sub_deltas->push_back(sub.delta);

    sub = velocity_update(state, scheme.b[k + 1] * eps);
    if (sub.divergent) {
      result.divergent = true;
      return result;
    }
    result.delta += sub.delta;
    if (sub_deltas) sub_deltas->push_back(sub.delta);
  }
  return result;
}

StepResult mclmc_step(ChainState& state, double eps, double decoherence_length,
                      const IntegratorScheme& scheme, const TargetDistribution& target,
                      RngStream& rng, std::vector<double>* sub_deltas) {
  stochastic_update(state, 0.5 * eps, decoherence_length, rng);
  StepResult result = deterministic_core(state, eps, scheme, target, sub_deltas);
  if (result.divergent) return result;
  stochastic_update(state, 0.5 * eps, decoherence_length, rng);
  return result;
}

}  // namespace laps
