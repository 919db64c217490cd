#include "laps/targets_builtin.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace laps {

TargetDistribution precondition_target(const TargetDistribution& target, const Vector& scale) {
  TargetDistribution out;
  out.dim = target.dim;
  out.name = target.name + "/preconditioned";
  out.log_density = [f = target.log_density, scale](const Vector& y) {
    return f(scale.cwiseProduct(y));
  };
  out.gradient = [g = target.gradient, scale](const Vector& y) -> Vector {
    return scale.cwiseProduct(g(scale.cwiseProduct(y)));
  };
  out.log_density_gradient = [fg = target.log_density_gradient, scale](const Vector& y,
                                                                       Vector& grad) {
    const double lp = fg(scale.cwiseProduct(y), grad);
    grad.array() *= scale.array();
    return lp;
  };
  return out;
}

TargetBundle banana_target() {
  constexpr double curvature = 0.03;
  constexpr double sigma1_sq = 100.0;

  TargetDistribution t;
  t.dim = 2;
  t.name = "banana";
  t.log_density_gradient = [](const Vector& x, Vector& grad) {
    const double r = x[1] - curvature * (x[0] * x[0] - sigma1_sq);
    grad.resize(2);
    grad[0] = -x[0] / sigma1_sq + 2.0 * curvature * x[0] * r;
    grad[1] = -r;
    return -0.5 * x[0] * x[0] / sigma1_sq - 0.5 * r * r;
  };
  t.log_density = [fg = t.log_density_gradient](const Vector& x) {
    Vector g;
    return fg(x, g);
  };
  t.gradient = [fg = t.log_density_gradient](const Vector& x) -> Vector {
    Vector g;
    fg(x, g);
    return g;
  };

  GroundTruth gt;
  gt.second_moments = Vector(2);
  gt.second_moments << 100.0, 19.0;
  // Var[x2^2] = E[x2^4] - 19^2 with x2 = 3
  //  (w^2 - 1) + z, w,z iid N(0,1): E[x2^4] = 81*60 + 6*9*2 + 3 = 4971.
  gt.second_moment_variances = Vector(2);
  gt.second_moment_variances << 20000.0, 4610.0;
  gt.source = GroundTruth::Source::analytic;

  TargetBundle b;
  b.target = std::move(t);
  b.ground_truth = std::move(gt);
  b.init.sample = [](RngStream& rng) {
    Vector x(2);
    rng.fill_normal(std::span<double>(x.data(), 2));
    return x;
  };
  b.direct_sampler = [](RngStream& rng) {
    Vector z(2);
    rng.fill_normal(std::span<double>(z.data(), 2));
    Vector x(2);
    x[0] = 10.0 * z[0];
    x[1] = curvature * (x[0] * x[0] - sigma1_sq) + z[1];
    return x;
  };
  return b;
}

TargetBundle standard_gaussian(int dim) {
  if (dim < 1) throw std::invalid_argument("standard_gaussian: dim must be >= 1");

  TargetDistribution t;
  t.dim = dim;
  t.name = "gaussian";
  t.log_density = [](const Vector& x) { return -0.5 * x.squaredNorm(); };
  t.gradient = [](const Vector& x) -> Vector { return -x; };
  t.log_density_gradient = [](const Vector& x, Vector& grad) {
    grad = -x;
    return -0.5 * x.squaredNorm();
  };

  GroundTruth gt;
  gt.second_moments = Vector::Ones(dim);
  gt.second_moment_variances = Vector::Constant(dim, 2.0);
  gt.source = GroundTruth::Source::analytic;

  TargetBundle b;
  b.target = std::move(t);
  b.ground_truth = std::move(gt);
  b.init.sample = [dim](RngStream& rng) {
    Vector x(dim);
    rng.fill_normal(std::span<double>(x.data(), static_cast<std::size_t>(dim)));
    return Vector(4.0 * x);
  };
  b.direct_sampler = [dim](RngStream& rng) {
    Vector x(dim);
    rng.fill_normal(std::span<double>(x.data(), static_cast<std::size_t>(dim)));
    return x;
  };
  return b;
}

namespace {

// Marsaglia-Tsang; the shape < 1 case goes through the shape+1 boost.
double gamma_draw(RngStream& rng, double shape) {
  if (shape < 1.0) {
    const double u = 1.0 - rng.uniform();  // (0, 1]
    return gamma_draw(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z = rng.normal();
    double v = 1.0 + c * z;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = 1.0 - rng.uniform();
    if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v;
  }
}

}  // namespace

IllConditionedGaussian make_ill_conditioned_gaussian(int dim, std::uint64_t seed,
                                                     double condition) {
  if (dim < 2) throw std::invalid_argument("ill_conditioned_gaussian: dim must be >= 2");
  if (!(condition >= 1.0)) {
    throw std::invalid_argument("ill_conditioned_gaussian: condition must be >= 1");
  }
  RngStream rng = RngStream::from_seed(seed);

  Matrix a(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) a(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }

  Vector log_lambda(dim);
  for (int i = 0; i < dim; ++i) log_lambda[i] = std::log(gamma_draw(rng, 0.5));
  const double lo = log_lambda.minCoeff();
  const double hi = log_lambda.maxCoeff();
  const double log_cond = std::log(condition);
  Vector lambda(dim);
  if (hi > lo && log_cond > 0.0) {
    for (int i = 0; i < dim; ++i) {
      lambda[i] = std::exp((log_lambda[i] - lo) / (hi - lo) * log_cond - 0.5 * log_cond);
    }
  } else {
    lambda.setOnes();
  }

  IllConditionedGaussian model;
  model.q = q;
  model.eigenvalues = lambda;
  model.sigma = q * lambda.asDiagonal() * q.transpose();
  model.sigma = 0.5 * (model.sigma + model.sigma.transpose()).eval();
  model.sigma_inv = q * lambda.cwiseInverse().asDiagonal() * q.transpose();
  model.sigma_inv = 0.5 * (model.sigma_inv + model.sigma_inv.transpose()).eval();

  TargetDistribution t;
  t.dim = dim;
  t.name = "icg";
  const Matrix sigma_inv = model.sigma_inv;
  t.log_density_gradient = [sigma_inv](const Vector& x, Vector& grad) {
    grad.noalias() = -(sigma_inv * x);
    return 0.5 * x.dot(grad);
  };
  t.log_density = [sigma_inv](const Vector& x) { return -0.5 * x.dot(sigma_inv * x); };
  t.gradient = [sigma_inv](const Vector& x) -> Vector { return -(sigma_inv * x); };

  GroundTruth gt;
  gt.second_moments = model.sigma.diagonal();
  gt.second_moment_variances = 2.0 * model.sigma.diagonal().array().square();
  gt.source = GroundTruth::Source::analytic;

  TargetBundle b;
  b.target = std::move(t);
  b.ground_truth = std::move(gt);
  b.init.sample = [dim](RngStream& s) {
    Vector x(dim);
    s.fill_normal(std::span<double>(x.data(), static_cast<std::size_t>(dim)));
    return x;
  };
  const Matrix sample_transform = q * lambda.cwiseSqrt().asDiagonal();
  b.direct_sampler = [dim, sample_transform](RngStream& s) {
    Vector z(dim);
    s.fill_normal(std::span<double>(z.data(), static_cast<std::size_t>(dim)));
    return Vector(sample_transform * z);
  };
  model.bundle = std::move(b);
  return model;
}

TargetBundle ill_conditioned_gaussian(int dim, std::uint64_t seed, double condition) {
  return make_ill_conditioned_gaussian(dim, seed, condition).bundle;
}

namespace {

std::map<std::string, TargetFactory>& registry() {
  static std::map<std::string, TargetFactory> reg = {
      {"banana",
       [](const TargetOptions&) { return banana_target(); }},
      {"gaussian",
       [](const TargetOptions& o) { return standard_gaussian(o.dim); }},
      {"icg",
       [](const TargetOptions& o) { return ill_conditioned_gaussian(o.dim, o.seed, o.condition); }},
  };
  return reg;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void register_target(const std::string& name, TargetFactory factory) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry()[name] = std::move(factory);
}

TargetBundle make_target(const std::string& name, const TargetOptions& options) {
  TargetFactory factory;
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto it = registry().find(name);
    if (it == registry().end()) throw std::invalid_argument("unknown target: " + name);
    factory = it->second;
  }
  return factory(options);
}

std::vector<std::string> registered_targets() {
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> names;
  names.reserve(registry().size());
  for (const auto& [name, _] : registry()) names.push_back(name);
  return names;
}

}  // namespace laps
