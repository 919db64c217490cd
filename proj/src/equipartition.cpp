#include "laps/equipartition.hpp"

#include <cmath>
#include <stdexcept>

#include "laps/reduction.hpp"

namespace laps {

namespace {

std::vector<const ChainState*> finite_chains(const std::vector<ChainState>& chains) {
  std::vector<const ChainState*> out;
  out.reserve(chains.size());
  for (const ChainState& c : chains) {
    if (c.x.allFinite() && c.grad.allFinite()) out.push_back(&c);
  }
  if (out.empty()) throw std::invalid_argument("equipartition: no finite chains");
  return out;
}

Vector centered_means(const std::vector<const ChainState*>& chains) {
  const auto d = chains.front()->x.size();
  const auto m = chains.size();
  Vector mean(d);
  std::vector<double> column(m);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (std::size_t c = 0; c < m; ++c) column[c] = chains[c]->x[i];
    mean[i] = pairwise_sum(column) / static_cast<double>(m);
  }
  return mean;
}

}  // namespace

double equipartition_diag(const std::vector<ChainState>& chains) {
  const auto included = finite_chains(chains);
  const auto d = included.front()->x.size();
  const auto m = included.size();
  const Vector mean = centered_means(included);

  std::vector<double> column(m);
  std::vector<double> terms(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (std::size_t c = 0; c < m; ++c) {
      column[c] = -(included[c]->x[i] - mean[i]) * included[c]->grad[i];
    }
    const double v_ii = pairwise_sum(column) / static_cast<double>(m);
    terms[static_cast<std::size_t>(i)] = (1.0 - v_ii) * (1.0 - v_ii);
  }
  return pairwise_sum(terms) / static_cast<double>(d);
}

double equipartition_full(const std::vector<ChainState>& chains, int probes,
                          RngStream& probe_rng) {
  if (probes < 1) throw std::invalid_argument("equipartition_full: probes must be >= 1");
  const auto included = finite_chains(chains);
  const auto d = included.front()->x.size();
  const auto m = included.size();
  const Vector mean = centered_means(included);

  std::vector<double> dots(m);
  std::vector<double> column(m);
  std::vector<double> probe_values(static_cast<std::size_t>(probes));
  Vector z(d);
  for (int p = 0; p < probes; ++p) {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = probe_rng.rademacher();
    for (std::size_t c = 0; c < m; ++c) dots[c] = included[c]->grad.dot(z);
    double norm_sq = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      for (std::size_t c = 0; c < m; ++c) {
        column[c] = (included[c]->x[i] - mean[i]) * dots[c];
      }
      const double w_i = z[i] + pairwise_sum(column) / static_cast<double>(m);
      norm_sq += w_i * w_i;
    }
    probe_values[static_cast<std::size_t>(p)] = norm_sq / static_cast<double>(d);
  }
  return pairwise_sum(probe_values) / static_cast<double>(probes);
}

GaussianEquipartition equipartition_gaussian(const Matrix& sigma_target,
                                             const Matrix& sigma_ensemble) {
  const auto d = sigma_target.rows();
  if (sigma_target.cols() != d || sigma_ensemble.rows() != d || sigma_ensemble.cols() != d) {
    throw std::invalid_argument("equipartition_gaussian: dimension mismatch");
  }
  const Matrix v = sigma_target.llt().solve(sigma_ensemble).transpose();
  const Matrix residual = Matrix::Identity(d, d) - v;
  GaussianEquipartition out;
  out.full = residual.squaredNorm() / static_cast<double>(d);
  double diag = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double t = 1.0 - sigma_ensemble(i, i) / sigma_target(i, i);
    diag += t * t;
  }
  out.diag = diag / static_cast<double>(d);
  return out;
}

}  // namespace laps
