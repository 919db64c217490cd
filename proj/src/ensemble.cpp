#include "laps/ensemble.hpp"

#include <stdexcept>
#include <thread>

#include "laps/reduction.hpp"

namespace laps {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  workers = std::min(resolve_workers(workers), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const int begin = static_cast<int>(static_cast<std::int64_t>(n) * w / workers);
    const int end = static_cast<int>(static_cast<std::int64_t>(n) * (w + 1) / workers);
    pool.emplace_back([begin, end, w, &body, &errors] {
      try {
        for (int i = begin; i < end; ++i) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

EnsembleState init_ensemble(const TargetBundle& bundle, int num_chains, std::uint64_t seed,
                            int workers) {
  if (num_chains < 2) throw std::invalid_argument("ensemble needs at least 2 chains");
  const int d = bundle.target.dim;

  EnsembleState ens;
  ens.chains.resize(static_cast<std::size_t>(num_chains));
  ens.streams.reserve(static_cast<std::size_t>(num_chains));
  for (int m = 0; m < num_chains; ++m) ens.streams.push_back(RngStream::for_chain(seed, m));
  ens.divergent.assign(static_cast<std::size_t>(num_chains), 0);

  parallel_for(num_chains, workers, [&](int m) {
    RngStream& rng = ens.streams[static_cast<std::size_t>(m)];
    Vector x = bundle.init.sample(rng);
    if (x.size() != d || !x.allFinite()) {
      throw std::invalid_argument("initial distribution produced an invalid position");
    }
    ChainState s = make_chain_state(std::move(x), bundle.target);
    const double gnorm = s.grad.norm();
    if (gnorm > 0.0) {
      s.u = s.grad / gnorm;
    } else {
      Vector z(d);
      for (;;) {
        rng.fill_normal(std::span<double>(z.data(), static_cast<std::size_t>(d)));
        const double n = z.norm();
        if (n > 0.0) {
          s.u = z / n;
          break;
        }
      }
    }
    ens.chains[static_cast<std::size_t>(m)] = std::move(s);
  });
  ens.gradient_calls_per_chain = 1;
  return ens;
}

namespace {

template <typename Extract>
Vector per_coordinate(const std::vector<ChainState>& chains, Extract&& extract) {
  const auto m = chains.size();
  const auto d = chains.front().x.size();
  Vector out(d);
  std::vector<double> column(m);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (std::size_t c = 0; c < m; ++c) column[c] = extract(chains[c], i);
    out[i] = pairwise_sum(column) / static_cast<double>(m);
  }
  return out;
}

}  // namespace

Vector coordinate_means(const std::vector<ChainState>& chains) {
  return per_coordinate(chains, [](const ChainState& c, Eigen::Index i) { return c.x[i]; });
}

Vector coordinate_variances(const std::vector<ChainState>& chains) {
  const auto m = chains.size();
  const auto d = chains.front().x.size();
  const Vector mean = coordinate_means(chains);
  Vector out(d);
  std::vector<double> column(m);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (std::size_t c = 0; c < m; ++c) {
      const double dev = chains[c].x[i] - mean[i];
      column[c] = dev * dev;
    }
    out[i] = m > 1 ? pairwise_sum(column) / static_cast<double>(m - 1) : 0.0;
  }
  return out;
}

Vector coordinate_second_moments(const std::vector<ChainState>& chains, const Vector* scale) {
  return per_coordinate(chains, [scale](const ChainState& c, Eigen::Index i) {
    const double v = scale ? (*scale)[i] * c.x[i] : c.x[i];
    return v * v;
  });
}

}  // namespace laps
