#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "laps/integrator.hpp"
#include "laps/target.hpp"

namespace laps {

/// M chains advancing in lockstep. Chain m owns the stream derived from
/// (seed, m); divergence flags describe the most recent update round.
struct EnsembleState {
  std::vector<ChainState> chains;
  std::vector<RngStream> streams;
  std::vector<std::uint8_t> divergent;
  std::int64_t iteration = 0;
  std::int64_t gradient_calls_per_chain = 0;

  int num_chains() const { return static_cast<int>(chains.size()); }
  Eigen::Index dim() const { return chains.empty() ? 0 : chains.front().x.size(); }
};

int resolve_workers(int requested);

/// Static-partition parallel loop. Bodies must write only to their own index;
/// results are then identical for any worker count.
void parallel_for(int n, int workers, const std::function<void(int)>& body);

/// Draws initial positions from the bundle's initializer and aligns each
/// velocity with the local gradient (one evaluation per chain, counted).
EnsembleState init_ensemble(const TargetBundle& bundle, int num_chains, std::uint64_t seed,
                            int workers);

/// Per-coordinate ensemble statistics (fixed pairwise reductions). `scale`
/// maps positions back to original coordinates before the moment is taken.
Vector coordinate_means(const std::vector<ChainState>& chains);
Vector coordinate_variances(const std::vector<ChainState>& chains);  // unbiased
Vector coordinate_second_moments(const std::vector<ChainState>& chains,
                                 const Vector* scale = nullptr);

}  // namespace laps
