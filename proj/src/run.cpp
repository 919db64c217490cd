#include "laps/run.hpp"

#include <cmath>
#include <limits>

#include "laps/kernels.hpp"
#include "laps/reduction.hpp"

namespace laps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SchemeKind default_adjusted_scheme(Eigen::Index dim) {
  return dim > 200 ? SchemeKind::mn4 : SchemeKind::mn2;
}

double default_acceptance_target(SchemeKind scheme) {
  return scheme == SchemeKind::mn4 ? 0.9 : 0.7;
}

struct Engine {
  const TargetBundle& bundle;
  const RunOptions& opt;
  std::uint64_t seed;
  int workers;

  EnsembleState ens;
  TargetDistribution dynamics_target;  // original, then preconditioned
  Preconditioner preconditioner;
  double eps = 0.0;
  double decoherence = 1.0;
  std::int64_t adaptation_reductions = 0;

  RunResult result;

  Engine(const TargetBundle& bundle_, int num_chains, const RunOptions& opt_, std::uint64_t seed_)
      : bundle(bundle_), opt(opt_), seed(seed_), workers(resolve_workers(opt_.workers)) {
    if (bundle.target.dim < 2) {
      throw std::invalid_argument("laps: target dimension must be >= 2");
    }
    if (opt.maxiter < 1) throw std::invalid_argument("laps: maxiter must be >= 1");
    ens = init_ensemble(bundle, num_chains, seed, workers);
    dynamics_target = bundle.target;
    eps = 0.01 * std::sqrt(static_cast<double>(bundle.target.dim));
    const Vector variances = coordinate_variances(ens.chains);
    ++adaptation_reductions;
    decoherence = decoherence_update(variances.sum(), opt.alpha, 1.0);
  }

  void warn(const std::string& message) { result.warnings.push_back(message); }

  const Vector* scale_ptr() const {
    return preconditioner.active() ? &preconditioner.scale : nullptr;
  }

  std::optional<BiasReport> bias_report(Phase phase) const {
    if (!bundle.ground_truth) return std::nullopt;
    const Vector m2 = coordinate_second_moments(ens.chains, scale_ptr());
    return bias(m2, *bundle.ground_truth, ens.gradient_calls_per_chain, ens.iteration, phase);
  }

  void push_record(RunRecord record) {
    record.iteration = ens.iteration;
    record.gradient_calls_per_chain = ens.gradient_calls_per_chain;
    result.records.push_back(std::move(record));
    result.adaptation_reductions.push_back(adaptation_reductions);
  }

  /// One unadjusted iteration; returns the max relative fluctuation.
  double unadjusted_iteration(const IntegratorScheme& scheme, FluctuationMonitor& monitor,
                              bool adapt_step) {
    const int m = ens.num_chains();
    std::vector<double> deltas(static_cast<std::size_t>(m));
    parallel_for(m, workers, [&](int i) {
      const StepResult r = mclmc_step(ens.chains[static_cast<std::size_t>(i)], eps, decoherence,
                                      scheme, dynamics_target,
                                      ens.streams[static_cast<std::size_t>(i)]);
      ens.divergent[static_cast<std::size_t>(i)] = r.divergent ? 1 : 0;
      deltas[static_cast<std::size_t>(i)] = r.divergent ? kInf : r.delta;
    });
    ens.gradient_calls_per_chain += scheme.gradients_per_step;

    std::int64_t divergent_count = 0;
    for (std::uint8_t flag : ens.divergent) divergent_count += flag;
    const double divergent_fraction = static_cast<double>(divergent_count) / m;

    double eevpd = kInf;
    if (divergent_fraction <= 0.5) {
      const MeanVariance mv = finite_mean_variance(deltas);
      eevpd = mv.variance / static_cast<double>(ens.dim());
    }
    ++adaptation_reductions;

    double equip = 0.0;
    if (opt.equipartition == EquipartitionMode::diagonal) {
      equip = equipartition_diag(ens.chains);
    } else {
      RngStream probe_rng = RngStream::for_probes(seed, static_cast<std::uint64_t>(ens.iteration));
      equip = equipartition_full(ens.chains, opt.hutchinson_probes, probe_rng);
    }
    ++adaptation_reductions;
    const double wanted = bias_bound_F(opt.C * equip);

    double next_eps = eps;
    if (adapt_step) {
      if (divergent_fraction > opt.divergence_halving_fraction) {
        next_eps = 0.5 * eps;  // EEVPD is not meaningful while chains blow up
      } else {
        next_eps = step_size_update(eps, equip, eevpd,
                                    {opt.C, opt.step_clamp_low, opt.step_clamp_high});
      }
    }

    const Vector variances = coordinate_variances(ens.chains);
    ++adaptation_reductions;
    const double next_decoherence = decoherence_update(variances.sum(), opt.alpha, decoherence);

    const Vector m2 = coordinate_second_moments(ens.chains, scale_ptr());
    const double max_fluct = monitor.update(m2);
    ++adaptation_reductions;

    RunRecord record;
    record.phase = Phase::unadjusted;
    record.step_size = eps;
    record.decoherence_length = decoherence;
    record.eevpd = eevpd;
    record.eevpd_wanted = wanted;
    record.equipartition_loss = equip;
    record.max_fluctuation = max_fluct;
    record.divergent_fraction = divergent_fraction;
    record.bias = bias_report(Phase::unadjusted);
    push_record(std::move(record));

    eps = next_eps;
    decoherence = next_decoherence;
    ++ens.iteration;
    return max_fluct;
  }

  void run_unadjusted_phase(int budget, bool adapt_step, bool stop_on_trigger) {
    const IntegratorScheme& scheme = IntegratorScheme::get(opt.unadjusted_scheme);
    const auto window =
        static_cast<std::int64_t>(std::llround(opt.window_fraction * opt.maxiter));
    FluctuationMonitor monitor(ens.dim(), std::max<std::int64_t>(1, window));
    while (ens.iteration < budget) {
      const double max_fluct = unadjusted_iteration(scheme, monitor, adapt_step);
      if (stop_on_trigger && max_fluct <= opt.fluctuation_threshold) return;
    }
    if (stop_on_trigger) {
      warn("unadjusted phase hit the iteration budget before the fluctuation threshold; "
           "proceeding to the adjusted phase with the remaining budget");
    }
  }

  void apply_preconditioning() {
    Vector variances = coordinate_variances(ens.chains);
    ++adaptation_reductions;
    Vector scale(variances.size());
    bool floored = false;
    for (Eigen::Index i = 0; i < variances.size(); ++i) {
      scale[i] = std::sqrt(std::max(0.0, variances[i]));
      if (scale[i] < 1e-12) {
        scale[i] = 1e-12;
        floored = true;
      }
    }
    if (floored) warn("preconditioner scale floored at 1e-12 for a degenerate coordinate");
    preconditioner.scale = scale;
    dynamics_target = precondition_target(bundle.target, scale);
    parallel_for(ens.num_chains(), workers, [&](int i) {
      ChainState& c = ens.chains[static_cast<std::size_t>(i)];
      c.x.array() /= scale.array();
      c.grad.array() *= scale.array();  // logp is unchanged up to the constant Jacobian
    });
    result.preconditioner = preconditioner;
  }

  void run_adjusted_phase(int budget) {
    const SchemeKind scheme_kind = opt.adjusted_scheme.value_or(default_adjusted_scheme(ens.dim()));
    const IntegratorScheme& scheme = IntegratorScheme::get(scheme_kind);
    const double a_target = opt.acceptance_target.value_or(default_acceptance_target(scheme_kind));
    BisectionController bisection(a_target, opt.acceptance_tolerance, opt.max_bracket_doublings);
    bool frozen = false;

    const int m = ens.num_chains();
    std::vector<double> accept_prob(static_cast<std::size_t>(m));
    while (ens.iteration < budget) {
      AdjustedKernelConfig cfg;
      cfg.step_size = eps;
      cfg.steps_per_proposal = opt.steps_per_proposal;
      cfg.partial_refresh_length = opt.partial_refresh_factor * opt.steps_per_proposal * eps;
      cfg.scheme = scheme_kind;

      parallel_for(m, workers, [&](int i) {
        const ProposalOutcome out = mams_kernel(ens.chains[static_cast<std::size_t>(i)], cfg,
                                                dynamics_target,
                                                ens.streams[static_cast<std::size_t>(i)]);
        ens.divergent[static_cast<std::size_t>(i)] = out.divergent ? 1 : 0;
        accept_prob[static_cast<std::size_t>(i)] = out.acceptance_probability;
      });
      ens.gradient_calls_per_chain += cfg.steps_per_proposal * scheme.gradients_per_step;

      std::int64_t divergent_count = 0;
      for (std::uint8_t flag : ens.divergent) divergent_count += flag;

      const double acceptance = pairwise_sum(accept_prob) / m;
      if (!frozen) {
        ++adaptation_reductions;  // the acceptance mean feeds the tuner
        const auto decision = bisection.observe(eps, acceptance);
        if (decision.failed) {
          throw BisectionBracketError(
              "step-size bisection found no bracket within the doubling budget");
        }
        if (decision.frozen) {
          frozen = true;
          result.freeze_iteration = ens.iteration;
          result.frozen_step_size = eps;
        } else {
          RunRecord record;
          record.phase = Phase::adjusted;
          record.step_size = eps;
          record.decoherence_length = cfg.partial_refresh_length;
          record.acceptance = acceptance;
          record.divergent_fraction = static_cast<double>(divergent_count) / m;
          record.bias = bias_report(Phase::adjusted);
          push_record(std::move(record));
          eps = decision.next_step_size;
          ++ens.iteration;
          continue;
        }
      }

      RunRecord record;
      record.phase = Phase::adjusted;
      record.step_size = eps;
      record.decoherence_length = cfg.partial_refresh_length;
      record.acceptance = acceptance;
      record.divergent_fraction = static_cast<double>(divergent_count) / m;
      record.bias = bias_report(Phase::adjusted);
      push_record(std::move(record));
      ++ens.iteration;
    }
  }

  void restore_original_coordinates() {
    if (!preconditioner.active()) return;
    const Vector& scale = preconditioner.scale;
    parallel_for(ens.num_chains(), workers, [&](int i) {
      ChainState& c = ens.chains[static_cast<std::size_t>(i)];
      c.x.array() *= scale.array();
      c.grad.array() /= scale.array();
    });
  }

  RunResult finish() {
    restore_original_coordinates();
    result.ensemble = std::move(ens);
    return std::move(result);
  }
};

}  // namespace

RunResult laps_run(const TargetBundle& bundle, int num_chains, const RunOptions& options,
                   std::uint64_t seed) {
  Engine engine(bundle, num_chains, options, seed);
  engine.run_unadjusted_phase(options.maxiter, /*adapt_step=*/true, /*stop_on_trigger=*/true);
  engine.result.switch_iteration = engine.ens.iteration;
  engine.apply_preconditioning();
  engine.run_adjusted_phase(options.maxiter);
  if (!bundle.ground_truth) {
    engine.warn("target has no ground truth; bias diagnostics were skipped");
  }
  return engine.finish();
}

RunResult run_unadjusted(const TargetBundle& bundle, int num_chains, const RunOptions& options,
                         std::uint64_t seed, int iterations, std::optional<double> fixed_step) {
  Engine engine(bundle, num_chains, options, seed);
  if (fixed_step) engine.eps = *fixed_step;
  engine.run_unadjusted_phase(iterations, /*adapt_step=*/!fixed_step.has_value(),
                              /*stop_on_trigger=*/false);
  return engine.finish();
}

RunResult run_adjusted(const TargetBundle& bundle, int num_chains, const RunOptions& options,
                       std::uint64_t seed, int iterations) {
  Engine engine(bundle, num_chains, options, seed);
  engine.run_adjusted_phase(iterations);
  return engine.finish();
}

}  // namespace laps
