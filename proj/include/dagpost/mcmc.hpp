#ifndef DAGPOST_MCMC_HPP
#define DAGPOST_MCMC_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dagpost/dag.hpp"
#include "dagpost/posterior.hpp"
#include "dagpost/rng.hpp"

namespace dagpost {

struct ChainConfig {
  std::int64_t iterations = 100000;
  /// Negative selects the default of 10% of iterations.
  std::int64_t burn_in = -1;
  std::int64_t thin = 1;
  std::uint64_t seed = 0;
  /// Initial state; the empty graph when unset.
  std::optional<DagStructure> init;
  /// Keep the post-burn-in model/score sequences (absence frequencies are
  /// always accumulated).
  bool record_models = true;
};

struct ChainTrace {
  std::vector<DagStructure> visited;
  std::vector<double> log_scores;
  double acceptance_rate = 0.0;
  /// Average of the per-pair absence indicator over recorded states;
  /// symmetric, diagonal fixed at 0 by convention.
  Eigen::MatrixXd absence_freq;
  std::int64_t recorded = 0;
};

/// Uniform draw from the neighbors of s, with the neighbor-set sizes of both
/// endpoints for the Hastings correction.  Throws std::logic_error if s has
/// no neighbors (only possible at d = 1).
struct Proposal {
  DagStructure candidate;
  std::int64_t forward_count;
  std::int64_t reverse_count;
};
Proposal propose(const DagStructure& s, Rng& rng);

/// One Metropolis-Hastings step for the uniform-neighbor proposal: accepts
/// with probability min{1, exp(score difference) * forward/reverse}.  Throws
/// NumericalError if either score is non-finite.
struct StepResult {
  DagStructure next;
  bool accepted;
};
StepResult mh_step(const DagStructure& current, const DagStructure& candidate,
                   std::int64_t forward_count, std::int64_t reverse_count,
                   const std::function<double(const DagStructure&)>& log_target, Rng& rng);

/// Runs the chain targeting the exact unnormalized posterior through the Gram
/// cache.  A single-edge move changes one node's parent set, so each step
/// recomputes exactly one node block; per-iteration cost is independent of
/// the sample count.  Deterministic given cfg.seed.
ChainTrace run_chain(const Eigen::MatrixXd& gram, const PriorConfig& prior, const ChainConfig& cfg);
ChainTrace run_chain(const Dataset& data, const PriorConfig& prior, const ChainConfig& cfg);

}  // namespace dagpost

#endif  // DAGPOST_MCMC_HPP
