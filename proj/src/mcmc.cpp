#include "dagpost/mcmc.hpp"

#include <cmath>
#include <stdexcept>

#include "dagpost/errors.hpp"

namespace dagpost {

namespace {

// Index of the single row where a and b differ; -1 if equal, -2 if several.
int changed_row(const DagStructure& a, const DagStructure& b) {
  int row = -1;
  for (int j = 0; j < a.node_count(); ++j) {
    if (a.parent_mask(j) != b.parent_mask(j)) {
      if (row >= 0) return -2;
      row = j;
    }
  }
  return row;
}

}  // namespace

Proposal propose(const DagStructure& s, Rng& rng) {
  const auto toggles = neighbor_toggles(s);
  if (toggles.empty()) throw std::logic_error("propose: model has no neighbors");
  const auto [j, i] = toggles[static_cast<std::size_t>(rng.uniform_below(toggles.size()))];
  DagStructure candidate = toggled(s, j, i);
  const std::int64_t reverse = neighbor_count(candidate);
  return Proposal{std::move(candidate), static_cast<std::int64_t>(toggles.size()), reverse};
}

StepResult mh_step(const DagStructure& current, const DagStructure& candidate,
                   std::int64_t forward_count, std::int64_t reverse_count,
                   const std::function<double(const DagStructure&)>& log_target, Rng& rng) {
  const double current_score = log_target(current);
  const double candidate_score = log_target(candidate);
  if (!std::isfinite(current_score) || !std::isfinite(candidate_score)) {
    throw NumericalError("mh_step: non-finite log target");
  }
  const double log_accept = candidate_score - current_score +
                            std::log(static_cast<double>(forward_count)) -
                            std::log(static_cast<double>(reverse_count));
  const double u = rng.uniform01();
  const bool accepted = std::log(u) < std::min(0.0, log_accept);
  return StepResult{accepted ? candidate : current, accepted};
}

ChainTrace run_chain(const Eigen::MatrixXd& gram, const PriorConfig& prior, const ChainConfig& cfg) {
  const int d = static_cast<int>(gram.rows());
  if (cfg.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (cfg.thin < 1) throw std::invalid_argument("thin must be >= 1");
  const std::int64_t burn_in = cfg.burn_in >= 0 ? cfg.burn_in : cfg.iterations / 10;
  if (burn_in >= cfg.iterations) throw std::invalid_argument("burn_in must be below iterations");

  DagStructure current = cfg.init.value_or(DagStructure(d));
  if (current.node_count() != d) throw std::invalid_argument("init structure dimension mismatch");

  std::vector<double> node_scores(static_cast<std::size_t>(d));
  double total = 0.0;
  for (int j = 0; j < d; ++j) {
    node_scores[static_cast<std::size_t>(j)] = node_log_score(current, gram, prior, j);
    total += node_scores[static_cast<std::size_t>(j)];
  }
  if (!std::isfinite(total)) throw NumericalError("run_chain: non-finite initial score");

  Rng rng(cfg.seed);
  ChainTrace trace;
  trace.absence_freq = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd absence_counts = Eigen::MatrixXd::Zero(d, d);
  std::int64_t accepted_steps = 0;

  // Cached-score target: the current state returns the cached total; a
  // one-row change recomputes only the affected node block; anything else
  // falls back to a full evaluation.
  int pending_row = -1;
  double pending_score = 0.0;
  double pending_total = 0.0;
  const std::function<double(const DagStructure&)> target = [&](const DagStructure& g) {
    const int row = changed_row(current, g);
    if (row == -1) return total;
    if (row == -2) return log_unnorm_posterior(g, gram, prior);
    pending_row = row;
    pending_score = node_log_score(g, gram, prior, row);
    pending_total = total - node_scores[static_cast<std::size_t>(row)] + pending_score;
    return pending_total;
  };

  auto record = [&](const DagStructure& s, double score) {
    if (cfg.record_models) {
      trace.visited.push_back(s);
      trace.log_scores.push_back(score);
    }
    for (int i = 1; i < d; ++i) {
      for (int j = 0; j < i; ++j) {
        if (!s.has_edge(i, j) && !s.has_edge(j, i)) {
          absence_counts(i, j) += 1.0;
          absence_counts(j, i) += 1.0;
        }
      }
    }
    ++trace.recorded;
  };

  const bool degenerate = d == 1;  // single model; nothing to propose
  for (std::int64_t t = 1; t <= cfg.iterations; ++t) {
    if (!degenerate) {
      Proposal prop = propose(current, rng);
      pending_row = -1;
      StepResult step =
          mh_step(current, prop.candidate, prop.forward_count, prop.reverse_count, target, rng);
      if (step.accepted) {
        current = std::move(step.next);
        if (pending_row >= 0) {
          node_scores[static_cast<std::size_t>(pending_row)] = pending_score;
          total = pending_total;
        }
        ++accepted_steps;
      }
    }
    if (t > burn_in && (t - burn_in - 1) % cfg.thin == 0) record(current, total);
  }

  trace.acceptance_rate =
      degenerate ? 0.0 : static_cast<double>(accepted_steps) / static_cast<double>(cfg.iterations);
  if (trace.recorded > 0) {
    trace.absence_freq = absence_counts / static_cast<double>(trace.recorded);
  }
  trace.absence_freq.diagonal().setZero();
  return trace;
}

ChainTrace run_chain(const Dataset& data, const PriorConfig& prior, const ChainConfig& cfg) {
  return run_chain(data.gram(), prior, cfg);
}

}  // namespace dagpost
