// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Tolerances are the contract; seeds are fixed for reproducibility.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dagpost/detector.hpp"
#include "dagpost/errors.hpp"
#include "dagpost/experiments.hpp"
#include "dagpost/mcmc.hpp"
#include "dagpost/population.hpp"
#include "dagpost/posterior.hpp"
#include "dagpost/sem.hpp"
#include "helpers.hpp"

using namespace dagpost;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string io_format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

using MatI = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

std::int64_t integer_frobenius(const DagStructure& s, const MatI& inv_g) {
  const int d = s.node_count();
  const MatI m = (MatI::Identity(d, d) - s.matrix().cast<std::int64_t>()) * inv_g;
  return m.array().square().sum();
}

// 1. Integer minimum of the binary divergence statistic equals d+1.
Outcome criterion_binary_minimum() {
  for (int d = 2; d <= 4; ++d) {
    const auto dags = enumerate_dags(d);
    for (const DagStructure& g : dags) {
      const BinaryKlMin result = min_binary_kl(g);
      if (result.frobenius_sq != d + 1) {
        return {false, "min at d=" + std::to_string(d) + " was " + std::to_string(result.frobenius_sq)};
      }
      if (result.witness == g) return {false, "witness equals the truth"};
      const MatI inv_g = neumann_inverse_int(g.matrix().cast<std::int64_t>());
      if (integer_frobenius(result.witness, inv_g) != d + 1) {
        return {false, "witness does not achieve the minimum"};
      }
    }
  }
  return {true, ""};
}

// 2. Enumeration counts match the independent recurrence.
Outcome criterion_enumeration() {
  const std::int64_t expected[] = {1, 3, 25, 543, 29281};
  for (int d = 1; d <= 5; ++d) {
    const auto count = static_cast<std::int64_t>(enumerate_dags(d).size());
    if (count != expected[d - 1]) {
      return {false, "d=" + std::to_string(d) + " gave " + std::to_string(count)};
    }
    if (count != testutil::labeled_dag_count(d)) {
      return {false, "recurrence mismatch at d=" + std::to_string(d)};
    }
  }
  return {true, ""};
}

// 3. Closed-form scores match the quadrature oracle up to a constant.
Outcome criterion_oracle() {
  Rng root(42);
  const PriorConfig prior;
  double worst = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    Rng rng = root.substream(instance);
    const DagStructure truth = sample_uniform_dag(2, rng);
    const WeightedSem sem(truth, random_weights(truth, rng), 1.0);
    const Dataset data = sample_dataset(sem, 5 + rng.uniform_below(16), rng);
    const auto models = enumerate_dags(2);
    std::vector<double> impl, oracle;
    for (const auto& s : models) {
      impl.push_back(log_unnorm_posterior(s, data, prior));
      oracle.push_back(oracle_log_marginal(s, data, prior));
    }
    for (std::size_t k = 1; k < models.size(); ++k) {
      worst = std::max(worst, std::abs((impl[k] - impl[0]) - (oracle[k] - oracle[0])));
    }
  }
  if (worst >= 1e-6) {
    return {false, "worst model-difference deviation " + std::to_string(worst)};
  }
  return {true, "worst deviation " + io_format(worst)};
}

// 4. Binary-model exponential rate with exponent 1/2 for all 25 truths.
Outcome criterion_binary_rate() {
  BinaryExperimentConfig cfg;
  cfg.d = 3;
  cfg.n_max = 10000;
  cfg.seed = 0;
  const BinaryConvergenceResult result = run_binary_convergence(cfg);
  double worst_low = 0.0, worst_high = -1.0, worst_pi = 1.0;
  for (const ConvergenceCurve& curve : result.curves) {
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < curve.checkpoints.size(); ++k) {
      const double n = static_cast<double>(curve.checkpoints[k]);
      if (n >= 2000 && n <= 10000) {
        xs.push_back(n);
        ys.push_back(curve.log_one_minus[k]);
      }
    }
    const double slope = testutil::fitted_slope(xs, ys);
    if (worst_high < worst_low) {
      worst_low = worst_high = slope;
    } else {
      worst_low = std::min(worst_low, slope);
      worst_high = std::max(worst_high, slope);
    }
    worst_pi = std::min(worst_pi, curve.posterior_true.back());
  }
  if (worst_low < -0.65 || worst_high > -0.35) {
    return {false, "slope range [" + io_format(worst_low) + ", " + io_format(worst_high) + "]"};
  }
  if (!(worst_pi > 0.999)) return {false, "final posterior " + io_format(worst_pi)};
  return {true, "slopes in [" + io_format(worst_low) + ", " + io_format(worst_high) + "]"};
}

// 5. Maximal-truth exponential rate matches the decay exponent within 15%.
Outcome criterion_maximal_rate() {
  MaximalExperimentConfig cfg;
  cfg.n_max = 50000;
  cfg.seed = 9;
  const MaximalConvergenceResult result = run_maximal_convergence(cfg);
  const double exponent = *result.rate.exponent;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < result.curve.checkpoints.size(); ++k) {
    const double n = static_cast<double>(result.curve.checkpoints[k]);
    if (n >= 10000 && n <= 50000) {
      xs.push_back(n);
      ys.push_back(result.curve.log_one_minus[k]);
    }
  }
  const double slope = testutil::fitted_slope(xs, ys);
  const double ratio = -slope / exponent;
  if (!(ratio >= 0.85 && ratio <= 1.15)) {
    return {false, "slope/exponent ratio " + io_format(ratio)};
  }
  return {true, "exponent " + io_format(exponent) + ", slope ratio " + io_format(ratio)};
}

// 6. Non-maximal error diagnostic stays below 1.05 and plateaus in [0.6, 1].
Outcome criterion_nonmaximal_bound() {
  NonmaximalExperimentConfig cfg;
  cfg.n_max = 1000000;  // desk scale; the CLI exposes the full-scale flag
  cfg.seed = 0;
  const NonmaximalConvergenceResult result = run_nonmaximal_convergence(cfg);
  double tail_max = -1.0;
  for (std::size_t k = 0; k < result.curve.checkpoints.size(); ++k) {
    if (result.curve.checkpoints[k] < 100000) continue;
    const double err = result.curve.diagnostic[k];
    if (err > 1.05) {
      return {false, "err exceeded 1.05 at n=" + std::to_string(result.curve.checkpoints[k])};
    }
    tail_max = std::max(tail_max, err);
  }
  if (!(tail_max >= 0.6 && tail_max <= 1.0)) {
    return {false, "last-decade max err " + io_format(tail_max)};
  }
  return {true, "last-decade max err " + io_format(tail_max)};
}

// 7. Finite-sample posterior blocks approach their population limits.
Outcome criterion_population_limits() {
  Rng rng(0);
  const WeightedSem truth = default_maximal_truth();
  const PopulationModel pop = PopulationModel::from(truth);
  const Dataset data = sample_dataset(truth, 50000, rng);
  const double n = static_cast<double>(data.sample_count());
  const PriorConfig prior;
  for (const DagStructure& s : enumerate_dags(3)) {
    for (int j = 0; j < 3; ++j) {
      if (s.parent_count(j) == 0) continue;
      const NodeBlocks blocks = node_blocks(s, data, prior, j);
      const Eigen::MatrixXd limit = sigma_infinity(s, pop, j);
      if ((n * blocks.sigma_w_block - limit).norm() >= 0.05 * limit.norm()) {
        return {false, "covariance block off at model " + s.adjacency_string()};
      }
      const double t_limit = t_infinity(s, pop, j);
      if (std::abs(blocks.t_value / n - t_limit) >= 0.05 * std::max(1.0, t_limit)) {
        return {false, "exponent term off at model " + s.adjacency_string()};
      }
    }
  }
  const DagStructure& star = truth.structure();
  for (int j = 0; j < 3; ++j) {
    if (star.parent_count(j) == 0) continue;
    const Eigen::VectorXd mu = node_blocks(star, data, prior, j).mu_block;
    Eigen::VectorXd w(star.parent_count(j));
    int k = 0;
    for (const int parent : star.parents(j)) w(k++) = truth.matrix()(j, parent);
    if ((mu - w).norm() >= 0.05) return {false, "posterior mean misses the true weights"};
  }
  return {true, ""};
}

// 8. Likelihood-ratio and posterior-threshold detectors decide identically.
Outcome criterion_detector_equivalence() {
  Rng root(8);
  const PriorConfig prior;
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng = root.substream(rep);
    const DagStructure truth = sample_uniform_dag(3, rng);
    const WeightedSem sem(truth, random_weights(truth, rng), 1.0);
    const Dataset data = sample_dataset(sem, 5 + rng.uniform_below(40), rng);
    const double gamma = std::exp(2.0 * rng.normal());
    const PosteriorTable table = exact_posterior_table(data, prior);
    for (const EdgePair& pair : all_pairs(3)) {
      DetectorConfig lr_cfg;
      lr_cfg.threshold = gamma;
      DetectorConfig post_cfg;
      post_cfg.threshold = gamma_prime_from_gamma(gamma, class_priors(3, pair));
      const int lr = detect_likelihood_ratio(data, prior, lr_cfg, pair);
      const int post = detect_posterior(table, post_cfg).chi_hat(pair.i, pair.j);
      if (lr != post) {
        return {false, "decisions differ at replicate " + std::to_string(rep)};
      }
    }
  }
  return {true, ""};
}

// 9. Chain empirical distribution matches the exact posterior.
Outcome criterion_chain_exactness() {
  Rng rng(1);
  const Dataset data = sample_dataset(default_maximal_truth(), 200, rng);
  const PriorConfig prior;
  const PosteriorTable exact = exact_posterior_table(data, prior);
  ChainConfig cfg;
  cfg.iterations = 100000;
  cfg.burn_in = 10000;
  cfg.seed = 1;
  const ChainTrace trace = run_chain(data, prior, cfg);
  std::vector<double> counts(exact.size(), 0.0);
  for (const DagStructure& s : trace.visited) counts[exact.index_of(s)] += 1.0;
  for (double& c : counts) c /= static_cast<double>(trace.visited.size());
  const double tv = testutil::tv_distance(counts, exact);
  if (!(tv < 0.03)) return {false, "total variation " + io_format(tv)};
  double worst_pair = 0.0;
  for (const EdgePair& p : all_pairs(3)) {
    worst_pair =
        std::max(worst_pair, std::abs(trace.absence_freq(p.i, p.j) - edge_absence_posterior(exact, p)));
  }
  if (!(worst_pair < 0.02)) return {false, "absence frequency off by " + io_format(worst_pair)};
  return {true, "tv " + io_format(tv) + ", worst pair gap " + io_format(worst_pair)};
}

// 10. Calibrated chain detector beats the correlation baseline at alpha=0.1.
Outcome criterion_benchmark_dominance() {
  DetectionBenchmarkConfig cfg;
  cfg.d = 4;
  cfg.n = 10;
  cfg.replicates = 200;
  cfg.methods = {kMethodMcmc, kMethodNaiveCorrelation};
  cfg.chain_iterations = 100000;
  cfg.alpha = 0.1;
  cfg.seed = 0;
  const BenchmarkReport report = run_detection_benchmark(cfg);
  double mcmc_miss = -1.0, naive_miss = -1.0;
  for (const auto& mr : report.methods) {
    if (mr.method == kMethodMcmc) mcmc_miss = mr.calibration.eps_minus;
    if (mr.method == kMethodNaiveCorrelation) naive_miss = mr.calibration.eps_minus;
  }
  if (mcmc_miss < 0.0 || naive_miss < 0.0) return {false, "missing method result"};
  if (!(mcmc_miss <= naive_miss)) {
    return {false, "chain detector eps- " + io_format(mcmc_miss) + " vs baseline " +
                       io_format(naive_miss)};
  }
  return {true, "eps- " + io_format(mcmc_miss) + " (chain) vs " + io_format(naive_miss) +
                    " (baseline) at eps+ <= 0.1"};
}

// 11. Gram caching makes the per-iteration cost independent of n; the
// uncached path scales linearly.
Outcome criterion_iteration_cost() {
  Rng rng(7);
  const DagStructure truth = sample_uniform_dag(4, rng);
  const WeightedSem sem(truth, random_weights(truth, rng), 1.0);
  const Dataset small = sample_dataset(sem, 1000, rng);
  const Dataset large = sample_dataset(sem, 100000, rng);
  const PriorConfig prior;

  const auto chain_seconds = [&](const Dataset& data) {
    ChainConfig cfg;
    cfg.iterations = 100000;
    cfg.seed = 3;
    cfg.record_models = false;
    run_chain(data, prior, cfg);  // warm up
    const auto start = Clock::now();
    run_chain(data, prior, cfg);
    return std::chrono::duration<double>(Clock::now() - start).count();
  };
  const double cached_ratio = chain_seconds(large) / chain_seconds(small);

  std::vector<DagStructure> models;
  for (int k = 0; k < 20; ++k) models.push_back(sample_uniform_dag(4, rng));
  const auto raw_seconds = [&](const Dataset& data, int evals) {
    double sink = 0.0;
    const auto start = Clock::now();
    for (int e = 0; e < evals; ++e) {
      sink += log_unnorm_posterior_raw(models[static_cast<std::size_t>(e) % models.size()], data, prior);
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    return sink == 0.12345 ? elapsed : elapsed;  // keep the evaluations live
  };
  raw_seconds(small, 100);  // warm up
  const double raw_small = raw_seconds(small, 2000) / 2000.0;
  const double raw_large = raw_seconds(large, 200) / 200.0;
  const double raw_ratio = raw_large / raw_small;

  if (!(cached_ratio < 2.0)) return {false, "cached per-iteration ratio " + io_format(cached_ratio)};
  if (!(raw_ratio >= 10.0)) return {false, "raw path ratio " + io_format(raw_ratio)};
  return {true, "cached ratio " + io_format(cached_ratio) + ", raw ratio " + io_format(raw_ratio)};
}

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "integer minimum of the binary divergence statistic is d+1", 1.0, criterion_binary_minimum},
      {2, "DAG enumeration matches the counting recurrence", 10.0, criterion_enumeration},
      {3, "closed-form scores match the quadrature oracle", 30.0, criterion_oracle},
      {4, "binary-model rate: slope -1/2 and posterior above 0.999", 120.0, criterion_binary_rate},
      {5, "maximal-truth rate matches the decay exponent within 15%", 180.0, criterion_maximal_rate},
      {6, "non-maximal error diagnostic bounded by 1.05 with plateau in [0.6,1]", 600.0,
       criterion_nonmaximal_bound},
      {7, "posterior blocks approach their population limits", 0.0, criterion_population_limits},
      {8, "likelihood-ratio and posterior-threshold detectors agree", 0.0,
       criterion_detector_equivalence},
      {9, "chain matches the exact posterior (TV < 0.03, pairs < 0.02)", 120.0,
       criterion_chain_exactness},
      {10, "calibrated chain detector dominates the correlation baseline", 900.0,
       criterion_benchmark_dominance},
      {11, "per-iteration cost independent of n with Gram caching", 0.0, criterion_iteration_cost},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = Clock::now();
    Outcome outcome{false, "exception"};
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    if (outcome.pass && c.budget_seconds > 0.0 && elapsed > c.budget_seconds) {
      outcome = {false, "runtime " + std::to_string(elapsed) + "s exceeds budget"};
    }
    std::printf("%s  criterion %2d: %s (%.2fs)%s%s\n", outcome.pass ? "PASS" : "FAIL", c.id, c.title,
                elapsed, outcome.detail.empty() ? "" : " -- ", outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
