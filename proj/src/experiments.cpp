#include "dagpost/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dagpost/errors.hpp"
#include "dagpost/mcmc.hpp"
#include "dagpost/parallel.hpp"
#include "dagpost/rng.hpp"

namespace dagpost {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// (n log log n)^{-1/2}, NaN where the scale is not positive.
double lil_scale(std::int64_t n) {
  if (n < 3) return kNan;
  const double v = static_cast<double>(n) * std::log(std::log(static_cast<double>(n)));
  return v > 0.0 ? 1.0 / std::sqrt(v) : kNan;
}

WeightedSem binary_truth(const DagStructure& s, double sigma) {
  WeightMap weights;
  for (int j = 0; j < s.node_count(); ++j)
    for (int i = 0; i < s.node_count(); ++i)
      if (s.has_edge(i, j)) weights[{i, j}] = 1.0;
  return WeightedSem(s, std::move(weights), sigma);
}

// Streams one growing sample path, evaluating the table at each checkpoint.
template <typename TableFn>
ConvergenceCurve stream_curve(const WeightedSem& truth, const std::vector<std::int64_t>& checkpoints,
                              Rng rng, TableFn&& table_at, Eigen::MatrixXd* keep_samples) {
  const int d = truth.dimension();
  SemSampler sampler(truth);
  GramAccumulator acc(d);
  if (keep_samples != nullptr) keep_samples->resize(checkpoints.back(), d);
  ConvergenceCurve curve;
  curve.checkpoints = checkpoints;
  std::size_t truth_index = 0;
  bool have_index = false;
  for (const std::int64_t n : checkpoints) {
    while (acc.count() < n) {
      const Eigen::VectorXd x = sampler.next(rng);
      if (keep_samples != nullptr) keep_samples->row(acc.count()) = x.transpose();
      acc.add(x);
    }
    const PosteriorTable table = table_at(acc.gram());
    if (!have_index) {
      truth_index = table.index_of(truth.structure());
      have_index = true;
    }
    curve.posterior_true.push_back(table.prob(truth_index));
    curve.log_one_minus.push_back(log_complement_mass(table, truth_index));
  }
  return curve;
}

void fill_prefix_max_diagnostic(ConvergenceCurve& curve, double exponent, bool lil_scaled) {
  double prefix = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < curve.checkpoints.size(); ++k) {
    const double diff =
        curve.log_one_minus[k] + exponent * static_cast<double>(curve.checkpoints[k]);
    prefix = std::max(prefix, diff);
    curve.diagnostic.push_back(lil_scaled ? prefix * lil_scale(curve.checkpoints[k]) : prefix);
  }
}

}  // namespace

WeightedSem default_maximal_truth(double sigma) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = 1.77;
  a(0, 2) = -0.35;
  a(2, 1) = 0.26;
  return WeightedSem::from_matrix(a, sigma);
}

WeightedSem default_nonmaximal_truth(double sigma) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(2, 0) = 1.25;
  return WeightedSem::from_matrix(a, sigma);
}

std::vector<std::int64_t> checkpoint_schedule(std::int64_t n_max, double ratio, bool include_zero) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (!(ratio > 1.0)) throw std::invalid_argument("checkpoint ratio must exceed 1");
  std::vector<std::int64_t> out;
  if (include_zero) out.push_back(0);
  std::int64_t n = 1;
  while (n < n_max) {
    out.push_back(n);
    n = std::max(n + 1, static_cast<std::int64_t>(std::llround(static_cast<double>(n) * ratio)));
  }
  out.push_back(n_max);
  return out;
}

BinaryConvergenceResult run_binary_convergence(const BinaryExperimentConfig& cfg) {
  BinaryConvergenceResult result;
  result.truths = enumerate_dags(cfg.d, cfg.cap);
  result.rate = RatePrediction{RateKind::binary, 0.5, std::nullopt};
  const auto checkpoints = checkpoint_schedule(cfg.n_max, cfg.ratio, true);
  const Rng root(cfg.seed);
  result.curves = parallel_map(result.truths.size(), [&](std::size_t k) {
    ConvergenceCurve curve = stream_curve(
        binary_truth(result.truths[k], cfg.sigma), checkpoints, root.substream(k),
        [&](const Eigen::MatrixXd& gram) {
          return exact_binary_posterior_table(gram, cfg.sigma, cfg.cap);
        },
        nullptr);
    fill_prefix_max_diagnostic(curve, 0.5, /*lil_scaled=*/true);
    return curve;
  });
  return result;
}

MaximalConvergenceResult run_maximal_convergence(const MaximalExperimentConfig& cfg) {
  WeightedSem truth = cfg.truth.value_or(default_maximal_truth(cfg.sigma));
  if (!is_maximal(truth.structure())) {
    throw std::domain_error("run_maximal_convergence requires a maximal true model");
  }
  const DecayExponent exponent = decay_exponent(PopulationModel::from(truth), cfg.cap);
  const PriorConfig prior{cfg.sigma, cfg.sigma_w};
  const auto checkpoints = checkpoint_schedule(cfg.n_max, cfg.ratio, true);
  ConvergenceCurve curve = stream_curve(
      truth, checkpoints, Rng(cfg.seed),
      [&](const Eigen::MatrixXd& gram) { return exact_posterior_table(gram, prior, cfg.cap); },
      nullptr);
  fill_prefix_max_diagnostic(curve, exponent.value, /*lil_scaled=*/false);
  return MaximalConvergenceResult{std::move(curve),
                                  RatePrediction{RateKind::maximal, exponent.value, std::nullopt},
                                  exponent.argmin, std::move(truth)};
}

NonmaximalConvergenceResult run_nonmaximal_convergence(const NonmaximalExperimentConfig& cfg) {
  WeightedSem truth = cfg.truth.value_or(default_nonmaximal_truth(cfg.sigma));
  const PriorConfig prior{cfg.sigma, cfg.sigma_w};
  const auto checkpoints = checkpoint_schedule(cfg.n_max, cfg.ratio, true);
  Eigen::MatrixXd samples;
  ConvergenceCurve curve = stream_curve(
      truth, checkpoints, Rng(cfg.seed),
      [&](const Eigen::MatrixXd& gram) { return exact_posterior_table(gram, prior, cfg.cap); },
      cfg.keep_samples ? &samples : nullptr);
  for (std::size_t k = 0; k < curve.checkpoints.size(); ++k) {
    const std::int64_t n = curve.checkpoints[k];
    curve.diagnostic.push_back(
        n >= 2 ? -2.0 * curve.log_one_minus[k] / std::log(static_cast<double>(n)) : kNan);
  }
  NonmaximalConvergenceResult result{std::move(curve),
                                     RatePrediction{RateKind::nonmaximal, std::nullopt, 0.5},
                                     std::move(truth), std::nullopt};
  if (cfg.keep_samples) result.samples = std::move(samples);
  return result;
}

std::vector<MethodScores> benchmark_scores(const DetectionBenchmarkConfig& cfg) {
  for (const std::string& m : cfg.methods) {
    if (m != kMethodExactPosterior && m != kMethodMcmc && m != kMethodNaiveCorrelation) {
      throw std::invalid_argument("unknown detection method: " + m);
    }
  }
  if (cfg.methods.empty()) throw std::invalid_argument("no detection methods requested");
  if (cfg.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  const PriorConfig prior{cfg.sigma, cfg.sigma_w};
  const Rng root(cfg.seed);

  struct ReplicateScores {
    DagStructure truth;
    std::vector<Eigen::MatrixXd> per_method;
  };
  const std::vector<ReplicateScores> scored =
      parallel_map(static_cast<std::size_t>(cfg.replicates), [&](std::size_t r) {
        Rng rng = root.substream(r);
        DagStructure truth = sample_uniform_dag(cfg.d, rng, cfg.cap);
        const WeightedSem sem(truth, random_weights(truth, rng), cfg.sigma);
        const Dataset data = sample_dataset(sem, cfg.n, rng);
        ReplicateScores rep{std::move(truth), {}};
        for (const std::string& method : cfg.methods) {
          if (method == kMethodExactPosterior) {
            rep.per_method.push_back(absence_scores(exact_posterior_table(data, prior, cfg.cap)));
          } else if (method == kMethodMcmc) {
            ChainConfig chain;
            chain.iterations = cfg.chain_iterations;
            chain.burn_in = cfg.chain_burn_in;
            chain.seed = rng.next_u64();
            chain.record_models = false;
            rep.per_method.push_back(absence_scores(run_chain(data, prior, chain)));
          } else {
            rep.per_method.push_back(correlation_absence_scores(data));
          }
        }
        return rep;
      });

  std::vector<MethodScores> out;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    MethodScores ms;
    ms.method = cfg.methods[m];
    ms.replicates.reserve(scored.size());
    for (const ReplicateScores& rep : scored) {
      ms.replicates.push_back(ScoredReplicate{rep.per_method[m], rep.truth});
    }
    out.push_back(std::move(ms));
  }
  return out;
}

BenchmarkReport run_detection_benchmark(const DetectionBenchmarkConfig& cfg) {
  BenchmarkReport report;
  for (MethodScores& ms : benchmark_scores(cfg)) {
    report.methods.push_back(
        BenchmarkReport::MethodResult{ms.method, calibrate_threshold(ms.replicates, cfg.alpha)});
  }
  return report;
}

}  // namespace dagpost
