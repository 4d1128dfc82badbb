#ifndef DAGPOST_EXPERIMENTS_HPP
#define DAGPOST_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dagpost/dag.hpp"
#include "dagpost/detector.hpp"
#include "dagpost/population.hpp"
#include "dagpost/posterior.hpp"
#include "dagpost/sem.hpp"

namespace dagpost {

/// Bundled three-node example models used as experiment defaults: a complete
/// (maximal) graph with weights {1.77, -0.35, 0.26} and a single-edge
/// (non-maximal) graph with weight 1.25.
WeightedSem default_maximal_truth(double sigma = 1.0);
WeightedSem default_nonmaximal_truth(double sigma = 1.0);

/// Geometric sample-size schedule with the given ratio, always ending at
/// n_max; starts at 0 when include_zero is set (the no-data checkpoint).
std::vector<std::int64_t> checkpoint_schedule(std::int64_t n_max, double ratio = 1.3,
                                              bool include_zero = true);

/// Posterior-concentration diagnostics along one growing sample path.
/// diagnostic is scheme-dependent: the scaled prefix-max exponent residual
/// for the binary scheme, the raw prefix-max residual for the maximal scheme,
/// and -2 log(1 - pi)/log n for the non-maximal scheme.
struct ConvergenceCurve {
  std::vector<std::int64_t> checkpoints;
  std::vector<double> posterior_true;
  std::vector<double> log_one_minus;
  std::vector<double> diagnostic;
};

struct BinaryExperimentConfig {
  int d = 3;
  std::int64_t n_max = 10000;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  double ratio = 1.3;
  int cap = kDefaultEnumerationCap;
};

/// One exact-posterior convergence curve per true model (all weights fixed at
/// 1), each on its own growing sample path with a derived random stream.
struct BinaryConvergenceResult {
  std::vector<DagStructure> truths;
  std::vector<ConvergenceCurve> curves;
  RatePrediction rate;  // exponent 1/2
};
BinaryConvergenceResult run_binary_convergence(const BinaryExperimentConfig& cfg);

struct MaximalExperimentConfig {
  std::optional<WeightedSem> truth;  // default_maximal_truth(sigma) when unset
  std::int64_t n_max = 50000;
  double sigma = 1.0;
  double sigma_w = 1.0;
  std::uint64_t seed = 0;
  double ratio = 1.3;
  int cap = kDefaultEnumerationCap;
};

/// Exact-posterior convergence for a maximal truth, with the decay exponent
/// computed from the population model.  Throws std::domain_error when the
/// configured truth is not maximal.
struct MaximalConvergenceResult {
  ConvergenceCurve curve;
  RatePrediction rate;        // exponent = decay exponent of the truth
  DagStructure rate_argmin;   // structure attaining the exponent minimum
  WeightedSem truth;
};
MaximalConvergenceResult run_maximal_convergence(const MaximalExperimentConfig& cfg);

struct NonmaximalExperimentConfig {
  std::optional<WeightedSem> truth;  // default_nonmaximal_truth(sigma) when unset
  std::int64_t n_max = 1000000;
  double sigma = 1.0;
  double sigma_w = 1.0;
  std::uint64_t seed = 0;
  double ratio = 1.3;
  int cap = kDefaultEnumerationCap;
  /// Materialize the streamed samples (otherwise state stays O(d^2)).
  bool keep_samples = false;
};

struct NonmaximalConvergenceResult {
  ConvergenceCurve curve;
  RatePrediction rate;  // polynomial_rate = 1/2
  WeightedSem truth;
  std::optional<Eigen::MatrixXd> samples;  // present iff keep_samples
};
NonmaximalConvergenceResult run_nonmaximal_convergence(const NonmaximalExperimentConfig& cfg);

inline constexpr const char* kMethodExactPosterior = "exact_posterior_detector";
inline constexpr const char* kMethodMcmc = "mcmc_detector";
inline constexpr const char* kMethodNaiveCorrelation = "naive_correlation";

struct DetectionBenchmarkConfig {
  int d = 4;
  std::int64_t n = 10;
  std::int64_t replicates = 200;
  std::vector<std::string> methods = {kMethodMcmc, kMethodNaiveCorrelation};
  double alpha = 0.1;
  double sigma = 1.0;
  double sigma_w = 1.0;
  std::uint64_t seed = 0;
  std::int64_t chain_iterations = 100000;
  std::int64_t chain_burn_in = -1;
  int cap = kDefaultEnumerationCap;
};

/// Per-method absence scores for every replicate (truth sampled uniformly,
/// i.i.d. standard normal weights, n observations).  Replicates run on
/// derived random streams and may execute concurrently.
struct MethodScores {
  std::string method;
  std::vector<ScoredReplicate> replicates;
};
std::vector<MethodScores> benchmark_scores(const DetectionBenchmarkConfig& cfg);

/// Full benchmark: scores every method then calibrates each at cfg.alpha.
struct BenchmarkReport {
  struct MethodResult {
    std::string method;
    CalibrationResult calibration;
  };
  std::vector<MethodResult> methods;
};
BenchmarkReport run_detection_benchmark(const DetectionBenchmarkConfig& cfg);

}  // namespace dagpost

#endif  // DAGPOST_EXPERIMENTS_HPP
