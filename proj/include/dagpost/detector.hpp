#ifndef DAGPOST_DETECTOR_HPP
#define DAGPOST_DETECTOR_HPP

#include <Eigen/Dense>
#include <vector>

#include "dagpost/dag.hpp"
#include "dagpost/mcmc.hpp"
#include "dagpost/posterior.hpp"
#include "dagpost/sem.hpp"

namespace dagpost {

enum class DetectorMode { exact_posterior, mcmc };

/// Detector settings.  threshold is gamma' >= 0 in exact_posterior mode, the
/// absence-frequency threshold tau in [0,1] in mcmc mode, and the raw
/// Neyman-Pearson gamma for the likelihood-ratio form.
struct DetectorConfig {
  double alpha = 0.1;
  double threshold = 1.0;
  DetectorMode mode = DetectorMode::exact_posterior;
};

/// Symmetric zero-diagonal estimate of the undirected support.
struct SkeletonEstimate {
  Eigen::MatrixXi chi_hat;
  int dimension() const { return static_cast<int>(chi_hat.rows()); }
};

/// Prior mass of the no-edge class of a pair under the uniform structure
/// prior, with the pair weights of the aggregate error rates.  Identical
/// across pairs by symmetry; computed by enumeration (throws CapacityError
/// past the cap).
struct ClassPriors {
  double pi_c;          // pi(C_ij): fraction of DAGs with no edge at the pair
  double pi_c_complement;
  double u_plus;
  double u_minus;
};
ClassPriors class_priors(int d, const EdgePair& pair, int cap = kDefaultEnumerationCap);

/// Per-pair posterior absence probabilities (symmetric, zero diagonal).
Eigen::MatrixXd absence_scores(const PosteriorTable& table);
Eigen::MatrixXd absence_scores(const ChainTrace& trace);

/// Naive baseline score: 1 - |Pearson correlation| per pair.
Eigen::MatrixXd correlation_absence_scores(const Dataset& data);

/// Declare each pair absent iff its absence score >= tau (ties go to
/// absence).
SkeletonEstimate threshold_scores(const Eigen::MatrixXd& scores, double tau);

/// Posterior-threshold detector: pair declared absent iff the posterior
/// absence probability is >= gamma'/(1 + gamma').  The table must be
/// normalized.  gamma' = 0 declares every pair absent; gamma' -> infinity
/// declares every pair present.
SkeletonEstimate detect_posterior(const PosteriorTable& table, const DetectorConfig& cfg);

/// Chain-frequency form: pair declared absent iff the average absence
/// indicator over the trace is >= cfg.threshold (tau).
SkeletonEstimate detect_posterior(const ChainTrace& trace, const DetectorConfig& cfg);

/// Likelihood-ratio form of the optimal detector for one pair: computes the
/// class mixtures p and q as uniform averages of per-model marginal
/// likelihoods over the no-edge class and its complement, and declares
/// absence iff p/q >= (u-/u+) * gamma with gamma = cfg.threshold.  Returns
/// the chi-hat value (0 = absent, 1 = present).  Requires enumeration.
int detect_likelihood_ratio(const Dataset& data, const PriorConfig& prior, const DetectorConfig& cfg,
                            const EdgePair& pair, int cap = kDefaultEnumerationCap);

/// The gamma -> gamma' map of the posterior-threshold equivalence:
/// gamma' = gamma * (u- * pi_C) / (u+ * pi_C^c).
double gamma_prime_from_gamma(double gamma, const ClassPriors& priors);

/// Aggregate empirical false positive and false negative rates over
/// replicates: eps+ = #{declared present, truly absent} / #{truly absent},
/// eps- = #{declared absent, truly present} / #{truly present}.  Throws
/// UndefinedRateError on an empty denominator.
struct ErrorRates {
  double eps_plus;
  double eps_minus;
};
ErrorRates error_rates(const std::vector<SkeletonEstimate>& estimates,
                       const std::vector<DagStructure>& truths);

/// One benchmark replicate reduced to its per-pair absence scores.
struct ScoredReplicate {
  Eigen::MatrixXd scores;
  DagStructure truth;
};

struct RocPoint {
  double tau;          // absence-score threshold
  double gamma_prime;  // tau/(1 - tau)
  double eps_plus;
  double eps_minus;
};

/// Threshold calibrated on a benchmark set: the largest threshold whose
/// empirical false positive rate stays within alpha (so the false negative
/// rate is as small as the constraint allows), plus the full ROC sweep over
/// the achievable score knots.
struct CalibrationResult {
  double tau;
  double gamma_prime;
  double eps_plus;
  double eps_minus;
  std::vector<RocPoint> roc;
};
CalibrationResult calibrate_threshold(const std::vector<ScoredReplicate>& replicates, double alpha);

}  // namespace dagpost

#endif  // DAGPOST_DETECTOR_HPP
