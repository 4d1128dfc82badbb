#ifndef DAGPOST_POSTERIOR_HPP
#define DAGPOST_POSTERIOR_HPP

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "dagpost/dag.hpp"
#include "dagpost/sem.hpp"

namespace dagpost {

/// Noise and weight-prior scales.  sigma is the (known) observation noise
/// standard deviation; sigma_w is the standard deviation of the independent
/// Gaussian priors on the active edge weights.
struct PriorConfig {
  double sigma = 1.0;
  double sigma_w = 1.0;
};

/// Per-node posterior blocks for node j under structure S:
///   sigma_w_block = (sigma_w^{-2} I + sigma^{-2} G[pa,pa])^{-1}
///   b_block       = sigma^{-2} G[pa, j]
///   mu_block      = sigma_w_block * b_block
///   t_value       = b_block' * mu_block
///   logdet        = log |sigma_w_block|
/// where G is the Gram matrix and pa the parents of j.  An empty parent set
/// yields empty blocks with t_value = logdet = 0.
struct NodeBlocks {
  Eigen::MatrixXd sigma_w_block;
  Eigen::VectorXd b_block;
  Eigen::VectorXd mu_block;
  double t_value = 0.0;
  double logdet = 0.0;
};

NodeBlocks node_blocks(const DagStructure& s, const Eigen::MatrixXd& gram, const PriorConfig& prior,
                       int j);
NodeBlocks node_blocks(const DagStructure& s, const Dataset& data, const PriorConfig& prior, int j);

/// Node j's contribution t_value/2 + logdet/2 without materializing blocks.
double node_log_score(const DagStructure& s, const Eigen::MatrixXd& gram, const PriorConfig& prior,
                      int j);

/// Log unnormalized model score sum_j (T^(j) + log|Sigma_w^(j)|) / 2.
/// Model-independent constants (Gaussian normalizers, the uniform structure
/// prior) are dropped; the empty graph scores exactly 0.
double log_unnorm_posterior(const DagStructure& s, const Eigen::MatrixXd& gram,
                            const PriorConfig& prior);
double log_unnorm_posterior(const DagStructure& s, const Dataset& data, const PriorConfig& prior);

/// Reference implementation that recomputes every per-node statistic from the
/// raw samples on each call (cost grows linearly with the sample count).
/// Exists to validate the Gram-cache path and to expose the uncached cost.
double log_unnorm_posterior_raw(const DagStructure& s, const Dataset& data, const PriorConfig& prior);

/// Log unnormalized score for the binary model (all weights fixed at 1):
/// -(1/2 sigma^2) sum_i ||X_i - S X_i||^2, evaluated through the Gram matrix.
double log_unnorm_posterior_binary(const DagStructure& s, const Eigen::MatrixXd& gram, double sigma);
double log_unnorm_posterior_binary(const DagStructure& s, const Dataset& data, double sigma);

/// log(sum_k exp(x_k)) guarded against overflow.
double logsumexp(std::span<const double> x);

/// Enumerated models with log unnormalized and log normalized masses, in the
/// canonical enumeration order.
struct PosteriorTable {
  std::vector<DagStructure> models;
  std::vector<double> log_unnorm;
  std::vector<double> log_norm;

  std::size_t size() const { return models.size(); }
  int dimension() const { return models.empty() ? 0 : models.front().node_count(); }
  double prob(std::size_t k) const { return std::exp(log_norm[k]); }
  /// Index of a model in the table; throws if absent.
  std::size_t index_of(const DagStructure& s) const;
};

/// Log-sum-exp normalization over a finite model list.  Throws NumericalError
/// on non-finite scores and std::invalid_argument on length mismatch.
PosteriorTable normalize(std::vector<DagStructure> models, std::vector<double> log_unnorm);

/// Exact posterior over all DAGs (uniform structure prior), general model.
PosteriorTable exact_posterior_table(const Eigen::MatrixXd& gram, const PriorConfig& prior,
                                     int cap = kDefaultEnumerationCap);
PosteriorTable exact_posterior_table(const Dataset& data, const PriorConfig& prior,
                                     int cap = kDefaultEnumerationCap);

/// Exact posterior over all DAGs for the binary model.
PosteriorTable exact_binary_posterior_table(const Eigen::MatrixXd& gram, double sigma,
                                            int cap = kDefaultEnumerationCap);

/// Posterior probability that the pair carries no edge in either direction.
double edge_absence_posterior(const PosteriorTable& table, const EdgePair& pair);

/// Posterior mass of all models other than the one at truth_index, in log
/// domain (stays finite even when the complement mass underflows a double).
double log_complement_mass(const PosteriorTable& table, std::size_t truth_index);

/// Log marginal likelihood including all constants, computed by direct
/// numerical integration of the per-node likelihood-times-prior integrand
/// over the weights (never through the Sigma_w/b/T algebra).  Oracle scale
/// only: throws CapacityError for d > 3, n > 50, or a node with more than two
/// parents.
double oracle_log_marginal(const DagStructure& s, const Dataset& data, const PriorConfig& prior);

}  // namespace dagpost

#endif  // DAGPOST_POSTERIOR_HPP
