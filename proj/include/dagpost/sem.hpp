#ifndef DAGPOST_SEM_HPP
#define DAGPOST_SEM_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <vector>

#include "dagpost/dag.hpp"
#include "dagpost/rng.hpp"

namespace dagpost {

/// Weights below this magnitude are rejected (and resampled by
/// random_weights): causal minimality for a linear Gaussian model is exactly
/// "no zero edge weights", and near-zero weights make the slow-rate regime
/// unobservable at any practical sample size.
inline constexpr double kMinWeightMagnitude = 1e-6;

/// Directed edge from a parent node to a child node.
struct Edge {
  int parent;
  int child;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using WeightMap = std::map<Edge, double>;

/// Coefficient matrix with entry (child, parent) = weight on edges of the
/// structure and 0 elsewhere.  Throws on missing/extra keys or weights with
/// |w| < kMinWeightMagnitude.
Eigen::MatrixXd assemble(const DagStructure& structure, const WeightMap& weights);

/// Support of a coefficient matrix as a DAG.  Throws if the support is cyclic.
DagStructure structure_of(const Eigen::MatrixXd& coefficients);

/// (I - A)^{-1} for a nilpotent A via the finite Neumann sum I + A + ... +
/// A^{d-1} (exact: no general-purpose inversion error).
Eigen::MatrixXd neumann_inverse(const Eigen::MatrixXd& a);

/// Integer version of neumann_inverse for binary structures.
Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> neumann_inverse_int(
    const Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>& a);

/// Linear Gaussian structural equation model: observation X solves
/// X = A X + e with e ~ N(0, sigma^2 I).
class WeightedSem {
 public:
  WeightedSem(DagStructure structure, WeightMap weights, double sigma);

  /// Recovers structure and weights from a coefficient matrix.
  static WeightedSem from_matrix(const Eigen::MatrixXd& coefficients, double sigma);

  const DagStructure& structure() const { return structure_; }
  const WeightMap& weights() const { return weights_; }
  double sigma() const { return sigma_; }
  int dimension() const { return structure_.node_count(); }

  /// The coefficient matrix A.
  Eigen::MatrixXd matrix() const { return assemble(structure_, weights_); }

 private:
  DagStructure structure_;
  WeightMap weights_;
  double sigma_;
};

/// Independent N(0,1) weight per edge of the structure, with any draw of
/// magnitude below kMinWeightMagnitude resampled.
WeightMap random_weights(const DagStructure& structure, Rng& rng);

/// i.i.d. observations X = (I - A)^{-1} e, one at a time.
class SemSampler {
 public:
  explicit SemSampler(const WeightedSem& sem);
  Eigen::VectorXd next(Rng& rng);

 private:
  Eigen::MatrixXd noise_to_obs_;  // (I - A)^{-1}
  double sigma_;
};

/// Running d x d Gram matrix sum_i X_i X_i^T.  All posterior statistics
/// depend on the data only through this matrix, so streaming it keeps memory
/// at O(d^2) no matter how many observations pass through.
class GramAccumulator {
 public:
  explicit GramAccumulator(int d);
  void add(const Eigen::VectorXd& x);
  const Eigen::MatrixXd& gram() const { return gram_; }
  std::int64_t count() const { return count_; }
  int dimension() const { return static_cast<int>(gram_.rows()); }

 private:
  Eigen::MatrixXd gram_;
  std::int64_t count_ = 0;
};

/// Immutable batch of observations with the Gram matrix cached up front.
class Dataset {
 public:
  /// Rows are observations.  Computes and caches the Gram matrix.
  explicit Dataset(Eigen::MatrixXd samples);

  std::int64_t sample_count() const { return samples_.rows(); }
  int dimension() const { return static_cast<int>(samples_.cols()); }
  const Eigen::MatrixXd& samples() const { return samples_; }
  const Eigen::MatrixXd& gram() const { return gram_; }

 private:
  Eigen::MatrixXd samples_;
  Eigen::MatrixXd gram_;
};

/// n i.i.d. draws from the model, with the Gram cache populated.
Dataset sample_dataset(const WeightedSem& sem, std::int64_t n, Rng& rng);

/// Exact Kullback-Leibler divergence D(P_from || P_to) between the laws of
/// X = (I - A)^{-1} e under coefficient matrices a_from and a_to (equal noise
/// scale): (||(I - a_to)(I - a_from)^{-1}||_F^2 - d) / 2.  Both supports must
/// be acyclic.
double kl_divergence(const Eigen::MatrixXd& a_from, const Eigen::MatrixXd& a_to);
double kl_divergence(const WeightedSem& from, const WeightedSem& to);

}  // namespace dagpost

#endif  // DAGPOST_SEM_HPP
