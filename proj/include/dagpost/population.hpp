#ifndef DAGPOST_POPULATION_HPP
#define DAGPOST_POPULATION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "dagpost/dag.hpp"
#include "dagpost/sem.hpp"

namespace dagpost {

/// A true model together with its population covariance
/// sigma^2 (I - A)^{-1} (I - A)^{-T}.
struct PopulationModel {
  WeightedSem sem;
  Eigen::MatrixXd cov;

  static PopulationModel from(const WeightedSem& sem);
};

/// sigma^2 (I - A)^{-1} (I - A)^{-T} via the exact Neumann sum.
Eigen::MatrixXd population_covariance(const WeightedSem& sem);

/// Population regression coefficients of node j on its parents under s:
/// Cov[pa,pa]^{-1} Cov[pa,j].  Empty for a parentless node.  Under the true
/// structure these are exactly the true weights.
Eigen::VectorXd mu_infinity(const DagStructure& s, const PopulationModel& pop, int j);

/// Limit of T^(j)(S, X^n)/n: Cov[j,pa] Cov[pa,pa]^{-1} Cov[pa,j] / sigma^2.
/// Equals (E[X(j)^2] - residual variance) / sigma^2 by the regression
/// identity.  Zero for a parentless node.
double t_infinity(const DagStructure& s, const PopulationModel& pop, int j);

/// Limit of n * Sigma_w^(j)(S, X^n): sigma^2 * Cov[pa,pa]^{-1}.
Eigen::MatrixXd sigma_infinity(const DagStructure& s, const PopulationModel& pop, int j);

/// The population projection m(S, mu_infinity(S)): each node regressed on its
/// parents under s.  Projected coefficients may legitimately be zero, so this
/// builds the matrix directly rather than going through the strict
/// weighted-model constructor.
Eigen::MatrixXd projected_matrix(const DagStructure& s, const PopulationModel& pop);

/// The posterior decay exponent of a maximal true model:
/// min over S != S* of D(P_{A*} || P_{m(S, mu_infinity(S))}), with the
/// minimizing structure.  Throws std::domain_error when the truth is not
/// maximal (the exponent is undefined there) and CapacityError past the
/// enumeration cap.
struct DecayExponent {
  double value;
  DagStructure argmin;
};
DecayExponent decay_exponent(const PopulationModel& pop, int cap = kDefaultEnumerationCap);

/// Brute-force minimum of the integer Frobenius statistic
/// ||(I - S)(I - G)^{-1}||_F^2 over all S != G, with a witness.  Evaluated in
/// exact integer arithmetic; the value is d + 1 for every G.
struct BinaryKlMin {
  std::int64_t frobenius_sq;
  DagStructure witness;
};
BinaryKlMin min_binary_kl(const DagStructure& g, int cap = kDefaultEnumerationCap);

/// Which concentration regime a true model falls in, and the predicted rate.
enum class RateKind { binary, maximal, nonmaximal };

struct RatePrediction {
  RateKind kind;
  /// Exponential rate: 1/2 in the binary model, the decay exponent for a
  /// maximal truth, absent otherwise.
  std::optional<double> exponent;
  /// Power of n bounding the rate from below in the non-maximal case (1/2).
  std::optional<double> polynomial_rate;
};

std::string to_string(RateKind kind);

}  // namespace dagpost

#endif  // DAGPOST_POPULATION_HPP
