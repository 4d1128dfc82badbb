#include "dagpost/population.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dagpost/errors.hpp"
#include "dagpost/parallel.hpp"

namespace dagpost {

namespace {

using MatI = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

std::vector<int> checked_parents(const DagStructure& s, const PopulationModel& pop, int j) {
  if (s.node_count() != pop.sem.dimension()) {
    throw std::invalid_argument("structure dimension does not match the population model");
  }
  if (j < 0 || j >= s.node_count()) throw std::invalid_argument("node index out of range");
  return s.parents(j);
}

Eigen::MatrixXd cov_block(const Eigen::MatrixXd& cov, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = cov(rows[a], cols[b]);
  return out;
}

Eigen::VectorXd cov_column(const Eigen::MatrixXd& cov, const std::vector<int>& rows, int col) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t a = 0; a < rows.size(); ++a) out(static_cast<Eigen::Index>(a)) = cov(rows[a], col);
  return out;
}

Eigen::LLT<Eigen::MatrixXd> factor_parent_block(const Eigen::MatrixXd& cov,
                                                const std::vector<int>& pa, int j) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov_block(cov, pa, pa));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("population parent block of node " + std::to_string(j) +
                         " is not positive definite");
  }
  return llt;
}

}  // namespace

PopulationModel PopulationModel::from(const WeightedSem& sem) {
  PopulationModel pop{sem, population_covariance(sem)};
  const int d = sem.dimension();
  const double expected_det = std::pow(sem.sigma(), 2.0 * d);
  const double det = pop.cov.determinant();
  if (std::abs(det - expected_det) > 1e-9 * expected_det) {
    throw NumericalError("population covariance determinant deviates from sigma^(2d)");
  }
  return pop;
}

Eigen::MatrixXd population_covariance(const WeightedSem& sem) {
  const Eigen::MatrixXd inv = neumann_inverse(sem.matrix());
  return sem.sigma() * sem.sigma() * inv * inv.transpose();
}

Eigen::VectorXd mu_infinity(const DagStructure& s, const PopulationModel& pop, int j) {
  const std::vector<int> pa = checked_parents(s, pop, j);
  if (pa.empty()) return Eigen::VectorXd(0);
  return factor_parent_block(pop.cov, pa, j).solve(cov_column(pop.cov, pa, j));
}

double t_infinity(const DagStructure& s, const PopulationModel& pop, int j) {
  const std::vector<int> pa = checked_parents(s, pop, j);
  if (pa.empty()) return 0.0;
  const Eigen::VectorXd cross = cov_column(pop.cov, pa, j);
  const double sigma = pop.sem.sigma();
  return cross.dot(factor_parent_block(pop.cov, pa, j).solve(cross)) / (sigma * sigma);
}

Eigen::MatrixXd sigma_infinity(const DagStructure& s, const PopulationModel& pop, int j) {
  const std::vector<int> pa = checked_parents(s, pop, j);
  if (pa.empty()) return Eigen::MatrixXd(0, 0);
  const int k = static_cast<int>(pa.size());
  const double sigma = pop.sem.sigma();
  return sigma * sigma *
         factor_parent_block(pop.cov, pa, j).solve(Eigen::MatrixXd::Identity(k, k));
}

Eigen::MatrixXd projected_matrix(const DagStructure& s, const PopulationModel& pop) {
  const int d = s.node_count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    const std::vector<int> pa = s.parents(j);
    if (pa.empty()) continue;
    const Eigen::VectorXd mu = mu_infinity(s, pop, j);
    for (std::size_t k = 0; k < pa.size(); ++k) a(j, pa[k]) = mu(static_cast<Eigen::Index>(k));
  }
  return a;
}

DecayExponent decay_exponent(const PopulationModel& pop, int cap) {
  if (!is_maximal(pop.sem.structure())) {
    throw std::domain_error("decay exponent is undefined for a non-maximal true model");
  }
  const int d = pop.sem.dimension();
  const std::vector<DagStructure> models = enumerate_dags(d, cap);
  const Eigen::MatrixXd a_true = pop.sem.matrix();
  const DagStructure& truth = pop.sem.structure();
  const std::vector<double> kls = parallel_map(models.size(), [&](std::size_t k) {
    if (models[k] == truth) return std::numeric_limits<double>::infinity();
    return kl_divergence(a_true, projected_matrix(models[k], pop));
  });
  std::size_t best = 0;
  double best_kl = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < kls.size(); ++k) {
    if (kls[k] < best_kl) {
      best_kl = kls[k];
      best = k;
    }
  }
  return DecayExponent{best_kl, models[best]};
}

BinaryKlMin min_binary_kl(const DagStructure& g, int cap) {
  const int d = g.node_count();
  const std::vector<DagStructure> models = enumerate_dags(d, cap);
  const MatI identity = MatI::Identity(d, d);
  const MatI inv = neumann_inverse_int(g.matrix().cast<std::int64_t>());
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  const DagStructure* witness = nullptr;
  for (const DagStructure& s : models) {
    if (s == g) continue;
    const MatI m = (identity - s.matrix().cast<std::int64_t>()) * inv;
    const std::int64_t frob = m.array().square().sum();
    if (frob < best) {
      best = frob;
      witness = &s;
    }
  }
  if (witness == nullptr) throw std::invalid_argument("min_binary_kl needs at least two models");
  return BinaryKlMin{best, *witness};
}

std::string to_string(RateKind kind) {
  switch (kind) {
    case RateKind::binary: return "binary";
    case RateKind::maximal: return "maximal";
    case RateKind::nonmaximal: return "nonmaximal";
  }
  return "unknown";
}

}  // namespace dagpost
