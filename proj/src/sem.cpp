#include "dagpost/sem.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dagpost {

namespace {

void check_weight(const Edge& e, double w) {
  if (!std::isfinite(w) || std::abs(w) < kMinWeightMagnitude) {
    throw std::invalid_argument("weight on edge " + std::to_string(e.parent) + "->" + std::to_string(e.child) +
                                " must be finite with |w| >= " + std::to_string(kMinWeightMagnitude));
  }
}

}  // namespace

Eigen::MatrixXd assemble(const DagStructure& structure, const WeightMap& weights) {
  const int d = structure.node_count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  int matched = 0;
  for (const auto& [edge, w] : weights) {
    if (edge.parent < 0 || edge.parent >= d || edge.child < 0 || edge.child >= d ||
        !structure.has_edge(edge.parent, edge.child)) {
      throw std::invalid_argument("weight key " + std::to_string(edge.parent) + "->" +
                                  std::to_string(edge.child) + " is not an edge of the structure");
    }
    check_weight(edge, w);
    a(edge.child, edge.parent) = w;
    ++matched;
  }
  if (matched != structure.edge_count()) {
    throw std::invalid_argument("weight map must cover every edge of the structure");
  }
  return a;
}

DagStructure structure_of(const Eigen::MatrixXd& coefficients) {
  if (coefficients.rows() != coefficients.cols()) {
    throw std::invalid_argument("coefficient matrix must be square");
  }
  const int d = static_cast<int>(coefficients.rows());
  Eigen::MatrixXi support(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) support(j, i) = coefficients(j, i) != 0.0 ? 1 : 0;
  return DagStructure::from_matrix(support);  // throws if the support is cyclic
}

Eigen::MatrixXd neumann_inverse(const Eigen::MatrixXd& a) {
  const int d = static_cast<int>(a.rows());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(d, d);
  for (int k = 1; k < d; ++k) {
    term = term * a;
    sum += term;
  }
  return sum;
}

Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> neumann_inverse_int(
    const Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>& a) {
  using MatI = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
  const int d = static_cast<int>(a.rows());
  MatI sum = MatI::Identity(d, d);
  MatI term = MatI::Identity(d, d);
  for (int k = 1; k < d; ++k) {
    term = term * a;
    sum += term;
  }
  return sum;
}

WeightedSem::WeightedSem(DagStructure structure, WeightMap weights, double sigma)
    : structure_(std::move(structure)), weights_(std::move(weights)), sigma_(sigma) {
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
    throw std::invalid_argument("sigma must be positive and finite");
  }
  // Validates key coverage and weight magnitudes.
  (void)assemble(structure_, weights_);
}

WeightedSem WeightedSem::from_matrix(const Eigen::MatrixXd& coefficients, double sigma) {
  DagStructure structure = structure_of(coefficients);
  WeightMap weights;
  const int d = structure.node_count();
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i)
      if (structure.has_edge(i, j)) weights[{i, j}] = coefficients(j, i);
  return WeightedSem(std::move(structure), std::move(weights), sigma);
}

WeightMap random_weights(const DagStructure& structure, Rng& rng) {
  WeightMap weights;
  const int d = structure.node_count();
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      if (!structure.has_edge(i, j)) continue;
      double w = rng.normal();
      while (std::abs(w) < kMinWeightMagnitude) w = rng.normal();
      weights[{i, j}] = w;
    }
  }
  return weights;
}

SemSampler::SemSampler(const WeightedSem& sem)
    : noise_to_obs_(neumann_inverse(sem.matrix())), sigma_(sem.sigma()) {}

Eigen::VectorXd SemSampler::next(Rng& rng) {
  const int d = static_cast<int>(noise_to_obs_.rows());
  Eigen::VectorXd eps(d);
  for (int j = 0; j < d; ++j) eps(j) = sigma_ * rng.normal();
  return noise_to_obs_ * eps;
}

GramAccumulator::GramAccumulator(int d) : gram_(Eigen::MatrixXd::Zero(d, d)) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
}

void GramAccumulator::add(const Eigen::VectorXd& x) {
  if (x.size() != gram_.rows()) throw std::invalid_argument("observation dimension mismatch");
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(x);
  gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
  ++count_;
}

Dataset::Dataset(Eigen::MatrixXd samples) : samples_(std::move(samples)) {
  if (samples_.rows() < 1 || samples_.cols() < 1) {
    throw std::invalid_argument("dataset must have at least one row and one column");
  }
  gram_ = samples_.transpose() * samples_;
}

Dataset sample_dataset(const WeightedSem& sem, std::int64_t n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  SemSampler sampler(sem);
  Eigen::MatrixXd samples(n, sem.dimension());
  for (std::int64_t i = 0; i < n; ++i) samples.row(i) = sampler.next(rng).transpose();
  return Dataset(std::move(samples));
}

double kl_divergence(const Eigen::MatrixXd& a_from, const Eigen::MatrixXd& a_to) {
  if (a_from.rows() != a_from.cols() || a_to.rows() != a_to.cols() || a_from.rows() != a_to.rows()) {
    throw std::invalid_argument("kl_divergence: dimension mismatch");
  }
  (void)structure_of(a_from);  // both supports must be acyclic
  (void)structure_of(a_to);
  const int d = static_cast<int>(a_from.rows());
  const Eigen::MatrixXd m =
      (Eigen::MatrixXd::Identity(d, d) - a_to) * neumann_inverse(a_from);
  return 0.5 * (m.squaredNorm() - static_cast<double>(d));
}

double kl_divergence(const WeightedSem& from, const WeightedSem& to) {
  if (from.sigma() != to.sigma()) {
    throw std::invalid_argument("kl_divergence: noise scales must match");
  }
  return kl_divergence(from.matrix(), to.matrix());
}

}  // namespace dagpost
