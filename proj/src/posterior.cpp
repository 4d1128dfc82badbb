#include "dagpost/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dagpost/errors.hpp"
#include "dagpost/parallel.hpp"

namespace dagpost {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

void check_prior(const PriorConfig& prior) {
  if (!(prior.sigma > 0.0) || !std::isfinite(prior.sigma) || !(prior.sigma_w > 0.0) ||
      !std::isfinite(prior.sigma_w)) {
    throw std::invalid_argument("sigma and sigma_w must be positive and finite");
  }
}

void check_gram(const DagStructure& s, const Eigen::MatrixXd& gram) {
  if (gram.rows() != gram.cols() || gram.rows() != s.node_count()) {
    throw std::invalid_argument("Gram matrix dimension does not match the structure");
  }
}

struct NodeSolve {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd b;
  double t = 0.0;
  double logdet_precision = 0.0;
};

// Factorizes the precision sigma_w^{-2} I + sigma^{-2} G[pa,pa] of node j.
NodeSolve solve_node(const DagStructure& s, const Eigen::MatrixXd& gram, const PriorConfig& prior,
                     int j) {
  const std::vector<int> pa = s.parents(j);
  const int k = static_cast<int>(pa.size());
  const double inv_s2 = 1.0 / (prior.sigma * prior.sigma);
  const double inv_sw2 = 1.0 / (prior.sigma_w * prior.sigma_w);
  Eigen::MatrixXd precision(k, k);
  Eigen::VectorXd b(k);
  for (int a = 0; a < k; ++a) {
    b(a) = inv_s2 * gram(pa[static_cast<std::size_t>(a)], j);
    for (int c = 0; c < k; ++c) {
      precision(a, c) = inv_s2 * gram(pa[static_cast<std::size_t>(a)], pa[static_cast<std::size_t>(c)]) +
                        (a == c ? inv_sw2 : 0.0);
    }
  }
  NodeSolve out;
  out.llt.compute(precision);
  if (out.llt.info() != Eigen::Success || !precision.allFinite()) {
    throw NumericalError("node " + std::to_string(j) + ": positive-definite factorization failed");
  }
  const Eigen::VectorXd mu = out.llt.solve(b);
  out.t = b.dot(mu);
  out.logdet_precision = 2.0 * out.llt.matrixLLT().diagonal().array().log().sum();
  out.b = std::move(b);
  return out;
}

}  // namespace

NodeBlocks node_blocks(const DagStructure& s, const Eigen::MatrixXd& gram, const PriorConfig& prior,
                       int j) {
  check_prior(prior);
  check_gram(s, gram);
  if (j < 0 || j >= s.node_count()) throw std::invalid_argument("node index out of range");
  NodeBlocks blocks;
  const int k = s.parent_count(j);
  if (k == 0) {
    blocks.sigma_w_block.resize(0, 0);
    blocks.b_block.resize(0);
    blocks.mu_block.resize(0);
    return blocks;
  }
  NodeSolve ns = solve_node(s, gram, prior, j);
  blocks.sigma_w_block = ns.llt.solve(Eigen::MatrixXd::Identity(k, k));
  blocks.b_block = ns.b;
  blocks.mu_block = blocks.sigma_w_block * ns.b;
  blocks.t_value = ns.t;
  blocks.logdet = -ns.logdet_precision;
  return blocks;
}

NodeBlocks node_blocks(const DagStructure& s, const Dataset& data, const PriorConfig& prior, int j) {
  return node_blocks(s, data.gram(), prior, j);
}

double node_log_score(const DagStructure& s, const Eigen::MatrixXd& gram, const PriorConfig& prior,
                      int j) {
  if (s.parent_count(j) == 0) return 0.0;
  NodeSolve ns = solve_node(s, gram, prior, j);
  return 0.5 * ns.t - 0.5 * ns.logdet_precision;
}

double log_unnorm_posterior(const DagStructure& s, const Eigen::MatrixXd& gram,
                            const PriorConfig& prior) {
  check_prior(prior);
  check_gram(s, gram);
  double total = 0.0;
  for (int j = 0; j < s.node_count(); ++j) total += node_log_score(s, gram, prior, j);
  return total;
}

double log_unnorm_posterior(const DagStructure& s, const Dataset& data, const PriorConfig& prior) {
  return log_unnorm_posterior(s, data.gram(), prior);
}

double log_unnorm_posterior_raw(const DagStructure& s, const Dataset& data, const PriorConfig& prior) {
  check_prior(prior);
  if (data.dimension() != s.node_count()) {
    throw std::invalid_argument("dataset dimension does not match the structure");
  }
  const Eigen::MatrixXd& x = data.samples();
  const double inv_s2 = 1.0 / (prior.sigma * prior.sigma);
  const double inv_sw2 = 1.0 / (prior.sigma_w * prior.sigma_w);
  double total = 0.0;
  for (int j = 0; j < s.node_count(); ++j) {
    const std::vector<int> pa = s.parents(j);
    const int k = static_cast<int>(pa.size());
    if (k == 0) continue;
    Eigen::MatrixXd parent_cols(x.rows(), k);
    for (int a = 0; a < k; ++a) parent_cols.col(a) = x.col(pa[static_cast<std::size_t>(a)]);
    const Eigen::MatrixXd precision =
        inv_sw2 * Eigen::MatrixXd::Identity(k, k) + inv_s2 * (parent_cols.transpose() * parent_cols);
    const Eigen::VectorXd b = inv_s2 * (parent_cols.transpose() * x.col(j));
    Eigen::LLT<Eigen::MatrixXd> llt(precision);
    if (llt.info() != Eigen::Success || !precision.allFinite()) {
      throw NumericalError("node " + std::to_string(j) + ": positive-definite factorization failed");
    }
    const double t = b.dot(llt.solve(b));
    const double logdet_precision = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    total += 0.5 * t - 0.5 * logdet_precision;
  }
  return total;
}

double log_unnorm_posterior_binary(const DagStructure& s, const Eigen::MatrixXd& gram, double sigma) {
  check_gram(s, gram);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("sigma must be positive and finite");
  }
  const int d = s.node_count();
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d) - s.matrix().cast<double>();
  return -(m.transpose() * m * gram).trace() / (2.0 * sigma * sigma);
}

double log_unnorm_posterior_binary(const DagStructure& s, const Dataset& data, double sigma) {
  return log_unnorm_posterior_binary(s, data.gram(), sigma);
}

double logsumexp(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("logsumexp of an empty list");
  const double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;  // all -inf, or a stray +inf propagates
  double acc = 0.0;
  for (const double v : x) acc += std::exp(v - m);
  return m + std::log(acc);
}

std::size_t PosteriorTable::index_of(const DagStructure& s) const {
  const auto it = std::find(models.begin(), models.end(), s);
  if (it == models.end()) throw std::invalid_argument("model is not in the posterior table");
  return static_cast<std::size_t>(it - models.begin());
}

PosteriorTable normalize(std::vector<DagStructure> models, std::vector<double> log_unnorm) {
  if (models.size() != log_unnorm.size()) {
    throw std::invalid_argument("normalize: model and score counts differ");
  }
  if (models.empty()) throw std::invalid_argument("normalize: empty model list");
  for (const double v : log_unnorm) {
    if (!std::isfinite(v)) throw NumericalError("normalize: non-finite log score");
  }
  PosteriorTable table;
  const double lse = logsumexp(log_unnorm);
  table.log_norm.reserve(log_unnorm.size());
  for (const double v : log_unnorm) table.log_norm.push_back(v - lse);
  table.models = std::move(models);
  table.log_unnorm = std::move(log_unnorm);
  return table;
}

PosteriorTable exact_posterior_table(const Eigen::MatrixXd& gram, const PriorConfig& prior, int cap) {
  const int d = static_cast<int>(gram.rows());
  std::vector<DagStructure> models = enumerate_dags(d, cap);
  std::vector<double> scores = parallel_map(models.size(), [&](std::size_t k) {
    return log_unnorm_posterior(models[k], gram, prior);
  });
  return normalize(std::move(models), std::move(scores));
}

PosteriorTable exact_posterior_table(const Dataset& data, const PriorConfig& prior, int cap) {
  return exact_posterior_table(data.gram(), prior, cap);
}

PosteriorTable exact_binary_posterior_table(const Eigen::MatrixXd& gram, double sigma, int cap) {
  const int d = static_cast<int>(gram.rows());
  std::vector<DagStructure> models = enumerate_dags(d, cap);
  std::vector<double> scores = parallel_map(models.size(), [&](std::size_t k) {
    return log_unnorm_posterior_binary(models[k], gram, sigma);
  });
  return normalize(std::move(models), std::move(scores));
}

double edge_absence_posterior(const PosteriorTable& table, const EdgePair& pair) {
  double mass = 0.0;
  for (std::size_t k = 0; k < table.size(); ++k) {
    const DagStructure& s = table.models[k];
    if (!s.has_edge(pair.i, pair.j) && !s.has_edge(pair.j, pair.i)) mass += table.prob(k);
  }
  return mass;
}

double log_complement_mass(const PosteriorTable& table, std::size_t truth_index) {
  if (truth_index >= table.size()) throw std::invalid_argument("truth index out of range");
  std::vector<double> rest;
  rest.reserve(table.size() - 1);
  for (std::size_t k = 0; k < table.size(); ++k) {
    if (k != truth_index) rest.push_back(table.log_norm[k]);
  }
  if (rest.empty()) return -std::numeric_limits<double>::infinity();
  return logsumexp(rest);
}

// ---------------------------------------------------------------------------
// Quadrature oracle.
// ---------------------------------------------------------------------------

namespace {

double log_normal_pdf(double x, double sd) {
  return -0.5 * std::log(kTwoPi * sd * sd) - x * x / (2.0 * sd * sd);
}

// Log integrand of node j's weight integral at eta: the likelihood of column
// j given the parent columns, times the prior density, evaluated directly
// sample by sample.
class NodeIntegrand {
 public:
  NodeIntegrand(Eigen::VectorXd y, Eigen::MatrixXd parents, const PriorConfig& prior)
      : y_(std::move(y)), parents_(std::move(parents)), prior_(prior) {}

  double operator()(const Eigen::VectorXd& eta) const {
    const Eigen::VectorXd residual = y_ - parents_ * eta;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < residual.size(); ++i) acc += log_normal_pdf(residual(i), prior_.sigma);
    for (Eigen::Index k = 0; k < eta.size(); ++k) acc += log_normal_pdf(eta(k), prior_.sigma_w);
    return acc;
  }

  // Column of log integrand values for a block of grid points (one per column
  // of etas); vectorizes the residual evaluation across the block.
  Eigen::VectorXd batch(const Eigen::MatrixXd& etas) const {
    const Eigen::Index n = y_.size();
    const Eigen::MatrixXd residual = y_.replicate(1, etas.cols()) - parents_ * etas;
    const double inv_2s2 = 1.0 / (2.0 * prior_.sigma * prior_.sigma);
    const double inv_2sw2 = 1.0 / (2.0 * prior_.sigma_w * prior_.sigma_w);
    Eigen::VectorXd out = -residual.colwise().squaredNorm().transpose() * inv_2s2;
    out.array() += -0.5 * static_cast<double>(n) * std::log(kTwoPi * prior_.sigma * prior_.sigma);
    out -= etas.colwise().squaredNorm().transpose() * inv_2sw2;
    out.array() +=
        -0.5 * static_cast<double>(etas.rows()) * std::log(kTwoPi * prior_.sigma_w * prior_.sigma_w);
    return out;
  }

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd parents_;
  PriorConfig prior_;
};

// Composite-Simpson coefficient for point index k of points_count points.
double simpson_coeff(int k, int points_count) {
  if (k == 0 || k == points_count - 1) return 1.0;
  return (k % 2 == 1) ? 4.0 : 2.0;
}

// Finds the integrand peak along one axis by an expanding coarse scan.
double scan_peak_1d(const NodeIntegrand& f, double start_radius) {
  double radius = start_radius;
  for (int round = 0; round < 40; ++round) {
    constexpr int kScan = 257;
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < kScan; ++k) {
      Eigen::VectorXd eta(1);
      eta(0) = -radius + 2.0 * radius * k / (kScan - 1);
      const double v = f(eta);
      if (v > best_val) {
        best_val = v;
        best = k;
      }
    }
    if (best > 4 && best < kScan - 5) return -radius + 2.0 * radius * best / (kScan - 1);
    radius *= 2.0;
  }
  throw NumericalError("oracle integrand peak not bracketed");
}

double integrate_1d(const NodeIntegrand& f, const PriorConfig& prior) {
  const double center = scan_peak_1d(f, 8.0 * std::max(prior.sigma_w, 1.0));
  Eigen::VectorXd c(1);
  c(0) = center;
  const double peak = f(c);
  double half = std::max(prior.sigma_w / 16.0, 1e-3);
  for (int round = 0; round < 200; ++round) {
    Eigen::VectorXd lo(1), hi(1);
    lo(0) = center - half;
    hi(0) = center + half;
    if (f(lo) < peak - 60.0 && f(hi) < peak - 60.0) break;
    half *= 1.5;
  }
  constexpr int kPoints = 4001;
  const double h = 2.0 * half / (kPoints - 1);
  Eigen::MatrixXd etas(1, kPoints);
  for (int k = 0; k < kPoints; ++k) etas(0, k) = center - half + h * k;
  const Eigen::VectorXd g = f.batch(etas);
  std::vector<double> terms(kPoints);
  for (int k = 0; k < kPoints; ++k) terms[static_cast<std::size_t>(k)] = g(k) + std::log(simpson_coeff(k, kPoints));
  return std::log(h / 3.0) + logsumexp(terms);
}

double integrate_2d(const NodeIntegrand& f, const PriorConfig& prior) {
  // Expanding coarse scan for the peak.
  double radius = 8.0 * std::max(prior.sigma_w, 1.0);
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  for (int round = 0; round < 40; ++round) {
    constexpr int kScan = 65;
    double best_val = -std::numeric_limits<double>::infinity();
    int best_a = 0, best_b = 0;
    for (int a = 0; a < kScan; ++a) {
      for (int b = 0; b < kScan; ++b) {
        Eigen::VectorXd eta(2);
        eta << -radius + 2.0 * radius * a / (kScan - 1), -radius + 2.0 * radius * b / (kScan - 1);
        const double v = f(eta);
        if (v > best_val) {
          best_val = v;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (best_a > 2 && best_a < kScan - 3 && best_b > 2 && best_b < kScan - 3) {
      center << -radius + 2.0 * radius * best_a / (kScan - 1), -radius + 2.0 * radius * best_b / (kScan - 1);
      break;
    }
    radius *= 2.0;
    if (round == 39) throw NumericalError("oracle integrand peak not bracketed");
  }
  const double peak = f(center);
  // Axis-aligned half widths from the profile drop, inflated for correlation,
  // then verified on the box boundary.
  Eigen::Vector2d half(std::max(prior.sigma_w / 16.0, 1e-3), std::max(prior.sigma_w / 16.0, 1e-3));
  for (int axis = 0; axis < 2; ++axis) {
    for (int round = 0; round < 200; ++round) {
      Eigen::VectorXd lo = center, hi = center;
      lo(axis) -= half(axis);
      hi(axis) += half(axis);
      if (f(lo) < peak - 60.0 && f(hi) < peak - 60.0) break;
      half(axis) *= 1.5;
    }
    half(axis) *= 3.0;
  }
  for (int verify = 0; verify < 20; ++verify) {
    double boundary_max = -std::numeric_limits<double>::infinity();
    constexpr int kEdge = 129;
    for (int k = 0; k < kEdge; ++k) {
      const double t = -1.0 + 2.0 * k / (kEdge - 1);
      for (int side = 0; side < 4; ++side) {
        Eigen::VectorXd eta(2);
        switch (side) {
          case 0: eta << center(0) - half(0), center(1) + t * half(1); break;
          case 1: eta << center(0) + half(0), center(1) + t * half(1); break;
          case 2: eta << center(0) + t * half(0), center(1) - half(1); break;
          default: eta << center(0) + t * half(0), center(1) + half(1); break;
        }
        boundary_max = std::max(boundary_max, f(eta));
      }
    }
    if (boundary_max < peak - 50.0) break;
    half *= 1.5;
    if (verify == 19) throw NumericalError("oracle integration window failed to cover the integrand");
  }
  constexpr int kPoints = 801;
  const double hx = 2.0 * half(0) / (kPoints - 1);
  const double hy = 2.0 * half(1) / (kPoints - 1);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(kPoints) * kPoints);
  constexpr int kChunk = 8192;
  Eigen::MatrixXd etas(2, kChunk);
  std::vector<double> coeffs(static_cast<std::size_t>(kChunk));
  int filled = 0;
  auto flush = [&]() {
    if (filled == 0) return;
    const Eigen::VectorXd g = f.batch(etas.leftCols(filled));
    for (int k = 0; k < filled; ++k) {
      terms.push_back(g(k) + std::log(coeffs[static_cast<std::size_t>(k)]));
    }
    filled = 0;
  };
  for (int a = 0; a < kPoints; ++a) {
    for (int b = 0; b < kPoints; ++b) {
      etas(0, filled) = center(0) - half(0) + hx * a;
      etas(1, filled) = center(1) - half(1) + hy * b;
      coeffs[static_cast<std::size_t>(filled)] = simpson_coeff(a, kPoints) * simpson_coeff(b, kPoints);
      if (++filled == kChunk) flush();
    }
  }
  flush();
  return std::log(hx / 3.0) + std::log(hy / 3.0) + logsumexp(terms);
}

}  // namespace

double oracle_log_marginal(const DagStructure& s, const Dataset& data, const PriorConfig& prior) {
  check_prior(prior);
  if (data.dimension() != s.node_count()) {
    throw std::invalid_argument("dataset dimension does not match the structure");
  }
  if (s.node_count() > 3 || data.sample_count() > 50) {
    throw CapacityError("oracle_log_marginal is limited to d <= 3 and n <= 50");
  }
  const Eigen::MatrixXd& x = data.samples();
  double total = 0.0;
  for (int j = 0; j < s.node_count(); ++j) {
    const std::vector<int> pa = s.parents(j);
    if (pa.empty()) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) total += log_normal_pdf(x(i, j), prior.sigma);
      continue;
    }
    if (pa.size() > 2) {
      throw CapacityError("oracle_log_marginal is limited to nodes with at most two parents");
    }
    Eigen::MatrixXd parent_cols(x.rows(), static_cast<Eigen::Index>(pa.size()));
    for (std::size_t a = 0; a < pa.size(); ++a) parent_cols.col(static_cast<Eigen::Index>(a)) = x.col(pa[a]);
    const NodeIntegrand f(x.col(j), std::move(parent_cols), prior);
    total += pa.size() == 1 ? integrate_1d(f, prior) : integrate_2d(f, prior);
  }
  return total;
}

}  // namespace dagpost
