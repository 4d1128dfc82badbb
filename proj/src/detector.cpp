#include "dagpost/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dagpost/errors.hpp"

namespace dagpost {

namespace {

void check_normalized(const PosteriorTable& table) {
  double mass = 0.0;
  for (std::size_t k = 0; k < table.size(); ++k) mass += table.prob(k);
  if (std::abs(mass - 1.0) > 1e-9) {
    throw std::invalid_argument("posterior table is not normalized");
  }
}

double absence_threshold(double gamma_prime) {
  if (gamma_prime < 0.0) throw std::invalid_argument("gamma' must be >= 0");
  if (std::isinf(gamma_prime)) return std::numeric_limits<double>::infinity();
  return gamma_prime / (1.0 + gamma_prime);
}

}  // namespace

ClassPriors class_priors(int d, const EdgePair& pair, int cap) {
  if (pair.i >= d) throw std::invalid_argument("pair index out of range");
  const std::vector<DagStructure> models = enumerate_dags(d, cap);
  const std::vector<EdgePair> pairs = all_pairs(d);
  std::vector<double> absent_fraction;
  absent_fraction.reserve(pairs.size());
  double requested = 0.0;
  for (const EdgePair& p : pairs) {
    std::int64_t absent = 0;
    for (const DagStructure& s : models) {
      if (!s.has_edge(p.i, p.j) && !s.has_edge(p.j, p.i)) ++absent;
    }
    const double frac = static_cast<double>(absent) / static_cast<double>(models.size());
    absent_fraction.push_back(frac);
    if (p.i == pair.i && p.j == pair.j) requested = frac;
  }
  double sum_c = 0.0, sum_cc = 0.0;
  for (const double f : absent_fraction) {
    sum_c += f;
    sum_cc += 1.0 - f;
  }
  return ClassPriors{requested, 1.0 - requested, requested / sum_c, (1.0 - requested) / sum_cc};
}

Eigen::MatrixXd absence_scores(const PosteriorTable& table) {
  check_normalized(table);
  const int d = table.dimension();
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(d, d);
  for (const EdgePair& p : all_pairs(d)) {
    const double mass = edge_absence_posterior(table, p);
    scores(p.i, p.j) = mass;
    scores(p.j, p.i) = mass;
  }
  return scores;
}

Eigen::MatrixXd absence_scores(const ChainTrace& trace) {
  if (trace.recorded < 1) throw std::invalid_argument("chain trace has no recorded states");
  return trace.absence_freq;
}

Eigen::MatrixXd correlation_absence_scores(const Dataset& data) {
  const int d = data.dimension();
  const Eigen::MatrixXd& x = data.samples();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::VectorXd norms = centered.colwise().norm();
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(d, d);
  for (const EdgePair& p : all_pairs(d)) {
    const double denom = norms(p.i) * norms(p.j);
    const double r = denom > 0.0 ? centered.col(p.i).dot(centered.col(p.j)) / denom : 0.0;
    const double score = 1.0 - std::min(1.0, std::abs(r));
    scores(p.i, p.j) = score;
    scores(p.j, p.i) = score;
  }
  return scores;
}

SkeletonEstimate threshold_scores(const Eigen::MatrixXd& scores, double tau) {
  const int d = static_cast<int>(scores.rows());
  SkeletonEstimate est;
  est.chi_hat = Eigen::MatrixXi::Zero(d, d);
  for (const EdgePair& p : all_pairs(d)) {
    const int present = scores(p.i, p.j) >= tau ? 0 : 1;
    est.chi_hat(p.i, p.j) = present;
    est.chi_hat(p.j, p.i) = present;
  }
  return est;
}

SkeletonEstimate detect_posterior(const PosteriorTable& table, const DetectorConfig& cfg) {
  if (cfg.mode != DetectorMode::exact_posterior) {
    throw std::invalid_argument("posterior-table detection requires exact_posterior mode");
  }
  return threshold_scores(absence_scores(table), absence_threshold(cfg.threshold));
}

SkeletonEstimate detect_posterior(const ChainTrace& trace, const DetectorConfig& cfg) {
  if (cfg.mode != DetectorMode::mcmc) {
    throw std::invalid_argument("chain-trace detection requires mcmc mode");
  }
  if (cfg.threshold < 0.0 || cfg.threshold > 1.0) {
    throw std::invalid_argument("tau must lie in [0,1]");
  }
  return threshold_scores(absence_scores(trace), cfg.threshold);
}

int detect_likelihood_ratio(const Dataset& data, const PriorConfig& prior, const DetectorConfig& cfg,
                            const EdgePair& pair, int cap) {
  const int d = data.dimension();
  if (pair.i >= d) throw std::invalid_argument("pair index out of range");
  if (cfg.threshold < 0.0) throw std::invalid_argument("gamma must be >= 0");
  const std::vector<DagStructure> models = enumerate_dags(d, cap);
  // Per-model masses share the dropped model-independent constants of
  // log_unnorm_posterior, so the mixture ratio below matches the posterior
  // sums exactly.
  std::vector<double> in_class, out_class;
  for (const DagStructure& s : models) {
    const double score = log_unnorm_posterior(s, data, prior);
    if (!s.has_edge(pair.i, pair.j) && !s.has_edge(pair.j, pair.i)) {
      in_class.push_back(score);
    } else {
      out_class.push_back(score);
    }
  }
  const double log_p = logsumexp(in_class) - std::log(static_cast<double>(in_class.size()));
  const double log_q = logsumexp(out_class) - std::log(static_cast<double>(out_class.size()));
  const ClassPriors priors = class_priors(d, pair, cap);
  const double log_rhs = std::log(priors.u_minus / priors.u_plus) + std::log(cfg.threshold);
  return (log_p - log_q >= log_rhs) ? 0 : 1;
}

double gamma_prime_from_gamma(double gamma, const ClassPriors& priors) {
  return gamma * (priors.u_minus * priors.pi_c) / (priors.u_plus * priors.pi_c_complement);
}

ErrorRates error_rates(const std::vector<SkeletonEstimate>& estimates,
                       const std::vector<DagStructure>& truths) {
  if (estimates.size() != truths.size()) {
    throw std::invalid_argument("error_rates: estimate and truth counts differ");
  }
  std::int64_t false_positive = 0, absent_total = 0;
  std::int64_t false_negative = 0, present_total = 0;
  for (std::size_t r = 0; r < estimates.size(); ++r) {
    const DagStructure& truth = truths[r];
    if (estimates[r].dimension() != truth.node_count()) {
      throw std::invalid_argument("error_rates: dimension mismatch");
    }
    for (const EdgePair& p : all_pairs(truth.node_count())) {
      const bool truly_present = truth.has_edge(p.i, p.j) || truth.has_edge(p.j, p.i);
      const bool declared_present = estimates[r].chi_hat(p.i, p.j) == 1;
      if (truly_present) {
        ++present_total;
        if (!declared_present) ++false_negative;
      } else {
        ++absent_total;
        if (declared_present) ++false_positive;
      }
    }
  }
  if (absent_total == 0) {
    throw UndefinedRateError("false positive rate undefined: no absent pairs in any truth");
  }
  if (present_total == 0) {
    throw UndefinedRateError("false negative rate undefined: no present pairs in any truth");
  }
  return ErrorRates{static_cast<double>(false_positive) / static_cast<double>(absent_total),
                    static_cast<double>(false_negative) / static_cast<double>(present_total)};
}

CalibrationResult calibrate_threshold(const std::vector<ScoredReplicate>& replicates, double alpha) {
  if (replicates.empty()) throw std::invalid_argument("calibrate_threshold: empty benchmark set");
  if (!(alpha > 0.0) || alpha > 1.0) throw std::invalid_argument("alpha must lie in (0,1]");
  // Knots: every achievable absence score, plus the all-present extreme.
  std::vector<double> knots;
  std::vector<DagStructure> truths;
  truths.reserve(replicates.size());
  for (const ScoredReplicate& rep : replicates) {
    truths.push_back(rep.truth);
    for (const EdgePair& p : all_pairs(rep.truth.node_count())) {
      knots.push_back(rep.scores(p.i, p.j));
    }
  }
  knots.push_back(std::numeric_limits<double>::infinity());
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  CalibrationResult result;
  bool feasible = false;
  for (const double tau : knots) {
    std::vector<SkeletonEstimate> estimates;
    estimates.reserve(replicates.size());
    for (const ScoredReplicate& rep : replicates) estimates.push_back(threshold_scores(rep.scores, tau));
    ErrorRates rates;
    try {
      rates = error_rates(estimates, truths);
    } catch (const UndefinedRateError& e) {
      throw CalibrationError(std::string("calibration impossible: ") + e.what());
    }
    const double gamma_prime =
        std::isinf(tau) ? std::numeric_limits<double>::infinity()
                        : (tau >= 1.0 ? std::numeric_limits<double>::infinity() : tau / (1.0 - tau));
    result.roc.push_back(RocPoint{tau, gamma_prime, rates.eps_plus, rates.eps_minus});
    // eps+ is nondecreasing in tau, so the last knot within alpha is the
    // largest feasible threshold (smallest eps- under the constraint).
    if (rates.eps_plus <= alpha) {
      result.tau = tau;
      result.gamma_prime = gamma_prime;
      result.eps_plus = rates.eps_plus;
      result.eps_minus = rates.eps_minus;
      feasible = true;
    }
  }
  if (!feasible) {
    throw CalibrationError("no threshold satisfies the false positive constraint");
  }
  return result;
}

}  // namespace dagpost
