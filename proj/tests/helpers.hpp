#ifndef DAGPOST_TESTS_HELPERS_HPP
#define DAGPOST_TESTS_HELPERS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "dagpost/dag.hpp"
#include "dagpost/posterior.hpp"
#include "dagpost/sem.hpp"

namespace testutil {

// Three-node complete example: edges 2->1 (1.77), 3->1 (-0.35), 2->3 (0.26)
// in 1-indexed causal notation; row j of the matrix holds node j's parents.
inline Eigen::MatrixXd maximal_example_matrix() {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = 1.77;
  a(0, 2) = -0.35;
  a(2, 1) = 0.26;
  return a;
}

inline dagpost::DagStructure maximal_example_structure() {
  Eigen::MatrixXi s(3, 3);
  s << 0, 1, 1, 0, 0, 0, 0, 1, 0;
  return dagpost::DagStructure::from_matrix(s);
}

// Three-node single-edge example: edge 1->3 with weight 1.25.
inline Eigen::MatrixXd nonmaximal_example_matrix() {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(2, 0) = 1.25;
  return a;
}

inline dagpost::DagStructure nonmaximal_example_structure() {
  Eigen::MatrixXi s(3, 3);
  s << 0, 0, 0, 0, 0, 0, 1, 0, 0;
  return dagpost::DagStructure::from_matrix(s);
}

// Labeled-DAG counts via the alternating recurrence
// a_d = sum_{k=1..d} (-1)^{k+1} C(d,k) 2^{k(d-k)} a_{d-k}, a_0 = 1.
inline std::int64_t labeled_dag_count(int d) {
  std::vector<std::int64_t> a(static_cast<std::size_t>(d) + 1, 0);
  a[0] = 1;
  auto binom = [](int n, int k) {
    std::int64_t r = 1;
    for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
    return r;
  };
  for (int m = 1; m <= d; ++m) {
    std::int64_t total = 0;
    for (int k = 1; k <= m; ++k) {
      const std::int64_t term =
          binom(m, k) * (1ll << (static_cast<std::int64_t>(k) * (m - k))) * a[static_cast<std::size_t>(m - k)];
      total += (k % 2 == 1) ? term : -term;
    }
    a[static_cast<std::size_t>(m)] = total;
  }
  return a[static_cast<std::size_t>(d)];
}

// Least-squares slope of y against x.
inline double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Total variation distance between an empirical model distribution and a
// posterior table sharing the same canonical model order.
inline double tv_distance(const std::vector<double>& empirical, const dagpost::PosteriorTable& table) {
  double tv = 0.0;
  for (std::size_t k = 0; k < table.size(); ++k) tv += std::abs(empirical[k] - table.prob(k));
  return 0.5 * tv;
}

// Generic coordinate-descent minimizer (golden-section line searches); an
// independent route to ridge/least-squares optima that never touches the
// closed-form algebra.  The bracket stays wide so every line search is
// (numerically) exact; sweeps stop once the iterate is stationary.  The
// objective returns long double because golden-section comparisons of
// nearly equal values set the accuracy floor at sqrt(epsilon).
inline Eigen::VectorXd coordinate_minimize(
    const std::function<long double(const Eigen::VectorXd&)>& f, int dim, double span = 64.0,
    int max_sweeps = 20000) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double moved = 0.0;
    for (int k = 0; k < dim; ++k) {
      double lo = x(k) - span, hi = x(k) + span;
      double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
      Eigen::VectorXd xa = x, xb = x;
      xa(k) = a;
      xb(k) = b;
      long double fa = f(xa), fb = f(xb);
      for (int it = 0; it < 160; ++it) {
        if (fa < fb) {
          hi = b;
          b = a;
          fb = fa;
          a = hi - phi * (hi - lo);
          xa(k) = a;
          fa = f(xa);
        } else {
          lo = a;
          a = b;
          fa = fb;
          b = lo + phi * (hi - lo);
          xb(k) = b;
          fb = f(xb);
        }
      }
      const double next = 0.5 * (lo + hi);
      moved = std::max(moved, std::abs(next - x(k)));
      x(k) = next;
    }
    if (moved < 1e-13) break;
  }
  return x;
}

}  // namespace testutil

#endif  // DAGPOST_TESTS_HELPERS_HPP
