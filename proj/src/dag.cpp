#include "dagpost/dag.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "dagpost/errors.hpp"

namespace dagpost {

namespace {

void check_node_count(int d) {
  if (d < 1) throw std::invalid_argument("node count must be >= 1");
  if (d > kMaxNodes) {
    throw std::invalid_argument("node count " + std::to_string(d) + " exceeds the supported maximum of " +
                                std::to_string(kMaxNodes));
  }
}

std::uint32_t full_mask(int d) {
  return d == 32 ? 0xFFFFFFFFu : ((1u << d) - 1u);
}

// Kahn-style elimination on parent masks.
bool rows_acyclic(const std::vector<std::uint32_t>& rows, int d) {
  std::uint32_t alive = full_mask(d);
  for (int step = 0; step < d; ++step) {
    int source = -1;
    for (int j = 0; j < d; ++j) {
      if (!((alive >> j) & 1u)) continue;
      if ((rows[static_cast<std::size_t>(j)] & alive) == 0u) {
        source = j;
        break;
      }
    }
    if (source < 0) return false;
    alive &= ~(1u << source);
  }
  return true;
}

// reach[u] = nodes reachable from u along directed edges.
std::vector<std::uint32_t> reachability(const std::vector<std::uint32_t>& rows, int d) {
  std::vector<std::uint32_t> children(static_cast<std::size_t>(d), 0u);
  for (int j = 0; j < d; ++j) {
    std::uint32_t pm = rows[static_cast<std::size_t>(j)];
    while (pm) {
      const int i = std::countr_zero(pm);
      pm &= pm - 1u;
      children[static_cast<std::size_t>(i)] |= 1u << j;
    }
  }
  std::vector<std::uint32_t> reach = children;
  for (bool changed = true; changed;) {
    changed = false;
    for (int u = 0; u < d; ++u) {
      std::uint32_t acc = reach[static_cast<std::size_t>(u)];
      std::uint32_t frontier = acc;
      while (frontier) {
        const int v = std::countr_zero(frontier);
        frontier &= frontier - 1u;
        acc |= reach[static_cast<std::size_t>(v)];
      }
      if (acc != reach[static_cast<std::size_t>(u)]) {
        reach[static_cast<std::size_t>(u)] = acc;
        changed = true;
      }
    }
  }
  return reach;
}

}  // namespace

class DagBuilder {
 public:
  static DagStructure make(int d, std::vector<std::uint32_t> rows) {
    return DagStructure(d, std::move(rows));
  }
};

DagStructure::DagStructure(int d) : d_(d) {
  check_node_count(d);
  rows_.assign(static_cast<std::size_t>(d), 0u);
}

DagStructure DagStructure::from_matrix(const Eigen::MatrixXi& adj) {
  if (!is_acyclic(adj)) throw std::invalid_argument("adjacency matrix contains a directed cycle");
  const int d = static_cast<int>(adj.rows());
  std::vector<std::uint32_t> rows(static_cast<std::size_t>(d), 0u);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i)
      if (adj(j, i) == 1) rows[static_cast<std::size_t>(j)] |= 1u << i;
  return DagStructure(d, std::move(rows));
}

DagStructure DagStructure::from_adjacency_string(std::string_view text) {
  const auto len = text.size();
  const int d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(len))));
  if (len == 0 || static_cast<std::size_t>(d) * static_cast<std::size_t>(d) != len) {
    throw std::invalid_argument("adjacency string length is not a perfect square");
  }
  Eigen::MatrixXi adj(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      const char c = text[static_cast<std::size_t>(j * d + i)];
      if (c != '0' && c != '1') throw std::invalid_argument("adjacency string must contain only 0/1");
      adj(j, i) = c - '0';
    }
  }
  return from_matrix(adj);
}

std::vector<int> DagStructure::parents(int child) const {
  std::vector<int> out;
  std::uint32_t pm = parent_mask(child);
  while (pm) {
    out.push_back(std::countr_zero(pm));
    pm &= pm - 1u;
  }
  return out;
}

int DagStructure::parent_count(int child) const {
  return std::popcount(parent_mask(child));
}

int DagStructure::edge_count() const {
  int n = 0;
  for (const auto r : rows_) n += std::popcount(r);
  return n;
}

Eigen::MatrixXi DagStructure::matrix() const {
  Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(d_, d_);
  for (int j = 0; j < d_; ++j)
    for (int i = 0; i < d_; ++i)
      if (has_edge(i, j)) adj(j, i) = 1;
  return adj;
}

std::string DagStructure::adjacency_string() const {
  std::string out(static_cast<std::size_t>(d_) * static_cast<std::size_t>(d_), '0');
  for (int j = 0; j < d_; ++j)
    for (int i = 0; i < d_; ++i)
      if (has_edge(i, j)) out[static_cast<std::size_t>(j * d_ + i)] = '1';
  return out;
}

EdgePair::EdgePair(int i_, int j_) : i(i_), j(j_) {
  if (!(0 <= j && j < i)) throw std::invalid_argument("EdgePair requires 0 <= j < i");
}

std::vector<EdgePair> all_pairs(int d) {
  std::vector<EdgePair> out;
  for (int i = 1; i < d; ++i)
    for (int j = 0; j < i; ++j) out.emplace_back(i, j);
  return out;
}

bool is_acyclic(const Eigen::MatrixXi& adj) {
  if (adj.rows() != adj.cols()) throw std::invalid_argument("adjacency matrix must be square");
  const int d = static_cast<int>(adj.rows());
  check_node_count(d);
  std::vector<std::uint32_t> rows(static_cast<std::size_t>(d), 0u);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      const int v = adj(j, i);
      if (v != 0 && v != 1) throw std::invalid_argument("adjacency entries must be 0 or 1");
      if (i == j && v != 0) throw std::invalid_argument("adjacency diagonal must be zero");
      if (v == 1) rows[static_cast<std::size_t>(j)] |= 1u << i;
    }
  }
  return rows_acyclic(rows, d);
}

std::vector<DagStructure> enumerate_dags(int d, int cap) {
  check_node_count(d);
  if (d > cap) {
    throw CapacityError("enumerate_dags: d=" + std::to_string(d) + " exceeds the enumeration cap of " +
                        std::to_string(cap));
  }
  // Free positions in row-major order; the first position is the most
  // significant bit so that counting up gives lexicographic order.
  std::vector<std::pair<int, int>> positions;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i)
      if (i != j) positions.emplace_back(j, i);
  const int k = static_cast<int>(positions.size());
  std::vector<DagStructure> out;
  for (std::uint64_t mask = 0; mask < (1ull << k); ++mask) {
    std::vector<std::uint32_t> rows(static_cast<std::size_t>(d), 0u);
    for (int b = 0; b < k; ++b) {
      if ((mask >> (k - 1 - b)) & 1ull) {
        const auto [j, i] = positions[static_cast<std::size_t>(b)];
        rows[static_cast<std::size_t>(j)] |= 1u << i;
      }
    }
    if (rows_acyclic(rows, d)) out.push_back(DagBuilder::make(d, std::move(rows)));
  }
  return out;
}

bool is_maximal(const DagStructure& s) {
  const int d = s.node_count();
  std::vector<std::uint32_t> rows(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) rows[static_cast<std::size_t>(j)] = s.parent_mask(j);
  const auto reach = reachability(rows, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      if (i == j || s.has_edge(i, j)) continue;
      // i -> j stays acyclic iff there is no path j ~> i.
      if (!((reach[static_cast<std::size_t>(j)] >> i) & 1u)) return false;
    }
  }
  return true;
}

std::vector<std::pair<int, int>> neighbor_toggles(const DagStructure& s) {
  const int d = s.node_count();
  std::vector<std::uint32_t> rows(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) rows[static_cast<std::size_t>(j)] = s.parent_mask(j);
  const auto reach = reachability(rows, d);
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      if (i == j) continue;
      if (s.has_edge(i, j)) {
        out.emplace_back(j, i);  // deletions never create cycles
      } else if (!((reach[static_cast<std::size_t>(j)] >> i) & 1u)) {
        out.emplace_back(j, i);
      }
    }
  }
  return out;
}

std::vector<DagStructure> neighbors(const DagStructure& s) {
  std::vector<DagStructure> out;
  for (const auto& [j, i] : neighbor_toggles(s)) out.push_back(toggled(s, j, i));
  return out;
}

std::int64_t neighbor_count(const DagStructure& s) {
  return static_cast<std::int64_t>(neighbor_toggles(s).size());
}

DagStructure toggled(const DagStructure& s, int child, int parent) {
  const int d = s.node_count();
  std::vector<std::uint32_t> rows(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) rows[static_cast<std::size_t>(j)] = s.parent_mask(j);
  rows[static_cast<std::size_t>(child)] ^= 1u << parent;
  return DagBuilder::make(d, std::move(rows));
}

bool is_subgraph(const DagStructure& s, const DagStructure& t) {
  if (s.node_count() != t.node_count()) {
    throw std::invalid_argument("is_subgraph: dimension mismatch");
  }
  for (int j = 0; j < s.node_count(); ++j) {
    if (s.parent_mask(j) & ~t.parent_mask(j)) return false;
  }
  return true;
}

Eigen::MatrixXi skeleton(const DagStructure& s) {
  const Eigen::MatrixXi adj = s.matrix();
  return adj + Eigen::MatrixXi(adj.transpose());
}

DagStructure sample_uniform_dag(int d, Rng& rng, int cap, std::int64_t burn_in) {
  check_node_count(d);
  if (d <= cap) {
    const auto all = enumerate_dags(d, cap);
    return all[static_cast<std::size_t>(rng.uniform_below(all.size()))];
  }
  // Uniform-target Metropolis chain over DAG space; approximately uniform
  // after burn-in.
  if (burn_in < 0) burn_in = 50ll * d * d;
  DagStructure current(d);
  std::int64_t current_neighbors = neighbor_count(current);
  for (std::int64_t t = 0; t < burn_in; ++t) {
    const auto toggles = neighbor_toggles(current);
    const auto [j, i] = toggles[static_cast<std::size_t>(rng.uniform_below(toggles.size()))];
    const DagStructure candidate = toggled(current, j, i);
    const std::int64_t candidate_neighbors = neighbor_count(candidate);
    const double accept = static_cast<double>(current_neighbors) / static_cast<double>(candidate_neighbors);
    if (rng.uniform01() < accept) {
      current = candidate;
      current_neighbors = candidate_neighbors;
    }
  }
  return current;
}

}  // namespace dagpost
