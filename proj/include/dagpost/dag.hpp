#ifndef DAGPOST_DAG_HPP
#define DAGPOST_DAG_HPP

#include <Eigen/Dense>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dagpost/rng.hpp"

namespace dagpost {

/// Exhaustive enumeration is refused above this node count unless the caller
/// raises the cap explicitly.
inline constexpr int kDefaultEnumerationCap = 5;

/// Largest supported node count (parent sets are stored as 32-bit masks).
inline constexpr int kMaxNodes = 32;

/// Directed acyclic graph on {0, ..., d-1}.
///
/// Convention: adj(j, i) == 1 means node i is a parent of node j, i.e. the
/// edge i -> j is present and row j's support is node j's parent set.
class DagStructure {
 public:
  /// Empty graph on d nodes.
  explicit DagStructure(int d);

  /// Validates shape, binary entries, zero diagonal, and acyclicity.
  static DagStructure from_matrix(const Eigen::MatrixXi& adj);

  /// Parses a row-major 0/1 string; d is inferred from the length.
  static DagStructure from_adjacency_string(std::string_view text);

  int node_count() const { return d_; }
  bool has_edge(int parent, int child) const {
    return (rows_[static_cast<std::size_t>(child)] >> parent) & 1u;
  }
  std::uint32_t parent_mask(int child) const { return rows_[static_cast<std::size_t>(child)]; }
  std::vector<int> parents(int child) const;
  int parent_count(int child) const;
  int edge_count() const;

  Eigen::MatrixXi matrix() const;
  std::string adjacency_string() const;

  friend bool operator==(const DagStructure&, const DagStructure&) = default;
  friend std::strong_ordering operator<=>(const DagStructure& a, const DagStructure& b) {
    if (auto c = a.d_ <=> b.d_; c != 0) return c;
    return a.rows_ <=> b.rows_;
  }

 private:
  friend class DagBuilder;
  DagStructure(int d, std::vector<std::uint32_t> rows) : d_(d), rows_(std::move(rows)) {}

  int d_ = 0;
  std::vector<std::uint32_t> rows_;  // rows_[j] bit i set <=> edge i -> j
};

/// Unordered node pair, stored with i > j.
struct EdgePair {
  int i;
  int j;
  EdgePair(int i_, int j_);
};

/// All unordered pairs on d nodes, in (i, j) lexicographic order.
std::vector<EdgePair> all_pairs(int d);

/// True iff the given square binary zero-diagonal matrix has no directed
/// cycle.  Throws std::invalid_argument on a non-square matrix, non-binary
/// entries, or a nonzero diagonal.
bool is_acyclic(const Eigen::MatrixXi& adj);

/// All labeled DAGs on d nodes, in lexicographic order of the row-major
/// flattened adjacency matrix.  Throws CapacityError for d > cap.
std::vector<DagStructure> enumerate_dags(int d, int cap = kDefaultEnumerationCap);

/// True iff no edge can be added without creating a cycle (complete DAG).
bool is_maximal(const DagStructure& s);

/// Off-diagonal positions (child, parent) whose toggle yields a DAG, in
/// row-major order.  This is the single source of truth for the neighbor
/// relation used by enumeration-free samplers.
std::vector<std::pair<int, int>> neighbor_toggles(const DagStructure& s);

/// All DAGs differing from s in exactly one edge, in row-major toggle order.
std::vector<DagStructure> neighbors(const DagStructure& s);

/// |neighbors(s)| without materializing the graphs.
std::int64_t neighbor_count(const DagStructure& s);

/// Copy of s with position (child, parent) toggled.  The caller must know the
/// result is acyclic (e.g. the position came from neighbor_toggles).
DagStructure toggled(const DagStructure& s, int child, int parent);

/// True iff every edge of s is an edge of t.  Throws on dimension mismatch.
bool is_subgraph(const DagStructure& s, const DagStructure& t);

/// Undirected support adj + adj^T (binary, since a DAG cannot hold both
/// orientations of a pair).
Eigen::MatrixXi skeleton(const DagStructure& s);

/// Uniform draw from the DAGs on d nodes.  For d <= cap this indexes the
/// exhaustive enumeration and is exactly uniform; for larger d it runs a
/// Metropolis chain with uniform target (toggle-one-edge proposal, acceptance
/// min(1, |N(S)|/|N(S')|)) for burn_in steps and is approximately uniform.
/// burn_in < 0 selects the default of 50 * d * d steps.
DagStructure sample_uniform_dag(int d, Rng& rng, int cap = kDefaultEnumerationCap,
                                std::int64_t burn_in = -1);

}  // namespace dagpost

#endif  // DAGPOST_DAG_HPP
