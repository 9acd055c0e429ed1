#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace ipslab {

enum class Boundary { periodic, killed };
enum class LatticeKind { torus, tree_ball, hierarchical };

using Coord = std::vector<int>;

/// Finite window of a countable group. Sites carry coordinates:
///  - torus: d integer coordinates in [-(L/2), L-1-(L/2)], origin at 0;
///  - hierarchical: `depth` digits in [0, N), digit k has weight N^k;
///  - tree_ball: the path of child labels from the root (no group structure).
class GroupLattice {
 public:
  static GroupLattice torus(int d, int L, Boundary boundary = Boundary::periodic);
  static GroupLattice tree_ball(int d, int depth);
  static GroupLattice hierarchical(int N, int depth);

  [[nodiscard]] LatticeKind kind() const { return kind_; }
  [[nodiscard]] Boundary boundary() const { return boundary_; }
  [[nodiscard]] std::size_t size() const { return coords_.size(); }
  [[nodiscard]] std::size_t origin() const { return origin_; }
  [[nodiscard]] int dim() const { return d_; }
  [[nodiscard]] int side() const { return L_; }
  [[nodiscard]] int depth() const { return depth_; }
  [[nodiscard]] std::string describe() const;

  /// True when the window is closed under the group operation.
  [[nodiscard]] bool group_closed() const {
    return kind_ == LatticeKind::hierarchical ||
           (kind_ == LatticeKind::torus && boundary_ == Boundary::periodic);
  }

  [[nodiscard]] const Coord& coord(std::size_t i) const { return coords_[i]; }
  /// Site with the given coordinates, or nullopt if it lies outside the window.
  [[nodiscard]] std::optional<std::size_t> find(const Coord& c) const;

  /// i * j when defined inside the window; nullopt for tree balls or when the
  /// product leaves a killed window.
  [[nodiscard]] std::optional<std::size_t> op(std::size_t i, std::size_t j) const;
  [[nodiscard]] std::optional<std::size_t> inverse(std::size_t i) const;
  /// Site reached from i by the group element with coordinates `offset`
  /// (for trees `offset` is ignored; use neighbors()).
  [[nodiscard]] std::optional<std::size_t> shift(std::size_t i, const Coord& offset) const;

  /// Graph distance for tori and trees, hierarchical distance otherwise.
  [[nodiscard]] int distance(std::size_t i, std::size_t j) const;
  /// Unit-distance neighbours inside the window.
  [[nodiscard]] const std::vector<std::size_t>& neighbors(std::size_t i) const { return adj_[i]; }
  /// Number of unit-distance neighbours in the infinite graph.
  [[nodiscard]] std::size_t full_degree(std::size_t i) const;

 private:
  LatticeKind kind_ = LatticeKind::torus;
  Boundary boundary_ = Boundary::periodic;
  int d_ = 1;
  int L_ = 0;
  int depth_ = 0;
  int lo_ = 0;
  std::size_t origin_ = 0;
  std::vector<Coord> coords_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> tree_level_;
  std::vector<std::size_t> tree_parent_;

  [[nodiscard]] std::size_t torus_index(const Coord& c) const;
  void build_adjacency();
};

/// Translation-invariant rates a(i,j) restricted to a window. Mass pointing
/// outside a killed window is kept per site as `leak`.
struct Kernel {
  std::size_t n = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;  // sorted by target
  std::vector<double> leak;
  double total = 0.0;  // |a|
  std::vector<std::pair<Coord, double>> base;

  [[nodiscard]] double rate(std::size_t i, std::size_t j) const;
  [[nodiscard]] double row_sum(std::size_t i) const;
  /// Coordinate list (i, j, rate), row-major.
  [[nodiscard]] std::vector<std::tuple<std::size_t, std::size_t, double>> triplets() const;
  [[nodiscard]] std::string to_csv() const;
};

/// Base rates a(0, j) given by group-element coordinates. On trees every entry
/// is read as a per-edge rate to each neighbour (only one entry allowed).
Kernel kernel_from_base(const GroupLattice& lat, const std::vector<std::pair<Coord, double>>& base);
/// a(0, +-e_k) = rate for k = 1..d.
Kernel nearest_neighbor_kernel(const GroupLattice& lat, double rate);
/// n sites with no migration at all.
Kernel isolated_kernel(std::size_t n);
/// 1D kernel with a(0,1) = right and a(0,-1) = left.
Kernel drift_kernel_1d(const GroupLattice& lat, double right, double left);
/// Hierarchical kernel a(xi, eta) = sum_{k >= |xi-eta|} c_{k-1} / N^{2k-1}, tail below 1e-12.
Kernel hierarchical_kernel(const GroupLattice& lat, const std::function<double(int)>& c);
double hierarchical_rate(int N, int dist, const std::function<double(int)>& c, double tol = 1e-12);

Kernel reverse_kernel(const Kernel& k);
/// Kernels agree entry-wise within `tol` (rows, leak, total).
bool same_kernel(const Kernel& a, const Kernel& b, double tol = 0.0);
/// Scans a(ki,kj) = a(i,j) over all k on a group-closed window; returns the
/// largest deviation.
double translation_defect(const GroupLattice& lat, const Kernel& k);

struct LSWeights {
  std::vector<double> gamma;
  double K = 0.0;
};

/// gamma = sum_k e^{-eps k} P^k phi with P = a_s/|a_s|; K is the smallest
/// constant with sum_j a_s(i,j) gamma_j <= K gamma_i at every site.
LSWeights ls_weights(const GroupLattice& lat, const Kernel& k, double eps,
                     const std::vector<double>& seed = {});
/// max_i (sum_j a_s(i,j) g_j) / g_i.
double ls_domination_constant(const Kernel& k, const std::vector<double>& g);

enum class Recurrence { recurrent, transient, undetermined };
const char* to_string(Recurrence r);

struct DkSeries {
  std::vector<double> d;
  std::vector<double> partial;  // partial sums of 1/d_k
  Recurrence verdict = Recurrence::undetermined;
  double tail_estimate = 0.0;   // of sum_{k > kmax} 1/d_k when transient
};

/// d_k = sum_n c_{k+n}/N^n for k = 0..kmax.
DkSeries dk_series(const std::function<double(int)>& c, int N, int kmax);

}  // namespace ipslab
