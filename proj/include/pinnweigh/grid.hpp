#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinnweigh {

class InvalidGrid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct NodeIndex {
  int i = 0;  // x direction
  int j = 0;  // y direction
  friend bool operator==(const NodeIndex&, const NodeIndex&) = default;
};

enum class Edge { Bottom, Right, Top, Left };

/// A non-corner boundary node together with the edge it sits on.
/// (di, dj) is the unit step along the inward normal.
struct EdgeNode {
  NodeIndex node;
  Edge edge;
  int di = 0;
  int dj = 0;
};

/// Uniform N x N node lattice on the unit square with spacing h = 1/(N-1).
/// Node (i, j) sits at (x, y) = (i h, j h); storage is row-major in i.
class Grid {
 public:
  explicit Grid(int n);

  int n() const noexcept { return n_; }
  double h() const noexcept { return h_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * n_ + j;
  }
  double coord(int i) const noexcept { return static_cast<double>(i) / (n_ - 1); }

  bool is_boundary(int i, int j) const noexcept {
    return i == 0 || j == 0 || i == n_ - 1 || j == n_ - 1;
  }
  bool is_corner(int i, int j) const noexcept {
    return (i == 0 || i == n_ - 1) && (j == 0 || j == n_ - 1);
  }

  /// Interior nodes 1 <= i, j <= N-2 in row-major order.
  const std::vector<NodeIndex>& interior() const noexcept { return interior_; }
  /// All 4(N-1) boundary nodes, each corner once, counter-clockwise from (0,0).
  const std::vector<NodeIndex>& boundary() const noexcept { return boundary_; }
  /// The 4(N-2) boundary nodes that are not corners.
  const std::vector<EdgeNode>& edge_nodes() const noexcept { return edge_nodes_; }

 private:
  int n_;
  double h_;
  std::vector<NodeIndex> interior_;
  std::vector<NodeIndex> boundary_;
  std::vector<EdgeNode> edge_nodes_;
};

Grid make_grid(int n);

/// Scalar values on every node of an N x N grid.
class Field {
 public:
  Field() = default;
  explicit Field(int n, double value = 0.0)
      : n_(n), values_(static_cast<std::size_t>(n) * n, value) {}
  explicit Field(const Grid& g, double value = 0.0) : Field(g.n(), value) {}

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(int i, int j) noexcept { return values_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const noexcept {
    return values_[static_cast<std::size_t>(i) * n_ + j];
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Field&, const Field&) = default;

 private:
  int n_ = 0;
  std::vector<double> values_;
};

/// Values on the interior nodes only, addressed with global (i, j).
class InteriorField {
 public:
  InteriorField() = default;
  explicit InteriorField(int n) : n_(n), values_(static_cast<std::size_t>(n - 2) * (n - 2), 0.0) {}

  int n() const noexcept { return n_; }
  double& operator()(int i, int j) noexcept { return values_[offset(i, j)]; }
  double operator()(int i, int j) const noexcept { return values_[offset(i, j)]; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const InteriorField&, const InteriorField&) = default;

 private:
  std::size_t offset(int i, int j) const noexcept {
    return static_cast<std::size_t>(i - 1) * (n_ - 2) + (j - 1);
  }
  int n_ = 0;
  std::vector<double> values_;
};

enum class Axis { X, Y };

template <class F>
Field sample(const Grid& g, F&& f) {
  Field out(g);
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) out(i, j) = f(g.coord(i), g.coord(j));
  return out;
}

/// Five-point Laplacian at interior nodes.
InteriorField laplacian_cds(const Field& f, const Grid& g);

/// Second-order central first derivative at interior nodes.
InteriorField gradient_central(const Field& f, const Grid& g, Axis axis);

/// Inward-normal derivative (-3 f0 + 4 f1 - f2) / (2h) at each non-corner
/// boundary node, aligned with g.edge_nodes().
std::vector<double> boundary_normal_derivative(const Field& f, const Grid& g);

/// Mean squared difference; throws std::invalid_argument on length mismatch or empty input.
double mse(std::span<const double> a, std::span<const double> b);

// Field CSV: header `x,y,value`, one row per node in storage order, %.17g.
void write_field_csv(std::ostream& os, const Field& f, const Grid& g);
void write_field_csv(const std::string& path, const Field& f, const Grid& g);
Field read_field_csv(std::istream& is, const Grid& g);
Field read_field_csv(const std::string& path, const Grid& g);

}  // namespace pinnweigh
