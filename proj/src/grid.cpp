#include "pinnweigh/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pinnweigh {

Grid::Grid(int n) : n_(n), h_(0.0) {
  if (n < 3) throw InvalidGrid("grid needs at least 3 nodes per axis, got " + std::to_string(n));
  h_ = 1.0 / (n - 1);

  interior_.reserve(static_cast<std::size_t>(n - 2) * (n - 2));
  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j) interior_.push_back({i, j});

  const int last = n - 1;
  boundary_.reserve(static_cast<std::size_t>(4) * last);
  for (int i = 0; i < last; ++i) boundary_.push_back({i, 0});
  for (int j = 0; j < last; ++j) boundary_.push_back({last, j});
  for (int i = last; i > 0; --i) boundary_.push_back({i, last});
  for (int j = last; j > 0; --j) boundary_.push_back({0, j});

  edge_nodes_.reserve(static_cast<std::size_t>(4) * (n - 2));
  for (int i = 1; i < last; ++i) edge_nodes_.push_back({{i, 0}, Edge::Bottom, 0, 1});
  for (int j = 1; j < last; ++j) edge_nodes_.push_back({{last, j}, Edge::Right, -1, 0});
  for (int i = last - 1; i > 0; --i) edge_nodes_.push_back({{i, last}, Edge::Top, 0, -1});
  for (int j = last - 1; j > 0; --j) edge_nodes_.push_back({{0, j}, Edge::Left, 1, 0});
}

Grid make_grid(int n) { return Grid(n); }

bool Field::all_finite() const noexcept {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

InteriorField laplacian_cds(const Field& f, const Grid& g) {
  const int n = g.n();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  InteriorField out(n);
  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j)
      out(i, j) = (f(i + 1, j) + f(i - 1, j) + f(i, j + 1) + f(i, j - 1) - 4.0 * f(i, j)) * inv_h2;
  return out;
}

InteriorField gradient_central(const Field& f, const Grid& g, Axis axis) {
  const int n = g.n();
  const double inv_2h = 1.0 / (2.0 * g.h());
  InteriorField out(n);
  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j)
      out(i, j) = axis == Axis::X ? (f(i + 1, j) - f(i - 1, j)) * inv_2h
                                  : (f(i, j + 1) - f(i, j - 1)) * inv_2h;
  return out;
}

std::vector<double> boundary_normal_derivative(const Field& f, const Grid& g) {
  const double inv_2h = 1.0 / (2.0 * g.h());
  std::vector<double> out;
  out.reserve(g.edge_nodes().size());
  for (const auto& e : g.edge_nodes()) {
    const int i = e.node.i, j = e.node.j;
    const double f0 = f(i, j);
    const double f1 = f(i + e.di, j + e.dj);
    const double f2 = f(i + 2 * e.di, j + 2 * e.dj);
    out.push_back((-3.0 * f0 + 4.0 * f1 - f2) * inv_2h);
  }
  return out;
}

double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("mse: length mismatch (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  if (a.empty()) throw std::invalid_argument("mse: empty input");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

void write_field_csv(std::ostream& os, const Field& f, const Grid& g) {
  if (f.n() != g.n()) throw std::invalid_argument("write_field_csv: field/grid size mismatch");
  os << "x,y,value\n";
  char line[96];
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", g.coord(i), g.coord(j), f(i, j));
      os << line;
    }
}

void write_field_csv(const std::string& path, const Field& f, const Grid& g) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_field_csv(os, f, g);
}

Field read_field_csv(std::istream& is, const Grid& g) {
  std::string line;
  if (!std::getline(is, line) || line != "x,y,value")
    throw std::runtime_error("field csv: missing `x,y,value` header");
  Field f(g);
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) {
      if (!std::getline(is, line)) throw std::runtime_error("field csv: too few rows");
      double x = 0, y = 0, v = 0;
      if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &v) != 3)
        throw std::runtime_error("field csv: malformed row: " + line);
      f(i, j) = v;
    }
  return f;
}

Field read_field_csv(const std::string& path, const Grid& g) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_field_csv(is, g);
}

}  // namespace pinnweigh
