#include "pinnweigh/fdm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "json.hpp"

namespace pinnweigh {

const Field& FdmSolution::field(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return fields[k];
  throw std::out_of_range("FdmSolution has no field '" + name + "'");
}

void write_convergence_json(std::ostream& os, const FdmSolution& s) {
  nlohmann::json j;
  j["iterations"] = s.iterations;
  j["final_residual"] = s.final_residual;
  j["converged"] = s.converged;
  os << j.dump() << '\n';
}

namespace {

Field with_boundary(const Grid& g, const Field& data) {
  if (data.n() != g.n()) throw std::invalid_argument("boundary data does not match the grid");
  Field t(g);
  for (const auto& b : g.boundary()) t(b.i, b.j) = data(b.i, b.j);
  return t;
}

// In-place sweep of T = [(1 - Pe/2)(E + N) + (1 + Pe/2)(W + S)] / 4.
FdmSolution gauss_seidel(const Grid& g, double pe, const BoundarySpec& bc,
                         const GaussSeidelConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("gauss-seidel: tol must be > 0");
  if (cfg.max_sweeps < 1) throw std::invalid_argument("gauss-seidel: max_sweeps must be >= 1");
  const int n = g.n();
  const double a_plus = 0.25 * (1.0 - 0.5 * pe);
  const double a_minus = 0.25 * (1.0 + 0.5 * pe);

  FdmSolution sol;
  sol.names = {"T"};
  Field t = with_boundary(g, bc.g);
  for (long sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    double change = 0.0;
    double largest = 0.0;
    for (int i = 1; i < n - 1; ++i) {
      for (int j = 1; j < n - 1; ++j) {
        const double old = t(i, j);
        const double next =
            a_plus * (t(i + 1, j) + t(i, j + 1)) + a_minus * (t(i - 1, j) + t(i, j - 1));
        t(i, j) = next;
        change = std::max(change, std::abs(next - old) / (1e-20 + std::abs(old)));
        largest = std::max(largest, std::abs(next));
      }
    }
    sol.iterations = sweep;
    sol.final_residual = change;
    if (!std::isfinite(largest) || largest > cfg.blowup_limit) break;
    if (change < cfg.tol) {
      sol.converged = true;
      break;
    }
  }
  sol.fields = {std::move(t)};
  return sol;
}

}  // namespace

FdmSolution solve_conduction_gs(const Grid& g, const BoundarySpec& bc,
                                const GaussSeidelConfig& cfg) {
  return gauss_seidel(g, 0.0, bc, cfg);
}

FdmSolution solve_convdiff_gs(const Grid& g, double pe, const BoundarySpec& bc,
                              const GaussSeidelConfig& cfg) {
  if (!std::isfinite(pe) || pe < 0.0) throw std::invalid_argument("convdiff: Pe must be >= 0");
  return gauss_seidel(g, pe, bc, cfg);
}

Field solve_convdiff_direct(const Grid& g, double pe, const BoundarySpec& bc) {
  if (!std::isfinite(pe) || pe < 0.0) throw std::invalid_argument("convdiff: Pe must be >= 0");
  const int n = g.n();
  const int m = n - 2;
  const auto unknown = [m](int i, int j) { return (i - 1) * m + (j - 1); };
  const double c_plus = -(1.0 - 0.5 * pe);   // east, north
  const double c_minus = -(1.0 + 0.5 * pe);  // west, south

  Field t = with_boundary(g, bc.g);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(5) * m * m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m) * m);

  for (int i = 1; i < n - 1; ++i) {
    for (int j = 1; j < n - 1; ++j) {
      const int row = unknown(i, j);
      triplets.emplace_back(row, row, 4.0);
      const int ni[4] = {i + 1, i, i - 1, i};
      const int nj[4] = {j, j + 1, j, j - 1};
      const double coef[4] = {c_plus, c_plus, c_minus, c_minus};
      for (int k = 0; k < 4; ++k) {
        if (g.is_boundary(ni[k], nj[k]))
          rhs[row] -= coef[k] * t(ni[k], nj[k]);
        else
          triplets.emplace_back(row, unknown(ni[k], nj[k]), coef[k]);
      }
    }
  }

  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(m) * m, static_cast<Eigen::Index>(m) * m);
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve_convdiff_direct: factorization failed (singular system)");
  const Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw std::runtime_error("solve_convdiff_direct: solve failed");

  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j) t(i, j) = x[unknown(i, j)];
  return t;
}

double convdiff_stencil_residual(const Field& t, const Grid& g, double pe) {
  const int n = g.n();
  double worst = 0.0;
  for (int i = 1; i < n - 1; ++i) {
    for (int j = 1; j < n - 1; ++j) {
      const double sum = t(i + 1, j) + t(i - 1, j) + t(i, j + 1) + t(i, j - 1);
      const double conv = t(i + 1, j) - t(i - 1, j) + t(i, j + 1) - t(i, j - 1);
      worst = std::max(worst, std::abs(t(i, j) - 0.25 * (sum - 0.5 * pe * conv)));
    }
  }
  return worst;
}

double CavityConfig::time_step(const Grid& g) const {
  if (dt > 0.0) return dt;
  const double h = g.h();
  return 0.8 * std::min(re * h * h / 4.0, h / 4.0);
}

void CavityConfig::validate() const {
  if (!(re > 0.0) || !std::isfinite(re)) throw std::invalid_argument("cavity: Re must be > 0");
  if (dt < 0.0 || !std::isfinite(dt)) throw std::invalid_argument("cavity: dt must be > 0");
  if (!(steady_tol > 0.0) || !(poisson_tol > 0.0))
    throw std::invalid_argument("cavity: tolerances must be > 0");
  if (max_steps < 1 || max_poisson_sweeps < 1)
    throw std::invalid_argument("cavity: step limits must be >= 1");
}

namespace {

// Staggered arrays over nc x nc cells of width h.
//   u(i, j): x = i h,        y = (j + 1/2) h,  i in [0, nc],  j in [-1, nc]  (rows -1, nc are ghosts)
//   v(i, j): x = (i + 1/2) h, y = j h,         i in [-1, nc], j in [0, nc]   (columns -1, nc are ghosts)
//   p(i, j): cell centres,                     i, j in [0, nc)
class Staggered {
 public:
  explicit Staggered(int nc)
      : nc_(nc),
        u_(static_cast<std::size_t>(nc + 1) * (nc + 2), 0.0),
        v_(static_cast<std::size_t>(nc + 2) * (nc + 1), 0.0),
        p_(static_cast<std::size_t>(nc) * nc, 0.0) {}

  int nc() const { return nc_; }
  double& u(int i, int j) { return u_[static_cast<std::size_t>(i) * (nc_ + 2) + (j + 1)]; }
  double u(int i, int j) const { return u_[static_cast<std::size_t>(i) * (nc_ + 2) + (j + 1)]; }
  double& v(int i, int j) { return v_[static_cast<std::size_t>(i + 1) * (nc_ + 1) + j]; }
  double v(int i, int j) const { return v_[static_cast<std::size_t>(i + 1) * (nc_ + 1) + j]; }
  double& p(int i, int j) { return p_[static_cast<std::size_t>(i) * nc_ + j]; }
  double p(int i, int j) const { return p_[static_cast<std::size_t>(i) * nc_ + j]; }

  // No-slip walls, moving lid at the top; ghosts mirror so the face average hits the wall value.
  void apply_velocity_bc(double lid) {
    for (int j = 0; j < nc_; ++j) {
      u(0, j) = 0.0;
      u(nc_, j) = 0.0;
    }
    for (int i = 0; i <= nc_; ++i) {
      u(i, -1) = -u(i, 0);
      u(i, nc_) = 2.0 * lid - u(i, nc_ - 1);
    }
    for (int i = 0; i < nc_; ++i) {
      v(i, 0) = 0.0;
      v(i, nc_) = 0.0;
    }
    for (int j = 0; j <= nc_; ++j) {
      v(-1, j) = -v(0, j);
      v(nc_, j) = -v(nc_ - 1, j);
    }
  }

  double divergence(int i, int j, double h) const {
    return (u(i + 1, j) - u(i, j) + v(i, j + 1) - v(i, j)) / h;
  }

  std::vector<double>& u_data() { return u_; }
  std::vector<double>& v_data() { return v_; }
  const std::vector<double>& u_data() const { return u_; }
  const std::vector<double>& v_data() const { return v_; }

 private:
  int nc_;
  std::vector<double> u_, v_, p_;
};

// Explicit momentum update with -grad p^n (v*), then +grad p^n added back (v**).
// The two pressure terms cancel exactly, so v** is written directly but the
// pressure terms are kept to mirror the fractional-step equations.
void advance_momentum(const Staggered& s, Staggered& next, double dt, double re, double h) {
  const int nc = s.nc();
  const double inv2h = 1.0 / (2.0 * h);
  const double invh2 = 1.0 / (h * h);
  const double nu = 1.0 / re;

  for (int i = 1; i < nc; ++i) {
    for (int j = 0; j < nc; ++j) {
      const double uc = s.u(i, j);
      const double vbar = 0.25 * (s.v(i - 1, j) + s.v(i, j) + s.v(i - 1, j + 1) + s.v(i, j + 1));
      const double dudx = (s.u(i + 1, j) - s.u(i - 1, j)) * inv2h;
      const double dudy = (s.u(i, j + 1) - s.u(i, j - 1)) * inv2h;
      const double lap = (s.u(i + 1, j) + s.u(i - 1, j) + s.u(i, j + 1) + s.u(i, j - 1) - 4.0 * uc) * invh2;
      const double dpdx = (s.p(i, j) - s.p(i - 1, j)) / h;
      const double star = uc + dt * (-(uc * dudx + vbar * dudy) - dpdx + nu * lap);
      next.u(i, j) = star + dt * dpdx;
    }
  }
  for (int i = 0; i < nc; ++i) {
    for (int j = 1; j < nc; ++j) {
      const double vc = s.v(i, j);
      const double ubar = 0.25 * (s.u(i, j - 1) + s.u(i + 1, j - 1) + s.u(i, j) + s.u(i + 1, j));
      const double dvdx = (s.v(i + 1, j) - s.v(i - 1, j)) * inv2h;
      const double dvdy = (s.v(i, j + 1) - s.v(i, j - 1)) * inv2h;
      const double lap = (s.v(i + 1, j) + s.v(i - 1, j) + s.v(i, j + 1) + s.v(i, j - 1) - 4.0 * vc) * invh2;
      const double dpdy = (s.p(i, j) - s.p(i, j - 1)) / h;
      const double star = vc + dt * (-(ubar * dvdx + vc * dvdy) - dpdy + nu * lap);
      next.v(i, j) = star + dt * dpdy;
    }
  }
}

// Gauss-Seidel on lap p = div(v**)/dt with zero normal gradient at the walls.
long solve_pressure(Staggered& s, double dt, double h, double tol, long max_sweeps, long step) {
  const int nc = s.nc();
  std::vector<double> rhs(static_cast<std::size_t>(nc) * nc);
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nc; ++j) rhs[static_cast<std::size_t>(i) * nc + j] = h * h * s.divergence(i, j, h) / dt;

  for (long sweep = 1; sweep <= max_sweeps; ++sweep) {
    double change = 0.0;
    for (int i = 0; i < nc; ++i) {
      for (int j = 0; j < nc; ++j) {
        double sum = 0.0;
        int count = 0;
        if (i > 0) sum += s.p(i - 1, j), ++count;
        if (i < nc - 1) sum += s.p(i + 1, j), ++count;
        if (j > 0) sum += s.p(i, j - 1), ++count;
        if (j < nc - 1) sum += s.p(i, j + 1), ++count;
        const double next = (sum - rhs[static_cast<std::size_t>(i) * nc + j]) / count;
        change = std::max(change, std::abs(next - s.p(i, j)));
        s.p(i, j) = next;
      }
    }
    if (!std::isfinite(change)) break;
    if (change < tol) {
      double mean = 0.0;
      for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nc; ++j) mean += s.p(i, j);
      mean /= static_cast<double>(nc) * nc;
      for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nc; ++j) s.p(i, j) -= mean;
      return sweep;
    }
  }
  throw std::runtime_error("cavity: pressure Poisson solve stalled at step " + std::to_string(step));
}

void project(Staggered& s, double dt, double h) {
  const int nc = s.nc();
  for (int i = 1; i < nc; ++i)
    for (int j = 0; j < nc; ++j) s.u(i, j) -= dt * (s.p(i, j) - s.p(i - 1, j)) / h;
  for (int i = 0; i < nc; ++i)
    for (int j = 1; j < nc; ++j) s.v(i, j) -= dt * (s.p(i, j) - s.p(i, j - 1)) / h;
}

double max_change(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

std::vector<Field> collocate(const Staggered& s, const Grid& g, double lid) {
  const int n = g.n();
  const int nc = s.nc();
  Field u(g), v(g), p(g);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      u(a, b) = 0.5 * (s.u(a, b - 1) + s.u(a, b));
      v(a, b) = 0.5 * (s.v(a - 1, b) + s.v(a, b));
      double sum = 0.0;
      int count = 0;
      for (int ci = a - 1; ci <= a; ++ci)
        for (int cj = b - 1; cj <= b; ++cj)
          if (ci >= 0 && ci < nc && cj >= 0 && cj < nc) sum += s.p(ci, cj), ++count;
      p(a, b) = sum / count;
    }
  }
  for (const auto& node : g.boundary()) {
    u(node.i, node.j) = node.j == n - 1 ? lid : 0.0;
    v(node.i, node.j) = 0.0;
  }
  double mean = 0.0;
  for (double x : p.values()) mean += x;
  mean /= static_cast<double>(p.size());
  for (double& x : p.values()) x -= mean;
  return {std::move(u), std::move(v), std::move(p)};
}

}  // namespace

FdmSolution solve_cavity_projection(const Grid& g, const CavityConfig& cfg) {
  cfg.validate();
  const int nc = g.n() - 1;
  const double h = g.h();
  const double dt = cfg.time_step(g);

  Staggered s(nc);
  s.apply_velocity_bc(cfg.lid_velocity);
  Staggered next = s;

  FdmSolution sol;
  sol.names = {"u", "v", "p"};
  for (long step = 1; step <= cfg.max_steps; ++step) {
    advance_momentum(s, next, dt, cfg.re, h);
    next.apply_velocity_bc(cfg.lid_velocity);
    solve_pressure(next, dt, h, cfg.poisson_tol, cfg.max_poisson_sweeps, step);
    project(next, dt, h);
    next.apply_velocity_bc(cfg.lid_velocity);

    const double rate =
        std::max(max_change(next.u_data(), s.u_data()), max_change(next.v_data(), s.v_data())) / dt;
    std::swap(s, next);
    sol.iterations = step;
    sol.final_residual = rate;
    if (!std::isfinite(rate)) throw std::runtime_error("cavity: velocity blew up at step " + std::to_string(step));
    if (rate < cfg.steady_tol) {
      sol.converged = true;
      break;
    }
  }

  double div = 0.0;
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nc; ++j) div = std::max(div, std::abs(s.divergence(i, j, h)));
  sol.max_divergence = div;
  sol.fields = collocate(s, g, cfg.lid_velocity);
  return sol;
}

FdmSolution reference_solution(const ProblemSpec& spec, const Grid& g) {
  spec.validate();
  const BoundarySpec bc = make_boundary(spec, g);
  switch (spec.kind) {
    case ProblemKind::Conduction:
      return solve_conduction_gs(g, bc);
    case ProblemKind::ConvDiff: {
      FdmSolution sol;
      sol.names = {"T"};
      sol.fields = {solve_convdiff_direct(g, spec.pe, bc)};
      sol.iterations = 1;
      sol.final_residual = convdiff_stencil_residual(sol.fields[0], g, spec.pe);
      sol.converged = true;
      return sol;
    }
    case ProblemKind::Cavity: {
      CavityConfig cfg;
      cfg.re = spec.re;
      return solve_cavity_projection(g, cfg);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace pinnweigh
