#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pinnweigh/grid.hpp"
#include "pinnweigh/problems.hpp"

namespace pinnweigh {

struct FdmSolution {
  std::vector<std::string> names;  // "T" or "u", "v", "p"
  std::vector<Field> fields;       // on the node grid
  long iterations = 0;             // sweeps (GS) or time steps (projection)
  bool converged = false;
  double final_residual = 0.0;     // the stopping metric at exit
  double max_divergence = 0.0;     // cavity only: max |div v| over cells

  const Field& field(const std::string& name) const;
};

/// {"iterations": .., "final_residual": .., "converged": ..}
void write_convergence_json(std::ostream& os, const FdmSolution& s);

struct GaussSeidelConfig {
  double tol = 1e-6;         // on max |T^{n+1} - T^n| / (1e-20 + |T^n|)
  long max_sweeps = 1000000;
  double blowup_limit = 1e100;  // stop early once |T| exceeds this
};

/// Five-point Jacobi-form update swept in place until the relative-change criterion holds.
FdmSolution solve_conduction_gs(const Grid& g, const BoundarySpec& bc,
                                const GaussSeidelConfig& cfg = {});

/// Central-difference convection-diffusion sweep; reports non-convergence honestly.
FdmSolution solve_convdiff_gs(const Grid& g, double pe, const BoundarySpec& bc,
                              const GaussSeidelConfig& cfg = {});

/// Same linear system as solve_convdiff_gs, solved by sparse LU.
Field solve_convdiff_direct(const Grid& g, double pe, const BoundarySpec& bc);

/// Max-norm of T - (neighbour sum - Pe/2 * (east - west + north - south)) / 4 on the interior.
double convdiff_stencil_residual(const Field& t, const Grid& g, double pe);

struct CavityConfig {
  double re = 100.0;
  double dt = 0.0;  // 0 selects 0.8 * min(Re h^2 / 4, h / 4)
  double steady_tol = 1e-6;
  double poisson_tol = 1e-8;
  long max_steps = 500000;
  long max_poisson_sweeps = 1000000;
  double lid_velocity = 1.0;

  double time_step(const Grid& g) const;
  void validate() const;
};

/// Staggered-grid projection method marched to steady state, then collocated
/// onto the nodes (pressure shifted to zero node mean).
FdmSolution solve_cavity_projection(const Grid& g, const CavityConfig& cfg);

/// Reference solution for a problem: conduction GS, convdiff direct solve, cavity projection.
FdmSolution reference_solution(const ProblemSpec& spec, const Grid& g);

}  // namespace pinnweigh
