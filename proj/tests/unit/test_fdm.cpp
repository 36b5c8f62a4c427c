#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "pinnweigh/fdm.hpp"

using namespace pinnweigh;

namespace {

double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

int centre(const Grid& g) { return (g.n() - 1) / 2; }

}  // namespace

TEST_SUITE("fdm") {

TEST_CASE("conduction centre value") {
  for (int n : {11, 31}) {
    const Grid g(n);
    const auto sol = solve_conduction_gs(g, make_boundary(ProblemSpec::conduction(), g));
    CHECK(sol.converged);
    CHECK(sol.final_residual < 1e-6);
    CHECK(sol.fields[0](centre(g), centre(g)) == doctest::Approx(0.25).epsilon(1e-4));
  }
}

TEST_CASE("zero boundary gives zero") {
  const Grid g(9);
  const BoundarySpec bc{Field(g), Field(g), Field(g), Field(g)};
  const auto sol = solve_conduction_gs(g, bc);
  for (double v : sol.fields[0].values()) CHECK(v == 0.0);
  const Field d = solve_convdiff_direct(g, 5.0, bc);
  for (double v : d.values()) CHECK(v == 0.0);
}

TEST_CASE("convdiff at Pe = 0 reduces to conduction") {
  const Grid g(11);
  const auto bc = make_boundary(ProblemSpec::convdiff(1.0), g);
  const auto a = solve_conduction_gs(g, bc);
  const auto b = solve_convdiff_gs(g, 0.0, bc);
  CHECK(max_diff(a.fields[0], b.fields[0]) < 1e-10);
  const auto cbc = make_boundary(ProblemSpec::conduction(), g);
  CHECK(solve_convdiff_direct(g, 0.0, cbc)(5, 5) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("Gauss-Seidel agrees with the direct solve where it converges") {
  const Grid g(11);
  GaussSeidelConfig tight;
  tight.tol = 1e-13;
  for (double pe : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    const auto bc = make_boundary(ProblemSpec::convdiff(1.0), g);
    const auto gs = solve_convdiff_gs(g, pe, bc, tight);
    REQUIRE(gs.converged);
    CHECK(max_diff(gs.fields[0], solve_convdiff_direct(g, pe, bc)) < 1e-8);
  }
}

TEST_CASE("Gauss-Seidel reports divergence honestly at high Pe") {
  const Grid g(11);
  for (double pe : {10.0, 100.0}) {
    const auto sol = solve_convdiff_gs(g, pe, make_boundary(ProblemSpec::convdiff(pe), g));
    CHECK_FALSE(sol.converged);
    CHECK(sol.fields[0].all_finite());
    CHECK(sol.iterations < 1000000);
  }
}

TEST_CASE("direct solve residual") {
  for (int n : {11, 31, 51}) {
    const Grid g(n);
    for (double pe : {0.0, 1.0, 10.0, 100.0}) {
      const Field t = solve_convdiff_direct(g, pe, make_boundary(ProblemSpec::convdiff(1.0), g));
      CHECK(convdiff_stencil_residual(t, g, pe) < 1e-10);
    }
  }
}

TEST_CASE("below cell Peclet 2 the centreline profile is monotone") {
  const Grid g(31);
  for (double pe : {0.5, 1.0, 1.9}) {
    const Field t = solve_convdiff_direct(g, pe, make_boundary(ProblemSpec::convdiff(pe), g));
    for (int j = 1; j < g.n(); ++j) CHECK(t(15, j) >= t(15, j - 1));
  }
  // Above it the central scheme produces the familiar odd-even wiggles.
  const Field t = solve_convdiff_direct(g, 10.0, make_boundary(ProblemSpec::convdiff(10.0), g));
  double lowest = 0.0;
  for (double v : t.values()) lowest = std::min(lowest, v);
  CHECK(lowest < -0.1);
}

TEST_CASE("convergence record") {
  FdmSolution s;
  s.iterations = 12;
  s.final_residual = 3e-7;
  s.converged = true;
  std::stringstream ss;
  write_convergence_json(ss, s);
  const auto j = nlohmann::json::parse(ss.str());
  CHECK(j.at("iterations") == 12);
  CHECK(j.at("converged") == true);
  CHECK(j.at("final_residual").get<double>() == 3e-7);
}

TEST_CASE("cavity with a still lid") {
  const Grid g(11);
  CavityConfig cfg;
  cfg.lid_velocity = 0.0;
  const auto sol = solve_cavity_projection(g, cfg);
  CHECK(sol.converged);
  CHECK(sol.iterations == 1);
  for (const auto& f : sol.fields)
    for (double v : f.values()) CHECK(v == 0.0);
}

TEST_CASE("cavity steady state at Re = 100") {
  const Grid g(11);
  const auto sol = solve_cavity_projection(g, CavityConfig{});
  CHECK(sol.converged);
  CHECK(sol.final_residual < 1e-6);
  CHECK(sol.max_divergence < 1e-6);
  const Field& u = sol.field("u");
  CHECK(u(5, 10) == 1.0);
  CHECK(u(0, 10) == 1.0);
  CHECK(u(5, 0) == 0.0);
  CHECK(u(5, 5) < 0.0);  // return flow under the primary vortex
  double mean = 0.0;
  for (double v : sol.field("p").values()) mean += v;
  CHECK(std::abs(mean) < 1e-12);
  CHECK_THROWS(sol.field("T"));
}

TEST_CASE("cavity config") {
  const Grid g(31);
  CavityConfig cfg;
  CHECK(cfg.time_step(g) == doctest::Approx(0.8 * (1.0 / 30.0) / 4.0).epsilon(1e-14));
  cfg.re = 1.0;
  CHECK(cfg.time_step(g) == doctest::Approx(0.8 * (1.0 / 900.0) / 4.0).epsilon(1e-14));
  cfg.steady_tol = 0.0;
  CHECK_THROWS(cfg.validate());
  CavityConfig capped;
  capped.max_steps = 3;
  const auto sol = solve_cavity_projection(Grid(11), capped);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 3);
  CavityConfig stall;
  stall.max_poisson_sweeps = 1;
  CHECK_THROWS_WITH(solve_cavity_projection(Grid(11), stall), doctest::Contains("step 1"));
}

}
