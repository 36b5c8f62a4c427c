#include <cmath>

#include "doctest.h"
#include "pinnweigh/fdm.hpp"
#include "pinnweigh/problems.hpp"

using namespace pinnweigh;

TEST_SUITE("problems") {

TEST_CASE("boundary data and corner precedence") {
  const Grid g(11);
  const auto cond = make_boundary(ProblemSpec::conduction(), g);
  CHECK(cond.g(0, 10) == 1.0);
  CHECK(cond.g(10, 10) == 1.0);
  CHECK(cond.g(0, 0) == 0.0);
  CHECK(cond.g(10, 5) == 0.0);
  const auto cd = make_boundary(ProblemSpec::convdiff(10.0), g);
  CHECK(cd.g(0, 5) == 0.0);
  CHECK(cd.g(5, 0) == 0.0);
  CHECK(cd.g(10, 5) == 1.0);
  CHECK(cd.g(5, 10) == 1.0);
  CHECK(cd.g(0, 10) == 1.0);
  CHECK(cd.g(10, 0) == 1.0);
  CHECK(cd.g(0, 0) == 0.0);
  const auto cav = make_boundary(ProblemSpec::cavity(100.0), g);
  CHECK(cav.g_u(0, 10) == 1.0);
  CHECK(cav.g_u(10, 10) == 1.0);
  CHECK(cav.g_u(10, 9) == 0.0);
  for (double v : cav.g_v.values()) CHECK(v == 0.0);
  for (double v : cav.g_p.values()) CHECK(v == 0.0);
}

TEST_CASE("conduction components") {
  const Grid g(11);
  const auto bc = make_boundary(ProblemSpec::conduction(), g);
  const auto zero = conduction_components(Field(g), g, bc);
  CHECK(zero.at(Component::DE) == 0.0);
  CHECK(zero.at(Component::DBC) == doctest::Approx(11.0 / 40.0).epsilon(1e-15));
  const auto bilinear = conduction_components(sample(g, [](double x, double y) { return x * y; }), g, bc);
  CHECK(bilinear.at(Component::DE) < 1e-20);

  GaussSeidelConfig tight;
  tight.tol = 1e-13;
  const auto fdm = solve_conduction_gs(g, bc, tight);
  CHECK(conduction_components(fdm.fields[0], g, bc).at(Component::DE) < 1e-12);
}

TEST_CASE("convdiff components") {
  const Grid g(11);
  const auto spec = ProblemSpec::convdiff(10.0);
  const auto bc = make_boundary(spec, g);
  CHECK(convdiff_components(Field(g, 0.4), g, spec, bc).at(Component::DE) == 0.0);

  const auto t = sample(g, [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y); });
  const auto tiny = interior_residuals({t}, g, ProblemSpec::convdiff(1e-300));
  const auto cond = interior_residuals({t}, g, ProblemSpec::conduction());
  CHECK(tiny[0] == cond[0]);

  const Field direct = solve_convdiff_direct(g, 10.0, bc);
  CHECK(convdiff_components(direct, g, spec, bc).at(Component::DE) < 1e-12);
  CHECK_THROWS(convdiff_components(t, g, ProblemSpec::conduction(), bc));
}

TEST_CASE("cavity components") {
  const Grid g(11);
  const auto spec = ProblemSpec::cavity(100.0);
  const auto bc = make_boundary(spec, g);
  const auto zero = cavity_components(Field(g), Field(g), Field(g), g, spec, bc);
  CHECK(zero.at(Component::NSx) == 0.0);
  CHECK(zero.at(Component::NSy) == 0.0);
  CHECK(zero.at(Component::C) == 0.0);
  CHECK(zero.at(Component::NBC) == 0.0);
  CHECK(zero.at(Component::DBC) == doctest::Approx(11.0 / 40.0).epsilon(1e-15));

  // Rigid rotation: divergence-free, momentum residual equals the convective term.
  const auto u = sample(g, [](double, double y) { return y; });
  const auto v = sample(g, [](double x, double) { return -x; });
  const auto rot = cavity_components(u, v, Field(g), g, ProblemSpec::cavity(1e300), bc);
  CHECK(rot.at(Component::C) < 1e-28);
  const auto r = interior_residuals({u, v, Field(g)}, g, ProblemSpec::cavity(1e300));
  for (const auto& n : g.interior()) {
    CHECK(r[0](n.i, n.j) == doctest::Approx(-g.coord(n.i)).epsilon(1e-12));
    CHECK(r[1](n.i, n.j) == doctest::Approx(-g.coord(n.j)).epsilon(1e-12));
  }
}

TEST_CASE("projection solution is discretely divergence-free at the nodes") {
  const Grid g(31);
  CavityConfig cfg;
  const auto sol = solve_cavity_projection(g, cfg);
  REQUIRE(sol.converged);
  const auto bc = make_boundary(ProblemSpec::cavity(100.0), g);
  const auto c = cavity_components(sol.field("u"), sol.field("v"), sol.field("p"), g, ProblemSpec::cavity(100.0), bc);
  CHECK(c.at(Component::C) < 1e-6);
  CHECK(c.at(Component::DBC) == 0.0);
}

TEST_CASE("weight examples") {
  const auto nm = compute_weights(ProblemSpec::conduction(), Scheme::NM, Grid(11));
  CHECK(nm.lambdas.at(Component::DE) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(nm.lambdas.at(Component::DBC) == 1.0);

  const auto cd = compute_weights(ProblemSpec::convdiff(100.0), Scheme::NM, Grid(31));
  CHECK(cd.lambdas.at(Component::DE) == doctest::Approx(1.0 / 90000.0).epsilon(1e-14));

  const auto cav = compute_weights(ProblemSpec::cavity(100.0), Scheme::NM, Grid(11));
  CHECK(cav.lambdas.at(Component::NSx) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cav.lambdas.at(Component::NSy) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cav.lambdas.at(Component::C) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(cav.lambdas.at(Component::DBC) == 1.0);
  CHECK(cav.lambdas.at(Component::NBC) == doctest::Approx(1.0).epsilon(1e-14));

  const auto cav2 = compute_weights(ProblemSpec::cavity(100.0), Scheme::NM2, Grid(11));
  CHECK(cav2.lambdas.at(Component::NSx) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cav2.lambdas.at(Component::C) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(cav2.lambdas.at(Component::NBC) == doctest::Approx(1.0).epsilon(1e-14));

  for (Scheme s : {Scheme::Equal, Scheme::NM, Scheme::NM2}) {
    const auto w = compute_weights(ProblemSpec::cavity(100.0), s, Grid(31));
    for (const auto& [c, l] : w.lambdas.entries()) CHECK(l > 0.0);
  }
  CHECK(parse_scheme("0") == Scheme::Equal);
  CHECK_THROWS(parse_scheme("nm3"));
}

TEST_CASE("weight scaling properties") {
  for (int n : {11, 21, 31}) {
    const Grid g(n), half(2 * n - 1);
    const auto ratio = [&](const ProblemSpec& spec, Scheme s, Component c) {
      return compute_weights(spec, s, g).lambdas.at(c) / compute_weights(spec, s, half).lambdas.at(c);
    };
    CHECK(ratio(ProblemSpec::conduction(), Scheme::NM, Component::DE) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(ratio(ProblemSpec::conduction(), Scheme::NM2, Component::DE) == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(ratio(ProblemSpec::convdiff(10.0), Scheme::NM, Component::DE) == doctest::Approx(4.0).epsilon(1e-14));
    for (double pe : {10.0, 100.0}) {
      const auto spec = ProblemSpec::convdiff(pe);
      const double nm = compute_weights(spec, Scheme::NM, g).lambdas.at(Component::DE);
      const double nm2 = compute_weights(spec, Scheme::NM2, g).lambdas.at(Component::DE);
      CHECK(nm2 == doctest::Approx(nm * nm).epsilon(1e-14));
    }
  }
}

TEST_CASE("total loss") {
  WeightVector ones{Scheme::Equal, {{Component::DE, 1.0}, {Component::DBC, 1.0}}};
  CHECK(total_loss({{Component::DE, 2.0}, {Component::DBC, 3.0}}, ones) == 5.0);
  CHECK(total_loss({{Component::DE, 0.0}, {Component::DBC, 0.0}}, ones) == 0.0);
  const auto nm = compute_weights(ProblemSpec::conduction(), Scheme::NM, Grid(11));
  CHECK(total_loss({{Component::DE, 4.0}, {Component::DBC, 0.5}}, nm) == doctest::Approx(0.54).epsilon(1e-14));
  CHECK_THROWS_AS(total_loss({{Component::DE, 1.0}}, nm), std::invalid_argument);

  WeightVector scaled = nm;
  for (const auto& [c, l] : nm.lambdas.entries()) scaled.lambdas.set(c, 3.0 * l);
  const LossComponents comp{{Component::DE, 0.7}, {Component::DBC, 0.2}};
  CHECK(total_loss(comp, scaled) == doctest::Approx(3.0 * total_loss(comp, nm)).epsilon(1e-15));
}

TEST_CASE("problem validation") {
  CHECK_THROWS(ProblemSpec::convdiff(0.0).validate());
  CHECK_THROWS(ProblemSpec::cavity(-1.0).validate());
  CHECK(parse_problem("cavity") == ProblemKind::Cavity);
  CHECK_THROWS(parse_problem("burgers"));
}

}
