#include <cmath>
#include <limits>

#include "doctest.h"
#include "pinnweigh/diffengine.hpp"

using namespace pinnweigh;

TEST_SUITE("diffengine") {

TEST_CASE("zero network on conduction") {
  const Grid g(11);
  const Architecture arch{2, {4}, 1};
  PinnLoss loss(ProblemSpec::conduction(), g, compute_weights(ProblemSpec::conduction(), Scheme::Equal, g), arch);
  const auto c = loss.components(MlpParams(arch));
  CHECK(c.at(Component::DE) == 0.0);
  CHECK(c.at(Component::DBC) == doctest::Approx(11.0 / 40.0).epsilon(1e-15));
}

TEST_CASE("boundary term gradient for a constant network") {
  const Grid g(7);
  const Architecture arch{2, {3}, 1};
  MlpParams params(arch);
  const double c = 0.3;
  params.bias(1)[0] = c;
  PinnLoss loss(ProblemSpec::conduction(), g, compute_weights(ProblemSpec::conduction(), Scheme::NM, g), arch);
  const auto grad = loss.component_gradient(params, Component::DBC);
  const auto bc = make_boundary(ProblemSpec::conduction(), g);
  double expect = 0.0;
  for (const auto& b : g.boundary()) expect += c - bc.g(b.i, b.j);
  expect *= 2.0 / static_cast<double>(g.boundary().size());
  CHECK(grad[params.bias_offset(1)] == doctest::Approx(expect).epsilon(1e-14));
  const auto de = loss.component_gradient(params, Component::DE);
  for (double v : de) CHECK(v == 0.0);
  CHECK_THROWS(loss.component_gradient(params, Component::NSx));
}

TEST_CASE("gradient check on small networks") {
  const Grid g(5);
  const Architecture small{2, {4}, 1};
  for (Scheme s : {Scheme::Equal, Scheme::NM, Scheme::NM2}) {
    PinnLoss cond(ProblemSpec::conduction(), g, compute_weights(ProblemSpec::conduction(), s, g), small);
    CHECK(fd_gradient_check(init_params(small, 1), cond, 1e-5).max_rel_error < 1e-5);
    PinnLoss cd(ProblemSpec::convdiff(100.0), g, compute_weights(ProblemSpec::convdiff(100.0), s, g), small);
    CHECK(fd_gradient_check(init_params(small, 2), cd, 1e-5).max_rel_error < 1e-5);
  }
}

TEST_CASE("cavity gradient check away from the pressure gauge") {
  // The loss sees p only through differences, so the output bias of p has an
  // exactly zero gradient; both sides of the comparison are roundoff there.
  const Grid g(5);
  const Architecture arch{2, {8}, 3};
  for (Scheme s : {Scheme::Equal, Scheme::NM, Scheme::NM2}) {
    const auto spec = ProblemSpec::cavity(100.0);
    PinnLoss loss(spec, g, compute_weights(spec, s, g), arch);
    const auto params = init_params(arch, 4);
    const auto lg = loss.loss_and_gradient(params);
    const std::size_t gauge = params.bias_offset(1) + 2;
    CHECK(std::abs(lg.grad[gauge]) < 1e-12);
    const double eps = 1e-5;
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (k == gauge) continue;
      MlpParams p = params, m = params;
      p.values()[k] += eps;
      m.values()[k] -= eps;
      const double numeric = (loss.value(p) - loss.value(m)) / (2 * eps);
      const double denom = std::max({std::abs(numeric), std::abs(lg.grad[k]), 1e-12});
      CHECK(std::abs(numeric - lg.grad[k]) / denom < 1e-5);
    }
  }
}

TEST_CASE("finite-difference discrepancy shrinks with eps") {
  const Grid g(5);
  const Architecture arch{2, {4}, 1};
  PinnLoss loss(ProblemSpec::conduction(), g, compute_weights(ProblemSpec::conduction(), Scheme::Equal, g), arch);
  const auto params = init_params(arch, 6);
  const double coarse = fd_gradient_check(params, loss, 1e-4).max_rel_error;
  const double fine = fd_gradient_check(params, loss, 5e-5).max_rel_error;
  CHECK((fine <= coarse || fine < 1e-5));
  CHECK_THROWS(fd_gradient_check(params, loss, 1e-2));
  CHECK_THROWS(fd_gradient_check(params, loss, 1e-9));
}

TEST_CASE("total gradient is the weighted sum of component gradients") {
  const Grid g(7);
  for (const auto spec : {ProblemSpec::conduction(), ProblemSpec::convdiff(10.0), ProblemSpec::cavity(100.0)}) {
    const Architecture arch{2, {6, 5}, spec.field_count()};
    const auto w = compute_weights(spec, Scheme::NM, g);
    PinnLoss loss(spec, g, w, arch);
    const auto params = init_params(arch, 8);
    const auto total = loss.loss_and_gradient(params);
    std::vector<double> sum(params.size(), 0.0);
    for (const auto& [c, lambda] : w.lambdas.entries()) {
      const auto gc = loss.component_gradient(params, c);
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += lambda * gc[k];
    }
    double scale = 0.0;
    for (double v : total.grad) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < sum.size(); ++k) CHECK(std::abs(sum[k] - total.grad[k]) <= 1e-12 * scale);
    CHECK(total.loss == doctest::Approx(loss.value(params)).epsilon(1e-15));
  }
}

TEST_CASE("non-finite loss is flagged") {
  const Grid g(5);
  const Architecture arch{2, {3}, 1};
  PinnLoss loss(ProblemSpec::conduction(), g, compute_weights(ProblemSpec::conduction(), Scheme::Equal, g), arch);
  MlpParams params = init_params(arch, 1);
  params.values()[0] = std::numeric_limits<double>::quiet_NaN();
  const auto lg = loss.loss_and_gradient(params);
  CHECK_FALSE(lg.finite());
  CHECK(lg.grad.empty());
}

TEST_CASE("mismatched construction is rejected") {
  const Grid g(5);
  CHECK_THROWS(PinnLoss(ProblemSpec::cavity(100.0), g, compute_weights(ProblemSpec::cavity(100.0), Scheme::NM, g),
                        Architecture{2, {4}, 1}));
  CHECK_THROWS(PinnLoss(ProblemSpec::conduction(), g, compute_weights(ProblemSpec::cavity(100.0), Scheme::NM, g),
                        Architecture{2, {4}, 1}));
}

}
