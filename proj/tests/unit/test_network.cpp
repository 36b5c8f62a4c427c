#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "pinnweigh/network.hpp"

using namespace pinnweigh;

TEST_SUITE("network") {

TEST_CASE("parameter count by independent tally") {
  const Architecture arch{2, {64, 64, 64, 64}, 1};
  // Layer shapes listed by hand: (in, out) pairs.
  const int shapes[][2] = {{2, 64}, {64, 64}, {64, 64}, {64, 64}, {64, 1}};
  std::size_t tally = 0;
  for (const auto& s : shapes) tally += static_cast<std::size_t>(s[0] * s[1] + s[1]);
  CHECK(tally == 12737);
  CHECK(arch.parameter_count() == tally);
  CHECK(init_params(arch, 11).size() == tally);

  const Architecture cavity{2, {64, 20, 20, 20}, 3};
  CHECK(cavity.parameter_count() == static_cast<std::size_t>(2 * 64 + 64 + 64 * 20 + 20 + 2 * (20 * 20 + 20) + 20 * 3 + 3));
  CHECK(cavity.describe() == "(x,y)-64-20-20-20-(3)");
}

TEST_CASE("init is deterministic, bounded, zero-bias") {
  const Architecture arch{2, {8, 5}, 3};
  const auto a = init_params(arch, 42);
  const auto b = init_params(arch, 42);
  CHECK(a == b);
  CHECK_FALSE(a == init_params(arch, 43));
  for (int l = 0; l < arch.layer_count(); ++l) {
    const double bound = std::sqrt(6.0 / arch.fan_in(l));
    for (double w : a.weights(l)) CHECK(std::abs(w) <= bound);
    for (double v : a.bias(l)) CHECK(v == 0.0);
  }
}

TEST_CASE("invalid architectures") {
  CHECK_THROWS_AS(MlpParams(Architecture{2, {}, 1}), std::invalid_argument);
  CHECK_THROWS_AS(MlpParams(Architecture{2, {4, 0}, 1}), std::invalid_argument);
  CHECK_THROWS_AS(MlpParams(Architecture{2, {4}, 0}), std::invalid_argument);
}

TEST_CASE("forward examples") {
  const Architecture arch{2, {6, 4}, 2};
  const MlpParams zero(arch);
  const std::vector<Point> pts{{0.1, 0.2}, {0.9, 0.4}};
  for (double v : forward_batch(zero, pts)) CHECK(v == 0.0);

  MlpParams one(Architecture{2, {1}, 1});
  one.weights(0)[0] = std::numbers::pi / 2;  // x -> neuron
  one.weights(0)[1] = 0.0;                   // y -> neuron
  one.weights(1)[0] = 1.0;
  const std::vector<Point> p{{1.0, 0.0}};
  CHECK(forward_batch(one, p)[0] == doctest::Approx(1.0).epsilon(1e-15));

  const std::vector<Point> bad{{std::nan(""), 0.0}};
  CHECK_THROWS_AS(forward_batch(one, bad), std::invalid_argument);
}

TEST_CASE("batch equals one-at-a-time and respects the output bound") {
  const Architecture arch{2, {64, 20, 20, 20}, 3};
  auto params = init_params(arch, 5);
  for (double& b : params.bias(arch.layer_count() - 1)) b = 0.25;
  std::vector<Point> pts;
  for (int i = 0; i < 37; ++i) pts.push_back({i / 36.0, std::fmod(i * 0.37, 1.0)});
  const auto batch = forward_batch(params, pts);
  const auto last = arch.layer_count() - 1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto single = forward_batch(params, std::span(&pts[i], 1));
    for (int k = 0; k < 3; ++k) {
      CHECK(single[k] == doctest::Approx(batch[i * 3 + k]).epsilon(1e-13));
      double bound = std::abs(params.bias(last)[k]);
      for (int r = 0; r < arch.fan_in(last); ++r) bound += std::abs(params.weights(last)[r * 3 + k]);
      CHECK(std::abs(batch[i * 3 + k]) <= bound);
    }
  }
  CHECK(forward_batch(params, pts) == batch);
}

TEST_CASE("batch evaluator matches forward_batch") {
  const Architecture arch{2, {7, 9}, 2};
  const auto params = init_params(arch, 9);
  std::vector<Point> pts{{0, 0}, {0.5, 0.25}, {1, 1}, {0.3, 0.8}, {0.6, 0.1}};
  BatchEvaluator ev(arch, pts);
  const auto out = ev.forward(params);
  const auto ref = forward_batch(params, pts);
  REQUIRE(out.size() == ref.size());
  for (std::size_t k = 0; k < ref.size(); ++k) CHECK(out[k] == doctest::Approx(ref[k]).epsilon(1e-14));
}

TEST_CASE("backward matches finite differences of a linear functional") {
  const Architecture arch{2, {5, 4}, 2};
  auto params = init_params(arch, 2);
  for (std::size_t k = 0; k < params.size(); ++k) params.values()[k] += 0.01 * std::sin(double(k));
  std::vector<Point> pts{{0.1, 0.9}, {0.4, 0.4}, {0.8, 0.3}};
  const std::vector<double> w{0.3, -1.2, 0.7, 0.5, -0.4, 1.1};  // d functional / d outputs
  BatchEvaluator ev(arch, pts);
  ev.forward(params);
  std::vector<double> grad(params.size());
  ev.backward(params, w, grad);
  const auto functional = [&](const MlpParams& p) {
    const auto out = forward_batch(p, pts);
    double s = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) s += w[k] * out[k];
    return s;
  };
  for (std::size_t k = 0; k < params.size(); ++k) {
    MlpParams p = params, m = params;
    p.values()[k] += 1e-6;
    m.values()[k] -= 1e-6;
    const double numeric = (functional(p) - functional(m)) / 2e-6;
    CHECK(grad[k] == doctest::Approx(numeric).epsilon(1e-6));
  }
}

TEST_CASE("checkpoint round trip") {
  const Architecture arch{2, {6, 3}, 3};
  const auto params = init_params(arch, 77);
  std::stringstream ss;
  write_checkpoint(ss, params);
  std::string header;
  std::getline(ss, header);
  CHECK(header.find("pinnweigh-mlp-v1") != std::string::npos);
  ss.seekg(0);
  CHECK(read_checkpoint(ss) == params);

  std::stringstream truncated(ss.str().substr(0, ss.str().size() - 3));
  CHECK_THROWS(read_checkpoint(truncated));
  std::stringstream garbage("{\"format\":\"other\"}\n");
  CHECK_THROWS(read_checkpoint(garbage));
}

}
