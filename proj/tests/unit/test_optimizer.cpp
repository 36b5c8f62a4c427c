#include <cmath>
#include <limits>

#include "doctest.h"
#include "pinnweigh/optimizer.hpp"

using namespace pinnweigh;

TEST_SUITE("optimizer") {

TEST_CASE("learning-rate schedule") {
  TrainConfig cfg;
  CHECK(lr_at(0, cfg) == 1e-3);
  CHECK(lr_at(999, cfg) == 1e-3);
  CHECK(lr_at(1000, cfg) == doctest::Approx(8e-4).epsilon(1e-14));
  cfg.lr0 = 1e-2;
  CHECK(lr_at(2500, cfg) == doctest::Approx(6.4e-3).epsilon(1e-14));
  CHECK_THROWS(lr_at(-1, cfg));
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.lr0 = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.decay_factor = 1.5;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.max_iters = 0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("adam first step and zero gradient") {
  const Architecture arch{2, {3}, 1};
  TrainConfig cfg;
  MlpParams params = init_params(arch, 3);
  const MlpParams before = params;
  std::vector<double> grad(params.size());
  for (std::size_t k = 0; k < grad.size(); ++k) grad[k] = (k % 2 ? 1.0 : -1.0) * (0.1 + k);
  AdamState state(params.size());
  CHECK(adam_step(params, grad, state, 1e-3, cfg));
  CHECK(state.t == 1);
  for (std::size_t k = 0; k < grad.size(); ++k) {
    const double step = before.values()[k] - params.values()[k];
    CHECK(std::abs(step) == doctest::Approx(1e-3).epsilon(1e-6));
    CHECK((step > 0) == (grad[k] > 0));
  }

  MlpParams still = before;
  AdamState zs(still.size());
  const std::vector<double> zero(still.size(), 0.0);
  for (int i = 0; i < 50; ++i) adam_step(still, zero, zs, 1e-2, cfg);
  CHECK(still == before);
}

TEST_CASE("non-finite gradient leaves everything untouched") {
  const Architecture arch{2, {3}, 1};
  MlpParams params = init_params(arch, 3);
  const MlpParams before = params;
  std::vector<double> grad(params.size(), 1.0);
  grad[2] = std::numeric_limits<double>::infinity();
  AdamState state(params.size());
  CHECK_FALSE(adam_step(params, grad, state, 1e-3, TrainConfig{}));
  CHECK(params == before);
  CHECK(state.t == 0);
}

TEST_CASE("training loop contracts") {
  const Grid g(5);
  const Architecture arch{2, {6, 6}, 1};
  TrainConfig cfg;
  cfg.max_iters = 1;
  const auto one = train(ProblemSpec::conduction(), Scheme::NM, g, arch, cfg);
  CHECK(one.steps == 1);
  CHECK(one.loss.size() == 1);
  CHECK_FALSE(one.diverged);

  cfg.max_iters = 30;
  cfg.sample_every = 10;
  const auto a = train(ProblemSpec::conduction(), Scheme::NM, g, arch, cfg);
  const auto b = train(ProblemSpec::conduction(), Scheme::NM, g, arch, cfg);
  CHECK(a.params == b.params);
  CHECK(a.loss == b.loss);
  CHECK(a.samples.size() == 4);  // 0, 10, 20 and the last iteration
  CHECK(a.loss.back() < a.loss.front());
}

TEST_CASE("vanishing learning rate keeps parameters near the start") {
  const Grid g(5);
  const Architecture arch{2, {6}, 1};
  TrainConfig cfg;
  cfg.lr0 = 1e-9;
  cfg.max_iters = 20;
  const auto hist = train(ProblemSpec::conduction(), Scheme::Equal, g, arch, cfg);
  const auto init = init_params(arch, cfg.seed);
  for (std::size_t k = 0; k < init.size(); ++k)
    CHECK(std::abs(hist.params.values()[k] - init.values()[k]) <= 20 * 1e-9 * (1 + 1e-6));
}

TEST_CASE("divergence is flagged, not propagated") {
  const Grid g(5);
  const Architecture arch{2, {6}, 1};
  TrainConfig cfg;
  cfg.lr0 = 1e7;
  cfg.max_iters = 50;
  const auto hist = train(ProblemSpec::conduction(), Scheme::Equal, g, arch, cfg);
  CHECK(hist.diverged);
  CHECK(hist.diverged_at >= 1);
  CHECK(hist.loss.size() == static_cast<std::size_t>(hist.diverged_at));
  for (double l : hist.loss) CHECK(std::isfinite(l));
  CHECK(hist.params.all_finite());
}

}
