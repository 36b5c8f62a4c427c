#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pinnweigh/diffengine.hpp"
#include "pinnweigh/network.hpp"
#include "pinnweigh/problems.hpp"

namespace pinnweigh {

struct TrainConfig {
  double lr0 = 1e-3;
  double decay_factor = 0.8;
  int decay_every = 1000;  // epochs; one epoch is one full-batch iteration
  int max_iters = 50000;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  int sample_every = 1000;       // per-component loss sampling interval
  double divergence_limit = 1e12;

  void validate() const;  // throws std::invalid_argument
};

/// lr0 * decay_factor^floor(epoch / decay_every)
double lr_at(int epoch, const TrainConfig& cfg);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update in place. Returns false (and leaves params
/// and state untouched) when the gradient has a non-finite entry.
bool adam_step(MlpParams& params, std::span<const double> grad, AdamState& state, double lr,
               const TrainConfig& cfg);

struct ComponentSample {
  int iteration = 0;
  LossComponents components;
};

struct TrainHistory {
  std::vector<double> loss;  // total loss before each update
  std::vector<ComponentSample> samples;
  MlpParams params;          // final parameters
  int steps = 0;             // Adam updates applied
  bool diverged = false;
  int diverged_at = -1;
};

using ProgressFn = std::function<void(int iteration, double loss)>;

/// Full-batch training from init_params(arch, cfg.seed).
TrainHistory train(const ProblemSpec& spec, Scheme scheme, const Grid& grid,
                   const Architecture& arch, const TrainConfig& cfg, const ProgressFn& progress = {});

/// Same loop from explicit starting parameters and loss.
TrainHistory train_from(MlpParams params, PinnLoss& loss, const TrainConfig& cfg,
                        const ProgressFn& progress = {});

}  // namespace pinnweigh
