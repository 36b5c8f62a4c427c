#include "pinnweigh/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace pinnweigh {

void TrainConfig::validate() const {
  if (!(lr0 > 0.0)) throw std::invalid_argument("train config: lr0 must be > 0");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0))
    throw std::invalid_argument("train config: decay_factor must lie in (0, 1]");
  if (decay_every < 1) throw std::invalid_argument("train config: decay_every must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("train config: max_iters must be >= 1");
  if (sample_every < 1) throw std::invalid_argument("train config: sample_every must be >= 1");
}

double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0) throw std::invalid_argument("lr_at: epoch must be >= 0");
  return cfg.lr0 * std::pow(cfg.decay_factor, epoch / cfg.decay_every);
}

bool adam_step(MlpParams& params, std::span<const double> grad, AdamState& state, double lr,
               const TrainConfig& cfg) {
  const std::size_t n = params.size();
  if (grad.size() != n || state.m.size() != n || state.v.size() != n)
    throw std::invalid_argument("adam_step: shape mismatch");
  for (double g : grad)
    if (!std::isfinite(g)) return false;

  ++state.t;
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  auto theta = params.values();
  for (std::size_t k = 0; k < n; ++k) {
    const double g = grad[k];
    state.m[k] = b1 * state.m[k] + (1.0 - b1) * g;
    state.v[k] = b2 * state.v[k] + (1.0 - b2) * g * g;
    const double m_hat = state.m[k] / c1;
    const double v_hat = state.v[k] / c2;
    theta[k] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps_adam);
  }
  return true;
}

TrainHistory train_from(MlpParams params, PinnLoss& loss, const TrainConfig& cfg,
                        const ProgressFn& progress) {
  cfg.validate();
  TrainHistory history;
  history.loss.reserve(static_cast<std::size_t>(cfg.max_iters));
  AdamState state(params.size());

  for (int it = 0; it < cfg.max_iters; ++it) {
    const LossGradient lg = loss.loss_and_gradient(params);
    if (!lg.finite() || !(std::abs(lg.loss) <= cfg.divergence_limit)) {
      history.diverged = true;
      history.diverged_at = it;
      break;
    }
    history.loss.push_back(lg.loss);
    if (it % cfg.sample_every == 0 || it == cfg.max_iters - 1)
      history.samples.push_back({it, lg.components});
    if (progress) progress(it, lg.loss);

    if (!adam_step(params, lg.grad, state, lr_at(it, cfg), cfg)) {
      history.diverged = true;
      history.diverged_at = it;
      break;
    }
    ++history.steps;
  }
  history.params = std::move(params);
  return history;
}

TrainHistory train(const ProblemSpec& spec, Scheme scheme, const Grid& grid,
                   const Architecture& arch, const TrainConfig& cfg, const ProgressFn& progress) {
  PinnLoss loss(spec, grid, compute_weights(spec, scheme, grid), arch);
  return train_from(init_params(arch, cfg.seed), loss, cfg, progress);
}

}  // namespace pinnweigh
