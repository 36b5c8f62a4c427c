#include "pinnweigh/diffengine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pinnweigh {

namespace {

std::vector<Point> node_points(const Grid& g) {
  std::vector<Point> pts;
  pts.reserve(g.size());
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) pts.push_back({g.coord(i), g.coord(j)});
  return pts;
}

}  // namespace

PinnLoss::PinnLoss(const ProblemSpec& spec, const Grid& grid, const WeightVector& weights,
                   const Architecture& arch)
    : spec_(spec),
      grid_(grid),
      weights_(weights),
      bc_(make_boundary(spec, grid)),
      points_(node_points(grid)),
      evaluator_(arch, points_) {
  spec_.validate();
  if (arch.output_dim != spec_.field_count())
    throw std::invalid_argument("PinnLoss: network has " + std::to_string(arch.output_dim) +
                                " outputs, problem needs " + std::to_string(spec_.field_count()));
  const auto keys = components_for(spec_.kind);
  if (weights_.lambdas.size() != keys.size() ||
      !std::all_of(keys.begin(), keys.end(), [&](Component c) { return weights_.lambdas.contains(c); }))
    throw std::invalid_argument("PinnLoss: weight vector does not match the problem's components");
  d_outputs_.resize(grid_.size() * static_cast<std::size_t>(spec_.field_count()));
}

std::vector<Field> PinnLoss::predict_fields(const MlpParams& params) {
  const auto out = evaluator_.forward(params);
  const int nf = spec_.field_count();
  std::vector<Field> fields(static_cast<std::size_t>(nf), Field(grid_));
  for (std::size_t p = 0; p < grid_.size(); ++p)
    for (int k = 0; k < nf; ++k) fields[k].values()[p] = out[p * nf + k];
  return fields;
}

LossComponents PinnLoss::components(const MlpParams& params) {
  const auto fields = predict_fields(params);
  switch (spec_.kind) {
    case ProblemKind::Conduction:
      return conduction_components(fields[0], grid_, bc_);
    case ProblemKind::ConvDiff:
      return convdiff_components(fields[0], grid_, spec_, bc_);
    case ProblemKind::Cavity:
      return cavity_components(fields[0], fields[1], fields[2], grid_, spec_, bc_);
  }
  throw std::logic_error("unreachable");
}

double PinnLoss::value(const MlpParams& params) { return total_loss(components(params), weights_); }

std::vector<double> PinnLoss::backprop(const MlpParams& params, const FieldLoss& fl,
                                       const ComponentValues& lambdas) {
  const int nf = spec_.field_count();
  std::fill(d_outputs_.begin(), d_outputs_.end(), 0.0);
  const auto& entries = fl.components.entries();
  for (std::size_t c = 0; c < entries.size(); ++c) {
    if (!lambdas.contains(entries[c].first)) continue;
    const double lambda = lambdas.at(entries[c].first);
    for (int k = 0; k < nf; ++k) {
      const auto df = fl.field_gradients[c][k].values();
      for (std::size_t p = 0; p < df.size(); ++p) d_outputs_[p * nf + k] += lambda * df[p];
    }
  }
  std::vector<double> grad(params.size());
  evaluator_.backward(params, d_outputs_, grad);
  return grad;
}

LossGradient PinnLoss::loss_and_gradient(const MlpParams& params) {
  const auto fields = predict_fields(params);
  FieldLoss fl = evaluate_field_loss(fields, grid_, spec_, bc_);
  LossGradient result;
  result.loss = total_loss(fl.components, weights_);
  result.components = fl.components;
  if (!std::isfinite(result.loss)) return result;
  result.grad = backprop(params, fl, weights_.lambdas);
  return result;
}

std::vector<double> PinnLoss::component_gradient(const MlpParams& params, Component c) {
  const auto fields = predict_fields(params);
  const FieldLoss fl = evaluate_field_loss(fields, grid_, spec_, bc_);
  if (!fl.components.contains(c))
    throw std::invalid_argument("component_gradient: problem has no " +
                                std::string(component_name(c)));
  return backprop(params, fl, ComponentValues{{c, 1.0}});
}

GradCheckReport fd_gradient_check(const MlpParams& params, PinnLoss& loss, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3))
    throw std::invalid_argument("fd_gradient_check: eps must lie in [1e-7, 1e-3]");
  const LossGradient lg = loss.loss_and_gradient(params);
  if (!lg.finite()) throw std::runtime_error("fd_gradient_check: loss is not finite");

  GradCheckReport report;
  report.parameter_count = params.size();
  MlpParams probe = params;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double original = probe.values()[k];
    probe.values()[k] = original + eps;
    const double plus = loss.value(probe);
    probe.values()[k] = original - eps;
    const double minus = loss.value(probe);
    probe.values()[k] = original;

    const double numeric = (plus - minus) / (2.0 * eps);
    const double analytic = lg.grad[k];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
    const double rel = std::abs(analytic - numeric) / denom;
    report.max_abs_error = std::max(report.max_abs_error, std::abs(analytic - numeric));
    if (k == 0 || rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = k;
      report.analytic = analytic;
      report.numeric = numeric;
    }
  }
  return report;
}

}  // namespace pinnweigh
