#pragma once

#include <cstddef>
#include <vector>

#include "pinnweigh/grid.hpp"
#include "pinnweigh/network.hpp"
#include "pinnweigh/problems.hpp"

namespace pinnweigh {

struct LossGradient {
  double loss = 0.0;
  LossComponents components;
  /// d loss / d params in MlpParams layout; empty when the loss is not finite.
  std::vector<double> grad;

  bool finite() const noexcept { return !grad.empty(); }
};

/// The training objective for one problem on one grid: network evaluated on
/// every node, CDS residuals, weighted MSE components. Holds evaluation
/// buffers, so one instance must not be used from two threads at once.
class PinnLoss {
 public:
  PinnLoss(const ProblemSpec& spec, const Grid& grid, const WeightVector& weights,
           const Architecture& arch);

  const ProblemSpec& spec() const noexcept { return spec_; }
  const Grid& grid() const noexcept { return grid_; }
  const WeightVector& weights() const noexcept { return weights_; }
  const BoundarySpec& boundary() const noexcept { return bc_; }
  const std::vector<Point>& points() const noexcept { return points_; }

  /// Network outputs unpacked into node fields ({T} or {u, v, p}).
  std::vector<Field> predict_fields(const MlpParams& params);

  LossComponents components(const MlpParams& params);
  double value(const MlpParams& params);

  /// Loss and exact parameter gradient by reverse accumulation through the
  /// stencils and the network.
  LossGradient loss_and_gradient(const MlpParams& params);

  /// Gradient of a single unweighted component.
  std::vector<double> component_gradient(const MlpParams& params, Component c);

 private:
  std::vector<double> backprop(const MlpParams& params, const FieldLoss& fl,
                               const ComponentValues& lambdas);

  ProblemSpec spec_;
  Grid grid_;
  WeightVector weights_;
  BoundarySpec bc_;
  std::vector<Point> points_;
  BatchEvaluator evaluator_;
  std::vector<double> d_outputs_;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at worst_index
  double numeric = 0.0;
  double max_abs_error = 0.0;  // over all parameters
  std::size_t parameter_count = 0;
};

/// Compares the analytic gradient with central differences of step eps on
/// every parameter. Relative error uses max(|analytic|, |numeric|, 1e-12).
/// eps must lie in [1e-7, 1e-3].
GradCheckReport fd_gradient_check(const MlpParams& params, PinnLoss& loss, double eps);

}  // namespace pinnweigh
