#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pinnweigh/fdm.hpp"
#include "pinnweigh/grid.hpp"
#include "pinnweigh/network.hpp"
#include "pinnweigh/optimizer.hpp"
#include "pinnweigh/problems.hpp"

namespace pinnweigh {

/// Default network shape for each problem.
Architecture default_architecture(ProblemKind kind);
/// Iteration budget and learning-rate schedule used for each problem.
TrainConfig default_train_config(ProblemKind kind);

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::Conduction;
  std::vector<Scheme> schemes{Scheme::Equal, Scheme::NM, Scheme::NM2};
  std::vector<int> grid_sizes{11, 31, 51};
  std::vector<double> params;  // Pe or Re values; ignored for conduction
  TrainConfig train;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::string output_dir;      // empty: no artifacts written
  int workers = 1;
  bool interior_only = false;  // MSE over interior nodes instead of all nodes
  bool component_mse = false;  // cavity: also report u and v MSE
  bool write_fields = true;

  /// Defaults for a problem: network shape and training budget.
  static ExperimentConfig for_problem(ProblemKind kind);
  /// Missing keys keep the for_problem defaults. Throws std::invalid_argument on bad input.
  static ExperimentConfig from_json(const nlohmann::json& j);

  void validate() const;
  std::vector<ProblemSpec> problem_specs() const;
};

struct RunKey {
  ProblemKind problem = ProblemKind::Conduction;
  double param = 0.0;
  int n = 0;
  Scheme scheme = Scheme::Equal;
  std::uint64_t seed = 0;

  ProblemSpec spec() const;
  std::string label() const;  // filesystem-safe, e.g. cavity_re100_n31_nm_s0
  friend auto operator<=>(const RunKey&, const RunKey&) = default;
};

struct ReportRow {
  RunKey key;
  double h = 0.0;
  double mse = 0.0;
  double mse_u = -1.0;  // -1 when not requested
  double mse_v = -1.0;
  bool diverged = false;
  bool completed = true;  // false only when the run threw
  int steps = 0;
  double final_loss = 0.0;
  std::string status;  // "ok", "diverged", or the error message
  double wall_seconds = 0.0;
};

struct MseOptions {
  bool interior_only = false;
  bool component_mse = false;
};

struct MseReport {
  double mse = 0.0;
  double mse_u = -1.0;
  double mse_v = -1.0;
};

/// Conduction/convdiff: MSE of T. Cavity: MSE of the speed sqrt(u^2 + v^2).
/// predicted holds {T} or {u, v, p}.
MseReport evaluate_mse(const std::vector<Field>& predicted, const FdmSolution& reference,
                       const ProblemSpec& spec, const Grid& g, const MseOptions& opts = {});

/// Network outputs on every node, unpacked into fields.
std::vector<Field> predict_fields(const MlpParams& params, const ProblemSpec& spec, const Grid& g);

/// Central-difference (p_x, p_y) on the interior; insensitive to a constant offset in p.
std::pair<InteriorField, InteriorField> pressure_gradient_post(const Field& p, const Grid& g);

/// Thread-safe memo of reference solutions keyed by (problem, parameter, N).
/// Concurrent requests for one key wait on a single solve.
class ReferenceCache {
 public:
  using Solver = std::function<FdmSolution(const ProblemSpec&, const Grid&)>;

  ReferenceCache();
  explicit ReferenceCache(Solver solver);

  std::shared_ptr<const FdmSolution> get(const ProblemSpec& spec, const Grid& g);
  long solver_invocations() const noexcept { return invocations_.load(); }

 private:
  using Key = std::tuple<int, double, int>;
  Solver solver_;
  std::mutex mutex_;
  std::map<Key, std::shared_future<std::shared_ptr<const FdmSolution>>> entries_;
  std::atomic<long> invocations_{0};
};

struct SweepResult {
  std::vector<ReportRow> rows;  // sorted by key
  bool all_completed = true;
};

using RunLogFn = std::function<void(const ReportRow&)>;

/// Every (scheme, N, parameter, seed) combination: reference, train, evaluate.
/// Artifacts go under cfg.output_dir when it is set.
SweepResult run_sweep(const ExperimentConfig& cfg, ReferenceCache& cache,
                      const RunLogFn& on_row = {});
SweepResult run_sweep(const ExperimentConfig& cfg);

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows);
void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows);

/// Median MSE over seeds per (scheme, N, parameter); runs that diverged are marked.
void write_comparison_table(std::ostream& os, const std::vector<ReportRow>& rows);

/// Median MSE of the completed rows matching a filter; a diverged run counts as +inf. NaN if none.
double median_mse(const std::vector<ReportRow>& rows, const std::function<bool(const RunKey&)>& pick);

}  // namespace pinnweigh
