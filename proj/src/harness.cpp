#include "pinnweigh/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

namespace pinnweigh {

namespace fs = std::filesystem;

Architecture default_architecture(ProblemKind kind) {
  Architecture arch;
  if (kind == ProblemKind::Cavity) {
    arch.hidden_widths = {64, 20, 20, 20};
    arch.output_dim = 3;
  } else {
    arch.hidden_widths = {64, 64, 64, 64};
    arch.output_dim = 1;
  }
  return arch;
}

TrainConfig default_train_config(ProblemKind kind) {
  TrainConfig cfg;
  if (kind == ProblemKind::Cavity) {
    cfg.max_iters = 80000;
    cfg.lr0 = 1e-2;
  } else {
    cfg.max_iters = 50000;
    cfg.lr0 = 1e-3;
  }
  cfg.decay_factor = 0.8;
  cfg.decay_every = 1000;
  return cfg;
}

ExperimentConfig ExperimentConfig::for_problem(ProblemKind kind) {
  ExperimentConfig cfg;
  cfg.problem = kind;
  cfg.train = default_train_config(kind);
  if (kind == ProblemKind::ConvDiff) cfg.params = {100.0};
  if (kind == ProblemKind::Cavity) cfg.params = {100.0};
  return cfg;
}

namespace {

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
  if (!j.contains("problem")) throw std::invalid_argument("experiment config: missing 'problem'");
  ExperimentConfig cfg;
  try {
    cfg = for_problem(parse_problem(j.at("problem").get<std::string>()));
    if (j.contains("schemes")) {
      if (!j.at("schemes").is_array()) throw std::invalid_argument("experiment config: 'schemes' must be a list");
      cfg.schemes.clear();
      for (const auto& s : j.at("schemes")) cfg.schemes.push_back(parse_scheme(s.get<std::string>()));
    }
    read_if(j, "grid_sizes", cfg.grid_sizes);
    read_if(j, "params", cfg.params);
    read_if(j, "seeds", cfg.seeds);
    read_if(j, "output_dir", cfg.output_dir);
    read_if(j, "workers", cfg.workers);
    read_if(j, "interior_only", cfg.interior_only);
    read_if(j, "component_mse", cfg.component_mse);
    read_if(j, "write_fields", cfg.write_fields);
    if (j.contains("train")) {
      const auto& t = j.at("train");
      read_if(t, "lr0", cfg.train.lr0);
      read_if(t, "decay_factor", cfg.train.decay_factor);
      read_if(t, "decay_every", cfg.train.decay_every);
      read_if(t, "max_iters", cfg.train.max_iters);
      read_if(t, "sample_every", cfg.train.sample_every);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (schemes.empty()) throw std::invalid_argument("experiment config: no schemes");
  if (grid_sizes.empty()) throw std::invalid_argument("experiment config: no grid sizes");
  for (int n : grid_sizes)
    if (n < 3) throw std::invalid_argument("experiment config: grid size must be >= 3");
  if (seeds.empty()) throw std::invalid_argument("experiment config: seeds must be non-empty");
  if (workers < 1) throw std::invalid_argument("experiment config: workers must be >= 1");
  if (problem != ProblemKind::Conduction && params.empty())
    throw std::invalid_argument("experiment config: Pe/Re values required");
  for (const auto& spec : problem_specs()) spec.validate();
  train.validate();
}

std::vector<ProblemSpec> ExperimentConfig::problem_specs() const {
  switch (problem) {
    case ProblemKind::Conduction:
      return {ProblemSpec::conduction()};
    case ProblemKind::ConvDiff: {
      std::vector<ProblemSpec> out;
      for (double pe : params) out.push_back(ProblemSpec::convdiff(pe));
      return out;
    }
    case ProblemKind::Cavity: {
      std::vector<ProblemSpec> out;
      for (double re : params) out.push_back(ProblemSpec::cavity(re));
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

ProblemSpec RunKey::spec() const {
  switch (problem) {
    case ProblemKind::Conduction:
      return ProblemSpec::conduction();
    case ProblemKind::ConvDiff:
      return ProblemSpec::convdiff(param);
    case ProblemKind::Cavity:
      return ProblemSpec::cavity(param);
  }
  throw std::logic_error("unreachable");
}

namespace {

std::string format_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string format_full(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string param_tag(ProblemKind kind, double param) {
  switch (kind) {
    case ProblemKind::Conduction:
      return "";
    case ProblemKind::ConvDiff:
      return "_pe" + format_g(param);
    case ProblemKind::Cavity:
      return "_re" + format_g(param);
  }
  return "";
}

}  // namespace

std::string RunKey::label() const {
  return std::string(problem_name(problem)) + param_tag(problem, param) + "_n" + std::to_string(n) +
         "_" + std::string(scheme_name(scheme)) + "_s" + std::to_string(seed);
}

std::vector<Field> predict_fields(const MlpParams& params, const ProblemSpec& spec, const Grid& g) {
  std::vector<Point> pts;
  pts.reserve(g.size());
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) pts.push_back({g.coord(i), g.coord(j)});
  const auto out = forward_batch(params, pts);
  const int nf = spec.field_count();
  if (params.architecture().output_dim != nf)
    throw std::invalid_argument("predict_fields: network output count does not match the problem");
  std::vector<Field> fields(static_cast<std::size_t>(nf), Field(g));
  for (std::size_t p = 0; p < g.size(); ++p)
    for (int k = 0; k < nf; ++k) fields[k].values()[p] = out[p * nf + k];
  return fields;
}

namespace {

double masked_mse(const Field& a, const Field& b, const Grid& g, bool interior_only) {
  if (!interior_only) return mse(a.values(), b.values());
  std::vector<double> x, y;
  for (const auto& node : g.interior()) {
    x.push_back(a(node.i, node.j));
    y.push_back(b(node.i, node.j));
  }
  return mse(x, y);
}

Field speed(const Field& u, const Field& v) {
  Field s(u.n());
  for (std::size_t k = 0; k < s.size(); ++k) s.values()[k] = std::hypot(u.values()[k], v.values()[k]);
  return s;
}

}  // namespace

MseReport evaluate_mse(const std::vector<Field>& predicted, const FdmSolution& reference,
                       const ProblemSpec& spec, const Grid& g, const MseOptions& opts) {
  if (reference.fields.empty()) throw std::invalid_argument("evaluate_mse: reference not available");
  if (predicted.size() != static_cast<std::size_t>(spec.field_count()))
    throw std::invalid_argument("evaluate_mse: wrong number of predicted fields");
  MseReport r;
  if (spec.kind != ProblemKind::Cavity) {
    r.mse = masked_mse(predicted[0], reference.field("T"), g, opts.interior_only);
    return r;
  }
  const Field& u = reference.field("u");
  const Field& v = reference.field("v");
  r.mse = masked_mse(speed(predicted[0], predicted[1]), speed(u, v), g, opts.interior_only);
  if (opts.component_mse) {
    r.mse_u = masked_mse(predicted[0], u, g, opts.interior_only);
    r.mse_v = masked_mse(predicted[1], v, g, opts.interior_only);
  }
  return r;
}

std::pair<InteriorField, InteriorField> pressure_gradient_post(const Field& p, const Grid& g) {
  return {gradient_central(p, g, Axis::X), gradient_central(p, g, Axis::Y)};
}

ReferenceCache::ReferenceCache() : ReferenceCache(reference_solution) {}

ReferenceCache::ReferenceCache(Solver solver) : solver_(std::move(solver)) {}

std::shared_ptr<const FdmSolution> ReferenceCache::get(const ProblemSpec& spec, const Grid& g) {
  const double param = spec.kind == ProblemKind::ConvDiff ? spec.pe
                       : spec.kind == ProblemKind::Cavity ? spec.re
                                                          : 0.0;
  const Key key{static_cast<int>(spec.kind), param, g.n()};
  std::promise<std::shared_ptr<const FdmSolution>> promise;
  std::shared_future<std::shared_ptr<const FdmSolution>> future;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      future = promise.get_future().share();
      entries_.emplace(key, future);
      owner = true;
    } else {
      future = it->second;
    }
  }
  if (owner) {
    try {
      ++invocations_;
      promise.set_value(std::make_shared<const FdmSolution>(solver_(spec, g)));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  return future.get();
}

namespace {

void write_fields(const fs::path& dir, const std::vector<std::string>& names,
                  const std::vector<Field>& fields, const Grid& g) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < fields.size(); ++k)
    write_field_csv((dir / (names[k] + ".csv")).string(), fields[k], g);
}

std::vector<std::string> field_names(const ProblemSpec& spec) {
  if (spec.kind == ProblemKind::Cavity) return {"u", "v", "p"};
  return {"T"};
}

void write_history(const fs::path& path, const TrainHistory& h) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "iteration,loss";
  if (!h.samples.empty())
    for (const auto& [c, value] : h.samples.front().components.entries()) os << ',' << component_name(c);
  os << '\n';
  for (const auto& s : h.samples) {
    os << s.iteration << ',' << format_full(h.loss[static_cast<std::size_t>(s.iteration)]);
    for (const auto& [c, value] : s.components.entries()) os << ',' << format_full(value);
    os << '\n';
  }
}

ReportRow run_one(const RunKey& key, const ExperimentConfig& cfg, ReferenceCache& cache) {
  const auto start = std::chrono::steady_clock::now();
  ReportRow row;
  row.key = key;
  try {
    const Grid g(key.n);
    row.h = g.h();
    const ProblemSpec spec = key.spec();
    const auto reference = cache.get(spec, g);

    TrainConfig tc = cfg.train;
    tc.seed = key.seed;
    const TrainHistory hist = train(spec, key.scheme, g, default_architecture(key.problem), tc);
    row.steps = hist.steps;
    row.diverged = hist.diverged;
    row.final_loss = hist.loss.empty() ? std::numeric_limits<double>::quiet_NaN() : hist.loss.back();

    const auto fields = predict_fields(hist.params, spec, g);
    const MseReport m = evaluate_mse(fields, *reference, spec, g, {cfg.interior_only, cfg.component_mse});
    row.mse = m.mse;
    row.mse_u = m.mse_u;
    row.mse_v = m.mse_v;
    row.status = hist.diverged ? "diverged" : "ok";

    if (!cfg.output_dir.empty()) {
      const fs::path dir = fs::path(cfg.output_dir) / "runs" / key.label();
      fs::create_directories(dir);
      if (cfg.write_fields) write_fields(dir, field_names(spec), fields, g);
      write_checkpoint((dir / "checkpoint.bin").string(), hist.params);
      write_history(dir / "history.csv", hist);
    }
  } catch (const std::exception& e) {
    row.completed = false;
    row.status = std::string("error: ") + e.what();
  }
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::string reference_label(const ProblemSpec& spec, int n) {
  const double param = spec.kind == ProblemKind::ConvDiff ? spec.pe : spec.re;
  return std::string(problem_name(spec.kind)) + param_tag(spec.kind, param) + "_n" + std::to_string(n);
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg, ReferenceCache& cache, const RunLogFn& on_row) {
  cfg.validate();
  std::vector<RunKey> keys;
  for (const auto& spec : cfg.problem_specs()) {
    const double param = spec.kind == ProblemKind::ConvDiff ? spec.pe
                         : spec.kind == ProblemKind::Cavity ? spec.re
                                                            : 0.0;
    for (int n : cfg.grid_sizes)
      for (Scheme s : cfg.schemes)
        for (auto seed : cfg.seeds) keys.push_back({spec.kind, param, n, s, seed});
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  SweepResult result;
  result.rows.resize(keys.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  const auto worker = [&] {
    for (std::size_t k = next++; k < keys.size(); k = next++) {
      result.rows[k] = run_one(keys[k], cfg, cache);
      if (on_row) {
        std::lock_guard lock(log_mutex);
        on_row(result.rows[k]);
      }
    }
  };
  const int nthreads = std::min<int>(cfg.workers, static_cast<int>(keys.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& row : result.rows) result.all_completed = result.all_completed && row.completed;

  if (!cfg.output_dir.empty()) {
    const fs::path out(cfg.output_dir);
    fs::create_directories(out);
    write_report_csv((out / "report.csv").string(), result.rows);
    std::ofstream table(out / "table.md");
    write_comparison_table(table, result.rows);
    for (const auto& spec : cfg.problem_specs()) {
      for (int n : cfg.grid_sizes) {
        const Grid g(n);
        try {
          const auto ref = cache.get(spec, g);
          const fs::path dir = out / "reference" / reference_label(spec, n);
          write_fields(dir, ref->names, ref->fields, g);
          std::ofstream conv(dir / "convergence.json");
          write_convergence_json(conv, *ref);
        } catch (const std::exception&) {
          // already reported in the affected rows
        }
      }
    }
  }
  return result;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  ReferenceCache cache;
  return run_sweep(cfg, cache);
}

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "problem,param,n,h,scheme,seed,mse,mse_u,mse_v,diverged,steps,final_loss,status,wall_seconds\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    os << problem_name(r.key.problem) << ',' << format_full(r.key.param) << ',' << r.key.n << ','
       << format_full(r.h) << ',' << scheme_name(r.key.scheme) << ',' << r.key.seed << ','
       << format_full(r.mse) << ',' << format_full(r.mse_u) << ',' << format_full(r.mse_v) << ','
       << (r.diverged ? 1 : 0) << ',' << r.steps << ',' << format_full(r.final_loss) << ',' << status
       << ',' << format_full(r.wall_seconds) << '\n';
  }
}

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_report_csv(os, rows);
}

double median_mse(const std::vector<ReportRow>& rows, const std::function<bool(const RunKey&)>& pick) {
  std::vector<double> values;
  for (const auto& r : rows) {
    if (!r.completed || !pick(r.key)) continue;
    const bool usable = !r.diverged && std::isfinite(r.mse);
    values.push_back(usable ? r.mse : std::numeric_limits<double>::infinity());
  }
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

void write_comparison_table(std::ostream& os, const std::vector<ReportRow>& rows) {
  struct Group {
    ProblemKind problem;
    double param;
    int n;
  };
  std::vector<Group> groups;
  std::vector<Scheme> schemes;
  for (const auto& r : rows) {
    const bool seen = std::any_of(groups.begin(), groups.end(), [&](const Group& g) {
      return g.problem == r.key.problem && g.param == r.key.param && g.n == r.key.n;
    });
    if (!seen) groups.push_back({r.key.problem, r.key.param, r.key.n});
    if (std::find(schemes.begin(), schemes.end(), r.key.scheme) == schemes.end())
      schemes.push_back(r.key.scheme);
  }
  std::sort(schemes.begin(), schemes.end());

  os << "| problem | param | h |";
  for (Scheme s : schemes) os << ' ' << scheme_name(s) << " |";
  os << "\n|---|---|---|";
  for (std::size_t k = 0; k < schemes.size(); ++k) os << "---|";
  os << '\n';
  for (const auto& g : groups) {
    os << "| " << problem_name(g.problem) << " | " << format_g(g.param) << " | 1/" << g.n - 1 << " |";
    for (Scheme s : schemes) {
      const auto pick = [&](const RunKey& k) {
        return k.problem == g.problem && k.param == g.param && k.n == g.n && k.scheme == s;
      };
      int diverged = 0, total = 0;
      for (const auto& r : rows)
        if (pick(r.key)) {
          ++total;
          diverged += r.diverged || !r.completed ? 1 : 0;
        }
      if (total == 0) {
        os << " - |";
        continue;
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4g", median_mse(rows, pick));
      os << ' ' << buf;
      if (diverged > 0) os << " (diverged " << diverged << '/' << total << ')';
      os << " |";
    }
    os << '\n';
  }
  os << "\nMedian MSE over seeds; diverged runs count as +inf in the median.\n";
}

}  // namespace pinnweigh
