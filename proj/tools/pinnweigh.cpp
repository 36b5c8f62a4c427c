// Command-line front end: reference solves, single training runs, sweeps, gradient checks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pinnweigh/diffengine.hpp"
#include "pinnweigh/fdm.hpp"
#include "pinnweigh/harness.hpp"
#include "pinnweigh/optimizer.hpp"
#include "pinnweigh/simd/kernels.hpp"

namespace fs = std::filesystem;
using namespace pinnweigh;

namespace {

struct ProblemArgs {
  std::string problem = "conduction";
  int n = 11;
  double pe = 100.0;
  double re = 100.0;

  ProblemSpec spec() const {
    switch (parse_problem(problem)) {
      case ProblemKind::Conduction:
        return ProblemSpec::conduction();
      case ProblemKind::ConvDiff:
        return ProblemSpec::convdiff(pe);
      case ProblemKind::Cavity:
        return ProblemSpec::cavity(re);
    }
    return {};
  }
};

void add_problem_options(CLI::App* cmd, ProblemArgs& a) {
  cmd->add_option("--problem", a.problem, "conduction | convdiff | cavity")->required();
  cmd->add_option("--n", a.n, "nodes per side (h = 1/(N-1))")->check(CLI::Range(3, 100000));
  cmd->add_option("--pe", a.pe, "cell Peclet number (convdiff)");
  cmd->add_option("--re", a.re, "Reynolds number (cavity)");
}

void write_fields(const fs::path& dir, const std::vector<std::string>& names,
                  const std::vector<Field>& fields, const Grid& g) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < fields.size(); ++k)
    write_field_csv((dir / (names[k] + ".csv")).string(), fields[k], g);
}

int run_fdm(const ProblemArgs& a, const std::string& method, const std::string& out) {
  const ProblemSpec spec = a.spec();
  spec.validate();
  const Grid g(a.n);
  FdmSolution sol;
  if (spec.kind == ProblemKind::ConvDiff && method == "gs")
    sol = solve_convdiff_gs(g, spec.pe, make_boundary(spec, g));
  else
    sol = reference_solution(spec, g);

  write_fields(out, sol.names, sol.fields, g);
  std::ofstream conv(fs::path(out) / "convergence.json");
  write_convergence_json(conv, sol);
  write_convergence_json(std::cout, sol);
  if (spec.kind == ProblemKind::Cavity)
    std::printf("max cell divergence %.3e\n", sol.max_divergence);
  return 0;
}

int run_train(const ProblemArgs& a, const std::string& scheme, std::uint64_t seed, int iters,
              double lr, const std::string& out) {
  const ProblemSpec spec = a.spec();
  spec.validate();
  const Grid g(a.n);
  TrainConfig cfg = default_train_config(spec.kind);
  if (iters > 0) cfg.max_iters = iters;
  if (lr > 0.0) cfg.lr0 = lr;
  cfg.seed = seed;
  const Scheme s = parse_scheme(scheme);
  const auto arch = default_architecture(spec.kind);
  std::printf("%s %s N=%d arch %s iters %d\n", std::string(problem_name(spec.kind)).c_str(),
              std::string(scheme_name(s)).c_str(), a.n, arch.describe().c_str(), cfg.max_iters);

  const auto report_every = std::max(1, cfg.max_iters / 20);
  const TrainHistory hist = train(spec, s, g, arch, cfg, [&](int it, double loss) {
    if (it % report_every == 0) std::printf("  iter %6d  loss %.6e\n", it, loss);
  });
  if (hist.diverged) std::printf("diverged at iteration %d\n", hist.diverged_at);

  const FdmSolution ref = reference_solution(spec, g);
  const auto fields = predict_fields(hist.params, spec, g);
  const MseReport m = evaluate_mse(fields, ref, spec, g, {false, true});
  std::printf("steps %d  final loss %.6e  mse %.6e\n", hist.steps,
              hist.loss.empty() ? 0.0 : hist.loss.back(), m.mse);
  if (spec.kind == ProblemKind::Cavity) std::printf("mse_u %.6e  mse_v %.6e\n", m.mse_u, m.mse_v);

  const std::vector<std::string> names =
      spec.kind == ProblemKind::Cavity ? std::vector<std::string>{"u", "v", "p"}
                                       : std::vector<std::string>{"T"};
  write_fields(out, names, fields, g);
  write_checkpoint((fs::path(out) / "checkpoint.bin").string(), hist.params);
  return 0;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out, int workers) {
  std::ifstream is(config_path);
  if (!is) throw std::runtime_error("cannot read " + config_path);
  ExperimentConfig cfg = ExperimentConfig::from_json(nlohmann::json::parse(is));
  if (!out.empty()) cfg.output_dir = out;
  if (workers > 0) cfg.workers = workers;
  ReferenceCache cache;
  const SweepResult r = run_sweep(cfg, cache, [](const ReportRow& row) {
    std::printf("%-36s mse %.4e  %s  (%.1fs)\n", row.key.label().c_str(), row.mse, row.status.c_str(),
                row.wall_seconds);
    std::fflush(stdout);
  });
  write_comparison_table(std::cout, r.rows);
  return r.all_completed ? 0 : 1;
}

int run_gradcheck(int n, double eps, double tol, std::uint64_t seed) {
  struct Case {
    ProblemSpec spec;
    Architecture arch;
  };
  const Case cases[] = {
      {ProblemSpec::conduction(), {2, {8, 8}, 1}},
      {ProblemSpec::convdiff(10.0), {2, {8, 8}, 1}},
      {ProblemSpec::cavity(100.0), {2, {8, 8}, 3}},
  };
  bool ok = true;
  const Grid g(n);
  for (const auto& c : cases) {
    for (Scheme s : {Scheme::Equal, Scheme::NM, Scheme::NM2}) {
      PinnLoss loss(c.spec, g, compute_weights(c.spec, s, g), c.arch);
      const auto rep = fd_gradient_check(init_params(c.arch, seed), loss, eps);
      const bool pass = rep.max_rel_error < tol;
      ok = ok && pass;
      std::printf("%-10s %-5s %s  params %zu  max rel error %.3e (worst #%zu: analytic %.3e, numeric %.3e; max abs error %.1e)  %s\n",
                  std::string(problem_name(c.spec.kind)).c_str(), std::string(scheme_name(s)).c_str(),
                  c.arch.describe().c_str(), rep.parameter_count, rep.max_rel_error, rep.worst_index, rep.analytic, rep.numeric, rep.max_abs_error,
                  pass ? "ok" : "FAIL");
    }
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pinnweigh: grid-stencil PINNs and finite-difference references"};
  app.require_subcommand(1);
  std::string backend = "auto";
  std::string out = ".";
  app.add_option("--simd", backend, "kernel backend: auto | scalar | avx2");
  app.add_option("--out", out, "output directory");

  ProblemArgs fdm_args;
  std::string method = "direct";
  auto* fdm = app.add_subcommand("fdm", "finite-difference reference solution");
  add_problem_options(fdm, fdm_args);
  fdm->add_option("--method", method, "convdiff solver: direct | gs")->check(CLI::IsMember({"direct", "gs"}));

  ProblemArgs train_args;
  std::string scheme = "nm";
  std::uint64_t seed = 0;
  int iters = 0;
  double lr = 0.0;
  auto* trn = app.add_subcommand("train", "train one PINN and compare with the reference");
  add_problem_options(trn, train_args);
  trn->add_option("--scheme", scheme, "equal | nm | nm2");
  trn->add_option("--seed", seed, "initialisation seed");
  trn->add_option("--iters", iters, "override the iteration budget");
  trn->add_option("--lr", lr, "override the initial learning rate");

  std::string config;
  int workers = 0;
  auto* swp = app.add_subcommand("sweep", "run an experiment sweep from a JSON config");
  swp->add_option("--config", config, "experiment config file")->required()->check(CLI::ExistingFile);
  swp->add_option("--workers", workers, "parallel runs (overrides the config)");

  int gc_n = 5;
  double gc_eps = 1e-5, gc_tol = 1e-5;
  std::uint64_t gc_seed = 0;
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the loss gradient");
  gc->add_option("--n", gc_n, "grid nodes per side")->check(CLI::Range(3, 64));
  gc->add_option("--eps", gc_eps, "central-difference step");
  gc->add_option("--tol", gc_tol, "maximum accepted relative error");
  gc->add_option("--seed", gc_seed, "initialisation seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (backend != "auto") simd::set_backend(simd::parse_backend(backend));
    if (*fdm) return run_fdm(fdm_args, method, out);
    if (*trn) return run_train(train_args, scheme, seed, iters, lr, out);
    if (*swp) return run_sweep_cmd(config, app.get_option("--out")->count() ? out : "", workers);
    if (*gc) return run_gradcheck(gc_n, gc_eps, gc_tol, gc_seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
