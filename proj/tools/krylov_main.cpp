// Command-line front end: runs named experiments from a config file and
// writes one CSV per experiment.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "krylov/cli.hpp"

namespace fs = std::filesystem;
using namespace krylov;

namespace {

const char* status_text(AssertionResult::Status s) {
  switch (s) {
    case AssertionResult::Status::Pass: return "PASS";
    case AssertionResult::Status::Fail: return "FAIL";
    default: return "N/A ";
  }
}

std::string output_name(const ExperimentConfig& cfg, const std::string& experiment) {
  if (cfg.output.empty()) return experiment + ".csv";
  if (cfg.experiments.size() == 1) return cfg.output;
  const fs::path p(cfg.output);
  return p.stem().string() + "_" + experiment + (p.has_extension() ? p.extension().string() : ".csv");
}

int cmd_run(const std::string& path, const std::optional<std::uint64_t>& seed, const std::string& out_dir,
            const std::optional<int>& threads, const std::optional<Index>& k, const std::optional<Index>& m) {
  ExperimentConfig cfg = load_config(path);
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  if (k) cfg.k = *k;
  if (m) cfg.m = *m;
  if (cfg.k < 1 || cfg.m < 1 || cfg.threads < 1) throw ConfigError("--k, --m and --threads must be positive");

  fs::create_directories(out_dir);
  bool ok = true;
  for (const std::string& name : cfg.experiments) {
    ExperimentResult res = run_experiment(name, cfg);
    const fs::path out = fs::path(out_dir) / output_name(cfg, name);
    std::ofstream f(out, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + out.string());
    f << to_csv(res, cfg);
    for (const auto& a : res.assertions) {
      std::printf("[%s] %s/%s measured=%.6g expected=%.6g  %s\n", status_text(a.status), name.c_str(),
                  a.name.c_str(), a.measured, a.expected, a.detail.c_str());
    }
    std::printf("%s: %s -> %s\n", name.c_str(), res.passed() ? "ok" : "FAILED", out.string().c_str());
    ok = ok && res.passed();
  }
  return ok ? 0 : 1;
}

int cmd_list() {
  for (const auto& info : experiment_catalog()) {
    std::printf("%-18s %-28s %s\n", info.name.c_str(), info.figure_ref.c_str(), info.description.c_str());
  }
  return 0;
}

int cmd_matrix_info(const std::string& text) {
  const MatrixSpec spec = parse_matrix_spec(text);
  GeneratedOperator g = generate_operator(spec);
  for (const auto& w : g.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("spec: %s\n", format_matrix_spec(spec).c_str());
  std::printf("dimension: %lld\n", static_cast<long long>(g.op.dim()));
  if (const auto* f = std::get_if<MatrixMarketFile>(&spec.kind)) {
    std::printf("nonzeros: %lld\n", static_cast<long long>(load_matrix_market(f->path).matrix->nonZeros()));
  }
  std::printf("symmetry defect: %.3g\n", symmetry_defect(g.op));
  Vector lam;
  if (g.spectrum) {
    lam = *g.spectrum;
  } else if (g.op.dim() <= 2000) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g.op.to_dense(), Eigen::EigenvaluesOnly);
    lam = es.eigenvalues();
  } else {
    std::printf("spectrum: not computed (d > 2000)\n");
    return 0;
  }
  const double lmin = lam.minCoeff(), lmax = lam.maxCoeff();
  std::printf("lambda_min: %.17g\nlambda_max: %.17g\n", lmin, lmax);
  if (lmin > 0.0) {
    std::printf("condition number: %.17g\n", lmax / lmin);
  } else {
    std::printf("condition number: n/a (not positive definite)\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Krylov subspace experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the experiments named in a config file");
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<Index> k, m;
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out-dir", out_dir, "directory for CSV output");
  run->add_option("--threads", threads, "worker threads for probe evaluation");
  run->add_option("--k", k, "override the number of Lanczos steps");
  run->add_option("--m", m, "override the number of probes");

  auto* list = app.add_subcommand("list-experiments", "list the available experiments");

  auto* info = app.add_subcommand("matrix-info", "describe a matrix spec, e.g. 'graded(d=48, lambda_min=1e-3, lambda_max=1e3)'");
  std::string spec_text;
  info->add_option("spec", spec_text, "matrix spec")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seed, out_dir, threads, k, m);
    if (*list) return cmd_list();
    if (*info) return cmd_matrix_info(spec_text);
  } catch (const KrylovError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
