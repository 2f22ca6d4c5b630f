#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/SparseCore>

#include "krylov/core.hpp"
#include "krylov/matfunc.hpp"

namespace krylov {

// ---------------------------------------------------------------------------
// Matrix specifications

struct MatrixSpec;

struct ExplicitEigenvalues {
  std::vector<double> values;
};
/// λᵢ = λmin + (i−1)/(d−1)·(λmax − λmin)·ρ^{d−i}.
struct GradedSpectrum {
  Index d = 0;
  double lambda_min = 0, lambda_max = 0, rho = 0.9;
};
/// ⌊d/2⌋ equally spaced points on [a, b], the rest on [c, d2].
struct TwoIntervalSpectrum {
  Index d = 0;
  double a = 0, b = 0, c = 0, d2 = 0;
};
/// Each base eigenvalue becomes cluster_size equally spaced values spanning
/// cluster_width and centred on it.
struct ClusterPerturbed {
  std::shared_ptr<const MatrixSpec> base;
  Index cluster_size = 0;
  double cluster_width = 0;
};
struct MatrixMarketFile {
  std::string path;
};

struct MatrixSpec {
  std::variant<ExplicitEigenvalues, GradedSpectrum, TwoIntervalSpectrum, ClusterPerturbed, MatrixMarketFile> kind;
  std::optional<std::uint64_t> rotation_seed;
};

/// Parses the textual form used by config files and `matrix-info`, e.g.
///   graded(d=64, lambda_min=1, lambda_max=1000, rho=0.9, rotation_seed=3)
///   eigenvalues(1, 2, 3)
///   two_interval(d=100, a=-2, b=-1, c=1, d2=2)
///   cluster(base=graded(d=64, lambda_min=1, lambda_max=1000), size=10, width=1.2e-13)
///   mm(path/to/file.mtx)
MatrixSpec parse_matrix_spec(const std::string& text);
std::string format_matrix_spec(const MatrixSpec& spec);

/// Sorted eigenvalues of the spectrum-defined kinds (nullopt for files).
std::optional<Vector> spec_spectrum(const MatrixSpec& spec);

struct GeneratedOperator {
  LinearOperator op;
  std::optional<Vector> spectrum;  // ascending, when known exactly
  std::vector<std::string> warnings;
};

GeneratedOperator generate_operator(const MatrixSpec& spec);

/// Haar-like random orthogonal matrix from the QR factorization of a seeded
/// Gaussian matrix.
Matrix random_orthogonal(Index d, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Matrix Market input

using CsrMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct LoadedMatrix {
  std::shared_ptr<const CsrMatrix> matrix;
  std::vector<std::string> warnings;
  LinearOperator op() const;
};

LoadedMatrix load_matrix_market(const std::string& path);

// ---------------------------------------------------------------------------
// Dense oracles

/// min over x ∈ K_j(A, b) of ‖f(A)b − x‖ for j = 1..k.
std::vector<double> optimal_ksm_error(const LinearOperator& A, const Vector& b, const ScalarFn& f, Index k);

// ---------------------------------------------------------------------------
// Experiment configuration

/// Named scalar function with parameters, e.g. "exp(-1)" for e^{−x}.
struct FunctionSpec {
  std::string name = "sqrt";
  std::vector<double> params;

  ScalarFn make() const;
  std::string text() const;
};

FunctionSpec parse_function_spec(const std::string& text);

struct ExperimentConfig {
  std::vector<std::string> experiments;
  MatrixSpec matrix;
  Index k = 40;
  Index m = 8;
  std::uint64_t seed = 1;
  std::string output;  // file name inside the output directory; empty means <experiment>.csv
  std::optional<FunctionSpec> function;  // each experiment has its own default
  ReorthMode reorth = ReorthMode::Full;
  int threads = 1;
  std::map<std::string, double> tolerances;
};

/// Reads the key = value / [section] format.  Unknown keys raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Stable 64-bit hash of the normalized configuration (after overrides).
std::string config_hash(const ExperimentConfig& cfg);
std::string normalized_config(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Experiments

struct CsvRow {
  std::string series;
  Index k;
  double value;
};

struct AssertionResult {
  std::string name;
  enum class Status { Pass, Fail, NotApplicable } status = Status::Pass;
  double measured = 0.0;
  double expected = 0.0;
  std::string detail;
};

struct ExperimentResult {
  std::string experiment;
  std::string figure_ref;
  std::vector<CsvRow> rows;
  std::vector<AssertionResult> assertions;
  bool passed() const;
};

struct ExperimentInfo {
  std::string name;
  std::string figure_ref;
  std::string description;
  std::map<std::string, double> default_tolerances;
};

const std::vector<ExperimentInfo>& experiment_catalog();
const ExperimentInfo& experiment_info(const std::string& name);

ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& cfg);

/// experiment,figure_ref,series,k,value with a leading comment line carrying
/// the config hash; doubles are printed with 17 significant digits.
std::string to_csv(const ExperimentResult& result, const ExperimentConfig& cfg);

}  // namespace krylov
