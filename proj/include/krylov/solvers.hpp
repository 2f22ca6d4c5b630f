#pragma once

#include <variant>
#include <vector>

#include "krylov/krylov.hpp"

namespace krylov {

struct SolverStop {
  enum class Kind { MaxIter, Converged, SingularPivot };
  Kind kind = Kind::MaxIter;
  Index step = 0;
  double tol = 0.0;
};

/// Per-iteration solver output.  Entry i of each list belongs to step steps[i];
/// steps where the iterate is undefined are listed in skipped_steps instead.
struct IterateHistory {
  std::vector<Index> steps;
  std::vector<Vector> iterates;           // empty when retention is off
  std::vector<double> residual_norms;     // ‖b − A x_k‖, recomputed explicitly
  std::vector<double> anorm_error_estimates;
  std::vector<Index> skipped_steps;
  std::vector<Vector> directions;         // LowMemory CG search directions, on request
  SolverStop termination;
  double b_norm = 0.0;
};

struct SolverOptions {
  double tol = 1e-10;            // relative residual for early stopping
  bool stop_on_convergence = true;
  bool retain_iterates = true;
  bool retain_directions = false;
  double breakdown_tol = kDefaultBreakdownTol;
};

enum class CgBackend { Tridiagonal, LowMemory };
enum class SolveMethod { CG, MINRES };

IterateHistory cg(const LinearOperator& A, const Vector& b, Index k, CgBackend backend, ReorthMode mode,
                  const SolverOptions& opts = {});

IterateHistory minres(const LinearOperator& A, const Vector& b, Index k, ReorthMode mode,
                      const SolverOptions& opts = {});

struct ShiftFamily {
  std::vector<Complex> shifts;
  std::vector<Complex> weights;
};

/// History of one shifted system (A − zI)x = b; iterates may be complex.
struct ShiftedHistory {
  Complex shift;
  std::vector<Index> steps;
  std::vector<CVector> iterates;
  std::vector<double> residual_norms;
  std::vector<Index> skipped_steps;
};

struct MultiShiftOptions {
  ReorthMode mode = ReorthMode::None;
  bool compute_residuals = true;
  bool retain_iterates = true;
  int threads = 1;
};

/// One Lanczos run on (A, b); per-shift small solves at each step.
std::vector<ShiftedHistory> multi_shift_solve(const LinearOperator& A, const Vector& b, const ShiftFamily& shifts,
                                              Index k, SolveMethod method, const MultiShiftOptions& opts = {});

/// Solves M A M y = M b and returns x = M y; residuals refer to A x = b.
IterateHistory preconditioned_solve(const LinearOperator& A, const LinearOperator& M, const Vector& b, Index k,
                                    SolveMethod method, ReorthMode mode = ReorthMode::None,
                                    const SolverOptions& opts = {});

struct FullInterval {
  double lambda_min, lambda_max;
};
/// All but the top `outliers` eigenvalues lie in [lambda_min, lambda_cut].
struct TopCluster {
  double lambda_min, lambda_cut;
  Index outliers;
};
/// Λ ⊂ [a, b] ∪ [c, d] with b < 0 < c and b − a = d − c.
struct TwoInterval {
  double a, b, c, d;
};
using BoundSpec = std::variant<FullInterval, TopCluster, TwoInterval>;

double chebyshev_bound(const BoundSpec& spec, Index k);

/// estimate[i] = ‖x_{steps[i]+d} − x_{steps[i]}‖_A for every recorded step
/// whose d-ahead iterate is also recorded.
std::vector<double> error_estimate_delay(const IterateHistory& history, const LinearOperator& A, Index d);

struct BlockIterateHistory {
  std::vector<Index> steps;
  std::vector<Matrix> iterates;
  std::vector<double> residual_norms;  // Frobenius ‖B − A X_k‖
  std::vector<Index> block_widths;     // widths of the block Krylov basis
  bool deflated = false;
  SolverStop termination;
};

BlockIterateHistory block_cg(const LinearOperator& A, const Matrix& B, Index k,
                             ReorthMode mode = ReorthMode::Full, double deflation_tol = kDefaultDeflationTol);

}  // namespace krylov
