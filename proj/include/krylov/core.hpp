#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>

#include <Eigen/Dense>

#include "krylov/errors.hpp"

namespace krylov {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;
using ScalarFn = std::function<double(double)>;

/// Matrix-free symmetric operator of dimension d.  The apply callback must be
/// safe to call concurrently; the trace estimators evaluate probes in parallel.
class LinearOperator {
public:
  using ApplyFn = std::function<void(const Vector&, Vector&)>;

  LinearOperator(Index dim, ApplyFn fn);

  Index dim() const { return dim_; }
  void apply(const Vector& x, Vector& y) const;
  Vector apply(const Vector& x) const;
  Matrix apply(const Matrix& X) const;
  CVector apply(const CVector& x) const;

  /// Explicit d×d matrix (d applications); intended for small test problems.
  Matrix to_dense() const;

  /// A − zI.
  LinearOperator shifted(double z) const;
  /// c·A.
  LinearOperator scaled(double c) const;

  static LinearOperator dense(Matrix A);
  static LinearOperator diagonal(Vector diag);
  static LinearOperator identity(Index dim);
  /// M A Mᵀ for symmetric M (so Mᵀ = M); used by the preconditioned solvers.
  static LinearOperator congruence(const LinearOperator& M, const LinearOperator& A);

private:
  Index dim_;
  ApplyFn fn_;
};

/// max |uᵀAv − vᵀAu| / (‖Av‖‖u‖) over a few seeded random unit pairs.
double symmetry_defect(const LinearOperator& A, std::uint64_t seed = 1, int trials = 4);

struct SymTridiagonal {
  Vector alphas;  // length k
  Vector betas;   // length k-1

  SymTridiagonal() = default;
  SymTridiagonal(Vector a, Vector b);

  Index size() const { return alphas.size(); }
  Matrix dense() const;
  /// ∞-norm; equals the 1-norm by symmetry and bounds the 2-norm.
  double norm_inf() const;
  SymTridiagonal leading(Index k) const;
  SymTridiagonal shifted(double z) const;
  Vector multiply(const Vector& x) const;
};

struct TridiagEig {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // columns, first nonzero entry positive
};

struct ExtendedTridiagonal {
  SymTridiagonal base;
  double trailing = 0.0;

  Index rows() const { return base.size() + 1; }
  Index cols() const { return base.size(); }
  Matrix dense() const;
};

TridiagEig sym_tridiag_eig(const SymTridiagonal& T);
Vector sym_tridiag_eigenvalues(const SymTridiagonal& T);

/// f(T)e₁.  Throws FunctionDomainError when f is NaN/Inf at an eigenvalue.
Vector tridiag_apply_function(const SymTridiagonal& T, const ScalarFn& f);
Vector tridiag_apply_function(const TridiagEig& eig, const ScalarFn& f);

/// Solves (T − shift·I)x = rhs.  Throws SingularSystem on a tiny pivot.
CVector tridiag_solve(const SymTridiagonal& T, const CVector& rhs, Complex shift);
Vector tridiag_solve(const SymTridiagonal& T, const Vector& rhs, double shift = 0.0);

/// Least-squares solution of min ‖rhs − (T_{k+1,k} − shift·I_{k+1,k})x‖.
CVector tridiag_solve(const ExtendedTridiagonal& T, const CVector& rhs, Complex shift);
Vector tridiag_solve(const ExtendedTridiagonal& T, const Vector& rhs, double shift = 0.0);

/// Runs fn(i) for i in [0, n) on up to `threads` workers.  Each index is
/// handled exactly once; callers store results by index so that reductions
/// stay ordered.
void parallel_for(Index n, int threads, const std::function<void(Index)>& fn);

}  // namespace krylov
