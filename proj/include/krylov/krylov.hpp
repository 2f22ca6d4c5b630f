#pragma once

#include <vector>

#include "krylov/core.hpp"

namespace krylov {

enum class ReorthMode { None, Full };

struct Termination {
  enum class Kind { Completed, Breakdown };
  Kind kind = Kind::Completed;
  Index step = 0;  // k for Completed, number of steps taken for Breakdown
};

struct KrylovDecomposition {
  Matrix Q;                  // d×k
  SymTridiagonal T;
  double trailing_beta = 0;  // β_{k-1}
  Vector next_vector;        // q_k, empty after breakdown
  double b_norm = 0;
  Termination termination;

  Index steps() const { return T.size(); }
};

struct ArnoldiDecomposition {
  Matrix Q;  // d×k
  Matrix H;  // k×k upper Hessenberg
  double trailing = 0;
  Vector next_vector;
  double b_norm = 0;
  Termination termination;
};

struct BlockKrylovDecomposition {
  Matrix Q;                          // d×(Σ widths)
  std::vector<Matrix> A_blocks;      // Â_n, r_n×r_n
  std::vector<Matrix> B_blocks;      // B̂_n, r_{n+1}×r_n (last one trails the basis)
  Matrix initial_R;                  // B̂_{-1}, r_0×m
  std::vector<Index> block_widths;   // r_0, r_1, ... for the blocks in Q
  Matrix next_block;                 // Q̂_k (may have zero columns)
  Termination termination;

  Index steps() const { return static_cast<Index>(A_blocks.size()); }
  /// Banded block tridiagonal T_k.
  Matrix T() const;
  /// Column offset of block n inside Q.
  Index offset(Index n) const;
};

constexpr double kDefaultBreakdownTol = 1e-12;
constexpr double kDefaultDeflationTol = 1e-10;

/// One step of the symmetric three-term recurrence, shared by the Lanczos
/// builder and by basis regeneration so both produce identical bits:
///   y = A q_n − β_{n−1} q_{n−1},  α = q_nᵀ y,  z = y − α q_n.
/// The caller divides z by β_n.
void lanczos_residual(const LinearOperator& A, const Vector& q_prev, const Vector& q_cur, double beta_prev,
                      Vector& y);
void lanczos_subtract(const Vector& q_cur, double alpha, Vector& z);

/// Incremental Lanczos builder.  After j successful calls to step() it holds
/// α_0..α_{j-1}, β_0..β_{j-1} and q_0..q_j (q_j is the "next" vector).
class LanczosProcess {
public:
  LanczosProcess(const LinearOperator& A, const Vector& b, ReorthMode mode, bool store_basis = true,
                 double breakdown_tol = kDefaultBreakdownTol);

  /// Advances one step.  Returns false (and performs nothing) once broken down.
  bool step();

  Index steps() const { return static_cast<Index>(alphas_.size()); }
  bool broken_down() const { return broken_; }
  double b_norm() const { return b_norm_; }
  const std::vector<double>& alphas() const { return alphas_; }
  const std::vector<double>& betas() const { return betas_; }
  /// T_j for the current number of steps j.
  SymTridiagonal tridiagonal() const;
  SymTridiagonal tridiagonal(Index j) const;
  /// q_j (the vector produced by the latest step); empty after breakdown.
  const Vector& next() const { return q_next_; }
  /// q_{j-1}.
  const Vector& current() const { return q_cur_; }
  bool stores_basis() const { return store_; }
  /// First j stored columns (requires store_basis).
  Matrix basis(Index j) const;
  const std::vector<Vector>& basis_vectors() const { return Q_; }
  KrylovDecomposition decomposition() const;

private:
  const LinearOperator& A_;
  ReorthMode mode_;
  bool store_;
  double tol_;
  double b_norm_;
  double scale_ = 0.0;
  bool broken_ = false;
  std::vector<double> alphas_, betas_;
  std::vector<Vector> Q_;
  Vector q_cur_, q_next_;
  Vector y_;
};

ArnoldiDecomposition arnoldi(const LinearOperator& A, const Vector& b, Index k,
                             double breakdown_tol = kDefaultBreakdownTol);

KrylovDecomposition lanczos(const LinearOperator& A, const Vector& b, Index k, ReorthMode mode,
                            double breakdown_tol = kDefaultBreakdownTol);

BlockKrylovDecomposition block_lanczos(const LinearOperator& A, const Matrix& B, Index k, ReorthMode mode,
                                       double deflation_tol = kDefaultDeflationTol);

Index krylov_grade(const LinearOperator& A, const Vector& b, double tol = kDefaultBreakdownTol);

/// Σ_n (scale·c_n) q_n over the first c.size() vectors, accumulated left to
/// right so that every caller reproduces the same bits.
Vector basis_combination(const std::vector<Vector>& Q, const Vector& c, double scale = 1.0);
CVector basis_combination(const std::vector<Vector>& Q, const CVector& c, double scale = 1.0);

/// max |QᵀQ − I|.
double orthogonality_loss(const Matrix& Q);

}  // namespace krylov
