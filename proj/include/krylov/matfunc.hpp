#pragma once

#include <optional>
#include <type_traits>

#include "krylov/krylov.hpp"
#include "krylov/solvers.hpp"

namespace krylov {

/// Scalar function applied through a Krylov method.  When `domain` is set,
/// any Ritz value outside [lo, hi] raises FunctionDomainError instead of
/// being evaluated.
struct MatrixFunction {
  struct Domain {
    double lo, hi;
  };

  ScalarFn fn;
  std::optional<Domain> domain;

  MatrixFunction() = default;
  MatrixFunction(ScalarFn f, std::optional<Domain> d = std::nullopt) : fn(std::move(f)), domain(d) {}
  template <class F, class = std::enable_if_t<std::is_invocable_r_v<double, F, double> &&
                                              !std::is_same_v<std::decay_t<F>, ScalarFn> &&
                                              !std::is_same_v<std::decay_t<F>, MatrixFunction>>>
  MatrixFunction(F f) : fn(std::move(f)) {}

  /// fn wrapped with the domain check.
  ScalarFn checked() const;
};

struct MatFuncDiagnostics {
  std::optional<double> orthogonality_loss;  // only when the basis is stored
  double trailing_beta = 0.0;
};

struct MatFuncResult {
  Vector value;
  Index k_used = 0;
  MatFuncDiagnostics diagnostics;
};

enum class FaFormula { Correct, PitfallQfTQtB };

/// ‖b‖ Q_k f(T_k) e₁ (Correct) or Q_k f(T_k) Q_kᵀ b (PitfallQfTQtB).
MatFuncResult lanczos_fa(const LinearOperator& A, const Vector& b, const MatrixFunction& f, Index k,
                         ReorthMode mode, FaFormula formula = FaFormula::Correct);

/// Lanczos-FA without storing Q_k: the first pass keeps (q_{j−1}, q_j) every
/// `stride` steps, the second regenerates the basis from those checkpoints.
/// Bit-identical to lanczos_fa(mode = None).
MatFuncResult two_pass_lanczos_fa(const LinearOperator& A, const Vector& b, const MatrixFunction& f, Index k,
                                  Index stride);

/// ‖b‖² e₁ᵀ f(T_k) e₁, streaming (the basis is never stored for mode None).
double lanczos_qf(const LinearOperator& A, const Vector& b, const MatrixFunction& f, Index k,
                  ReorthMode mode = ReorthMode::None);

enum class RationalMethod { FAShifted, MultiShiftSolver };

struct RationalResult {
  Vector value;
  double imag_relative = 0.0;  // ‖Im‖/‖Re‖ of the discarded imaginary part
  Index k_used = 0;
};

/// Σᵢ wᵢ (A − zᵢI)⁻¹ b approximated from a single Lanczos run.
RationalResult rational_apply(const LinearOperator& A, const Vector& b, const ShiftFamily& family, Index k,
                              RationalMethod method, ReorthMode mode = ReorthMode::None);

/// Q_k f(T_k) E₁ B̂_{−1}.
Matrix block_lanczos_fa(const LinearOperator& A, const Matrix& B, const MatrixFunction& f, Index k,
                        ReorthMode mode = ReorthMode::Full, double deflation_tol = kDefaultDeflationTol);

/// B̂_{−1}ᵀ E₁ᵀ f(T_k) E₁ B̂_{−1}, symmetric m×m.
Matrix block_lanczos_qf(const LinearOperator& A, const Matrix& B, const MatrixFunction& f, Index k,
                        ReorthMode mode = ReorthMode::Full, double deflation_tol = kDefaultDeflationTol);

/// 4 · 2‖b‖ · ‖f − p‖ on [lo, hi], p the interpolant at k Chebyshev points and
/// the sup norm sampled on a 10⁴-point grid.
double fa_apriori_bound(const ScalarFn& f, double lo, double hi, Index k, double b_norm);

/// Quadratic-form analogue: 4 · 2‖b‖² · ‖f − p‖ with deg p < 2k.
double qf_apriori_bound(const ScalarFn& f, double lo, double hi, Index k, double b_norm);

}  // namespace krylov
