#pragma once

#include <vector>

#include "krylov/core.hpp"

namespace krylov {

/// Point-mass measure Σ ωᵢ δ(x − θᵢ) with strictly ascending nodes.
class DiscreteMeasure {
public:
  DiscreteMeasure() = default;
  /// Sorts the nodes, merges nodes closer than 1e-12·span (weights summed).
  DiscreteMeasure(const Vector& nodes, const Vector& weights);

  const Vector& nodes() const { return nodes_; }
  const Vector& weights() const { return weights_; }
  double total_mass() const { return mass_; }
  Index size() const { return nodes_.size(); }

  /// Right-continuous CDF M(x) = Σ_{θᵢ ≤ x} ωᵢ.
  double cdf(double x) const;
  /// Left limit M(x⁻) = Σ_{θᵢ < x} ωᵢ.
  double cdf_left(double x) const;
  double integrate(const ScalarFn& f) const;
  double moment(int j) const;
  DiscreteMeasure scaled(double c) const;

  /// ψ(x; A, b) from a dense eigendecomposition (λ, U): weights |uᵢᵀb|².
  static DiscreteMeasure eigenvector_density(const Vector& eigenvalues, const Matrix& eigenvectors,
                                             const Vector& b);
  /// φ(x; A): mass 1/d at each eigenvalue.
  static DiscreteMeasure spectral_density(const Vector& eigenvalues);
  /// Union of measures; weights are added (no rescaling).
  static DiscreteMeasure merge(const std::vector<DiscreteMeasure>& parts);

private:
  Vector nodes_, weights_;
  double mass_ = 0.0;
};

enum class ChebKind { T, U };

double cheb_eval(ChebKind kind, int n, double x);

/// p(x) = c₀T₀(x̃) + 2 Σ_{n≥1} c_n T_n(x̃),  x̃ = (2x − a − b)/(b − a).
struct ChebyshevExpansion {
  Vector coefficients;
  double a = -1.0, b = 1.0;

  double map(double x) const { return (2.0 * x - a - b) / (b - a); }
  double operator()(double x) const;
};

ChebyshevExpansion cheb_approximant(const ScalarFn& f, int degree, double a = -1.0, double b = 1.0);

/// Jacobi matrix of the normalized measure, via Lanczos on diag(nodes).
SymTridiagonal stieltjes(const DiscreteMeasure& measure, Index k);

/// Nodes: eigenvalues of M; weights: total_mass·(first eigenvector entry)².
DiscreteMeasure gauss_quadrature(const SymTridiagonal& M, double total_mass = 1.0);

/// Orthonormal polynomials p_0..p_{k-1} of the Jacobi matrix M at x (p_0 = 1).
Vector orthonormal_polys(const SymTridiagonal& M, double x);

struct PolyBasis {
  enum class Kind { ChebyshevT, Monomial };
  Kind kind = Kind::ChebyshevT;
  double a = -1.0, b = 1.0;
};

/// m_j = Σᵢ ωᵢ q_j(θᵢ) for j < count.
Vector modified_moments(const DiscreteMeasure& measure, const PolyBasis& basis, Index count);

struct JacksonWeights {
  Vector rho;  // length 2k
};

JacksonWeights jackson_damping(Index k);

double wasserstein(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2);

struct CdfReport {
  std::vector<bool> straddle;  // per quadrature node
  Index violations = 0;
  Index sign_changes = 0;
};

/// Checks M_k(θᵢ⁻) ≤ M(θᵢ) ≤ M_k(θᵢ⁺) at every node of `quad` and counts
/// sign changes of M − M_k.
CdfReport cdf_compare(const DiscreteMeasure& mu, const DiscreteMeasure& quad, double tol = 1e-12);

}  // namespace krylov
