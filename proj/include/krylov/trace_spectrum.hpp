#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>

#include "krylov/krylov.hpp"
#include "krylov/matfunc.hpp"
#include "krylov/orthopoly.hpp"

namespace krylov {

enum class ProbeDistribution { UnitSphere, Rademacher };

/// Unit-norm random probes.  Probe i depends only on (seed, i), so results do
/// not depend on how probes are scheduled across threads.
struct ProbeSampler {
  ProbeDistribution distribution = ProbeDistribution::UnitSphere;
  std::uint64_t seed = 0;

  Vector probe(Index i, Index d) const;
};

/// b ↦ bᵀ M b.
using QuadraticForm = std::function<double(const Vector&)>;

struct TraceEstimate {
  double estimate = 0.0;   // of d⁻¹ tr(·)
  double std_error = 0.0;  // sample standard deviation / √m_used
  Index m_used = 0;
  Index dropped = 0;       // probes that raised FunctionDomainError
  bool flagged = false;    // more than 1% of the probes were dropped
};

TraceEstimate hutchinson_trace(const QuadraticForm& qf, Index d, Index m, const ProbeSampler& sampler,
                               int threads = 1);

/// d⁻¹ tr(f(A)) from m Lanczos quadratic forms with k steps each.
TraceEstimate slq_trace(const LinearOperator& A, const MatrixFunction& f, Index k, Index m,
                        const ProbeSampler& sampler, int threads = 1);

/// d⁻¹ tr(Ã) + Hutchinson on A − Ã.
TraceEstimate control_variate_trace(const QuadraticForm& qf_A, double atilde_trace, const QuadraticForm& qf_Atilde,
                                    Index d, Index m, const ProbeSampler& sampler, int threads = 1);

/// Average of the m per-probe Gaussian quadratures, each with weight 1/m.
DiscreteMeasure slq_density(const LinearOperator& A, Index k, Index m, const ProbeSampler& sampler,
                            ReorthMode mode = ReorthMode::None, int threads = 1);

enum class KpmDamping { None, Jackson };
enum class KpmCoeffMethod { ExplicitRecurrence, LanczosQF };

struct KpmOptions {
  std::optional<std::pair<double, double>> interval;  // auto when unset
  KpmDamping damping = KpmDamping::None;
  KpmCoeffMethod method = KpmCoeffMethod::ExplicitRecurrence;
  ReorthMode mode = ReorthMode::None;  // used by the LanczosQF path
  int threads = 1;
};

/// Chebyshev series against the weight v(x) = 1/(π√(1 − x̃²)) on [a, b].
struct KpmDensity {
  double a = -1.0, b = 1.0;
  Vector moments;       // averaged bᵀT_n(Ã)b, n < 2k
  Vector coefficients;  // moments after damping

  double map(double x) const { return (2.0 * x - a - b) / (b - a); }
  double density(double x) const;
  double cdf(double x) const;
  /// ∫ g(x) μ(x) dx by n-point Gauss–Chebyshev; exact for polynomial g when
  /// deg g + 2k ≤ 2n.
  double integrate(const ScalarFn& g, Index n) const;
};

KpmDensity kpm_density(const LinearOperator& A, Index k, Index m, const ProbeSampler& sampler,
                       const KpmOptions& opts = {});

/// KPM coefficients of a single probe; exposed for testing the two paths.
Vector kpm_moments(const LinearOperator& A, const Vector& b, Index k, double a, double bb, KpmCoeffMethod method,
                   ReorthMode mode = ReorthMode::None);

using DensityApprox = std::variant<DiscreteMeasure, KpmDensity>;

double density_cdf(const DensityApprox& approx, double x);

}  // namespace krylov
