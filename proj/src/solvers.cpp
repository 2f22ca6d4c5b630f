#include "krylov/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace krylov {

namespace {

double explicit_residual(const LinearOperator& A, const Vector& b, const Vector& x) {
  return (b - A.apply(x)).norm();
}

void record(IterateHistory& h, Index step, Vector x, double res, bool keep) {
  h.steps.push_back(step);
  h.residual_norms.push_back(res);
  if (keep) h.iterates.push_back(std::move(x));
}

bool converged(const SolverOptions& opts, double res, double b_norm) {
  return opts.stop_on_convergence && res <= opts.tol * b_norm;
}

// Shared driver for the stored-basis CG and MINRES iterates.  `solve_small`
// returns the coefficient vector y for the current Lanczos state.
template <class SmallSolve>
IterateHistory stored_basis_solve(const LinearOperator& A, const Vector& b, Index k, ReorthMode mode,
                                  const SolverOptions& opts, SmallSolve solve_small) {
  if (k < 1) throw std::invalid_argument("solver: k must be at least 1");
  LanczosProcess proc(A, b, mode, true, opts.breakdown_tol);
  IterateHistory h;
  h.b_norm = proc.b_norm();
  h.termination.tol = opts.tol;
  for (Index j = 1; j <= k; ++j) {
    if (!proc.step()) break;
    Vector y;
    try {
      y = solve_small(proc);
    } catch (const SingularSystem&) {
      h.skipped_steps.push_back(j);
      if (proc.broken_down()) break;
      continue;
    }
    Vector x = basis_combination(proc.basis_vectors(), y, proc.b_norm());
    const double res = explicit_residual(A, b, x);
    record(h, j, std::move(x), res, opts.retain_iterates);
    if (converged(opts, res, h.b_norm)) {
      h.termination.kind = SolverStop::Kind::Converged;
      h.termination.step = j;
      return h;
    }
    if (proc.broken_down()) break;
  }
  h.termination.kind = SolverStop::Kind::MaxIter;
  h.termination.step = h.steps.empty() ? 0 : h.steps.back();
  return h;
}

IterateHistory low_memory_cg(const LinearOperator& A, const Vector& b, Index k, ReorthMode mode,
                             const SolverOptions& opts) {
  if (k < 1) throw std::invalid_argument("cg: k must be at least 1");
  LanczosProcess proc(A, b, mode, false, opts.breakdown_tol);
  IterateHistory h;
  h.b_norm = proc.b_norm();
  h.termination.tol = opts.tol;

  Vector x = Vector::Zero(A.dim());
  Vector p_prev;
  double l_prev = 0.0;
  for (Index j = 1; j <= k; ++j) {
    if (!proc.step()) break;
    const Index n = j - 1;
    const double alpha = proc.alphas()[n];
    const Vector& q = proc.current();
    // Cholesky of T_k = L Lᵀ, one new row per step.
    double m = 0.0, pivot = alpha;
    if (n > 0) {
      m = proc.betas()[n - 1] / l_prev;
      pivot = alpha - m * m;
    }
    if (!(pivot > 0.0)) {
      h.termination.kind = SolverStop::Kind::SingularPivot;
      h.termination.step = j;
      return h;
    }
    const double l = std::sqrt(pivot);
    Vector p = n == 0 ? Vector(q / l) : Vector((q - m * p_prev) / l);
    x.noalias() += p.dot(b) * p;
    const double res = explicit_residual(A, b, x);
    record(h, j, x, res, opts.retain_iterates);
    if (opts.retain_directions) h.directions.push_back(p);
    p_prev = std::move(p);
    l_prev = l;
    if (converged(opts, res, h.b_norm)) {
      h.termination.kind = SolverStop::Kind::Converged;
      h.termination.step = j;
      return h;
    }
    if (proc.broken_down()) break;
  }
  h.termination.kind = SolverStop::Kind::MaxIter;
  h.termination.step = h.steps.empty() ? 0 : h.steps.back();
  return h;
}

Vector first_unit(Index n, double v) {
  Vector e = Vector::Zero(n);
  e[0] = v;
  return e;
}

}  // namespace

IterateHistory cg(const LinearOperator& A, const Vector& b, Index k, CgBackend backend, ReorthMode mode,
                  const SolverOptions& opts) {
  if (backend == CgBackend::LowMemory) return low_memory_cg(A, b, k, mode, opts);
  return stored_basis_solve(A, b, k, mode, opts, [](const LanczosProcess& p) {
    SymTridiagonal T = p.tridiagonal();
    return tridiag_solve(T, first_unit(T.size(), 1.0));
  });
}

IterateHistory minres(const LinearOperator& A, const Vector& b, Index k, ReorthMode mode,
                      const SolverOptions& opts) {
  return stored_basis_solve(A, b, k, mode, opts, [](const LanczosProcess& p) {
    ExtendedTridiagonal T{p.tridiagonal(), p.betas().back()};
    return tridiag_solve(T, first_unit(T.rows(), 1.0));
  });
}

std::vector<ShiftedHistory> multi_shift_solve(const LinearOperator& A, const Vector& b, const ShiftFamily& shifts,
                                              Index k, SolveMethod method, const MultiShiftOptions& opts) {
  if (k < 1) throw std::invalid_argument("multi_shift_solve: k must be at least 1");
  const std::size_t q = shifts.shifts.size();
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = i + 1; j < q; ++j) {
      if (shifts.shifts[i] == shifts.shifts[j]) throw std::invalid_argument("multi_shift_solve: repeated shift");
    }
  }

  std::vector<ShiftedHistory> out(q);
  for (std::size_t i = 0; i < q; ++i) out[i].shift = shifts.shifts[i];

  LanczosProcess proc(A, b, opts.mode, true, kDefaultBreakdownTol);
  const double bn = proc.b_norm();
  for (Index j = 1; j <= k; ++j) {
    if (!proc.step()) break;
    const SymTridiagonal T = proc.tridiagonal();
    const double trailing = proc.betas().back();

    parallel_for(static_cast<Index>(q), opts.threads, [&](Index ii) {
      const std::size_t i = static_cast<std::size_t>(ii);
      ShiftedHistory& h = out[i];
      const Complex z = h.shift;
      CVector y;
      try {
        // Real shifts go through the real kernels so that z = 0 reproduces the
        // single-shift solvers exactly.
        if (z.imag() == 0.0) {
          Vector yr = method == SolveMethod::CG
                          ? tridiag_solve(T, first_unit(T.size(), 1.0), z.real())
                          : tridiag_solve(ExtendedTridiagonal{T, trailing}, first_unit(T.size() + 1, 1.0), z.real());
          y = yr.cast<Complex>();
        } else {
          CVector rhs = CVector::Zero(method == SolveMethod::CG ? T.size() : T.size() + 1);
          rhs[0] = 1.0;
          y = method == SolveMethod::CG ? tridiag_solve(T, rhs, z)
                                        : tridiag_solve(ExtendedTridiagonal{T, trailing}, rhs, z);
        }
      } catch (const SingularSystem&) {
        h.skipped_steps.push_back(j);
        return;
      }
      CVector x = basis_combination(proc.basis_vectors(), y, bn);
      h.steps.push_back(j);
      if (opts.compute_residuals) {
        CVector r = b.cast<Complex>() - A.apply(x) + z * x;
        h.residual_norms.push_back(r.norm());
      }
      if (opts.retain_iterates) h.iterates.push_back(std::move(x));
    });
    if (proc.broken_down()) break;
  }
  return out;
}

IterateHistory preconditioned_solve(const LinearOperator& A, const LinearOperator& M, const Vector& b, Index k,
                                    SolveMethod method, ReorthMode mode, const SolverOptions& opts) {
  if (M.dim() != A.dim()) throw DimensionMismatch("preconditioned_solve: M and A differ in dimension");
  LinearOperator MAM = LinearOperator::congruence(M, A);
  const Vector Mb = M.apply(b);
  SolverOptions inner = opts;
  inner.retain_iterates = true;
  IterateHistory h = method == SolveMethod::CG ? cg(MAM, Mb, k, CgBackend::Tridiagonal, mode, inner)
                                               : minres(MAM, Mb, k, mode, inner);
  IterateHistory out;
  out.steps = h.steps;
  out.skipped_steps = h.skipped_steps;
  out.termination = h.termination;
  out.b_norm = b.norm();
  for (const Vector& y : h.iterates) {
    Vector x = M.apply(y);
    out.residual_norms.push_back(explicit_residual(A, b, x));
    if (opts.retain_iterates) out.iterates.push_back(std::move(x));
  }
  return out;
}

namespace {

// 2/(ρ^k + ρ^{−k}) with ρ = (√κ+1)/(√κ−1), written through t = 1/ρ so that
// large k does not overflow.
double two_term(double kappa, double k) {
  if (kappa <= 1.0) return 0.0;
  const double s = std::sqrt(kappa);
  const double t = (s - 1.0) / (s + 1.0);
  const double tk = std::pow(t, k);
  return 2.0 * tk / (1.0 + tk * tk);
}

}  // namespace

double chebyshev_bound(const BoundSpec& spec, Index k) {
  if (k < 0) throw std::invalid_argument("chebyshev_bound: negative k");
  if (const auto* f = std::get_if<FullInterval>(&spec)) {
    if (!(f->lambda_min > 0.0) || !(f->lambda_max >= f->lambda_min) || !std::isfinite(f->lambda_max)) {
      throw InvalidInterval("chebyshev_bound: need 0 < lambda_min <= lambda_max");
    }
    if (k == 0) return 1.0;
    return two_term(f->lambda_max / f->lambda_min, static_cast<double>(k));
  }
  if (const auto* c = std::get_if<TopCluster>(&spec)) {
    if (!(c->lambda_min > 0.0) || !(c->lambda_cut >= c->lambda_min) || !std::isfinite(c->lambda_cut)) {
      throw InvalidInterval("chebyshev_bound: need 0 < lambda_min <= lambda_cut");
    }
    if (c->outliers < 0 || c->outliers >= k) {
      throw InvalidInterval("chebyshev_bound: outlier count must be below k");
    }
    const double deg = static_cast<double>(k - c->outliers);
    return 2.0 * std::exp(-2.0 * deg / std::sqrt(c->lambda_cut / c->lambda_min));
  }
  const auto& t = std::get<TwoInterval>(spec);
  if (!(t.a < t.b && t.b < 0.0 && 0.0 < t.c && t.c < t.d) || !std::isfinite(t.a) || !std::isfinite(t.d)) {
    throw InvalidInterval("chebyshev_bound: need a < b < 0 < c < d");
  }
  const double scale = std::max(std::abs(t.a), std::abs(t.d));
  if (std::abs((t.b - t.a) - (t.d - t.c)) > 1e-12 * scale) {
    throw InvalidInterval("chebyshev_bound: intervals must have equal length");
  }
  const double half = static_cast<double>(k / 2);
  return 2.0 * std::exp(-2.0 * half / std::sqrt(std::abs(t.a * t.d) / std::abs(t.b * t.c)));
}

std::vector<double> error_estimate_delay(const IterateHistory& history, const LinearOperator& A, Index d) {
  if (d < 1) throw std::invalid_argument("error_estimate_delay: lookahead must be at least 1");
  if (history.iterates.size() != history.steps.size()) {
    throw InsufficientIterates("error_estimate_delay: history does not retain iterates");
  }
  if (static_cast<Index>(history.steps.size()) <= d) {
    throw InsufficientIterates("error_estimate_delay: need more than " + std::to_string(d) + " iterates");
  }
  std::map<Index, std::size_t> at;
  for (std::size_t i = 0; i < history.steps.size(); ++i) at[history.steps[i]] = i;
  std::vector<double> out;
  for (std::size_t i = 0; i < history.steps.size(); ++i) {
    auto it = at.find(history.steps[i] + d);
    if (it == at.end()) continue;
    const Vector e = history.iterates[it->second] - history.iterates[i];
    out.push_back(std::sqrt(std::max(0.0, e.dot(A.apply(e)))));
  }
  return out;
}

BlockIterateHistory block_cg(const LinearOperator& A, const Matrix& B, Index k, ReorthMode mode,
                             double deflation_tol) {
  BlockKrylovDecomposition dec = block_lanczos(A, B, k, mode, deflation_tol);
  BlockIterateHistory h;
  h.block_widths = dec.block_widths;
  for (Index w : dec.block_widths) h.deflated = h.deflated || w < B.cols();
  for (const Matrix& Bn : dec.B_blocks) h.deflated = h.deflated || (Bn.rows() > 0 && Bn.rows() < B.cols());

  const Matrix T = dec.T();
  const double bnorm = B.norm();
  for (Index j = 1; j <= dec.steps(); ++j) {
    const Index n = dec.offset(j);
    Matrix rhs = Matrix::Zero(n, B.cols());
    rhs.topRows(dec.initial_R.rows()) = dec.initial_R;
    Eigen::LLT<Matrix> llt(T.topLeftCorner(n, n));
    if (llt.info() != Eigen::Success) {
      h.termination.kind = SolverStop::Kind::SingularPivot;
      h.termination.step = j;
      return h;
    }
    Matrix X = dec.Q.leftCols(n) * llt.solve(rhs);
    h.residual_norms.push_back((B - A.apply(X)).norm());
    h.steps.push_back(j);
    h.iterates.push_back(std::move(X));
    if (h.residual_norms.back() <= 1e-14 * bnorm) {
      h.termination.kind = SolverStop::Kind::Converged;
      h.termination.step = j;
      return h;
    }
  }
  h.termination.kind = SolverStop::Kind::MaxIter;
  h.termination.step = dec.steps();
  return h;
}

}  // namespace krylov
