#include "krylov/matfunc.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace krylov {

ScalarFn MatrixFunction::checked() const {
  if (!fn) throw std::invalid_argument("MatrixFunction: no callable set");
  if (!domain) return fn;
  const Domain dom = *domain;
  const ScalarFn f = fn;
  return [f, dom](double x) {
    if (x < dom.lo || x > dom.hi) {
      throw FunctionDomainError("Ritz value " + std::to_string(x) + " lies outside the declared domain [" +
                                std::to_string(dom.lo) + ", " + std::to_string(dom.hi) + "]");
    }
    return f(x);
  };
}

namespace {

void run_lanczos(LanczosProcess& proc, Index k) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  while (proc.steps() < k && !proc.broken_down()) proc.step();
}

Vector apply_on_eigs(const Vector& lambda, const ScalarFn& f) {
  Vector fl(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) {
    fl[i] = f(lambda[i]);
    if (!std::isfinite(fl[i])) {
      throw FunctionDomainError("f is not finite at Ritz value " + std::to_string(lambda[i]));
    }
  }
  return fl;
}

}  // namespace

MatFuncResult lanczos_fa(const LinearOperator& A, const Vector& b, const MatrixFunction& f, Index k,
                         ReorthMode mode, FaFormula formula) {
  LanczosProcess proc(A, b, mode, true);
  run_lanczos(proc, k);
  const SymTridiagonal T = proc.tridiagonal();
  const ScalarFn fc = f.checked();

  MatFuncResult out;
  out.k_used = T.size();
  out.diagnostics.trailing_beta = proc.betas().back();
  out.diagnostics.orthogonality_loss = orthogonality_loss(proc.basis(T.size()));

  if (formula == FaFormula::Correct) {
    out.value = basis_combination(proc.basis_vectors(), tridiag_apply_function(T, fc), proc.b_norm());
    return out;
  }
  // Q f(T) Qᵀ b: only equal to the line above while Q stays orthonormal.
  const TridiagEig eig = sym_tridiag_eig(T);
  const Vector fl = apply_on_eigs(eig.eigenvalues, fc);
  const Matrix Q = proc.basis(T.size());
  const Vector Qtb = Q.transpose() * b;
  const Vector c = eig.eigenvectors * fl.cwiseProduct(eig.eigenvectors.transpose() * Qtb);
  out.value = Q * c;
  return out;
}

MatFuncResult two_pass_lanczos_fa(const LinearOperator& A, const Vector& b, const MatrixFunction& f, Index k,
                                  Index stride) {
  if (stride < 1) throw std::invalid_argument("two_pass_lanczos_fa: stride must be at least 1");
  if (k < 1) throw std::invalid_argument("two_pass_lanczos_fa: k must be at least 1");

  struct Checkpoint {
    Index j;
    Vector prev, cur;  // q_{j−1} (empty for j = 0), q_j
  };
  std::vector<Checkpoint> cps;

  LanczosProcess proc(A, b, ReorthMode::None, false);
  cps.push_back({0, Vector(), proc.next()});
  while (proc.steps() < k && !proc.broken_down()) {
    proc.step();
    const Index j = proc.steps();
    if (j % stride == 0 && j < k && !proc.broken_down()) cps.push_back({j, proc.current(), proc.next()});
  }
  const SymTridiagonal T = proc.tridiagonal();
  const Index kk = T.size();
  const Vector c = tridiag_apply_function(T, f.checked());
  const double bn = proc.b_norm();
  const auto& alphas = proc.alphas();
  const auto& betas = proc.betas();

  // Same accumulation order and kernels as basis_combination / LanczosProcess.
  Vector acc = Vector::Zero(A.dim());
  Vector y;
  for (std::size_t s = 0; s < cps.size(); ++s) {
    const Index j0 = cps[s].j;
    const Index j1 = s + 1 < cps.size() ? cps[s + 1].j : kk;
    Vector q_prev = cps[s].prev;
    Vector q_cur = cps[s].cur;
    for (Index n = j0; n < j1; ++n) {
      const double coef = bn * c[n];
      acc.noalias() += coef * q_cur;
      if (n + 1 == j1) break;
      lanczos_residual(A, q_prev, q_cur, n > 0 ? betas[n - 1] : 0.0, y);
      lanczos_subtract(q_cur, alphas[n], y);
      q_prev = std::move(q_cur);
      q_cur = y / betas[n];
    }
  }

  MatFuncResult out;
  out.value = std::move(acc);
  out.k_used = kk;
  out.diagnostics.trailing_beta = betas.back();
  return out;
}

double lanczos_qf(const LinearOperator& A, const Vector& b, const MatrixFunction& f, Index k, ReorthMode mode) {
  LanczosProcess proc(A, b, mode, false);
  run_lanczos(proc, k);
  const Vector c = tridiag_apply_function(proc.tridiagonal(), f.checked());
  return proc.b_norm() * proc.b_norm() * c[0];
}

RationalResult rational_apply(const LinearOperator& A, const Vector& b, const ShiftFamily& family, Index k,
                              RationalMethod method, ReorthMode mode) {
  if (family.shifts.size() != family.weights.size()) {
    throw std::invalid_argument("rational_apply: shifts and weights differ in length");
  }
  if (family.shifts.empty()) throw std::invalid_argument("rational_apply: empty shift family");
  CVector sum = CVector::Zero(A.dim());
  RationalResult out;

  if (method == RationalMethod::FAShifted) {
    LanczosProcess proc(A, b, mode, true);
    run_lanczos(proc, k);
    const SymTridiagonal T = proc.tridiagonal();
    const TridiagEig eig = sym_tridiag_eig(T);
    CVector r = CVector::Zero(T.size());
    for (Index i = 0; i < T.size(); ++i) {
      for (std::size_t s = 0; s < family.shifts.size(); ++s) {
        const Complex den = eig.eigenvalues[i] - family.shifts[s];
        if (den == Complex(0.0)) throw SingularSystem("rational_apply: shift coincides with a Ritz value");
        r[i] += family.weights[s] / den;
      }
    }
    const Vector e1u = eig.eigenvectors.row(0).transpose();
    const CVector c = eig.eigenvectors.cast<Complex>() * r.cwiseProduct(e1u.cast<Complex>());
    sum = basis_combination(proc.basis_vectors(), c, proc.b_norm());
    out.k_used = T.size();
  } else {
    MultiShiftOptions mopts;
    mopts.mode = mode;
    mopts.compute_residuals = false;
    auto hist = multi_shift_solve(A, b, family, k, SolveMethod::CG, mopts);
    std::string failed;
    Index steps = 0;
    for (const auto& h : hist) steps = std::max(steps, h.steps.empty() ? Index{0} : h.steps.back());
    for (std::size_t s = 0; s < hist.size(); ++s) {
      const auto& h = hist[s];
      if (h.steps.empty() || h.steps.back() != steps) {
        failed += " " + std::to_string(h.shift.real()) + "+" + std::to_string(h.shift.imag()) + "i";
        continue;
      }
      sum += family.weights[s] * h.iterates.back();
    }
    if (!failed.empty()) throw SingularSystem("rational_apply: singular small solve for shifts" + failed);
    out.k_used = steps;
  }

  out.value = sum.real();
  const double re = out.value.norm();
  const double im = sum.imag().norm();
  out.imag_relative = re > 0.0 ? im / re : im;
  return out;
}

namespace {

struct BlockFunction {
  BlockKrylovDecomposition dec;
  Matrix F;  // f(T_k)
};

BlockFunction block_function(const LinearOperator& A, const Matrix& B, const MatrixFunction& f, Index k,
                             ReorthMode mode, double deflation_tol) {
  BlockFunction out{block_lanczos(A, B, k, mode, deflation_tol), Matrix()};
  Eigen::SelfAdjointEigenSolver<Matrix> es(out.dec.T());
  if (es.info() != Eigen::Success) throw std::runtime_error("block Lanczos: eigensolver failed");
  const Vector fl = apply_on_eigs(es.eigenvalues(), f.checked());
  out.F = es.eigenvectors() * fl.asDiagonal() * es.eigenvectors().transpose();
  return out;
}

}  // namespace

Matrix block_lanczos_fa(const LinearOperator& A, const Matrix& B, const MatrixFunction& f, Index k,
                        ReorthMode mode, double deflation_tol) {
  BlockFunction bf = block_function(A, B, f, k, mode, deflation_tol);
  const Index r0 = bf.dec.initial_R.rows();
  return bf.dec.Q * (bf.F.leftCols(r0) * bf.dec.initial_R);
}

Matrix block_lanczos_qf(const LinearOperator& A, const Matrix& B, const MatrixFunction& f, Index k,
                        ReorthMode mode, double deflation_tol) {
  BlockFunction bf = block_function(A, B, f, k, mode, deflation_tol);
  const Index r0 = bf.dec.initial_R.rows();
  const Matrix& R = bf.dec.initial_R;
  Matrix out = R.transpose() * bf.F.topLeftCorner(r0, r0) * R;
  return 0.5 * (out + out.transpose());
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// sup |f − p| on [lo, hi] for p interpolating f at n first-kind Chebyshev points.
double interpolation_error(const ScalarFn& f, double lo, double hi, Index n) {
  if (!(hi > lo)) throw std::invalid_argument("apriori bound: empty interval");
  if (n < 1) throw std::invalid_argument("apriori bound: degree count must be at least 1");
  std::vector<double> fv(static_cast<std::size_t>(n)), theta(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    theta[j] = kPi * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
    const double x = lo + 0.5 * (hi - lo) * (std::cos(theta[j]) + 1.0);
    fv[j] = f(x);
    if (!std::isfinite(fv[j])) throw NonFiniteSample("apriori bound: f is not finite at x = " + std::to_string(x));
  }
  Vector c(n);
  for (Index m = 0; m < n; ++m) {
    double s = 0.0;
    for (Index j = 0; j < n; ++j) s += fv[j] * std::cos(static_cast<double>(m) * theta[j]);
    c[m] = 2.0 * s / static_cast<double>(n);
  }
  c[0] *= 0.5;

  constexpr int kGrid = 10000;
  double err = 0.0;
  for (int g = 0; g < kGrid; ++g) {
    const double x = lo + (hi - lo) * g / (kGrid - 1.0);
    const double t = std::clamp((2.0 * x - lo - hi) / (hi - lo), -1.0, 1.0);
    double b1 = 0.0, b2 = 0.0;
    for (Index m = n - 1; m >= 1; --m) {
      const double b0 = c[m] + 2.0 * t * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    const double p = c[0] + t * b1 - b2;
    const double fx = f(x);
    if (!std::isfinite(fx)) throw NonFiniteSample("apriori bound: f is not finite at x = " + std::to_string(x));
    err = std::max(err, std::abs(fx - p));
  }
  return err;
}

}  // namespace

double fa_apriori_bound(const ScalarFn& f, double lo, double hi, Index k, double b_norm) {
  return 4.0 * 2.0 * b_norm * interpolation_error(f, lo, hi, k);
}

double qf_apriori_bound(const ScalarFn& f, double lo, double hi, Index k, double b_norm) {
  return 4.0 * 2.0 * b_norm * b_norm * interpolation_error(f, lo, hi, 2 * k);
}

}  // namespace krylov
