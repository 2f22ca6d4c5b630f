#include "krylov/krylov.hpp"

#include <algorithm>
#include <cmath>

namespace krylov {

void lanczos_residual(const LinearOperator& A, const Vector& q_prev, const Vector& q_cur, double beta_prev,
                      Vector& y) {
  A.apply(q_cur, y);
  if (q_prev.size() != 0) y.noalias() -= beta_prev * q_prev;
}

void lanczos_subtract(const Vector& q_cur, double alpha, Vector& z) { z.noalias() -= alpha * q_cur; }

LanczosProcess::LanczosProcess(const LinearOperator& A, const Vector& b, ReorthMode mode, bool store_basis,
                               double breakdown_tol)
    : A_(A), mode_(mode), store_(store_basis || mode == ReorthMode::Full), tol_(breakdown_tol) {
  if (b.size() != A.dim()) throw DimensionMismatch("lanczos: start vector length differs from operator");
  if (breakdown_tol < 0.0) throw std::invalid_argument("lanczos: breakdown_tol must be nonnegative");
  b_norm_ = b.norm();
  if (!(b_norm_ > 0.0)) throw ZeroStartVector("lanczos: start vector is zero");
  q_next_ = b / b_norm_;
  if (store_) Q_.push_back(q_next_);
}

bool LanczosProcess::step() {
  if (broken_) return false;
  const Index n = steps();
  const double beta_prev = n > 0 ? betas_.back() : 0.0;

  lanczos_residual(A_, q_cur_, q_next_, beta_prev, y_);
  const double alpha = q_next_.dot(y_);
  lanczos_subtract(q_next_, alpha, y_);

  if (mode_ == ReorthMode::Full) {
    // Classical Gram–Schmidt against every stored vector, twice.
    Vector coeff(static_cast<Index>(Q_.size()));
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < Q_.size(); ++i) coeff[static_cast<Index>(i)] = Q_[i].dot(y_);
      for (std::size_t i = 0; i < Q_.size(); ++i) y_.noalias() -= coeff[static_cast<Index>(i)] * Q_[i];
    }
  }

  const double beta = y_.norm();
  alphas_.push_back(alpha);
  betas_.push_back(beta);
  scale_ = std::max(scale_, std::abs(alpha));
  if (n > 0) scale_ = std::max(scale_, beta_prev);

  q_cur_ = q_next_;
  if (beta <= tol_ * scale_ || beta == 0.0) {
    broken_ = true;
    q_next_.resize(0);
    return true;
  }
  q_next_ = y_ / beta;
  if (store_) Q_.push_back(q_next_);
  return true;
}

SymTridiagonal LanczosProcess::tridiagonal(Index j) const {
  if (j < 0 || j > steps()) throw DimensionMismatch("lanczos: requested tridiagonal larger than steps taken");
  Vector a(j), b(j > 0 ? j - 1 : 0);
  for (Index i = 0; i < j; ++i) a[i] = alphas_[i];
  for (Index i = 0; i + 1 < j; ++i) b[i] = betas_[i];
  return SymTridiagonal(a, b);
}

SymTridiagonal LanczosProcess::tridiagonal() const { return tridiagonal(steps()); }

Matrix LanczosProcess::basis(Index j) const {
  if (!store_) throw std::logic_error("lanczos: basis requested from a streaming run");
  if (j > static_cast<Index>(Q_.size())) throw DimensionMismatch("lanczos: basis has fewer stored vectors");
  Matrix Q(A_.dim(), j);
  for (Index i = 0; i < j; ++i) Q.col(i) = Q_[i];
  return Q;
}

KrylovDecomposition LanczosProcess::decomposition() const {
  KrylovDecomposition out;
  const Index j = steps();
  if (store_) out.Q = basis(j);
  out.T = tridiagonal(j);
  out.trailing_beta = j > 0 ? betas_.back() : 0.0;
  out.next_vector = q_next_;
  out.b_norm = b_norm_;
  out.termination.kind = broken_ ? Termination::Kind::Breakdown : Termination::Kind::Completed;
  out.termination.step = j;
  return out;
}

KrylovDecomposition lanczos(const LinearOperator& A, const Vector& b, Index k, ReorthMode mode,
                            double breakdown_tol) {
  if (k < 1) throw std::invalid_argument("lanczos: k must be at least 1");
  LanczosProcess proc(A, b, mode, true, breakdown_tol);
  while (proc.steps() < k && !proc.broken_down()) proc.step();
  return proc.decomposition();
}

ArnoldiDecomposition arnoldi(const LinearOperator& A, const Vector& b, Index k, double breakdown_tol) {
  if (k < 1) throw std::invalid_argument("arnoldi: k must be at least 1");
  if (b.size() != A.dim()) throw DimensionMismatch("arnoldi: start vector length differs from operator");
  const double bn = b.norm();
  if (!(bn > 0.0)) throw ZeroStartVector("arnoldi: start vector is zero");

  std::vector<Vector> Q{b / bn};
  std::vector<Vector> hcols;
  double scale = 0.0;
  ArnoldiDecomposition out;
  out.b_norm = bn;
  Vector y;
  bool broke = false;
  for (Index n = 0; n < k; ++n) {
    A.apply(Q[n], y);
    Vector h(n + 2);
    for (Index i = 0; i <= n; ++i) h[i] = Q[i].dot(y);
    Vector z = y;
    for (Index i = 0; i <= n; ++i) z.noalias() -= h[i] * Q[i];
    h[n + 1] = z.norm();
    scale = std::max(scale, h.head(n + 1).cwiseAbs().maxCoeff());
    hcols.push_back(h);
    if (h[n + 1] <= breakdown_tol * scale || h[n + 1] == 0.0) {
      broke = true;
      break;
    }
    Q.push_back(z / h[n + 1]);
  }

  const Index j = static_cast<Index>(hcols.size());
  out.Q.resize(A.dim(), j);
  for (Index i = 0; i < j; ++i) out.Q.col(i) = Q[i];
  out.H = Matrix::Zero(j, j);
  for (Index c = 0; c < j; ++c) {
    for (Index r = 0; r <= c + 1 && r < j; ++r) out.H(r, c) = hcols[c][r];
  }
  out.trailing = hcols.back()[j];
  if (!broke) out.next_vector = Q[j];
  out.termination.kind = broke ? Termination::Kind::Breakdown : Termination::Kind::Completed;
  out.termination.step = j;
  return out;
}

namespace {

struct BlockFactor {
  Matrix Q;  // d×r
  Matrix R;  // r×ncols
};

// Rank-revealing factorization Z = Q R with |R_ii| > threshold kept.
BlockFactor factor_block(const Matrix& Z, double tol, double scale) {
  BlockFactor out;
  const Index d = Z.rows(), c = Z.cols();
  const double thresh = tol * std::max(Z.norm(), scale);
  Eigen::ColPivHouseholderQR<Matrix> piv(Z);
  const Matrix& Rp = piv.matrixQR();
  const Index diag_len = std::min(d, c);
  Index r = 0;
  while (r < diag_len && std::abs(Rp(r, r)) > thresh) ++r;

  if (r == 0) {
    out.Q.resize(d, 0);
    out.R.resize(0, c);
    return out;
  }
  if (r == c) {
    Eigen::HouseholderQR<Matrix> hq(Z);
    out.Q = hq.householderQ() * Matrix::Identity(d, c);
    out.R = hq.matrixQR().topRows(c).triangularView<Eigen::Upper>();
  } else {
    out.Q = piv.householderQ() * Matrix::Identity(d, r);
    Matrix Rtop = Rp.topRows(r).triangularView<Eigen::Upper>();
    out.R = Rtop;
  }
  for (Index i = 0; i < r; ++i) {
    if (out.R(i, i) < 0.0) {
      out.R.row(i) *= -1.0;
      out.Q.col(i) *= -1.0;
    }
  }
  if (r != c) out.R = out.R * piv.colsPermutation().transpose();
  return out;
}

}  // namespace

Matrix BlockKrylovDecomposition::T() const {
  const Index s = steps();
  Index n = 0;
  for (Index i = 0; i < s; ++i) n += block_widths[i];
  Matrix T = Matrix::Zero(n, n);
  for (Index i = 0; i < s; ++i) {
    const Index o = offset(i), w = block_widths[i];
    T.block(o, o, w, w) = A_blocks[i];
    if (i + 1 < s) {
      const Index o2 = offset(i + 1), w2 = block_widths[i + 1];
      T.block(o2, o, w2, w) = B_blocks[i];
      T.block(o, o2, w, w2) = B_blocks[i].transpose();
    }
  }
  return T;
}

Index BlockKrylovDecomposition::offset(Index n) const {
  Index o = 0;
  for (Index i = 0; i < n; ++i) o += block_widths[i];
  return o;
}

BlockKrylovDecomposition block_lanczos(const LinearOperator& A, const Matrix& B, Index k, ReorthMode mode,
                                       double deflation_tol) {
  if (k < 1) throw std::invalid_argument("block_lanczos: k must be at least 1");
  if (B.rows() != A.dim()) throw DimensionMismatch("block_lanczos: block row count differs from operator");
  if (B.cols() < 1) throw ZeroStartBlock("block_lanczos: start block has no columns");
  if (!(deflation_tol > 0.0)) throw std::invalid_argument("block_lanczos: deflation_tol must be positive");
  if (!(B.norm() > 0.0)) throw ZeroStartBlock("block_lanczos: start block is zero");

  BlockKrylovDecomposition out;
  BlockFactor f0 = factor_block(B, deflation_tol, 0.0);
  if (f0.Q.cols() == 0) throw ZeroStartBlock("block_lanczos: start block has numerical rank 0");
  out.initial_R = f0.R;

  std::vector<Matrix> blocks{f0.Q};
  double scale = 0.0;
  const Index d = A.dim();
  out.termination.kind = Termination::Kind::Completed;

  for (Index n = 0; n < k; ++n) {
    const Matrix& Qn = blocks[n];
    Matrix Y = A.apply(Qn);
    if (n > 0) Y.noalias() -= blocks[n - 1] * out.B_blocks[n - 1].transpose();
    Matrix An = Qn.transpose() * Y;
    An = 0.5 * (An + An.transpose()).eval();
    Matrix Z = Y - Qn * An;
    if (mode == ReorthMode::Full) {
      for (int pass = 0; pass < 2; ++pass) {
        for (const Matrix& Qi : blocks) Z.noalias() -= Qi * (Qi.transpose() * Z);
      }
    }
    scale = std::max(scale, An.cwiseAbs().maxCoeff());
    if (n > 0 && out.B_blocks[n - 1].size() > 0) scale = std::max(scale, out.B_blocks[n - 1].cwiseAbs().maxCoeff());

    BlockFactor fn = factor_block(Z, deflation_tol, scale);
    out.A_blocks.push_back(An);
    out.B_blocks.push_back(fn.R);
    out.block_widths.push_back(Qn.cols());

    if (fn.Q.cols() == 0) {
      out.termination.kind = Termination::Kind::Breakdown;
      out.next_block.resize(d, 0);
      break;
    }
    if (n + 1 == k) {
      out.next_block = fn.Q;
    } else {
      blocks.push_back(fn.Q);
    }
  }
  out.termination.step = out.steps();

  Index total = 0;
  for (Index w : out.block_widths) total += w;
  out.Q.resize(d, total);
  for (Index i = 0; i < out.steps(); ++i) out.Q.middleCols(out.offset(i), out.block_widths[i]) = blocks[i];
  return out;
}

Index krylov_grade(const LinearOperator& A, const Vector& b, double tol) {
  KrylovDecomposition dec = lanczos(A, b, A.dim(), ReorthMode::Full, tol);
  return dec.steps();
}

Vector basis_combination(const std::vector<Vector>& Q, const Vector& c, double scale) {
  if (c.size() > static_cast<Index>(Q.size())) throw DimensionMismatch("basis_combination: too many coefficients");
  if (Q.empty()) return Vector();
  Vector acc = Vector::Zero(Q.front().size());
  for (Index n = 0; n < c.size(); ++n) {
    const double coef = scale * c[n];
    acc.noalias() += coef * Q[static_cast<std::size_t>(n)];
  }
  return acc;
}

CVector basis_combination(const std::vector<Vector>& Q, const CVector& c, double scale) {
  Vector re = basis_combination(Q, Vector(c.real()), scale);
  Vector im = basis_combination(Q, Vector(c.imag()), scale);
  CVector out(re.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

double orthogonality_loss(const Matrix& Q) {
  if (Q.cols() == 0) return 0.0;
  Matrix G = Q.transpose() * Q;
  G.diagonal().array() -= 1.0;
  return G.cwiseAbs().maxCoeff();
}

}  // namespace krylov
