#include "krylov/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

namespace krylov {

LinearOperator::LinearOperator(Index dim, ApplyFn fn) : dim_(dim), fn_(std::move(fn)) {
  if (dim <= 0) throw DimensionMismatch("operator dimension must be positive");
  if (!fn_) throw DimensionMismatch("operator apply callback is empty");
}

void LinearOperator::apply(const Vector& x, Vector& y) const {
  if (x.size() != dim_) throw DimensionMismatch("apply: input length differs from operator dimension");
  y.resize(dim_);
  fn_(x, y);
}

Vector LinearOperator::apply(const Vector& x) const {
  Vector y(dim_);
  apply(x, y);
  return y;
}

Matrix LinearOperator::apply(const Matrix& X) const {
  if (X.rows() != dim_) throw DimensionMismatch("apply: block row count differs from operator dimension");
  Matrix Y(dim_, X.cols());
  Vector x(dim_), y(dim_);
  for (Index j = 0; j < X.cols(); ++j) {
    x = X.col(j);
    apply(x, y);
    Y.col(j) = y;
  }
  return Y;
}

CVector LinearOperator::apply(const CVector& x) const {
  Vector re = apply(Vector(x.real()));
  Vector im = apply(Vector(x.imag()));
  CVector y(dim_);
  y.real() = re;
  y.imag() = im;
  return y;
}

Matrix LinearOperator::to_dense() const {
  return apply(Matrix(Matrix::Identity(dim_, dim_)));
}

LinearOperator LinearOperator::shifted(double z) const {
  auto fn = fn_;
  return LinearOperator(dim_, [fn, z](const Vector& x, Vector& y) {
    fn(x, y);
    y -= z * x;
  });
}

LinearOperator LinearOperator::scaled(double c) const {
  auto fn = fn_;
  return LinearOperator(dim_, [fn, c](const Vector& x, Vector& y) {
    fn(x, y);
    y *= c;
  });
}

LinearOperator LinearOperator::dense(Matrix A) {
  if (A.rows() != A.cols()) throw DimensionMismatch("dense operator must be square");
  auto M = std::make_shared<const Matrix>(std::move(A));
  return LinearOperator(M->rows(), [M](const Vector& x, Vector& y) { y.noalias() = (*M) * x; });
}

LinearOperator LinearOperator::diagonal(Vector diag) {
  auto D = std::make_shared<const Vector>(std::move(diag));
  return LinearOperator(D->size(), [D](const Vector& x, Vector& y) { y = D->cwiseProduct(x); });
}

LinearOperator LinearOperator::identity(Index dim) {
  return LinearOperator(dim, [](const Vector& x, Vector& y) { y = x; });
}

LinearOperator LinearOperator::congruence(const LinearOperator& M, const LinearOperator& A) {
  if (M.dim() != A.dim()) throw DimensionMismatch("congruence: dimension mismatch");
  return LinearOperator(A.dim(), [M, A](const Vector& x, Vector& y) {
    Vector t = M.apply(x);
    Vector u = A.apply(t);
    M.apply(u, y);
  });
}

double symmetry_defect(const LinearOperator& A, std::uint64_t seed, int trials) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  const Index d = A.dim();
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vector u(d), v(d);
    for (Index i = 0; i < d; ++i) u[i] = g(gen);
    for (Index i = 0; i < d; ++i) v[i] = g(gen);
    u.normalize();
    v.normalize();
    Vector Av = A.apply(v), Au = A.apply(u);
    double scale = Av.norm() * u.norm();
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(u.dot(Av) - v.dot(Au)) / scale);
  }
  return worst;
}

SymTridiagonal::SymTridiagonal(Vector a, Vector b) : alphas(std::move(a)), betas(std::move(b)) {
  if (alphas.size() == 0) {
    if (betas.size() != 0) throw DimensionMismatch("tridiagonal: off-diagonal without diagonal");
  } else if (betas.size() != alphas.size() - 1) {
    throw DimensionMismatch("tridiagonal: need k-1 off-diagonal entries");
  }
}

Matrix SymTridiagonal::dense() const {
  const Index k = size();
  Matrix T = Matrix::Zero(k, k);
  for (Index i = 0; i < k; ++i) T(i, i) = alphas[i];
  for (Index i = 0; i + 1 < k; ++i) T(i, i + 1) = T(i + 1, i) = betas[i];
  return T;
}

double SymTridiagonal::norm_inf() const {
  const Index k = size();
  double n = 0.0;
  for (Index i = 0; i < k; ++i) {
    double row = std::abs(alphas[i]);
    if (i > 0) row += std::abs(betas[i - 1]);
    if (i + 1 < k) row += std::abs(betas[i]);
    n = std::max(n, row);
  }
  return n;
}

SymTridiagonal SymTridiagonal::leading(Index k) const {
  if (k < 0 || k > size()) throw DimensionMismatch("leading: size out of range");
  if (k == 0) return SymTridiagonal{};
  return SymTridiagonal(alphas.head(k), betas.head(k - 1));
}

SymTridiagonal SymTridiagonal::shifted(double z) const {
  return SymTridiagonal(alphas.array() - z, betas);
}

Vector SymTridiagonal::multiply(const Vector& x) const {
  const Index k = size();
  if (x.size() != k) throw DimensionMismatch("tridiagonal multiply: length mismatch");
  Vector y(k);
  for (Index i = 0; i < k; ++i) {
    double s = alphas[i] * x[i];
    if (i > 0) s += betas[i - 1] * x[i - 1];
    if (i + 1 < k) s += betas[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

Matrix ExtendedTridiagonal::dense() const {
  const Index k = base.size();
  Matrix T = Matrix::Zero(k + 1, k);
  T.topRows(k) = base.dense();
  T(k, k - 1) = trailing;
  return T;
}

void parallel_for(Index n, int threads, const std::function<void(Index)>& fn) {
  if (n <= 0) return;
  int workers = std::max(1, threads);
  if (workers == 1 || n == 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = static_cast<int>(std::min<Index>(workers, n));
  std::atomic<Index> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (Index i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace krylov
