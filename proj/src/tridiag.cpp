#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "krylov/core.hpp"

namespace krylov {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSingularRel = 1e-14;

// Implicit-shift QL on (d, e), e[i] coupling rows i and i+1.  When Z is
// non-null the rotations are accumulated into it (Z starts as identity).
void implicit_ql(std::vector<double>& d, std::vector<double>& e, Matrix* Z) {
  const int n = static_cast<int>(d.size());
  if (n <= 1) return;
  e.resize(n);
  e[n - 1] = 0.0;

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * dd) break;
      }
      if (m != l) {
        if (++iter > 60 * n) {
          throw KrylovError("sym_tridiag_eig: QL iteration failed to converge");
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            // Underflow: split the problem and restart from l.
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (Z) {
            for (Index k = 0; k < Z->rows(); ++k) {
              double zf = (*Z)(k, i + 1);
              (*Z)(k, i + 1) = s * (*Z)(k, i) + c * zf;
              (*Z)(k, i) = c * (*Z)(k, i) - s * zf;
            }
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

void check_finite(const SymTridiagonal& T) {
  if (!T.alphas.allFinite() || !T.betas.allFinite()) {
    throw FunctionDomainError("tridiagonal matrix has non-finite entries");
  }
}

// Conjugate that stays real for real scalars.
inline double conj_of(double x) { return x; }
inline Complex conj_of(const Complex& x) { return std::conj(x); }

template <typename Scalar>
std::vector<Scalar> solve_square(const SymTridiagonal& T, const std::vector<Scalar>& rhs, Scalar shift) {
  const Index n = T.size();
  if (static_cast<Index>(rhs.size()) != n) throw DimensionMismatch("tridiag_solve: rhs length mismatch");
  if (n == 0) return {};

  std::vector<Scalar> d(n), du(n > 1 ? n - 1 : 0), dl(n > 1 ? n - 1 : 0), b(rhs);
  double norm = 0.0;
  for (Index i = 0; i < n; ++i) {
    d[i] = Scalar(T.alphas[i]) - shift;
    double row = std::abs(d[i]);
    if (i > 0) row += std::abs(T.betas[i - 1]);
    if (i + 1 < n) row += std::abs(T.betas[i]);
    norm = std::max(norm, row);
  }
  for (Index i = 0; i + 1 < n; ++i) du[i] = dl[i] = Scalar(T.betas[i]);
  const double thresh = kSingularRel * (norm > 0.0 ? norm : 1.0);
  auto singular = [&](Index i) {
    return SingularSystem("tridiag_solve: pivot " + std::to_string(i) + " below 1e-14*||T - zI||");
  };

  // Gaussian elimination with partial pivoting; dl[i] is reused as the
  // second superdiagonal created by row interchanges.
  for (Index i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (std::abs(d[i]) < thresh) throw singular(i);
      Scalar fact = dl[i] / d[i];
      d[i + 1] -= fact * du[i];
      b[i + 1] -= fact * b[i];
      dl[i] = Scalar(0);
    } else {
      Scalar fact = d[i] / dl[i];
      d[i] = dl[i];
      Scalar temp = d[i + 1];
      d[i + 1] = du[i] - fact * temp;
      if (i + 2 < n) {
        dl[i] = du[i + 1];
        du[i + 1] = -fact * dl[i];
      } else {
        dl[i] = Scalar(0);
      }
      du[i] = temp;
      temp = b[i];
      b[i] = b[i + 1];
      b[i + 1] = temp - fact * b[i + 1];
    }
  }
  for (Index i = 0; i < n; ++i)
    if (std::abs(d[i]) < thresh) throw singular(i);

  std::vector<Scalar> x(n);
  x[n - 1] = b[n - 1] / d[n - 1];
  if (n > 1) x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
  for (Index i = n - 3; i >= 0; --i) {
    x[i] = (b[i] - du[i] * x[i + 1] - dl[i] * x[i + 2]) / d[i];
  }
  return x;
}

// Givens QR of the (k+1)×k banded matrix T_{k+1,k} − shift·I_{k+1,k},
// followed by banded back substitution.
template <typename Scalar>
std::vector<Scalar> solve_extended(const ExtendedTridiagonal& E, const std::vector<Scalar>& rhs, Scalar shift) {
  const SymTridiagonal& T = E.base;
  const Index k = T.size();
  if (k == 0) throw DimensionMismatch("tridiag_solve: empty extended matrix");
  if (static_cast<Index>(rhs.size()) != k + 1) {
    throw DimensionMismatch("tridiag_solve: extended rhs must have k+1 entries");
  }
  auto beta = [&](Index j) { return j < k - 1 ? T.betas[j] : E.trailing; };

  double norm = 0.0;
  for (Index j = 0; j < k; ++j) {
    double col = std::abs(Scalar(T.alphas[j]) - shift) + std::abs(beta(j));
    if (j > 0) col += std::abs(T.betas[j - 1]);
    norm = std::max(norm, col);
  }
  const double thresh = kSingularRel * (norm > 0.0 ? norm : 1.0);

  std::vector<Scalar> r0(k), r1(k, Scalar(0)), r2(k, Scalar(0));  // R(j,j), R(j,j+1), R(j,j+2)
  std::vector<double> cs(k);
  std::vector<Scalar> sn(k);
  std::vector<Scalar> g(rhs);

  auto rotate = [](double c, const Scalar& s, Scalar& x, Scalar& y) {
    Scalar xn = c * x + s * y;
    y = -conj_of(s) * x + c * y;
    x = xn;
  };

  for (Index j = 0; j < k; ++j) {
    // Column j has entries at rows j-1, j, j+1.
    Scalar top = Scalar(0);                                    // row j-2
    Scalar upper = j > 0 ? Scalar(T.betas[j - 1]) : Scalar(0);  // row j-1
    Scalar diag = Scalar(T.alphas[j]) - shift;                  // row j
    Scalar below = Scalar(beta(j));                             // row j+1
    if (j >= 2) rotate(cs[j - 2], sn[j - 2], top, upper);
    if (j >= 1) rotate(cs[j - 1], sn[j - 1], upper, diag);

    double a = std::abs(diag), bb = std::abs(below);
    double c;
    Scalar s;
    if (bb == 0.0) {
      c = 1.0;
      s = Scalar(0);
    } else if (a == 0.0) {
      c = 0.0;
      s = conj_of(below) / bb;
    } else {
      double rr = std::hypot(a, bb);
      c = a / rr;
      s = (diag / a) * conj_of(below) / rr;
    }
    cs[j] = c;
    sn[j] = s;
    rotate(c, s, diag, below);
    rotate(c, s, g[j], g[j + 1]);

    r0[j] = diag;
    if (j >= 1) r1[j - 1] = upper;
    if (j >= 2) r2[j - 2] = top;
    if (std::abs(diag) < thresh) {
      throw SingularSystem("tridiag_solve: extended matrix is rank deficient at column " + std::to_string(j));
    }
  }

  std::vector<Scalar> x(k);
  for (Index j = k - 1; j >= 0; --j) {
    Scalar s = g[j];
    if (j + 1 < k) s -= r1[j] * x[j + 1];
    if (j + 2 < k) s -= r2[j] * x[j + 2];
    x[j] = s / r0[j];
  }
  return x;
}

template <typename V>
std::vector<typename V::Scalar> to_std(const V& v) {
  return std::vector<typename V::Scalar>(v.data(), v.data() + v.size());
}

}  // namespace

TridiagEig sym_tridiag_eig(const SymTridiagonal& T) {
  const Index k = T.size();
  if (k < 1) throw DimensionMismatch("sym_tridiag_eig: empty matrix");
  check_finite(T);
  std::vector<double> d(T.alphas.data(), T.alphas.data() + k);
  std::vector<double> e(T.betas.data(), T.betas.data() + (k - 1));
  Matrix Z = Matrix::Identity(k, k);
  implicit_ql(d, e, &Z);

  std::vector<Index> order(k);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return d[a] < d[b]; });

  TridiagEig out;
  out.eigenvalues.resize(k);
  out.eigenvectors.resize(k, k);
  for (Index j = 0; j < k; ++j) {
    out.eigenvalues[j] = d[order[j]];
    out.eigenvectors.col(j) = Z.col(order[j]);
    // Sign convention: first component that is not rounding noise is positive.
    for (Index i = 0; i < k; ++i) {
      double v = out.eigenvectors(i, j);
      if (std::abs(v) > 64.0 * kEps) {
        if (v < 0.0) out.eigenvectors.col(j) *= -1.0;
        break;
      }
    }
  }
  return out;
}

Vector sym_tridiag_eigenvalues(const SymTridiagonal& T) {
  const Index k = T.size();
  if (k < 1) throw DimensionMismatch("sym_tridiag_eigenvalues: empty matrix");
  check_finite(T);
  std::vector<double> d(T.alphas.data(), T.alphas.data() + k);
  std::vector<double> e(T.betas.data(), T.betas.data() + (k - 1));
  implicit_ql(d, e, nullptr);
  std::stable_sort(d.begin(), d.end());
  return Eigen::Map<Vector>(d.data(), k);
}

Vector tridiag_apply_function(const TridiagEig& eig, const ScalarFn& f) {
  const Index k = eig.eigenvalues.size();
  Vector weighted(k);
  for (Index i = 0; i < k; ++i) {
    double fv = f(eig.eigenvalues[i]);
    if (!std::isfinite(fv)) {
      throw FunctionDomainError("f is not finite at eigenvalue " + std::to_string(eig.eigenvalues[i]));
    }
    weighted[i] = fv * eig.eigenvectors(0, i);
  }
  return eig.eigenvectors * weighted;
}

Vector tridiag_apply_function(const SymTridiagonal& T, const ScalarFn& f) {
  return tridiag_apply_function(sym_tridiag_eig(T), f);
}

CVector tridiag_solve(const SymTridiagonal& T, const CVector& rhs, Complex shift) {
  auto x = solve_square<Complex>(T, to_std(rhs), shift);
  return Eigen::Map<CVector>(x.data(), static_cast<Index>(x.size()));
}

Vector tridiag_solve(const SymTridiagonal& T, const Vector& rhs, double shift) {
  auto x = solve_square<double>(T, to_std(rhs), shift);
  return Eigen::Map<Vector>(x.data(), static_cast<Index>(x.size()));
}

CVector tridiag_solve(const ExtendedTridiagonal& T, const CVector& rhs, Complex shift) {
  auto x = solve_extended<Complex>(T, to_std(rhs), shift);
  return Eigen::Map<CVector>(x.data(), static_cast<Index>(x.size()));
}

Vector tridiag_solve(const ExtendedTridiagonal& T, const Vector& rhs, double shift) {
  auto x = solve_extended<double>(T, to_std(rhs), shift);
  return Eigen::Map<Vector>(x.data(), static_cast<Index>(x.size()));
}

}  // namespace krylov
