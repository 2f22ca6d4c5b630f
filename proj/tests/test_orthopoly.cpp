#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "krylov/orthopoly.hpp"
#include "test_support.hpp"

using namespace krylov;
namespace ts = testing_support;
using std::numbers::pi;

namespace {

DiscreteMeasure random_measure(Index n, std::mt19937_64& rng, double lo = -1.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi), w(0.1, 1.0);
  Vector x(n), wt(n);
  for (Index i = 0; i < n; ++i) {
    x(i) = u(rng);
    wt(i) = w(rng);
  }
  return DiscreteMeasure(x, wt / wt.sum());
}

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

}  // namespace

TEST_CASE("discrete measure construction") {
  const DiscreteMeasure m(vec({2, 0, 1, 1 + 1e-15}), vec({1, 2, 3, 4}));
  CHECK(m.size() == 3);
  CHECK(m.nodes()(0) == 0.0);
  CHECK(m.weights()(1) == doctest::Approx(7.0));
  CHECK(m.total_mass() == doctest::Approx(10.0));
  CHECK(m.cdf(1.5) == doctest::Approx(9.0));
  CHECK(m.cdf_left(0.5) == doctest::Approx(2.0));
  CHECK(m.cdf_left(0.0) == 0.0);
  CHECK(m.cdf(0.0) == doctest::Approx(2.0));
  CHECK(m.moment(1) == doctest::Approx(0 * 2 + 1 * 7 + 2 * 1.0));
  CHECK_THROWS_AS(DiscreteMeasure(vec({0, 1}), vec({1, -1})), InvalidMeasure);
}

TEST_CASE("chebyshev evaluation") {
  CHECK(cheb_eval(ChebKind::T, 2, 0.5) == doctest::Approx(-0.5));
  CHECK(cheb_eval(ChebKind::T, 5, std::cos(pi / 7)) == doctest::Approx(std::cos(5 * pi / 7)).epsilon(1e-12));
  const double t = cheb_eval(ChebKind::T, 1000, 1.0 + 1.0 / (2.0 * 1000 * 1000));
  CHECK(t > 1.0);
  CHECK(t <= 2.0);
  CHECK(t == doctest::Approx((std::exp(1.0) + std::exp(-1.0)) / 2).epsilon(1e-3));

  for (int n : {0, 1, 7, 50, 200})
    for (int i = 0; i <= 1000; ++i) {
      const double x = -1.0 + 2.0 * i / 1000.0;
      const double th = std::acos(x);
      CHECK(std::abs(cheb_eval(ChebKind::T, n, x)) <= 1.0 + 1e-12);
      CHECK(std::abs(cheb_eval(ChebKind::U, n, x)) <= n + 1.0 + 1e-9);
      if (n <= 50) CHECK(std::abs(cheb_eval(ChebKind::T, n, x) - std::cos(n * th)) <= 1e-12);
      if (std::abs(std::sin(th)) > 0.1 && n <= 50)
        CHECK(std::abs(cheb_eval(ChebKind::U, n, x) - std::sin((n + 1) * th) / std::sin(th)) <= 1e-11);
    }
}

TEST_CASE("chebyshev extremal growth outside [-1, 1]") {
  // Random degree-k polynomials with sup norm 1 on [-1, 1] never beat T_k.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int k = 6;
  for (int trial = 0; trial < 50; ++trial) {
    ChebyshevExpansion p;
    p.coefficients.resize(k + 1);
    for (auto& c : p.coefficients) c = u(rng);
    double sup = 0.0;
    for (int i = 0; i <= 4000; ++i) sup = std::max(sup, std::abs(p(-1.0 + 2.0 * i / 4000.0)));
    for (double x : {1.1, -1.1, 2.0, -2.0, 10.0, -10.0})
      CHECK(std::abs(cheb_eval(ChebKind::T, k, x)) >= std::abs(p(x)) / sup);
  }
}

TEST_CASE("chebyshev approximant") {
  const ChebyshevExpansion t3 = cheb_approximant([](double x) { return cheb_eval(ChebKind::T, 3, x); }, 5);
  for (Index n = 0; n <= 5; ++n) CHECK(std::abs(t3.coefficients(n) - (n == 3 ? 0.5 : 0.0)) <= 1e-13);

  const ChebyshevExpansion c7 = cheb_approximant([](double) { return 7.0; }, 4, 2.0, 5.0);
  CHECK(c7.coefficients(0) == doctest::Approx(7.0));
  for (Index n = 1; n <= 4; ++n) CHECK(std::abs(c7.coefficients(n)) <= 1e-13);
  CHECK(c7(3.3) == doctest::Approx(7.0));

  // |x|: compare with a weighted least-squares fit on a fine Chebyshev grid.
  auto f = [](double x) { return std::abs(x); };
  double prev = 1e300;
  for (int k : {3, 9, 17}) {
    const ChebyshevExpansion p = cheb_approximant(f, k);
    const int N = 4000;
    Matrix V(N, k + 1);
    Vector y(N);
    for (int i = 0; i < N; ++i) {
      const double x = std::cos(pi * (i + 0.5) / N);
      for (int n = 0; n <= k; ++n) V(i, n) = (n == 0 ? 1.0 : 2.0) * cheb_eval(ChebKind::T, n, x);
      y(i) = f(x);
    }
    const Vector ls = V.colPivHouseholderQr().solve(y);
    double err_p = 0.0, err_ls = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double x = -1.0 + i / 1000.0;
      err_p = std::max(err_p, std::abs(p(x) - f(x)));
      Vector row(k + 1);
      for (int n = 0; n <= k; ++n) row(n) = (n == 0 ? 1.0 : 2.0) * cheb_eval(ChebKind::T, n, x);
      err_ls = std::max(err_ls, std::abs(row.dot(ls) - f(x)));
    }
    CHECK(err_p <= 1.1 * err_ls);
    CHECK(err_p >= 0.9 * err_ls);
    CHECK(err_p < prev);
    prev = err_p;
  }
  CHECK_THROWS_AS(cheb_approximant([](double x) { return std::log(x); }, 2), NonFiniteSample);
}

TEST_CASE("stieltjes") {
  const SymTridiagonal one = stieltjes(DiscreteMeasure(vec({2.5}), vec({3.0})), 1);
  CHECK(one.alphas(0) == doctest::Approx(2.5));

  const SymTridiagonal two = stieltjes(DiscreteMeasure(vec({-1, 1}), vec({0.5, 0.5})), 2);
  CHECK(std::abs(two.alphas(0)) <= 1e-15);
  CHECK(std::abs(two.alphas(1)) <= 1e-15);
  CHECK(two.betas(0) == doctest::Approx(1.0));

  // Discretized Chebyshev-T weight: Gauss-Chebyshev nodes with equal weights
  // reproduce the T-weight moments exactly up to degree 127.
  const int N = 64;
  Vector x(N), w = Vector::Constant(N, 1.0 / N);
  for (int i = 0; i < N; ++i) x(i) = std::cos(pi * (i + 0.5) / N);
  const SymTridiagonal J = stieltjes(DiscreteMeasure(x, w), 5);
  CHECK(J.alphas.cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(J.betas(0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  for (Index n = 1; n < 4; ++n) CHECK(J.betas(n) == doctest::Approx(0.5));

  CHECK_THROWS_AS(stieltjes(DiscreteMeasure(vec({1, 2}), vec({1, 1})), 3), InsufficientSupport);
}

TEST_CASE("gaussian quadrature") {
  const DiscreteMeasure a = gauss_quadrature(SymTridiagonal(vec({4.0}), Vector()), 1.0);
  CHECK(a.nodes()(0) == 4.0);
  CHECK(a.weights()(0) == doctest::Approx(1.0));
  const DiscreteMeasure s = gauss_quadrature(SymTridiagonal(Vector::Zero(2), Vector::Ones(1)), 1.0);
  CHECK(s.nodes()(0) == doctest::Approx(-1.0));
  CHECK(s.nodes()(1) == doctest::Approx(1.0));
  CHECK(s.weights()(0) == doctest::Approx(0.5));

  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const DiscreteMeasure mu = random_measure(50, rng);
    const Index k = 6;
    const DiscreteMeasure q = gauss_quadrature(stieltjes(mu, k), mu.total_mass());
    for (int j = 0; j < 2 * k; ++j) {
      const double scale = std::max(1.0, std::abs(mu.moment(j)));
      CHECK(std::abs(q.moment(j) - mu.moment(j)) <= 1e-10 * scale);
    }
    CHECK(q.nodes().minCoeff() >= mu.nodes().minCoeff());
    CHECK(q.nodes().maxCoeff() <= mu.nodes().maxCoeff());
  }
}

TEST_CASE("at most one quadrature node per support gap") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const DiscreteMeasure mu = random_measure(20, rng);
    const DiscreteMeasure q = gauss_quadrature(stieltjes(mu, 8), 1.0);
    for (Index i = 0; i + 1 < mu.size(); ++i) {
      const double lo = mu.nodes()(i), hi = mu.nodes()(i + 1);
      const auto c = std::count_if(q.nodes().begin(), q.nodes().end(),
                                   [&](double t) { return t > lo && t < hi; });
      CHECK(c <= 1);
    }
  }
}

TEST_CASE("orthonormal polynomials vanish at Ritz values and track det(xI - M)") {
  std::mt19937_64 rng(45);
  const DiscreteMeasure mu = random_measure(30, rng);
  const SymTridiagonal M = stieltjes(mu, 7);
  // p_7 comes from one more recurrence step; use the 8-step matrix.
  const SymTridiagonal M8 = stieltjes(mu, 8);
  const Vector th = sym_tridiag_eigenvalues(M);
  auto p7 = [&](double x) { return orthonormal_polys(M8, x)(7); };
  for (Index i = 0; i < th.size(); ++i) CHECK(std::abs(p7(th(i))) <= 1e-8);
  // Ratio p_7(x) / det(xI - M_7) is constant.
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  auto det = [&](double x) { return (x * Matrix::Identity(7, 7) - M.dense()).determinant(); };
  const double ref = p7(0.123) / det(0.123);
  for (int i = 0; i < 20; ++i) {
    const double x = u(rng);
    CHECK(p7(x) / det(x) == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("modified moments") {
  std::mt19937_64 rng(47);
  const DiscreteMeasure mu = random_measure(10, rng, -0.9, 0.9);
  const Vector m = modified_moments(mu, PolyBasis{}, 6);
  CHECK(m(0) == doctest::Approx(mu.total_mass()));
  for (Index j = 0; j < 6; ++j) {
    double s = 0.0;
    for (Index i = 0; i < mu.size(); ++i) s += mu.weights()(i) * std::cos(j * std::acos(mu.nodes()(i)));
    CHECK(std::abs(m(j) - s) <= 1e-13);
  }
  const DiscreteMeasure delta(vec({std::cos(pi / 3)}), vec({1.0}));
  const Vector md = modified_moments(delta, PolyBasis{}, 8);
  for (Index j = 0; j < 8; ++j) CHECK(md(j) == doctest::Approx(std::cos(j * pi / 3)).epsilon(1e-12));

  const Vector mono = modified_moments(mu, PolyBasis{PolyBasis::Kind::Monomial, -1, 1}, 4);
  for (int j = 0; j < 4; ++j) CHECK(mono(j) == doctest::Approx(mu.moment(j)));
}

TEST_CASE("jackson damping") {
  for (Index k = 1; k <= 64; ++k) {
    const JacksonWeights J = jackson_damping(k);
    REQUIRE(J.rho.size() == 2 * k);
    CHECK(J.rho(0) == doctest::Approx(1.0));
    const double N = 2.0 * k + 1.0;
    for (Index n = 0; n < 2 * k; ++n) {
      const double direct =
          ((N - n) * std::cos(n * pi / N) + std::sin(n * pi / N) / std::tan(pi / N)) / N;
      CHECK(J.rho(n) == doctest::Approx(direct).epsilon(1e-12));
      CHECK(J.rho(n) > 0.0);
      CHECK(J.rho(n) <= 1.0 + 1e-15);
      if (n > 0) CHECK(J.rho(n) < J.rho(n - 1));
    }
  }
}

TEST_CASE("wasserstein") {
  std::mt19937_64 rng(49);
  const DiscreteMeasure mu = random_measure(10, rng);
  CHECK(wasserstein(mu, mu) == doctest::Approx(0.0));
  CHECK(wasserstein(DiscreteMeasure(vec({0}), vec({1})), DiscreteMeasure(vec({1}), vec({1}))) == doctest::Approx(1.0));
  CHECK(wasserstein(DiscreteMeasure(vec({0, 1}), vec({0.5, 0.5})), DiscreteMeasure(vec({0.5}), vec({1}))) ==
        doctest::Approx(0.5));
  CHECK_THROWS_AS(wasserstein(DiscreteMeasure(vec({0}), vec({1})), DiscreteMeasure(vec({0}), vec({0.5}))),
                  MassMismatch);
}

TEST_CASE("cdf straddle and sign changes") {
  std::mt19937_64 rng(51);
  const DiscreteMeasure small = random_measure(5, rng);
  const CdfReport exact = cdf_compare(small, gauss_quadrature(stieltjes(small, 5), 1.0));
  CHECK(exact.violations == 0);

  for (int trial = 0; trial < 10; ++trial) {
    const DiscreteMeasure mu = random_measure(50, rng);
    const Index k = 6;
    const DiscreteMeasure q = gauss_quadrature(stieltjes(mu, k), 1.0);
    const CdfReport r = cdf_compare(mu, q);
    CHECK(r.straddle.size() == static_cast<std::size_t>(k));
    CHECK(r.violations == 0);
    CHECK(r.sign_changes <= 2 * k - 1);
    // Brute force: M_k(θ⁻) ≤ M(θ) ≤ M_k(θ) at each quadrature node.
    for (Index i = 0; i < q.size(); ++i) {
      const double t = q.nodes()(i);
      CHECK(q.cdf_left(t) <= mu.cdf(t) + 1e-12);
      CHECK(mu.cdf(t) <= q.cdf(t) + 1e-12);
    }
  }
}
