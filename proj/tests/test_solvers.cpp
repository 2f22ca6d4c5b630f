#include <doctest.h>

#include <cmath>
#include <map>

#include "krylov/solvers.hpp"
#include "test_support.hpp"

using namespace krylov;
namespace ts = testing_support;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

SolverOptions no_stop() {
  SolverOptions o;
  o.stop_on_convergence = false;
  return o;
}

// A-inner-product projection of A⁻¹b onto the Krylov space of dimension k.
Vector cg_oracle(const Matrix& A, const Vector& b, Index k) {
  const Matrix K = ts::krylov_basis(A, b, k);
  return K * (K.transpose() * A * K).ldlt().solve(K.transpose() * b);
}

// Least-squares minimizer of ‖b − A x‖ over the Krylov space.
Vector minres_oracle(const Matrix& A, const Vector& b, Index k) {
  const Matrix K = ts::krylov_basis(A, b, k);
  return K * (A * K).colPivHouseholderQr().solve(b);
}

}  // namespace

TEST_CASE("cg small examples") {
  for (CgBackend be : {CgBackend::Tridiagonal, CgBackend::LowMemory}) {
    const Vector b = vec({1, 2, 3});
    const IterateHistory h = cg(LinearOperator::identity(3), b, 3, be, ReorthMode::Full);
    CHECK(h.iterates.front().isApprox(b, 1e-15));
    CHECK(h.termination.kind == SolverStop::Kind::Converged);

    Matrix A(2, 2);
    A << 2, 1, 1, 2;
    const IterateHistory h2 = cg(LinearOperator::dense(A), vec({1, 0}), 2, be, ReorthMode::Full, no_stop());
    const Vector x1 = vec({1, 0}) * (1.0 / 2.0);  // bᵀb / bᵀAb = 1/2
    CHECK((h2.iterates[0] - x1).norm() <= 1e-15);
    CHECK((h2.iterates[1] - vec({2.0 / 3.0, -1.0 / 3.0})).norm() <= 1e-14);
  }
}

TEST_CASE("cg optimality, backends agree, residuals explicit") {
  std::mt19937_64 rng(61);
  const Matrix A = ts::random_spd(60, 1e3, rng);
  const Vector b = ts::gaussian_vector(60, rng);
  const Vector xs = A.ldlt().solve(b);
  const LinearOperator op = LinearOperator::dense(A);
  const IterateHistory t = cg(op, b, 25, CgBackend::Tridiagonal, ReorthMode::Full, no_stop());
  const IterateHistory l = cg(op, b, 25, CgBackend::LowMemory, ReorthMode::Full, no_stop());
  REQUIRE(t.steps.size() == 25);
  REQUIRE(l.steps.size() == 25);
  for (std::size_t i = 0; i < 25; ++i) {
    const Index k = t.steps[i];
    const Vector oracle = cg_oracle(A, b, k);
    CHECK(ts::rel_err(t.iterates[i], oracle) <= 1e-8);
    CHECK(ts::rel_err(l.iterates[i], t.iterates[i]) <= 5e-7);
    CHECK(t.residual_norms[i] == doctest::Approx((b - A * t.iterates[i]).norm()).epsilon(1e-8));
    // A-norm optimality against random Krylov members.
    const Matrix K = ts::krylov_basis(A, b, k);
    const double err = ts::a_norm(A, xs - t.iterates[i]);
    for (int r = 0; r < 20; ++r) {
      const Vector v = K * ts::gaussian_vector(k, rng);
      CHECK(err <= ts::a_norm(A, xs - v) + 1e-9);
    }
    // Residual sandwich: ‖r‖/√λmax ≤ ‖e‖_A ≤ ‖r‖/√λmin.
    Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
    const double r = t.residual_norms[i];
    CHECK(r / std::sqrt(es.eigenvalues().maxCoeff()) <= err * (1 + 1e-8));
    CHECK(err <= r / std::sqrt(es.eigenvalues().minCoeff()) * (1 + 1e-8));
  }
}

TEST_CASE("low-memory cg directions are A-conjugate") {
  std::mt19937_64 rng(62);
  const Matrix A = ts::random_spd(50, 100.0, rng);
  const Vector b = ts::gaussian_vector(50, rng);
  SolverOptions o = no_stop();
  o.retain_directions = true;
  const IterateHistory h = cg(LinearOperator::dense(A), b, 20, CgBackend::LowMemory, ReorthMode::Full, o);
  REQUIRE(h.directions.size() == 20);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < i; ++j) CHECK(std::abs(h.directions[i].dot(A * h.directions[j])) <= 1e-8);
}

TEST_CASE("cg on an indefinite matrix") {
  const Vector lam = vec({-1, 1, 2});
  const Vector b = vec({1, 1, 1}) / std::sqrt(3.0);
  // α₀ = bᵀAb = 2/3 > 0; T₂ turns out indefinite and the Cholesky pivot fails.
  const IterateHistory l = cg(LinearOperator::diagonal(lam), b, 3, CgBackend::LowMemory, ReorthMode::Full);
  const IterateHistory t = cg(LinearOperator::diagonal(lam), b, 3, CgBackend::Tridiagonal, ReorthMode::Full);
  CHECK(l.termination.kind == SolverStop::Kind::SingularPivot);
  // The tridiagonal backend keeps going across the bad step.
  CHECK(t.steps.back() == 3);
  CHECK((t.iterates.back() - b.cwiseQuotient(lam)).norm() <= 1e-12);

  // A = diag(-1, 1) with b = (1,1)/√2 gives T₁ = [0]: the iterate is skipped.
  const IterateHistory s =
      cg(LinearOperator::diagonal(vec({-1, 1})), vec({1, 1}) / std::sqrt(2.0), 2, CgBackend::Tridiagonal,
         ReorthMode::Full);
  REQUIRE(s.skipped_steps.size() == 1);
  CHECK(s.skipped_steps[0] == 1);
}

TEST_CASE("minres") {
  const IterateHistory id = minres(LinearOperator::identity(3), vec({1, 2, 3}), 2, ReorthMode::Full);
  CHECK(id.iterates.front().isApprox(vec({1, 2, 3}), 1e-15));

  const Vector b = vec({1, 1}) / std::sqrt(2.0);
  const IterateHistory d = minres(LinearOperator::diagonal(vec({1, -1})), b, 2, ReorthMode::Full, no_stop());
  CHECK((d.iterates.back() - vec({1, -1}) / std::sqrt(2.0)).norm() <= 1e-14);

  std::mt19937_64 rng(63);
  Vector lam(60);
  for (Index i = 0; i < 60; ++i) lam(i) = (i % 3 == 0 ? -1.0 : 1.0) * (0.5 + 0.1 * static_cast<double>(i));
  const Matrix A = ts::with_spectrum(lam, rng);
  const Vector rhs = ts::gaussian_vector(60, rng);
  const IterateHistory h = minres(LinearOperator::dense(A), rhs, 30, ReorthMode::Full, no_stop());
  double prev = rhs.norm();
  for (std::size_t i = 0; i < h.steps.size(); ++i) {
    const Vector oracle = minres_oracle(A, rhs, h.steps[i]);
    CHECK(h.residual_norms[i] == doctest::Approx((rhs - A * oracle).norm()).epsilon(1e-8));
    CHECK(h.residual_norms[i] <= prev * (1 + 1e-12));
    prev = h.residual_norms[i];
  }
}

TEST_CASE("cg / minres residual identities on an indefinite system") {
  std::mt19937_64 rng(64);
  Vector lam(80);
  for (Index i = 0; i < 80; ++i) lam(i) = i < 20 ? -2.0 + 0.05 * static_cast<double>(i) : 0.5 + 0.1 * static_cast<double>(i - 20);
  const Matrix A = ts::with_spectrum(lam, rng);
  const Vector b = ts::gaussian_vector(80, rng);
  const LinearOperator op = LinearOperator::dense(A);
  const IterateHistory c = cg(op, b, 40, CgBackend::Tridiagonal, ReorthMode::Full, no_stop());
  const IterateHistory m = minres(op, b, 40, ReorthMode::Full, no_stop());
  REQUIRE(m.steps.size() == 40);
  std::map<Index, double> rcg;
  for (std::size_t i = 0; i < c.steps.size(); ++i) rcg[c.steps[i]] = c.residual_norms[i];
  // Both identities include the zeroth residual r_0 = b.
  double inv_sum = 1.0 / b.squaredNorm(), best = b.norm();
  bool all_defined = true;
  for (std::size_t i = 0; i < m.steps.size(); ++i) {
    const Index k = m.steps[i];
    const double rm = m.residual_norms[i];
    if (!rcg.count(k)) {
      all_defined = false;
      continue;
    }
    best = std::min(best, rcg[k]);
    CHECK(best <= std::sqrt(static_cast<double>(k) + 1.0) * rm * (1 + 1e-8));
    inv_sum += 1.0 / (rcg[k] * rcg[k]);
    if (all_defined && rm > 1e-8 * b.norm()) CHECK(rm == doctest::Approx(1.0 / std::sqrt(inv_sum)).epsilon(1e-6));
    if (i > 0) {
      const double ratio = rm / m.residual_norms[i - 1];
      if (ratio < 1.0 - 1e-4 && rm > 1e-8 * b.norm())
        CHECK(rcg[k] == doctest::Approx(rm / std::sqrt(1.0 - ratio * ratio)).epsilon(1e-6));
    }
  }
}

TEST_CASE("multi-shift") {
  std::mt19937_64 rng(65);
  const Matrix A = ts::random_spd(40, 50.0, rng);
  const Vector b = ts::gaussian_vector(40, rng);
  const LinearOperator op = LinearOperator::dense(A);

  SUBCASE("zero shift matches the single solvers") {
    ShiftFamily fam{{Complex(0.0)}, {Complex(1.0)}};
    for (SolveMethod meth : {SolveMethod::CG, SolveMethod::MINRES}) {
      const auto ms = multi_shift_solve(op, b, fam, 15, meth);
      const IterateHistory ref = meth == SolveMethod::CG
                                     ? cg(op, b, 15, CgBackend::Tridiagonal, ReorthMode::None, no_stop())
                                     : minres(op, b, 15, ReorthMode::None, no_stop());
      REQUIRE(ms[0].iterates.size() == ref.iterates.size());
      for (std::size_t i = 0; i < ref.iterates.size(); ++i)
        CHECK(ts::rel_err(ms[0].iterates[i].real(), ref.iterates[i]) <= 1e-13);
    }
  }

  SUBCASE("shift left of the spectrum converges no slower") {
    ShiftFamily fam{{Complex(0.0), Complex(-1.0)}, {Complex(1.0), Complex(1.0)}};
    const auto ms = multi_shift_solve(op, b, fam, 15, SolveMethod::CG);
    const IterateHistory s0 = cg(op, b, 15, CgBackend::Tridiagonal, ReorthMode::Full, no_stop());
    const IterateHistory s1 = cg(op.shifted(-1.0), b, 15, CgBackend::Tridiagonal, ReorthMode::Full, no_stop());
    for (std::size_t i = 0; i < 15; ++i) {
      CHECK(ms[1].residual_norms[i] <= ms[0].residual_norms[i] * (1 + 1e-6));
      CHECK(s1.residual_norms[i] / s1.b_norm <= s0.residual_norms[i] / s0.b_norm * (1 + 1e-6));
      CHECK(ts::rel_err(ms[1].iterates[i].real(), s1.iterates[i]) <= 1e-8);
    }
  }

  SUBCASE("complex shift on a 1x1 system") {
    ShiftFamily fam{{Complex(0.0, 1.0)}, {Complex(1.0)}};
    const auto ms = multi_shift_solve(LinearOperator::identity(1), Vector::Constant(1, 2.0), fam, 1, SolveMethod::CG);
    CHECK(std::abs(ms[0].iterates[0](0) - Complex(2.0) / Complex(1.0, -1.0)) <= 1e-15);
  }

  SUBCASE("threads do not change results") {
    ShiftFamily fam{{Complex(0.0), Complex(-0.5), Complex(-2.0), Complex(0.1, 0.3)}, {}};
    fam.weights.assign(4, Complex(1.0));
    MultiShiftOptions one, four;
    four.threads = 4;
    const auto a = multi_shift_solve(op, b, fam, 10, SolveMethod::MINRES, one);
    const auto c = multi_shift_solve(op, b, fam, 10, SolveMethod::MINRES, four);
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t i = 0; i < a[s].iterates.size(); ++i) CHECK((a[s].iterates[i] - c[s].iterates[i]).norm() == 0.0);
  }

  ShiftFamily dup{{Complex(1.0), Complex(1.0)}, {Complex(1.0), Complex(1.0)}};
  CHECK_THROWS_AS(multi_shift_solve(op, b, dup, 3, SolveMethod::CG), std::invalid_argument);
}

TEST_CASE("preconditioned solve") {
  std::mt19937_64 rng(66);
  const Matrix A = ts::random_spd(30, 100.0, rng);
  const Vector b = ts::gaussian_vector(30, rng);
  const LinearOperator op = LinearOperator::dense(A);

  const IterateHistory p = preconditioned_solve(op, LinearOperator::identity(30), b, 8, SolveMethod::CG);
  const IterateHistory u = cg(op, b, 8, CgBackend::Tridiagonal, ReorthMode::None);
  for (std::size_t i = 0; i < u.iterates.size(); ++i) CHECK(ts::rel_err(p.iterates[i], u.iterates[i]) <= 1e-12);

  const Matrix Mhalf = ts::dense_function(A, [](double x) { return 1.0 / std::sqrt(x); });
  for (SolveMethod m : {SolveMethod::CG, SolveMethod::MINRES}) {
    const IterateHistory h = preconditioned_solve(op, LinearOperator::dense(Mhalf), b, 5, m);
    CHECK(h.residual_norms.front() <= 1e-10 * b.norm());
    CHECK(h.termination.kind == SolverStop::Kind::Converged);
    CHECK(h.steps.front() == 1);
  }

  const Vector d = Vector::LinSpaced(20, 1.0, 400.0);
  const IterateHistory dg = preconditioned_solve(LinearOperator::diagonal(d),
                                                 LinearOperator::diagonal(d.cwiseSqrt().cwiseInverse()),
                                                 Vector::Ones(20), 5, SolveMethod::CG);
  CHECK(dg.steps.front() == 1);
  CHECK(dg.residual_norms.front() <= 1e-12);
}

TEST_CASE("chebyshev bounds") {
  CHECK(chebyshev_bound(FullInterval{3.0, 3.0}, 5) == 0.0);
  CHECK(chebyshev_bound(FullInterval{1.0, 10.0}, 0) == 1.0);
  for (double kappa : {4.0, 100.0})
    for (Index k = 1; k <= 20; ++k) {
      const double s = std::sqrt(kappa);
      const double two_term = chebyshev_bound(FullInterval{1.0, kappa}, k);
      CHECK(two_term <= 2.0 * std::pow((s - 1) / (s + 1), static_cast<double>(k)) * (1 + 1e-12));
      CHECK(two_term <= 2.0 * std::exp(-2.0 * static_cast<double>(k) / s) * (1 + 1e-12));
    }
  // Direct check against 1/|T_k((λmax + λmin)/(λmax − λmin))|.
  const double kappa = 50.0, x0 = (kappa + 1) / (kappa - 1);
  CHECK(chebyshev_bound(FullInterval{1.0, kappa}, 7) == doctest::Approx(1.0 / std::cosh(7 * std::acosh(x0))));

  // Upper-bound property on random SPD systems.
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 3; ++trial) {
    const Matrix A = ts::random_spd(50, 1e3, rng);
    const Vector b = ts::gaussian_vector(50, rng);
    const Vector xs = A.ldlt().solve(b);
    const IterateHistory h = cg(LinearOperator::dense(A), b, 30, CgBackend::Tridiagonal, ReorthMode::Full, no_stop());
    const double e0 = ts::a_norm(A, xs);
    for (std::size_t i = 0; i < h.steps.size(); ++i)
      CHECK(ts::a_norm(A, xs - h.iterates[i]) / e0 <= chebyshev_bound(FullInterval{1.0, 1e3}, h.steps[i]) * (1 + 1e-8));
  }

  CHECK(chebyshev_bound(TopCluster{1.0, 10.0, 1}, 20) == doctest::Approx(chebyshev_bound(FullInterval{1.0, 10.0}, 19)));
  // Two symmetric intervals behave like one interval with κ = |ad|/|bc| at half the degree.
  CHECK(chebyshev_bound(TwoInterval{-3, -1, 1, 3}, 5) == doctest::Approx(2.0 * std::exp(-2.0 * 2.0 / 3.0)));
  CHECK(chebyshev_bound(TwoInterval{-3, -1, 1, 3}, 4) >= chebyshev_bound(FullInterval{1.0, 9.0}, 2));
  CHECK_THROWS_AS(chebyshev_bound(FullInterval{-1.0, 2.0}, 3), InvalidInterval);
  CHECK_THROWS_AS(chebyshev_bound(TopCluster{1.0, 2.0, 5}, 3), InvalidInterval);
  CHECK_THROWS_AS(chebyshev_bound(TwoInterval{-3, -1, 1, 2}, 3), InvalidInterval);
}

TEST_CASE("delayed error estimate") {
  std::mt19937_64 rng(68);
  const Matrix A = ts::random_spd(50, 1e3, rng);
  const Vector b = ts::gaussian_vector(50, rng);
  const Vector xs = A.ldlt().solve(b);
  const LinearOperator op = LinearOperator::dense(A);
  const IterateHistory h = cg(op, b, 45, CgBackend::Tridiagonal, ReorthMode::Full, no_stop());
  const Index d = 4;
  const std::vector<double> est = error_estimate_delay(h, op, d);
  REQUIRE(est.size() == h.steps.size() - d);
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double truth = ts::a_norm(A, xs - h.iterates[i]);
    CHECK(est[i] <= truth * (1 + 1e-6));
    const double later = ts::a_norm(A, xs - h.iterates[i + d]);
    if (later <= 0.1 * truth && truth > 1e-6) CHECK(est[i] / truth >= 0.9);
  }

  IterateHistory conv;
  conv.steps = {1, 2, 3};
  conv.iterates.assign(3, xs);
  for (double e : error_estimate_delay(conv, op, 1)) CHECK(e == 0.0);

  IterateHistory bare = h;
  bare.iterates.clear();
  CHECK_THROWS_AS(error_estimate_delay(bare, op, 2), InsufficientIterates);
  CHECK_THROWS_AS(error_estimate_delay(conv, op, 3), InsufficientIterates);
}

TEST_CASE("block cg") {
  std::mt19937_64 rng(69);
  const Matrix A = ts::random_spd(40, 100.0, rng);
  const LinearOperator op = LinearOperator::dense(A);

  const Matrix B1 = ts::gaussian_matrix(40, 1, rng);
  const BlockIterateHistory b1 = block_cg(op, B1, 10);
  const IterateHistory c1 = cg(op, B1.col(0), 10, CgBackend::Tridiagonal, ReorthMode::Full, no_stop());
  for (std::size_t i = 0; i < b1.iterates.size(); ++i)
    CHECK(ts::rel_err(b1.iterates[i].col(0), c1.iterates[i]) <= 5e-7);

  const Matrix Bi = ts::gaussian_matrix(6, 2, rng);
  const BlockIterateHistory bi = block_cg(LinearOperator::identity(6), Bi, 3);
  CHECK((bi.iterates[0] - Bi).norm() <= 1e-14);

  const Matrix B = ts::gaussian_matrix(40, 3, rng);
  const Matrix Xs = A.ldlt().solve(B);
  const BlockIterateHistory bh = block_cg(op, B, 8);
  for (Index c = 0; c < 3; ++c) {
    const IterateHistory single = cg(op, B.col(c), 8, CgBackend::Tridiagonal, ReorthMode::Full, no_stop());
    for (std::size_t i = 0; i < bh.iterates.size(); ++i) {
      const double eb = ts::a_norm(A, Xs.col(c) - bh.iterates[i].col(c));
      const double es = ts::a_norm(A, Xs.col(c) - single.iterates[i]);
      CHECK(eb <= es * (1 + 1e-8) + 1e-12);
    }
  }
  CHECK_FALSE(bh.deflated);
}
