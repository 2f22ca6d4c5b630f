#include <doctest.h>

#include <cmath>

#include "krylov/krylov.hpp"
#include "krylov/orthopoly.hpp"
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

}  // namespace

TEST_CASE("arnoldi") {
  SUBCASE("identity terminates after one step") {
    const ArnoldiDecomposition a = arnoldi(LinearOperator::identity(5), Vector::Ones(5), 3);
    CHECK(a.termination.kind == Termination::Kind::Breakdown);
    CHECK(a.H.rows() == 1);
    CHECK(a.H(0, 0) == doctest::Approx(1.0));
    CHECK(a.trailing <= 1e-14);
  }
  SUBCASE("diag(1,2) matches Gram-Schmidt on {b, Ab} and Lanczos") {
    const LinearOperator A = LinearOperator::diagonal(vec({1, 2}));
    const Vector b = vec({1, 1}) / std::sqrt(2.0);
    const ArnoldiDecomposition a = arnoldi(A, b, 2);
    Matrix K(2, 2);
    K.col(0) = b;
    K.col(1) = A.apply(b);
    K.col(1) -= K.col(0).dot(K.col(1)) * K.col(0);
    K.col(1).normalize();
    const Matrix H = K.transpose() * A.to_dense() * K;
    CHECK((a.H - H).cwiseAbs().maxCoeff() <= 1e-14);
    const KrylovDecomposition l = lanczos(A, b, 2, ReorthMode::Full);
    CHECK((a.H - l.T.dense()).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("symmetric input gives a tridiagonal H and Arnoldi relation") {
    std::mt19937_64 rng(7);
    const Matrix A = ts::random_spd(40, 100.0, rng);
    const Vector b = ts::gaussian_vector(40, rng);
    const ArnoldiDecomposition a = arnoldi(LinearOperator::dense(A), b, 12);
    for (Index i = 0; i < a.H.rows(); ++i)
      for (Index j = i + 2; j < a.H.cols(); ++j) CHECK(std::abs(a.H(j, i)) <= 1e-10);
    CHECK(orthogonality_loss(a.Q) <= 1e-10);
    const Index k = a.H.rows();
    Matrix R = A * a.Q - a.Q * a.H;
    R.col(k - 1) -= a.trailing * a.next_vector;
    CHECK(R.cwiseAbs().maxCoeff() <= 1e-10 * A.norm());
  }
  CHECK_THROWS_AS(arnoldi(LinearOperator::identity(3), Vector::Zero(3), 2), ZeroStartVector);
}

TEST_CASE("lanczos small examples") {
  const KrylovDecomposition e = lanczos(LinearOperator::diagonal(vec({3, 1, 2})), vec({1, 0, 0}), 3, ReorthMode::Full);
  CHECK(e.steps() == 1);
  CHECK(e.T.alphas(0) == 3.0);
  CHECK(e.termination.kind == Termination::Kind::Breakdown);

  const Vector b = Vector::Ones(3) / std::sqrt(3.0);
  const KrylovDecomposition d = lanczos(LinearOperator::diagonal(vec({0, 1, 2})), b, 2, ReorthMode::Full);
  CHECK(d.T.alphas(0) == doctest::Approx(1.0));
  // β₀ = ‖(A − α₀I)b‖ computed directly.
  const Vector r = (vec({0, 1, 2}).array() - 1.0).matrix().cwiseProduct(b);
  CHECK(d.T.betas(0) == doctest::Approx(r.norm()).epsilon(1e-14));
  CHECK(d.T.betas(0) == doctest::Approx(std::sqrt(2.0 / 3.0)));

  CHECK_THROWS_AS(lanczos(LinearOperator::identity(3), Vector::Zero(3), 2, ReorthMode::None), ZeroStartVector);
}

TEST_CASE("lanczos decomposition invariants") {
  std::mt19937_64 rng(21);
  const Matrix A = ts::random_spd(80, 1e3, rng);
  const Vector b = ts::gaussian_vector(80, rng);
  const LinearOperator op = LinearOperator::dense(A);

  const KrylovDecomposition f = lanczos(op, b, 30, ReorthMode::Full);
  CHECK(f.steps() == 30);
  CHECK(f.b_norm == doctest::Approx(b.norm()));
  CHECK(orthogonality_loss(f.Q) <= 1e-10);
  Matrix R = A * f.Q - f.Q * f.T.dense();
  R.col(29) -= f.trailing_beta * f.next_vector;
  CHECK(R.cwiseAbs().maxCoeff() <= 1e-10 * A.norm());
  for (Index i = 0; i < f.T.betas.size(); ++i) CHECK(f.T.betas(i) > 0.0);

  const KrylovDecomposition n = lanczos(op, b, 30, ReorthMode::None);
  for (Index j = 0; j < 30; ++j) CHECK(std::abs(n.Q.col(j).norm() - 1.0) <= 1e-12);

  // Ritz values lie inside the spectrum.
  Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
  const Vector th = sym_tridiag_eigenvalues(f.T);
  CHECK(th.minCoeff() >= es.eigenvalues().minCoeff() - 1e-10);
  CHECK(th.maxCoeff() <= es.eigenvalues().maxCoeff() + 1e-10);
  const Vector thn = sym_tridiag_eigenvalues(n.T);
  const double eta = 1e-8 * A.norm();
  CHECK(thn.minCoeff() >= es.eigenvalues().minCoeff() - eta);
  CHECK(thn.maxCoeff() <= es.eigenvalues().maxCoeff() + eta);
}

TEST_CASE("lanczos shift invariance") {
  std::mt19937_64 rng(8);
  const Matrix A = ts::random_spd(50, 50.0, rng);
  const Vector b = ts::gaussian_vector(50, rng);
  const double z = 0.75;
  const KrylovDecomposition a = lanczos(LinearOperator::dense(A), b, 20, ReorthMode::Full);
  const KrylovDecomposition s = lanczos(LinearOperator::dense(A).shifted(z), b, 20, ReorthMode::Full);
  CHECK((a.T.alphas.array() - z - s.T.alphas.array()).abs().maxCoeff() <= 1e-12 * A.norm());
  CHECK((a.T.betas - s.T.betas).cwiseAbs().maxCoeff() <= 1e-12 * A.norm());
  CHECK((a.Q - s.Q).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("lanczos matches the Stieltjes procedure on the eigenvector density") {
  std::mt19937_64 rng(12);
  Vector lam(30);
  for (Index i = 0; i < 30; ++i) lam(i) = 1.0 + static_cast<double>(i) * 0.3;
  const Matrix A = ts::with_spectrum(lam, rng);
  const Vector b = ts::gaussian_vector(30, rng);
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  const DiscreteMeasure psi = DiscreteMeasure::eigenvector_density(es.eigenvalues(), es.eigenvectors(), b);
  const Index k = 10;
  const SymTridiagonal S = stieltjes(psi, k);
  const KrylovDecomposition L = lanczos(LinearOperator::dense(A), b, k, ReorthMode::Full);
  REQUIRE(L.T.betas.minCoeff() > 1e-6);
  CHECK((S.alphas - L.T.alphas).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((S.betas - L.T.betas).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("orthogonal transform invariance") {
  std::mt19937_64 rng(13);
  const Matrix A = ts::random_spd(40, 20.0, rng);
  const Vector b = ts::gaussian_vector(40, rng);
  const Matrix V = ts::orthogonal(40, rng);
  const Matrix B = V * A * V.transpose();
  const KrylovDecomposition x = lanczos(LinearOperator::dense(A), b, 15, ReorthMode::Full);
  const KrylovDecomposition y = lanczos(LinearOperator::dense(0.5 * (B + B.transpose())), V * b, 15, ReorthMode::Full);
  CHECK((x.T.alphas - y.T.alphas).cwiseAbs().maxCoeff() <= 1e-10 * A.norm());
  CHECK((x.T.betas - y.T.betas).cwiseAbs().maxCoeff() <= 1e-10 * A.norm());
}

TEST_CASE("krylov grade") {
  CHECK(krylov_grade(LinearOperator::identity(4), vec({1, 2, 3, 4})) == 1);
  CHECK(krylov_grade(LinearOperator::diagonal(vec({1, 2, 3})), vec({1, -1, 2})) == 3);
  CHECK(krylov_grade(LinearOperator::diagonal(vec({1, 1, 2})), Vector::Ones(3) / std::sqrt(3.0)) == 2);
}

TEST_CASE("basis combination order") {
  std::vector<Vector> Q = {vec({1, 0}), vec({0, 1}), vec({1, 1})};
  const Vector c = vec({2, 3, 4});
  CHECK((basis_combination(Q, c, 0.5) - vec({3, 3.5})).norm() == 0.0);
  CVector cc(2);
  cc << Complex(1, 2), Complex(0, -1);
  const CVector r = basis_combination(Q, cc);
  CHECK(r(0) == Complex(1, 2));
  CHECK(r(1) == Complex(0, -1));
}

TEST_CASE("block lanczos") {
  std::mt19937_64 rng(31);
  const Matrix A = ts::random_spd(60, 100.0, rng);
  const LinearOperator op = LinearOperator::dense(A);

  SUBCASE("width one reduces to lanczos") {
    const Vector b = ts::gaussian_vector(60, rng);
    const BlockKrylovDecomposition blk = block_lanczos(op, b, 12, ReorthMode::Full);
    const KrylovDecomposition lan = lanczos(op, b, 12, ReorthMode::Full);
    REQUIRE(blk.steps() == 12);
    for (Index n = 0; n < 12; ++n) CHECK(std::abs(blk.A_blocks[n](0, 0) - lan.T.alphas(n)) <= 1e-14 * A.norm());
    for (Index n = 0; n + 1 < 12; ++n)
      CHECK(std::abs(std::abs(blk.B_blocks[n](0, 0)) - lan.T.betas(n)) <= 1e-14 * A.norm());
  }

  SUBCASE("orthogonality and banded relation") {
    const Matrix B = ts::gaussian_matrix(60, 3, rng);
    const BlockKrylovDecomposition blk = block_lanczos(op, B, 8, ReorthMode::Full);
    CHECK(orthogonality_loss(blk.Q) <= 1e-8);
    CHECK((blk.Q.leftCols(3) * blk.initial_R - B).cwiseAbs().maxCoeff() <= 1e-10 * B.norm());
    Matrix R = A * blk.Q - blk.Q * blk.T();
    const Index last = blk.offset(blk.steps() - 1);
    const Index w = blk.block_widths.back();
    R.middleCols(last, w) -= blk.next_block * blk.B_blocks.back();
    CHECK(R.cwiseAbs().maxCoeff() <= 1e-8 * A.norm());
    for (std::size_t i = 1; i < blk.block_widths.size(); ++i) CHECK(blk.block_widths[i] <= blk.block_widths[i - 1]);
  }

  SUBCASE("invariant subspace terminates after one block") {
    Vector lam = Vector::LinSpaced(10, 1, 10);
    const Matrix V = ts::orthogonal(10, rng);
    const Matrix D = V * lam.asDiagonal() * V.transpose();
    const BlockKrylovDecomposition blk =
        block_lanczos(LinearOperator::dense(0.5 * (D + D.transpose())), V.leftCols(2), 4, ReorthMode::Full);
    CHECK(blk.steps() == 1);
    CHECK(blk.termination.kind == Termination::Kind::Breakdown);
  }

  SUBCASE("random start block reaches full Krylov rank") {
    const Matrix B = ts::gaussian_matrix(4, 2, rng);
    const BlockKrylovDecomposition blk =
        block_lanczos(LinearOperator::diagonal(vec({1, 1, 2, 2})), B, 2, ReorthMode::Full);
    CHECK(blk.Q.cols() == 4);
    const Matrix K = ts::krylov_matrix(vec({1, 1, 2, 2}).asDiagonal(), B, 2);
    Eigen::JacobiSVD<Matrix> svd(K);
    CHECK(svd.singularValues().minCoeff() > 1e-10);
  }

  SUBCASE("deflation drops a dependent column") {
    Matrix B = ts::gaussian_matrix(60, 3, rng);
    B.col(2) = B.col(0) + 2.0 * B.col(1);
    const BlockKrylovDecomposition blk = block_lanczos(op, B, 4, ReorthMode::Full);
    CHECK(blk.block_widths[0] == 2);
    CHECK(orthogonality_loss(blk.Q) <= 1e-8);
  }

  SUBCASE("block basis lies in the larger single-start Krylov space") {
    // Columns of the start block are taken from K_3(A, w); then the block
    // space after t steps must sit inside K_{2+t}(A, w).
    const Vector w = ts::gaussian_vector(60, rng);
    const Matrix K3 = ts::krylov_basis(A, w, 3);
    const Matrix Qs = K3 * ts::gaussian_matrix(3, 2, rng);
    const Index t = 3;
    const BlockKrylovDecomposition blk = block_lanczos(op, Qs, t, ReorthMode::Full);
    const Matrix big = ts::krylov_basis(A, w, 2 + t);
    const Matrix resid = blk.Q - big * (big.transpose() * blk.Q);
    CHECK(resid.cwiseAbs().maxCoeff() <= 1e-8);
  }

  CHECK_THROWS_AS(block_lanczos(op, Matrix::Zero(60, 2), 3, ReorthMode::Full), ZeroStartBlock);
}
