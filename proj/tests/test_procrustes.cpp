#include "unmixio/procrustes.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

using namespace unmixio;

TEST_CASE("identity input is its own factorization") {
  const Matrix a = Matrix::Identity(3, 3);
  const OrthogonalFactorization f = orthogonal_procrustes(a);
  CHECK(testutil::max_abs_diff(f.basis, Matrix::Identity(3, 3)) < 1e-14);
  CHECK(testutil::max_abs_diff(f.scale, Vector::Ones(3)) < 1e-14);
  CHECK(f.objective < 1e-20);
  CHECK(f.converged);
}

TEST_CASE("orthogonal columns are a fixed point with column-norm scales") {
  Matrix a(4, 2);
  a << 3.0, 0.0,
       0.0, 0.0,
       0.0, 2.0,
       0.0, 0.0;
  const OrthogonalFactorization f = orthogonal_procrustes(a);
  CHECK(f.iterations <= 2);
  CHECK_THAT(f.scale(0), Catch::Matchers::WithinAbs(3.0, 1e-12));
  CHECK_THAT(f.scale(1), Catch::Matchers::WithinAbs(2.0, 1e-12));
  CHECK(f.objective < 1e-20);
  CHECK(testutil::max_abs_diff(f.basis * f.scale.asDiagonal(), a) < 1e-12);
}

TEST_CASE("objective matches its algebraic expansion") {
  RandomStream rng({50, 0});
  const Matrix a = testutil::random_matrix(rng, 40, 4);
  const OrthogonalFactorization f = orthogonal_procrustes(a);
  // ||A - V D||^2 = ||A||^2 - 2 tr(D V^T A) + sum d_j^2 when V^T V = I
  const double expansion = a.squaredNorm() -
                           2.0 * (f.scale.asDiagonal() * f.basis.transpose() *
                                  a).trace() +
                           f.scale.squaredNorm();
  CHECK_THAT(f.objective, Catch::Matchers::WithinAbs(expansion, 1e-9));
  CHECK_THAT(procrustes_objective(a, f),
             Catch::Matchers::WithinAbs(f.objective, 1e-12));

  OrthogonalFactorization wrong = f;
  wrong.basis = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(procrustes_objective(a, wrong), InvalidArgument);
}

TEST_CASE("objective scales quadratically with the input") {
  RandomStream rng({51, 0});
  const Matrix a = testutil::random_matrix(rng, 30, 3);
  const OrthogonalFactorization f1 = orthogonal_procrustes(a);
  const OrthogonalFactorization f2 = orthogonal_procrustes(2.0 * a);
  CHECK_THAT(f2.objective,
             Catch::Matchers::WithinRel(4.0 * f1.objective, 1e-6));
  CHECK(testutil::max_abs_diff(f2.scale, 2.0 * f1.scale) <
        1e-6 * f1.scale.maxCoeff());
}

TEST_CASE("random instances satisfy the factorization contract") {
  RandomStream rng({52, 0});
  for (int trial = 0; trial < 25; ++trial) {
    const Index p = 2 + static_cast<Index>(rng.uniform(0.0, 4.0));
    const Index n = p + static_cast<Index>(rng.uniform(0.0, 60.0));
    const Matrix a = testutil::random_matrix(rng, n, p);
    std::vector<double> trace;
    const OrthogonalFactorization f =
        orthogonal_procrustes(a, {}, &trace);
    INFO("trial " << trial << " size " << n << "x" << p);

    CHECK(f.converged);
    CHECK(testutil::max_abs_diff(f.basis.transpose() * f.basis,
                                 Matrix::Identity(p, p)) <= 1e-10);
    CHECK(f.scale.minCoeff() >= 0.0);
    for (std::size_t i = 1; i < trace.size(); ++i)
      CHECK(trace[i] <= trace[i - 1] + 1e-9 * (1.0 + trace[i - 1]));

    const oracle::Factorization ref = oracle::orthogonal_factorization(a);
    CHECK(testutil::max_abs_diff(f.basis, ref.v) <= 1e-9);
    CHECK(testutil::max_abs_diff(f.scale, ref.d) <= 1e-9);

    // each basis column points along its data column
    for (Index j = 0; j < p; ++j)
      CHECK(f.basis.col(j).dot(a.col(j)) > 0.0);

    const OrthogonalFactorization again = orthogonal_procrustes(a);
    CHECK(testutil::exactly_equal(again.basis, f.basis));
    CHECK(testutil::exactly_equal(Matrix(again.scale), Matrix(f.scale)));
  }
}

TEST_CASE("rank-deficient input is rejected") {
  RandomStream rng({53, 0});
  Matrix a(20, 3);
  a.col(0) = testutil::random_matrix(rng, 20, 1);
  a.col(1) = testutil::random_matrix(rng, 20, 1);
  a.col(2) = a.col(0) + a.col(1);
  CHECK_THROWS_AS(orthogonal_procrustes(a), NumericError);
}

TEST_CASE("invalid inputs are rejected") {
  RandomStream rng({54, 0});
  const Matrix wide = testutil::random_matrix(rng, 2, 3);
  CHECK_THROWS_AS(orthogonal_procrustes(wide), InvalidArgument);

  Matrix bad = testutil::random_matrix(rng, 5, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(orthogonal_procrustes(bad), InvalidArgument);

  const Matrix ok = testutil::random_matrix(rng, 5, 2);
  CHECK_THROWS_AS(orthogonal_procrustes(ok, {0.0, 100}), InvalidArgument);
  CHECK_THROWS_AS(orthogonal_procrustes(ok, {1e-10, 0}), InvalidArgument);
}

TEST_CASE("hitting the iteration cap warns and reports non-convergence") {
  RandomStream rng({55, 0});
  const Matrix a = testutil::random_matrix(rng, 50, 4);
  testutil::WarningCapture capture;
  const OrthogonalFactorization f = orthogonal_procrustes(a, {1e-16, 1});
  CHECK_FALSE(f.converged);
  CHECK(f.iterations == 1);
  REQUIRE(capture.messages().size() == 1);
  CHECK(capture.messages()[0].find("iteration cap") != std::string::npos);
  // the cap still yields a valid orthonormal basis
  CHECK(testutil::max_abs_diff(f.basis.transpose() * f.basis,
                               Matrix::Identity(4, 4)) < 1e-10);
}
