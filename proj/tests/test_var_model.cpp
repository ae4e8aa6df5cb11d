#include "unmixio/var_model.hpp"

#include "unmixio/generators.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace unmixio;

TEST_CASE("white noise fits to near-zero coefficients") {
  RandomStream rng({31, 0});
  const TimeSeriesMatrix x{testutil::random_matrix(rng, 10000, 3), 0.0};
  const VarFit fit = fit_var(x, 1);
  CHECK(fit.model.coefficients[0].cwiseAbs().maxCoeff() < 0.05);
  CHECK(fit.model.n_effective == 9999);
  CHECK(fit.innovations.rows() == 9999);
}

// Constructs an AR(1) realization whose driving noise is numerically
// orthogonal to the realized lagged regressor, so least squares recovers the
// coefficient essentially exactly and the residuals equal the noise.
TEST_CASE("scalar AR(1) with orthogonalized noise is recovered exactly") {
  const Index n = 4000;
  const double a = 0.5;
  RandomStream rng({32, 0});
  Vector e(n);
  for (Index t = 0; t < n; ++t) e(t) = rng.gaussian();
  Vector x(n);
  for (int pass = 0; pass < 200; ++pass) {
    x(0) = e(0);
    for (Index t = 1; t < n; ++t) x(t) = a * x(t - 1) + e(t);
    const auto lag = x.head(n - 1);
    const double beta = lag.dot(e.tail(n - 1)) / lag.dot(lag);
    e.tail(n - 1) -= beta * lag;
    if (std::abs(beta) < 1e-15) break;
  }
  x(0) = e(0);
  for (Index t = 1; t < n; ++t) x(t) = a * x(t - 1) + e(t);

  const VarFit fit = fit_var({x, 0.0}, 1);
  CHECK_THAT(fit.model.coefficients[0](0, 0),
             Catch::Matchers::WithinAbs(a, 0.02));
  CHECK(testutil::max_abs_diff(fit.innovations.values, e.tail(n - 1)) < 1e-6);
}

TEST_CASE("fit_var validates its inputs") {
  RandomStream rng({33, 0});
  const TimeSeriesMatrix x{testutil::random_matrix(rng, 50, 3), 0.0};
  CHECK_THROWS_AS(fit_var(x, 0), InvalidArgument);
  CHECK_THROWS_AS(fit_var(x, 20), InvalidArgument);

  // duplicated channel makes the lagged regressors rank deficient
  Matrix dup(200, 2);
  dup.col(0) = testutil::random_matrix(rng, 200, 1);
  dup.col(1) = dup.col(0);
  CHECK_THROWS_AS(fit_var({dup, 0.0}, 2), NumericError);
}

TEST_CASE("demeaning removes a constant offset") {
  const TimeSeriesMatrix x = gen_var5(4000, {34, 0});
  TimeSeriesMatrix shifted = x;
  shifted.data.array() += 100.0;
  const VarFit base = fit_var(x, 2, true);
  const VarFit shift = fit_var(shifted, 2, true);
  CHECK(testutil::max_abs_diff(base.model.coefficients[0],
                               shift.model.coefficients[0]) < 1e-8);
}

TEST_CASE("innovation covariance matches simple constructions") {
  const Index rows = 100;
  Matrix e = Matrix::Zero(rows, 2);
  // orthogonal columns of norm sqrt(rows)
  for (Index t = 0; t < rows; ++t) {
    e(t, 0) = (t % 2 == 0) ? 1.0 : -1.0;
    e(t, 1) = (t % 4 < 2) ? 1.0 : -1.0;
  }
  CHECK(testutil::max_abs_diff(innovation_covariance({e, 1}),
                               Matrix::Identity(2, 2)) < 1e-12);

  RandomStream rng({35, 0});
  Matrix c = testutil::random_matrix(rng, 50, 1);
  Matrix dup(50, 2);
  dup.col(0) = c;
  dup.col(1) = c;
  const Matrix s = innovation_covariance({dup, 1});
  CHECK(std::abs(s(0, 0) - s(0, 1)) < 1e-12);
  CHECK(std::abs(s(0, 0) - s(1, 1)) < 1e-12);

  const Matrix big = testutil::random_matrix(rng, 1000, 3);
  Matrix brute = Matrix::Zero(3, 3);
  for (Index t = 0; t < big.rows(); ++t)
    brute += big.row(t).transpose() * big.row(t);
  brute /= static_cast<double>(big.rows());
  CHECK(testutil::max_abs_diff(innovation_covariance({big, 1}), brute) <
        1e-12);

  CHECK_THROWS_AS(innovation_covariance({Matrix(0, 2), 1}), InvalidArgument);
}

TEST_CASE("order selection picks the benchmark's true order") {
  const TimeSeriesMatrix x = gen_var5(25600, {kDefaultSeed, 0});
  const OrderSelection sel = select_order_aic(x, 10);
  CHECK(sel.best_order == 2);
  REQUIRE(sel.scores.size() == 10);
  CHECK(sel.scores[1] <= sel.scores[0]);

  const std::vector<double> reference = oracle::aic_scores(x.data, 10);
  for (std::size_t i = 0; i < reference.size(); ++i)
    CHECK_THAT(sel.scores[i], Catch::Matchers::WithinRel(reference[i], 1e-8));
}

TEST_CASE("order selection on oscillator data decreases monotonically") {
  const EpochedSeries osc =
      gen_oscillators(OscillatorSpec::standard(), {kDefaultSeed, 0});
  const OrderSelection sel = select_order_aic(osc.flatten(), 20);
  for (std::size_t i = 1; i < sel.scores.size(); ++i)
    CHECK(sel.scores[i] < sel.scores[i - 1]);
  CHECK(sel.best_order == 20);
}

TEST_CASE("order selection on white noise stays at order 1") {
  RandomStream rng({36, 0});
  const TimeSeriesMatrix x{testutil::random_matrix(rng, 20000, 3), 0.0};
  const OrderSelection sel = select_order_aic(x, 5);
  CHECK(sel.best_order == 1);
  const std::vector<double> reference = oracle::aic_scores(x.data, 5);
  for (std::size_t i = 0; i < reference.size(); ++i)
    CHECK_THAT(sel.scores[i], Catch::Matchers::WithinRel(reference[i], 1e-8));
  // extra lags buy no fit, so the complexity penalty makes every
  // higher-order score strictly worse
  for (std::size_t i = 1; i < sel.scores.size(); ++i)
    CHECK(sel.scores[i] > sel.scores[0]);
}

TEST_CASE("transfer factor matches hand evaluations") {
  VarModel zero;
  zero.order = 1;
  zero.coefficients = {Matrix::Zero(2, 2)};
  zero.innovation_covariance = Matrix::Identity(2, 2);
  for (const ComplexMatrix& m : var_transfer(zero, {1.0, 30.0, 128.0}, 256.0))
    CHECK((m - ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

  VarModel scalar;
  scalar.order = 1;
  scalar.coefficients = {Matrix::Constant(1, 1, 0.5)};
  scalar.innovation_covariance = Matrix::Identity(1, 1);
  // near-zero frequency the factor approaches 1 - 0.5
  const ComplexMatrix low = var_transfer(scalar, {1e-6}, 256.0)[0];
  CHECK(std::abs(low(0, 0) - std::complex<double>(0.5, 0.0)) < 1e-5);
  // quarter Nyquist: exp(-i pi/2) = -i, so the factor is 1 + 0.5i
  const ComplexMatrix quarter = var_transfer(scalar, {64.0}, 256.0)[0];
  CHECK(std::abs(quarter(0, 0) - std::complex<double>(1.0, 0.5)) < 1e-12);
  CHECK_THAT(std::norm(quarter(0, 0)),
             Catch::Matchers::WithinAbs(1.25, 1e-12));

  CHECK_THROWS_AS(var_transfer(scalar, {0.0}, 256.0), InvalidArgument);
  CHECK_THROWS_AS(var_transfer(scalar, {129.0}, 256.0), InvalidArgument);
  CHECK_THROWS_AS(var_transfer(scalar, {10.0}, 0.0), InvalidArgument);
}

TEST_CASE("random stable processes are recovered by refitting") {
  RandomStream rng({37, 0});
  for (int trial = 0; trial < 3; ++trial) {
    const Index p = 2 + trial;
    Matrix a1 = testutil::random_matrix(rng, p, p) * (0.35 / std::sqrt(p));
    Matrix a2 = testutil::random_matrix(rng, p, p) * (0.15 / std::sqrt(p));
    while (var_spectral_radius({a1, a2}) >= 0.95) {
      a1 *= 0.9;
      a2 *= 0.9;
    }
    const TimeSeriesMatrix x = simulate_var(
        {a1, a2}, Vector::Ones(p), 20000, 500, {std::uint64_t(1000 + trial), 0});
    const VarFit fit = fit_var(x, 2);
    CHECK(testutil::max_abs_diff(fit.model.coefficients[0], a1) < 0.05);
    CHECK(testutil::max_abs_diff(fit.model.coefficients[1], a2) < 0.05);
  }
}

TEST_CASE("residuals of a correctly specified fit are white") {
  const TimeSeriesMatrix x = gen_var5(25600, {kDefaultSeed, 0});
  const VarFit fit = fit_var(x, 2);
  const Matrix& e = fit.innovations.values;
  const Index rows = e.rows();
  const double bound = 3.0 / std::sqrt(static_cast<double>(rows));
  Matrix centered = e.rowwise() - e.colwise().mean();
  for (Index c = 0; c < e.cols(); ++c) {
    const double denom = centered.col(c).squaredNorm();
    for (Index lag = 1; lag <= 5; ++lag) {
      const double num = centered.col(c)
                             .head(rows - lag)
                             .dot(centered.col(c).tail(rows - lag));
      CHECK(std::abs(num / denom) < bound);
    }
  }
}
