#pragma once

#include "unmixio/core.hpp"

#include <cassert>
#include <vector>

namespace unmixio {

struct ProcrustesOptions {
  // Convergence is declared when the largest diagonal update is at most
  // tolerance * max|diagonal|, i.e. the tolerance is relative to scale.
  double tolerance = 1e-10;
  int max_iterations = 1000;
};

// Factorization A ~ basis * diag(scale): orthonormal columns in basis,
// nonnegative entries in scale, minimizing the squared Frobenius misfit.
struct OrthogonalFactorization {
  Matrix basis;    // N x p, basis^T basis = I
  Vector scale;    // p, entries >= 0 after the final sign pass
  int iterations = 0;
  double objective = 0.0;  // ||A - basis * diag(scale)||_F^2 at exit
  bool converged = false;
};

inline double procrustes_objective(const Matrix& a,
                                   const OrthogonalFactorization& f) {
  if (f.basis.rows() != a.rows() || f.basis.cols() != a.cols() ||
      f.scale.size() != a.cols())
    throw InvalidArgument("factorization shape does not match the matrix");
  return (a - f.basis * f.scale.asDiagonal()).squaredNorm();
}

// Alternating minimization for the orthogonal-but-not-orthonormal Procrustes
// problem: with D fixed, the best orthonormal V is the polar factor of A D
// (via thin SVD); with V fixed, the best diagonal is d_j = v_j . a_j. Each
// half-step weakly decreases the misfit, so the objective is nonincreasing.
inline OrthogonalFactorization orthogonal_procrustes(
    const Matrix& a, const ProcrustesOptions& options = {},
    std::vector<double>* objective_trace = nullptr) {
  const Index n = a.rows();
  const Index p = a.cols();
  if (p < 1 || n < p)
    throw InvalidArgument("need at least as many rows as columns, got " +
                          std::to_string(n) + " x " + std::to_string(p));
  if (!a.allFinite())
    throw InvalidArgument("input contains non-finite values");
  if (!(options.tolerance > 0.0) || options.max_iterations < 1)
    throw InvalidArgument("tolerance must be positive and the iteration cap "
                          "at least 1");
  {
    Eigen::ColPivHouseholderQR<Matrix> qr(a);
    if (qr.rank() < p)
      throw NumericError("input is rank deficient (rank " +
                         std::to_string(qr.rank()) + " of " +
                         std::to_string(p) +
                         "); the factorization is not unique");
  }

  OrthogonalFactorization result;
  Vector d = Vector::Ones(p);
  Matrix v;
  double previous_objective = 0.0;
  double delta = 0.0;
  for (int iteration = 1; iteration <= options.max_iterations; ++iteration) {
    Eigen::BDCSVD<Matrix> svd(a * d.asDiagonal(),
                              Eigen::ComputeThinU | Eigen::ComputeThinV);
    v = svd.matrixU() * svd.matrixV().transpose();
    const Vector d_next = (v.cwiseProduct(a)).colwise().sum().transpose();
    delta = (d_next - d).cwiseAbs().maxCoeff();
    d = d_next;
    result.iterations = iteration;
    const double objective = (a - v * d.asDiagonal()).squaredNorm();
    if (objective_trace) objective_trace->push_back(objective);
    assert(iteration == 1 ||
           objective <= previous_objective +
                            1e-9 * (1.0 + std::abs(previous_objective)));
    previous_objective = objective;
    if (delta <= options.tolerance * d.cwiseAbs().maxCoeff()) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged)
    warn("orthogonal factorization stopped at the iteration cap (" +
         std::to_string(options.max_iterations) + "); last diagonal update " +
         format_value(delta));

  // Sign convention: negative diagonal entries flip together with their
  // basis column, which leaves basis * diag(scale) unchanged.
  for (Index j = 0; j < p; ++j) {
    if (d(j) < 0.0) {
      d(j) = -d(j);
      v.col(j) = -v.col(j);
    }
  }
  result.basis = std::move(v);
  result.scale = std::move(d);
  result.objective = (a - result.basis * result.scale.asDiagonal()).squaredNorm();
  return result;
}

}  // namespace unmixio
