#pragma once

// Independent reference implementations used to cross-check the library.
// They deliberately take different numerical routes (eigendecompositions and
// normal equations instead of SVD and QR) so shared bugs are unlikely.

#include "unmixio/core.hpp"

#include <Eigen/Eigenvalues>

#include <vector>

namespace oracle {

// Polar factor of b via the eigendecomposition of b^T b; no SVD involved.
inline unmixio::Matrix polar_factor(const unmixio::Matrix& b) {
  Eigen::SelfAdjointEigenSolver<unmixio::Matrix> eig(b.transpose() * b);
  const unmixio::Vector inv_sqrt =
      eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return b * eig.eigenvectors() * inv_sqrt.asDiagonal() *
         eig.eigenvectors().transpose();
}

struct Factorization {
  unmixio::Matrix v;
  unmixio::Vector d;
  double objective = 0.0;
  int iterations = 0;
};

// Same alternating scheme as the library (best orthonormal factor for fixed
// diagonal, then the diagonal of V^T A), but built on polar_factor and run to
// a much tighter tolerance so it can serve as the reference optimum.
inline Factorization orthogonal_factorization(const unmixio::Matrix& a,
                                              double tol = 1e-13,
                                              int max_iter = 10000) {
  using unmixio::Index;
  const Index p = a.cols();
  unmixio::Vector d = unmixio::Vector::Ones(p);
  unmixio::Matrix v;
  Factorization f;
  for (int it = 1; it <= max_iter; ++it) {
    v = polar_factor(a * d.asDiagonal());
    unmixio::Vector d_next(p);
    for (Index j = 0; j < p; ++j) d_next(j) = v.col(j).dot(a.col(j));
    const double delta = (d_next - d).cwiseAbs().maxCoeff();
    d = d_next;
    f.iterations = it;
    if (delta <= tol * d.cwiseAbs().maxCoeff()) break;
  }
  for (Index j = 0; j < p; ++j)
    if (d(j) < 0.0) {
      d(j) = -d(j);
      v.col(j) = -v.col(j);
    }
  f.v = v;
  f.d = d;
  f.objective = (a - f.v * f.d.asDiagonal()).squaredNorm();
  return f;
}

// Information-criterion scores computed from scratch: normal equations for
// each order over the shared window, determinant via LU.
inline std::vector<double> aic_scores(const unmixio::Matrix& y, int max_order) {
  using unmixio::Index;
  const Index n = y.rows();
  const Index p = y.cols();
  const Index rows = n - max_order;
  std::vector<double> scores;
  for (int q = 1; q <= max_order; ++q) {
    unmixio::Matrix z(rows, q * p);
    for (int k = 1; k <= q; ++k)
      z.middleCols((k - 1) * p, p) = y.middleRows(max_order - k, rows);
    const unmixio::Matrix targets = y.bottomRows(rows);
    const unmixio::Matrix theta =
        (z.transpose() * z).ldlt().solve(z.transpose() * targets);
    const unmixio::Matrix resid = targets - z * theta;
    const unmixio::Matrix s =
        (resid.transpose() * resid) / static_cast<double>(rows);
    const double det = Eigen::PartialPivLU<unmixio::Matrix>(s).determinant();
    scores.push_back(static_cast<double>(rows) * std::log(det) +
                     2.0 * q * static_cast<double>(p) * static_cast<double>(p));
  }
  return scores;
}

}  // namespace oracle
