#pragma once

#include "unmixio/core.hpp"
#include "unmixio/procrustes.hpp"
#include "unmixio/var_model.hpp"

#include <limits>

namespace unmixio {

inline constexpr double kMaxMixingCondition = 1e12;

// Mixing-matrix estimate from innovations eta_t = M eps_t with the sample
// rows of eps factored as V diag(d). Row-major stacking gives
// eta = eps M^T, whose least-squares solution is M = eta^T V diag(d)^-1;
// exact in the noiseless case because V^T V = I.
inline Matrix estimate_mixing(const Matrix& orthogonalized,
                              const Matrix& mixed_innovations,
                              const Vector& scale) {
  const Index p = orthogonalized.cols();
  if (mixed_innovations.rows() != orthogonalized.rows() ||
      mixed_innovations.cols() != p || scale.size() != p)
    throw InvalidArgument("innovations and factorization shapes disagree");
  const double scale_max = scale.cwiseAbs().maxCoeff();
  for (Index j = 0; j < p; ++j)
    if (std::abs(scale(j)) <= 1e-14 * scale_max)
      throw NumericError("factorization scale entry " + std::to_string(j + 1) +
                         " is zero; the mixing estimate is undefined");
  const Vector inv_scale = scale.cwiseInverse();
  const Matrix basis = orthogonalized * inv_scale.asDiagonal();
  return mixed_innovations.transpose() * basis * inv_scale.asDiagonal();
}

// Applies the inverse mixing sample-wise: x_t = M^-1 y_t.
inline TimeSeriesMatrix unmix(const TimeSeriesMatrix& y, const Matrix& mixing) {
  const Index p = y.channels();
  if (mixing.rows() != p || mixing.cols() != p)
    throw InvalidArgument("mixing matrix must be " + std::to_string(p) + " x " +
                          std::to_string(p));
  Eigen::JacobiSVD<Matrix> svd(mixing);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(p - 1);
  if (!(smin > 0.0) || smax / smin > kMaxMixingCondition)
    throw NumericError("mixing matrix is singular or too ill-conditioned to "
                       "invert (condition " +
                       format_value(smin > 0.0 ? smax / smin
                                               : std::numeric_limits<double>::infinity()) +
                       ")");
  Eigen::PartialPivLU<Matrix> lu(mixing);
  return {lu.solve(y.data.transpose()).transpose(), y.sampling_rate};
}

// Full innovations-orthogonalization pass over one recording.
struct UnmixResult {
  VarModel model;                      // fit of the observed (mixed) series
  InnovationsMatrix mixed_innovations;
  OrthogonalFactorization factorization;
  Matrix orthogonalized_innovations;   // basis * diag(scale)
  Matrix mixing_estimate;
  TimeSeriesMatrix unmixed;
};

// Fits a VAR to the observed series, orthogonalizes its innovations, reads
// the mixing matrix off the factorization and inverts it on the raw samples.
// The VAR step absorbs all lagged structure, so whatever instantaneous
// dependence remains in the innovations is attributed to mixing.
inline UnmixResult innovations_orthogonalize(
    const TimeSeriesMatrix& y, int order,
    const ProcrustesOptions& options = {}) {
  UnmixResult result;
  VarFit fit = fit_var(y, order);
  result.model = std::move(fit.model);
  result.mixed_innovations = std::move(fit.innovations);
  result.factorization =
      orthogonal_procrustes(result.mixed_innovations.values, options);
  result.orthogonalized_innovations =
      result.factorization.basis * result.factorization.scale.asDiagonal();
  result.mixing_estimate =
      estimate_mixing(result.orthogonalized_innovations,
                      result.mixed_innovations.values,
                      result.factorization.scale);
  result.unmixed = unmix(y, result.mixing_estimate);
  return result;
}

// Signal-space orthogonalization: factorizes the raw samples themselves and
// keeps basis * diag(scale) as the corrected series. This removes every
// lag-zero correlation, including any the underlying dynamics put there.
struct LeakageCorrection {
  OrthogonalFactorization factorization;
  TimeSeriesMatrix corrected;
};

inline LeakageCorrection leakage_correct(const TimeSeriesMatrix& y,
                                         const ProcrustesOptions& options = {}) {
  if (y.samples() <= y.channels())
    throw InvalidArgument("need more samples than channels");
  LeakageCorrection lc;
  lc.factorization = orthogonal_procrustes(y.data, options);
  lc.corrected = {lc.factorization.basis * lc.factorization.scale.asDiagonal(),
                  y.sampling_rate};
  return lc;
}

}  // namespace unmixio
