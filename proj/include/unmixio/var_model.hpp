#pragma once

#include "unmixio/core.hpp"

#include <complex>
#include <vector>

namespace unmixio {

// Fitted vector autoregression y_t = sum_k A_k y_{t-k} + e_t (no intercept).
struct VarModel {
  int order = 0;
  std::vector<Matrix> coefficients;  // coefficients[k-1] is the lag-k matrix
  Matrix innovation_covariance;      // symmetric positive semidefinite
  Index n_effective = 0;             // residual rows behind the estimates
};

// One-step-ahead residuals of a fit; row r is the residual at time sample
// order + r of the input series (0-based).
struct InnovationsMatrix {
  Matrix values;
  int order = 0;

  Index rows() const { return values.rows(); }
  Index channels() const { return values.cols(); }
};

struct VarFit {
  VarModel model;
  InnovationsMatrix innovations;
};

inline Matrix innovation_covariance(const InnovationsMatrix& e) {
  if (e.rows() < 1)
    throw InvalidArgument("innovations matrix has no rows");
  Matrix s = (e.values.transpose() * e.values) /
             static_cast<double>(e.rows());
  return ((s + s.transpose()) / 2.0).eval();
}

namespace detail {

struct WindowFit {
  std::vector<Matrix> coefficients;
  Matrix residuals;  // (n - first_target) x p
};

// OLS over target rows t = first_target .. n-1 against the q preceding
// samples of each target. first_target >= order so every regressor exists;
// keeping it fixed while order varies puts competing orders on the same
// sample window.
inline WindowFit fit_var_window(const Matrix& y, int order,
                                Index first_target) {
  const Index n = y.rows();
  const Index p = y.cols();
  const Index rows = n - first_target;
  const Index cols = static_cast<Index>(order) * p;
  Matrix regressors(rows, cols);
  for (int k = 1; k <= order; ++k)
    regressors.middleCols((k - 1) * p, p) =
        y.middleRows(first_target - k, rows);
  Eigen::ColPivHouseholderQR<Matrix> qr(regressors);
  if (qr.rank() < cols)
    throw NumericError("lagged regressor matrix is rank deficient (rank " +
                       std::to_string(qr.rank()) + " of " +
                       std::to_string(cols) +
                       " columns); residuals would be ill-defined");
  const Matrix targets = y.bottomRows(rows);
  const Matrix theta = qr.solve(targets);  // cols x p, stacked by lag
  WindowFit fit;
  fit.coefficients.reserve(static_cast<std::size_t>(order));
  for (int k = 1; k <= order; ++k)
    fit.coefficients.push_back(
        theta.middleRows((k - 1) * p, p).transpose());
  fit.residuals = targets - regressors * theta;
  return fit;
}

}  // namespace detail

// Least-squares VAR fit. Optionally removes per-channel means first; the
// default leaves the data untouched because the intended inputs are
// zero-mean by construction.
inline VarFit fit_var(const TimeSeriesMatrix& y, int order,
                      bool demean = false) {
  const Index n = y.samples();
  const Index p = y.channels();
  if (order < 1)
    throw InvalidArgument("model order must be >= 1");
  if (p < 1)
    throw InvalidArgument("series has no channels");
  if (n - order <= static_cast<Index>(order) * p)
    throw InvalidArgument("too few samples for order " +
                          std::to_string(order) + ": need more than " +
                          std::to_string(order + order * p) + ", got " +
                          std::to_string(n));
  Matrix data = y.data;
  if (demean)
    data.rowwise() -= data.colwise().mean();
  detail::WindowFit w = detail::fit_var_window(data, order, order);
  VarFit fit;
  fit.model.order = order;
  fit.model.coefficients = std::move(w.coefficients);
  fit.model.n_effective = n - order;
  fit.innovations = {std::move(w.residuals), order};
  fit.model.innovation_covariance = innovation_covariance(fit.innovations);
  return fit;
}

struct OrderSelection {
  int best_order = 0;
  std::vector<double> scores;  // scores[q-1] is the criterion value at q
};

namespace detail {

inline double log_det_spd(const Matrix& s) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success)
    throw NumericError("innovation covariance is not positive definite; "
                       "cannot score this order");
  double log_det = 0.0;
  for (Index i = 0; i < s.rows(); ++i)
    log_det += std::log(llt.matrixL()(i, i));
  return 2.0 * log_det;
}

}  // namespace detail

// Scores orders 1..max_order with n_eff * log det(S_q) + 2 q p^2 where S_q
// is the residual covariance of the order-q fit. All candidates predict the
// same target rows (those after max_order) so scores are comparable; ties
// resolve to the smaller order.
inline OrderSelection select_order_aic(const TimeSeriesMatrix& y,
                                       int max_order, bool demean = false) {
  const Index n = y.samples();
  const Index p = y.channels();
  if (max_order < 1)
    throw InvalidArgument("maximum order must be >= 1");
  if (n - max_order <= static_cast<Index>(max_order) * p)
    throw InvalidArgument("too few samples to score order " +
                          std::to_string(max_order));
  Matrix data = y.data;
  if (demean)
    data.rowwise() -= data.colwise().mean();
  const Index rows = n - max_order;
  OrderSelection sel;
  sel.scores.reserve(static_cast<std::size_t>(max_order));
  double best = 0.0;
  for (int q = 1; q <= max_order; ++q) {
    detail::WindowFit w = detail::fit_var_window(data, q, max_order);
    Matrix s = (w.residuals.transpose() * w.residuals) /
               static_cast<double>(rows);
    s = ((s + s.transpose()) / 2.0).eval();
    const double score = static_cast<double>(rows) * detail::log_det_spd(s) +
                         2.0 * q * static_cast<double>(p) *
                             static_cast<double>(p);
    sel.scores.push_back(score);
    if (q == 1 || score < best) {
      best = score;
      sel.best_order = q;
    }
  }
  return sel;
}

// Spectral transfer factor Abar(f) = I - sum_k A_k exp(-i 2 pi f k / rate)
// for each requested frequency.
inline std::vector<ComplexMatrix> var_transfer(
    const VarModel& model, const std::vector<double>& freqs_hz,
    double sampling_rate) {
  if (!(sampling_rate > 0.0))
    throw InvalidArgument("sampling rate must be positive");
  const Index p = model.innovation_covariance.rows() > 0
                      ? model.innovation_covariance.rows()
                      : (model.coefficients.empty()
                             ? 0
                             : model.coefficients[0].rows());
  if (p < 1 || model.coefficients.empty())
    throw InvalidArgument("model has no coefficients");
  std::vector<ComplexMatrix> out;
  out.reserve(freqs_hz.size());
  for (double f : freqs_hz) {
    if (!(f > 0.0) || f > sampling_rate / 2.0)
      throw InvalidArgument("frequency " + format_value(f) +
                            " Hz outside (0, rate/2]");
    ComplexMatrix abar = ComplexMatrix::Identity(p, p);
    for (std::size_t k = 0; k < model.coefficients.size(); ++k) {
      const double angle = -2.0 * kPi * f * static_cast<double>(k + 1) /
                           sampling_rate;
      abar -= model.coefficients[k] *
              std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out.push_back(std::move(abar));
  }
  return out;
}

}  // namespace unmixio
