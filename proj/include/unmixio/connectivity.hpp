#pragma once

#include "unmixio/core.hpp"
#include "unmixio/var_model.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <complex>
#include <string>
#include <vector>

namespace unmixio {

inline CorrelationMatrix lag_zero_correlation(const TimeSeriesMatrix& x) {
  const Index n = x.samples();
  const Index p = x.channels();
  if (n < 2)
    throw InvalidArgument("need at least 2 samples for a correlation");
  Matrix centered = x.data.rowwise() - x.data.colwise().mean();
  Vector norms(p);
  for (Index c = 0; c < p; ++c) {
    norms(c) = centered.col(c).norm();
    if (norms(c) == 0.0)
      throw InvalidArgument("channel " + std::to_string(c + 1) +
                            " has zero variance");
  }
  Matrix corr = (centered.transpose() * centered).eval();
  corr.array() /= (norms * norms.transpose()).array();
  return CorrelationMatrix::from_raw(std::move(corr));
}

// One frequency-resolved pairwise measure: values[f](i, j) quantifies the
// j -> i direction at frequencies_hz[f] (symmetric measures simply store a
// symmetric matrix).
struct SpectralConnectivity {
  std::string kind;
  std::vector<double> frequencies_hz;
  std::vector<Matrix> values;

  Index channels() const { return values.empty() ? 0 : values[0].rows(); }
};

struct FrequencyRange {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

namespace detail {

inline void fft_column(Eigen::FFT<double>& fft, const Vector& column,
                       ComplexVector& out) {
  std::vector<double> in(column.data(), column.data() + column.size());
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, in);
  out = Eigen::Map<ComplexVector>(spectrum.data(),
                                  static_cast<Index>(spectrum.size()));
}

}  // namespace detail

// Magnitude-squared coherence from epoch-averaged cross-spectra with a plain
// rectangular window: coh2(i, j) = |mean_e S_ij|^2 / (mean_e S_ii mean_e
// S_jj). Averaging over epochs is what pulls coherence of incoherent pairs
// below 1, so a single epoch is rejected rather than returning all ones.
inline SpectralConnectivity coherence_squared(const EpochedSeries& e,
                                              FrequencyRange range) {
  const Index len = e.epoch_length;
  const Index p = e.channels();
  if (e.epochs < 2)
    throw InvalidArgument("coherence needs at least 2 epochs");
  if (len < 4)
    throw InvalidArgument("epoch length must be at least 4");
  if (!(e.sampling_rate > 0.0))
    throw InvalidArgument("sampling rate must be positive");
  if (!(range.lo_hz <= range.hi_hz))
    throw InvalidArgument("frequency range is empty");
  const double df = e.sampling_rate / static_cast<double>(len);
  std::vector<Index> bins;
  std::vector<double> freqs;
  for (Index k = 1; k <= len / 2; ++k) {
    const double f = df * static_cast<double>(k);
    if (f >= range.lo_hz - 1e-9 && f <= range.hi_hz + 1e-9) {
      bins.push_back(k);
      freqs.push_back(f);
    }
  }
  if (bins.empty())
    throw InvalidArgument("no frequency bins fall inside the requested range");

  std::vector<ComplexMatrix> cross(bins.size(), ComplexMatrix::Zero(p, p));
  Eigen::FFT<double> fft;
  ComplexMatrix spectra(len, p);
  ComplexVector column;
  for (Index ep = 0; ep < e.epochs; ++ep) {
    for (Index c = 0; c < p; ++c) {
      detail::fft_column(fft, e.epoch(ep).col(c), column);
      spectra.col(c) = column;
    }
    for (std::size_t b = 0; b < bins.size(); ++b) {
      const Eigen::RowVectorXcd row = spectra.row(bins[b]);
      cross[b] += row.transpose() * row.conjugate();
    }
  }

  SpectralConnectivity result;
  result.kind = "coherence_squared";
  result.frequencies_hz = std::move(freqs);
  result.values.reserve(bins.size());
  for (std::size_t b = 0; b < bins.size(); ++b) {
    Matrix c2(p, p);
    for (Index i = 0; i < p; ++i) {
      for (Index j = 0; j < p; ++j) {
        const double denom = cross[b](i, i).real() * cross[b](j, j).real();
        if (!(denom > 0.0))
          throw NumericError("zero spectral power in channel " +
                             std::to_string(i + 1) + " or " +
                             std::to_string(j + 1) + " at " +
                             format_value(result.frequencies_hz[b]) + " Hz");
        c2(i, j) = std::norm(cross[b](i, j)) / denom;
      }
      c2(i, i) = 1.0;
    }
    c2 = ((c2 + c2.transpose()) / 2.0).cwiseMax(0.0).cwiseMin(1.0);
    result.values.push_back(std::move(c2));
  }
  return result;
}

// Directed spectral measure of a fitted VAR. With Abar(f) the transfer
// factor and P the inverse innovation covariance,
//   icoh_{i<-j}(f) = P_ii |Abar_ij|^2 / (P_ii |Abar_ij|^2 + P_jj |Abar_jj|^2)
// stored at values[f](i, j); the diagonal is left at zero because self-flow
// is not defined for this measure.
inline SpectralConnectivity icoh(const VarModel& model,
                                 const std::vector<double>& freqs_hz,
                                 double sampling_rate) {
  const Index p = model.innovation_covariance.rows();
  if (p < 2)
    throw InvalidArgument("need at least 2 channels for a directed measure");
  Eigen::LLT<Matrix> llt(model.innovation_covariance);
  if (llt.info() != Eigen::Success)
    throw NumericError("innovation covariance is singular; cannot form its "
                       "inverse");
  const Matrix precision = llt.solve(Matrix::Identity(p, p));
  const std::vector<ComplexMatrix> transfer =
      var_transfer(model, freqs_hz, sampling_rate);
  SpectralConnectivity result;
  result.kind = "icoh";
  result.frequencies_hz = freqs_hz;
  result.values.reserve(freqs_hz.size());
  for (const ComplexMatrix& abar : transfer) {
    Matrix v = Matrix::Zero(p, p);
    for (Index i = 0; i < p; ++i) {
      for (Index j = 0; j < p; ++j) {
        if (i == j) continue;
        const double num = precision(i, i) * std::norm(abar(i, j));
        const double den = num + precision(j, j) * std::norm(abar(j, j));
        if (!(den > 0.0))
          throw NumericError("degenerate transfer factor at column " +
                             std::to_string(j + 1));
        v(i, j) = num / den;
      }
    }
    result.values.push_back(std::move(v));
  }
  return result;
}

inline std::vector<double> default_icoh_grid(double sampling_rate = 256.0) {
  std::vector<double> freqs;
  for (double f = 1.0; f < sampling_rate / 2.0; f += 1.0)
    freqs.push_back(f);
  return freqs;
}

// Analytic-signal amplitude via the frequency-domain Hilbert transform: keep
// DC and (for even length) the Nyquist bin as they are, double the positive
// frequencies, zero the negative ones, transform back and take magnitudes.
inline TimeSeriesMatrix hilbert_envelope(const TimeSeriesMatrix& x) {
  const Index n = x.samples();
  if (n < 4)
    throw InvalidArgument("need at least 4 samples for an envelope");
  Matrix env(n, x.channels());
  Eigen::FFT<double> fft;
  for (Index c = 0; c < x.channels(); ++c) {
    std::vector<double> in(x.data.col(c).data(), x.data.col(c).data() + n);
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, in);
    const Index half = n / 2;
    for (Index k = 1; k < half; ++k) spectrum[static_cast<std::size_t>(k)] *= 2.0;
    if (n % 2 == 1) spectrum[static_cast<std::size_t>(half)] *= 2.0;
    for (Index k = half + 1; k < n; ++k)
      spectrum[static_cast<std::size_t>(k)] = 0.0;
    std::vector<std::complex<double>> analytic;
    fft.inv(analytic, spectrum);
    for (Index t = 0; t < n; ++t)
      env(t, c) = std::abs(analytic[static_cast<std::size_t>(t)]);
  }
  return {std::move(env), x.sampling_rate};
}

// Correlation of Hilbert envelopes with 2% of the samples trimmed from each
// end, where the transform's circular wrap distorts the amplitude.
inline CorrelationMatrix envelope_correlation(const TimeSeriesMatrix& x) {
  TimeSeriesMatrix env = hilbert_envelope(x);
  const Index trim = static_cast<Index>(
      std::floor(0.02 * static_cast<double>(env.samples())));
  const Index kept = env.samples() - 2 * trim;
  if (kept < 2)
    throw InvalidArgument("too few samples left after edge trimming");
  return lag_zero_correlation(
      {env.data.middleRows(trim, kept), env.sampling_rate});
}

// Entrywise maximum across the frequency axis.
inline Matrix max_over_frequency(const SpectralConnectivity& s) {
  if (s.values.empty())
    throw InvalidArgument("connectivity has no frequencies");
  Matrix m = s.values[0];
  for (std::size_t f = 1; f < s.values.size(); ++f)
    m = m.cwiseMax(s.values[f]);
  return m;
}

// Entrywise mean over frequencies lying in [lo_hz, hi_hz].
inline Matrix band_mean(const SpectralConnectivity& s, double lo_hz,
                        double hi_hz) {
  Matrix sum;
  Index count = 0;
  for (std::size_t f = 0; f < s.values.size(); ++f) {
    if (s.frequencies_hz[f] < lo_hz - 1e-9 ||
        s.frequencies_hz[f] > hi_hz + 1e-9)
      continue;
    if (count == 0)
      sum = s.values[f];
    else
      sum += s.values[f];
    ++count;
  }
  if (count == 0)
    throw InvalidArgument("no frequencies inside the requested band");
  return sum / static_cast<double>(count);
}

// Largest absolute difference over all entries and frequencies; the grids
// must match exactly.
inline double linf_distance(const SpectralConnectivity& a,
                            const SpectralConnectivity& b) {
  if (a.frequencies_hz != b.frequencies_hz || a.values.size() != b.values.size())
    throw InvalidArgument("connectivity grids do not match");
  double m = 0.0;
  for (std::size_t f = 0; f < a.values.size(); ++f) {
    if (a.values[f].rows() != b.values[f].rows() ||
        a.values[f].cols() != b.values[f].cols())
      throw InvalidArgument("connectivity shapes do not match");
    m = std::max(m, (a.values[f] - b.values[f]).cwiseAbs().maxCoeff());
  }
  return m;
}

}  // namespace unmixio
