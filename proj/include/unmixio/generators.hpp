#pragma once

#include "unmixio/core.hpp"

#include <vector>

namespace unmixio {

// Largest eigenvalue modulus of the companion matrix of a VAR coefficient
// set; the process is stable iff this is < 1.
inline double var_spectral_radius(const std::vector<Matrix>& coeffs) {
  if (coeffs.empty())
    throw InvalidArgument("need at least one coefficient matrix");
  const Index p = coeffs[0].rows();
  const Index q = static_cast<Index>(coeffs.size());
  for (const Matrix& a : coeffs)
    if (a.rows() != p || a.cols() != p)
      throw InvalidArgument("coefficient matrices must all be square with "
                            "matching size");
  Matrix companion = Matrix::Zero(p * q, p * q);
  for (Index k = 0; k < q; ++k)
    companion.block(0, k * p, p, p) = coeffs[static_cast<std::size_t>(k)];
  if (q > 1)
    companion.block(p, 0, p * (q - 1), p * (q - 1)) =
        Matrix::Identity(p * (q - 1), p * (q - 1));
  Eigen::EigenSolver<Matrix> eig(companion, /*computeEigenvectors=*/false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

// Simulates x_t = sum_k A_k x_{t-k} + diag(scale) eps_t from zero initial
// state, eps_t standard Gaussian drawn sample-major (all channels of one
// sample before the next). The first burn_in samples are discarded so the
// returned series is past its transient.
inline TimeSeriesMatrix simulate_var(const std::vector<Matrix>& coeffs,
                                     const Vector& innovation_scale,
                                     Index n_samples, Index burn_in,
                                     SeedSpec seed,
                                     double sampling_rate = 0.0) {
  const double radius = var_spectral_radius(coeffs);
  if (radius >= 1.0)
    throw InvalidArgument("coefficient set is unstable: companion spectral "
                          "radius " + format_value(radius));
  const Index p = coeffs[0].rows();
  if (innovation_scale.size() != p)
    throw InvalidArgument("innovation scale length must match channel count");
  if (n_samples < 1)
    throw InvalidArgument("sample count must be positive");
  if (burn_in < 0)
    throw InvalidArgument("burn-in must be nonnegative");
  const Index q = static_cast<Index>(coeffs.size());
  const Index total = burn_in + n_samples;
  RandomStream rng(seed);
  Matrix x = Matrix::Zero(total, p);
  Eigen::RowVectorXd sample(p);
  for (Index t = 0; t < total; ++t) {
    for (Index c = 0; c < p; ++c)
      sample(c) = innovation_scale(c) * rng.gaussian();
    for (Index k = 1; k <= q && k <= t; ++k)
      sample += x.row(t - k) * coeffs[static_cast<std::size_t>(k - 1)].transpose();
    x.row(t) = sample;
  }
  return {x.bottomRows(n_samples), sampling_rate};
}

// Five-channel AR(2) benchmark network. Channels 1 and 2 drive each other;
// channel 2 also drives 3, 4 and 5; there is no instantaneous coupling, so
// any lag-zero correlation in the output comes from the dynamics alone.
struct Ar5Spec {
  Matrix a1;
  Matrix a2;
  Index burn_in = 1000;
  double sampling_rate = 256.0;

  static Ar5Spec standard() {
    Ar5Spec s;
    s.a1.resize(5, 5);
    s.a2.resize(5, 5);
    s.a1 << 1.5, -0.25, 0.0, 0.0, 0.0,
            -0.2, 1.8, 0.0, 0.0, 0.0,
            0.0, 0.9, 1.65, 0.0, 0.0,
            0.0, 0.9, 0.0, 1.65, 0.0,
            0.0, 0.9, 0.0, 0.0, 1.65;
    s.a2 << -0.95, 0.0, 0.0, 0.0, 0.0,
            0.0, -0.96, 0.0, 0.0, 0.0,
            0.0, -0.8, -0.95, 0.0, 0.0,
            0.0, -0.8, 0.0, -0.95, 0.0,
            0.0, -0.8, 0.0, 0.0, -0.95;
    return s;
  }
};

inline TimeSeriesMatrix gen_var5(Index n_samples, SeedSpec seed,
                                 const Ar5Spec& spec = Ar5Spec::standard()) {
  if (n_samples < 100)
    throw InvalidArgument("gen_var5 needs at least 100 samples");
  return simulate_var({spec.a1, spec.a2}, Vector::Ones(5), n_samples,
                      spec.burn_in, seed, spec.sampling_rate);
}

// Three noisy sinusoids in epochs: channels 1 and 2 share a frequency (unit
// coherence at that bin), channel 3 sits elsewhere. Amplitudes are redrawn
// per epoch per channel from [1 - amplitude_spread, 1 + amplitude_spread];
// additive noise is uniform on [-noise_spread, noise_spread].
struct OscillatorSpec {
  std::vector<double> omega;        // rad per sample
  std::vector<double> delay;        // samples
  double amplitude_spread = 0.5;
  double noise_spread = 0.9;
  Index epochs = 100;
  Index epoch_length = 256;
  double sampling_rate = 256.0;

  static OscillatorSpec standard() {
    OscillatorSpec s;
    s.omega = {2.0 * kPi * 10.0 / 256.0, 2.0 * kPi * 10.0 / 256.0,
               2.0 * kPi * 17.0 / 256.0};
    s.delay = {0.0, -1.0, -2.0};
    return s;
  }
};

// Draw order per epoch: first one amplitude per channel, then one noise
// value per channel for each sample. Sample index t runs 1..epoch_length
// within each epoch, so the phase pattern repeats epoch to epoch.
inline EpochedSeries gen_oscillators(const OscillatorSpec& spec,
                                     SeedSpec seed) {
  const Index p = static_cast<Index>(spec.omega.size());
  if (p < 1 || spec.delay.size() != spec.omega.size())
    throw InvalidArgument("oscillator spec needs matching omega/delay lists");
  if (spec.epochs < 1 || spec.epoch_length < 4)
    throw InvalidArgument("oscillator spec needs epochs >= 1 and epoch "
                          "length >= 4");
  if (spec.amplitude_spread < 0.0 || spec.amplitude_spread > 1.0 ||
      spec.noise_spread < 0.0)
    throw InvalidArgument("oscillator spread parameters out of range");
  RandomStream rng(seed);
  Matrix x(spec.epochs * spec.epoch_length, p);
  std::vector<double> amplitude(static_cast<std::size_t>(p));
  for (Index e = 0; e < spec.epochs; ++e) {
    for (Index c = 0; c < p; ++c)
      amplitude[static_cast<std::size_t>(c)] =
          rng.uniform(1.0 - spec.amplitude_spread, 1.0 + spec.amplitude_spread);
    for (Index t = 1; t <= spec.epoch_length; ++t) {
      const Index row = e * spec.epoch_length + (t - 1);
      for (Index c = 0; c < p; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        const double phase =
            spec.omega[ci] * (static_cast<double>(t) - spec.delay[ci]);
        x(row, c) = amplitude[ci] * std::sin(phase) +
                    rng.uniform(-spec.noise_spread, spec.noise_spread);
      }
    }
  }
  return {std::move(x), spec.epochs, spec.epoch_length, spec.sampling_rate};
}

// Amplitude-modulated carriers: channels 1 and 2 share a carrier frequency
// but have independent slow envelopes, channel 3 differs in both. The true
// envelope e_i(t) = (1 + 0.5 sin(slow phase)) * jitter is returned alongside
// the signals so envelope estimates can be validated against it.
struct AmpModSpec {
  std::vector<double> omega_slow;   // rad per sample
  std::vector<double> delay_slow;   // samples
  std::vector<double> omega_fast;   // rad per sample
  std::vector<double> delay_fast;   // samples
  double jitter_lo = 0.8;
  double jitter_hi = 1.2;
  Index n_samples = 25600;
  double sampling_rate = 256.0;

  static AmpModSpec standard() {
    AmpModSpec s;
    s.omega_slow = {2.0 * kPi * 2.0 / 256.0, 2.0 * kPi * 3.0 / 256.0,
                    2.0 * kPi * 5.0 / 256.0};
    s.delay_slow = {0.0, -4.0, -4.0};
    s.omega_fast = {2.0 * kPi * 22.0 / 256.0, 2.0 * kPi * 22.0 / 256.0,
                    2.0 * kPi * 28.0 / 256.0};
    s.delay_fast = {0.0, -1.0, -2.0};
    return s;
  }
};

struct AmpModData {
  TimeSeriesMatrix signals;
  TimeSeriesMatrix true_envelopes;
};

// Jitter draws are sample-major: all channels of sample t before t + 1.
inline AmpModData gen_ampmod(const AmpModSpec& spec, SeedSpec seed) {
  const std::size_t p_size = spec.omega_slow.size();
  const Index p = static_cast<Index>(p_size);
  if (p < 1 || spec.delay_slow.size() != p_size ||
      spec.omega_fast.size() != p_size || spec.delay_fast.size() != p_size)
    throw InvalidArgument("amplitude-modulation spec needs four equal-length "
                          "parameter lists");
  if (spec.n_samples < 4)
    throw InvalidArgument("amplitude-modulation spec needs at least 4 samples");
  if (!(spec.jitter_lo > 0.0) || !(spec.jitter_hi >= spec.jitter_lo))
    throw InvalidArgument("jitter range must satisfy 0 < lo <= hi");
  RandomStream rng(seed);
  Matrix x(spec.n_samples, p);
  Matrix env(spec.n_samples, p);
  for (Index t = 1; t <= spec.n_samples; ++t) {
    for (Index c = 0; c < p; ++c) {
      const auto ci = static_cast<std::size_t>(c);
      const double jitter = rng.uniform(spec.jitter_lo, spec.jitter_hi);
      const double slow = spec.omega_slow[ci] *
                          (static_cast<double>(t) - spec.delay_slow[ci]);
      const double fast = spec.omega_fast[ci] *
                          (static_cast<double>(t) - spec.delay_fast[ci]);
      env(t - 1, c) = (1.0 + 0.5 * std::sin(slow)) * jitter;
      x(t - 1, c) = env(t - 1, c) * std::sin(fast);
    }
  }
  return {{std::move(x), spec.sampling_rate},
          {std::move(env), spec.sampling_rate}};
}

// Square, finite, invertible by construction at creation time.
struct MixingMatrix {
  Matrix m;

  Index size() const { return m.rows(); }
};

// All-to-all mixing with unit self-weight: M = (1 - c) I + c * ones. Its
// eigenvalues are 1 + c (p - 1) and (p - 1 copies of) 1 - c, so within
// |c| < 1 the only singular point is c = -1 / (p - 1).
inline MixingMatrix uniform_mixing(Index p, double c) {
  if (p < 1)
    throw InvalidArgument("mixing size must be positive");
  if (!(std::abs(c) < 1.0))
    throw InvalidArgument("off-diagonal mixing weight must satisfy |c| < 1, "
                          "got " + format_value(c));
  if (std::abs(1.0 + c * static_cast<double>(p - 1)) < 1e-9)
    throw NumericError("uniform mixing is singular at c = -1/(p-1); got c = " +
                       format_value(c));
  Matrix m = Matrix::Constant(p, p, c);
  m.diagonal().setOnes();
  return {std::move(m)};
}

// y_t = M x_t for every sample (rows are samples, so Y = X M^T).
inline TimeSeriesMatrix apply_mixing(const TimeSeriesMatrix& x,
                                     const MixingMatrix& mix) {
  if (mix.m.rows() != x.channels())
    throw InvalidArgument("mixing matrix size " + std::to_string(mix.m.rows()) +
                          " does not match channel count " +
                          std::to_string(x.channels()));
  return {x.data * mix.m.transpose(), x.sampling_rate};
}

inline EpochedSeries apply_mixing(const EpochedSeries& x,
                                  const MixingMatrix& mix) {
  if (mix.m.rows() != x.channels())
    throw InvalidArgument("mixing matrix size " + std::to_string(mix.m.rows()) +
                          " does not match channel count " +
                          std::to_string(x.channels()));
  return {x.data * mix.m.transpose(), x.epochs, x.epoch_length,
          x.sampling_rate};
}

}  // namespace unmixio
