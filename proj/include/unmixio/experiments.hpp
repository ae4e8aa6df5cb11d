#pragma once

#include "unmixio/connectivity.hpp"
#include "unmixio/core.hpp"
#include "unmixio/generators.hpp"
#include "unmixio/matrix_io.hpp"
#include "unmixio/svg_plot.hpp"
#include "unmixio/unmixing.hpp"
#include "unmixio/var_model.hpp"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace unmixio {

struct ExperimentConfig {
  std::string experiment;
  SeedSpec seed{kDefaultSeed, 0};
  std::filesystem::path out_dir = ".";
  int order = 0;          // 0 = experiment default
  double mix = kDefaultMix;
  Index n_samples = 0;    // 0 = experiment default
  Index epochs = 0;
  Index epoch_length = 0;
  bool write_plots = true;
};

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {
      "table1",  "table3",        "fig2",
      "fig3",    "appendix3",     "sec7-envelope",
      "sec9-unmix", "sec10-oscillators", "sec11-ampmod"};
  return ids;
}

inline std::string experiment_summary(const std::string& id) {
  if (id == "table1")
    return "lag-zero correlations of the five-channel AR benchmark";
  if (id == "table3")
    return "mixing-matrix recovery on the AR benchmark, raw and mixed";
  if (id == "fig2")
    return "directed spectra of the AR benchmark before/after signal "
           "orthogonalization";
  if (id == "fig3")
    return "coherence of noisy oscillators before/after signal "
           "orthogonalization";
  if (id == "appendix3")
    return "directed spectra after signal orthogonalization of raw and mixed "
           "AR data";
  if (id == "sec7-envelope")
    return "envelope correlations of amplitude-modulated carriers";
  if (id == "sec9-unmix")
    return "directed spectra after innovations unmixing of AR data";
  if (id == "sec10-oscillators")
    return "coherence after innovations unmixing of oscillator data";
  if (id == "sec11-ampmod")
    return "envelope correlations after innovations unmixing of "
           "amplitude-modulated data";
  throw InvalidArgument("unknown experiment id: " + id);
}

struct ManifestEntry {
  std::string file;
  std::string role;
  std::string digest;  // "fnv1a64:<16 hex digits>"
};

struct Manifest {
  std::string experiment;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<ManifestEntry> entries;
  std::filesystem::path directory;  // where the files live; not serialized
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string digest_string(std::string_view bytes) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016" PRIx64, fnv1a64(bytes));
  return buf;
}

// Collects emitted files, writes them under the output directory and tracks
// their digests so a manifest can be produced at the end.
struct ExperimentSink {
  std::filesystem::path dir;
  Manifest manifest;

  void emit(const std::string& name, const std::string& role,
            const std::string& content) {
    write_text(content, dir / name);
    manifest.entries.push_back({name, role, digest_string(content)});
  }
};

// Reruns a stage's exceptions with the stage name prefixed, preserving the
// error type so exit-code mapping still works.
template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(name + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(name + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(name + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(name + ": " + e.what());
  }
}

inline std::vector<double> pair_values(const SpectralConnectivity& s, Index i,
                                       Index j) {
  std::vector<double> y;
  y.reserve(s.values.size());
  for (const Matrix& m : s.values) y.push_back(m(i, j));
  return y;
}

inline std::string connectivity_to_csv(const SpectralConnectivity& s) {
  std::string out = "freq_hz,from,to,value\n";
  for (std::size_t f = 0; f < s.frequencies_hz.size(); ++f) {
    const Matrix& m = s.values[f];
    for (Index from = 1; from <= m.cols(); ++from)
      for (Index to = 1; to <= m.rows(); ++to) {
        if (from == to) continue;
        out += format_value(s.frequencies_hz[f]) + "," +
               std::to_string(from) + "," + std::to_string(to) + "," +
               format_value(m(to - 1, from - 1)) + "\n";
      }
  }
  return out;
}

// Overlaid per-pair curves for up to a handful of variants; directed
// measures leave the diagonal panels empty.
inline std::string connectivity_grid_svg(
    const std::string& title,
    const std::vector<const SpectralConnectivity*>& variants,
    const std::vector<std::string>& colors, double x_min, double x_max,
    bool directed) {
  const Index p = variants.at(0)->channels();
  PanelGrid grid;
  grid.title = title;
  grid.rows = static_cast<int>(p);
  grid.cols = static_cast<int>(p);
  grid.x_min = x_min;
  grid.x_max = x_max;
  grid.y_min = 0.0;
  grid.y_max = 1.0;
  grid.x_label = "frequency (Hz)";
  grid.y_label = directed ? "directed influence" : "coherence";
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      PlotPanel panel;
      if (i == j && directed) {
        grid.panels.push_back(panel);
        continue;
      }
      panel.label = std::to_string(j + 1) + (directed ? "→" : "↔") +
                    std::to_string(i + 1);
      for (std::size_t v = 0; v < variants.size(); ++v) {
        PlotSeries series;
        series.color = colors.at(v);
        for (std::size_t f = 0; f < variants[v]->frequencies_hz.size(); ++f) {
          const double freq = variants[v]->frequencies_hz[f];
          if (freq < x_min || freq > x_max) continue;
          series.x.push_back(freq);
          series.y.push_back(variants[v]->values[f](i, j));
        }
        panel.series.push_back(std::move(series));
      }
      grid.panels.push_back(std::move(panel));
    }
  }
  return render_panel_grid_svg(grid);
}

inline const char* kActualColor = "#CC00CC";     // magenta
inline const char* kCorrectedColor = "#1C8A1C";  // green
inline const char* kSecondaryColor = "#7FD67F";  // light green

}  // namespace detail

namespace detail {

// Concrete parameter set after experiment defaults are applied.
struct ResolvedConfig {
  SeedSpec seed;
  Index n_samples = 25600;
  Index epochs = 100;
  Index epoch_length = 256;
  double mix = kDefaultMix;
  int order_var = 2;   // order for the AR benchmark pipelines
  int order_flat = 9;  // order when whitening non-AR signals
  bool write_plots = true;
};

inline ResolvedConfig resolve(const ExperimentConfig& cfg) {
  ResolvedConfig r;
  r.seed = cfg.seed;
  if (cfg.n_samples > 0) r.n_samples = cfg.n_samples;
  if (cfg.epochs > 0) r.epochs = cfg.epochs;
  if (cfg.epoch_length > 0) r.epoch_length = cfg.epoch_length;
  r.mix = cfg.mix;
  if (cfg.order > 0) {
    r.order_var = cfg.order;
    r.order_flat = cfg.order;
  }
  r.write_plots = cfg.write_plots;
  return r;
}

inline OscillatorSpec oscillator_spec(const ResolvedConfig& cfg) {
  OscillatorSpec spec = OscillatorSpec::standard();
  spec.epochs = cfg.epochs;
  spec.epoch_length = cfg.epoch_length;
  return spec;
}

inline AmpModSpec ampmod_spec(const ResolvedConfig& cfg) {
  AmpModSpec spec = AmpModSpec::standard();
  spec.n_samples = cfg.n_samples;
  return spec;
}

inline void run_table1(const ResolvedConfig& cfg, ExperimentSink& sink) {
  TimeSeriesMatrix x =
      stage("generate", [&] { return gen_var5(cfg.n_samples, cfg.seed); });
  CorrelationMatrix corr =
      stage("correlate", [&] { return lag_zero_correlation(x); });
  sink.emit("lag_zero_correlation.csv", "correlation",
            matrix_to_csv(corr.values));
}

inline void run_table3(const ResolvedConfig& cfg, ExperimentSink& sink) {
  TimeSeriesMatrix x =
      stage("generate", [&] { return gen_var5(cfg.n_samples, cfg.seed); });
  MixingMatrix mix = uniform_mixing(5, cfg.mix);
  TimeSeriesMatrix y = apply_mixing(x, mix);
  UnmixResult io_raw = stage("unmix-raw", [&] {
    return innovations_orthogonalize(x, cfg.order_var);
  });
  UnmixResult io_mixed = stage("unmix-mixed", [&] {
    return innovations_orthogonalize(y, cfg.order_var);
  });
  sink.emit("mixing_applied.csv", "mixing", matrix_to_csv(mix.m));
  sink.emit("mixing_estimate_unmixed.csv", "mixing",
            matrix_to_csv(io_raw.mixing_estimate));
  sink.emit("mixing_estimate_mixed.csv", "mixing",
            matrix_to_csv(io_mixed.mixing_estimate));
}

inline void run_fig2(const ResolvedConfig& cfg, ExperimentSink& sink) {
  TimeSeriesMatrix x =
      stage("generate", [&] { return gen_var5(cfg.n_samples, cfg.seed); });
  const std::vector<double> grid = default_icoh_grid(256.0);
  SpectralConnectivity actual = stage("spectrum-actual", [&] {
    return icoh(fit_var(x, cfg.order_var).model, grid, 256.0);
  });
  SpectralConnectivity corrected = stage("spectrum-corrected", [&] {
    LeakageCorrection lc = leakage_correct(x);
    return icoh(fit_var(lc.corrected, cfg.order_var).model, grid, 256.0);
  });
  sink.emit("icoh_actual.csv", "connectivity", connectivity_to_csv(actual));
  sink.emit("icoh_leakage_corrected.csv", "connectivity",
            connectivity_to_csv(corrected));
  if (cfg.write_plots)
    sink.emit("icoh_panels.svg", "plot",
              connectivity_grid_svg("directed influence, actual vs "
                                    "orthogonalized signals",
                                    {&actual, &corrected},
                                    {kActualColor, kCorrectedColor}, 1.0,
                                    127.0, true));
}

inline void run_fig3(const ResolvedConfig& cfg, ExperimentSink& sink) {
  EpochedSeries osc = stage("generate", [&] {
    return gen_oscillators(oscillator_spec(cfg), cfg.seed);
  });
  const FrequencyRange full{1.0, osc.sampling_rate / 2.0};
  SpectralConnectivity actual =
      stage("coherence-actual", [&] { return coherence_squared(osc, full); });
  SpectralConnectivity corrected = stage("coherence-corrected", [&] {
    LeakageCorrection lc = leakage_correct(osc.flatten());
    return coherence_squared(to_epochs(lc.corrected, osc.epoch_length), full);
  });
  sink.emit("coherence_actual.csv", "connectivity",
            connectivity_to_csv(actual));
  sink.emit("coherence_leakage_corrected.csv", "connectivity",
            connectivity_to_csv(corrected));
  if (cfg.write_plots)
    sink.emit("coherence_panels.svg", "plot",
              connectivity_grid_svg("coherence, actual vs orthogonalized "
                                    "signals",
                                    {&actual, &corrected},
                                    {kActualColor, kCorrectedColor}, 1.0, 30.0,
                                    false));
}

inline void run_appendix3(const ResolvedConfig& cfg, ExperimentSink& sink) {
  TimeSeriesMatrix x =
      stage("generate", [&] { return gen_var5(cfg.n_samples, cfg.seed); });
  TimeSeriesMatrix y = apply_mixing(x, uniform_mixing(5, cfg.mix));
  const std::vector<double> grid = default_icoh_grid(256.0);
  SpectralConnectivity actual = stage("spectrum-actual", [&] {
    return icoh(fit_var(x, cfg.order_var).model, grid, 256.0);
  });
  SpectralConnectivity corrected_raw = stage("spectrum-corrected-raw", [&] {
    LeakageCorrection lc = leakage_correct(x);
    return icoh(fit_var(lc.corrected, cfg.order_var).model, grid, 256.0);
  });
  SpectralConnectivity corrected_mixed =
      stage("spectrum-corrected-mixed", [&] {
        LeakageCorrection lc = leakage_correct(y);
        return icoh(fit_var(lc.corrected, cfg.order_var).model, grid, 256.0);
      });
  sink.emit("icoh_actual.csv", "connectivity", connectivity_to_csv(actual));
  sink.emit("icoh_leakage_corrected_raw.csv", "connectivity",
            connectivity_to_csv(corrected_raw));
  sink.emit("icoh_leakage_corrected_mixed.csv", "connectivity",
            connectivity_to_csv(corrected_mixed));
  if (cfg.write_plots)
    sink.emit("icoh_panels.svg", "plot",
              connectivity_grid_svg(
                  "directed influence after orthogonalizing raw and mixed "
                  "signals",
                  {&actual, &corrected_raw, &corrected_mixed},
                  {kActualColor, kCorrectedColor, kSecondaryColor}, 1.0, 127.0,
                  true));
}

inline void run_sec7_envelope(const ResolvedConfig& cfg,
                              ExperimentSink& sink) {
  AmpModData amp = stage("generate", [&] {
    return gen_ampmod(ampmod_spec(cfg), cfg.seed);
  });
  CorrelationMatrix corr_signal =
      stage("correlate-signal", [&] { return lag_zero_correlation(amp.signals); });
  CorrelationMatrix corr_true_env = stage("correlate-true-envelope", [&] {
    return lag_zero_correlation(amp.true_envelopes);
  });
  CorrelationMatrix corr_env = stage("correlate-envelope", [&] {
    return envelope_correlation(amp.signals);
  });
  CorrelationMatrix corr_env_lc = stage("correlate-envelope-corrected", [&] {
    return envelope_correlation(leakage_correct(amp.signals).corrected);
  });
  sink.emit("signal_correlation.csv", "correlation",
            matrix_to_csv(corr_signal.values));
  sink.emit("true_envelope_correlation.csv", "correlation",
            matrix_to_csv(corr_true_env.values));
  sink.emit("envelope_correlation.csv", "correlation",
            matrix_to_csv(corr_env.values));
  sink.emit("envelope_correlation_leakage_corrected.csv", "correlation",
            matrix_to_csv(corr_env_lc.values));
}

inline void run_sec9_unmix(const ResolvedConfig& cfg, ExperimentSink& sink) {
  TimeSeriesMatrix x =
      stage("generate", [&] { return gen_var5(cfg.n_samples, cfg.seed); });
  TimeSeriesMatrix y = apply_mixing(x, uniform_mixing(5, cfg.mix));
  const std::vector<double> grid = default_icoh_grid(256.0);
  SpectralConnectivity actual = stage("spectrum-actual", [&] {
    return icoh(fit_var(x, cfg.order_var).model, grid, 256.0);
  });
  UnmixResult io_raw = stage("unmix-raw", [&] {
    return innovations_orthogonalize(x, cfg.order_var);
  });
  UnmixResult io_mixed = stage("unmix-mixed", [&] {
    return innovations_orthogonalize(y, cfg.order_var);
  });
  SpectralConnectivity unmixed_raw = stage("spectrum-unmixed-raw", [&] {
    return icoh(fit_var(io_raw.unmixed, cfg.order_var).model, grid, 256.0);
  });
  SpectralConnectivity unmixed_mixed = stage("spectrum-unmixed-mixed", [&] {
    return icoh(fit_var(io_mixed.unmixed, cfg.order_var).model, grid, 256.0);
  });
  sink.emit("icoh_actual.csv", "connectivity", connectivity_to_csv(actual));
  sink.emit("icoh_unmixed_raw.csv", "connectivity",
            connectivity_to_csv(unmixed_raw));
  sink.emit("icoh_unmixed_mixed.csv", "connectivity",
            connectivity_to_csv(unmixed_mixed));
  sink.emit("mixing_estimate_raw.csv", "mixing",
            matrix_to_csv(io_raw.mixing_estimate));
  sink.emit("mixing_estimate_mixed.csv", "mixing",
            matrix_to_csv(io_mixed.mixing_estimate));
  if (cfg.write_plots)
    sink.emit("icoh_panels.svg", "plot",
              connectivity_grid_svg(
                  "directed influence after innovations unmixing",
                  {&actual, &unmixed_raw, &unmixed_mixed},
                  {kActualColor, kCorrectedColor, kSecondaryColor}, 1.0, 127.0,
                  true));
}

inline void run_sec10_oscillators(const ResolvedConfig& cfg,
                                  ExperimentSink& sink) {
  EpochedSeries osc = stage("generate", [&] {
    return gen_oscillators(oscillator_spec(cfg), cfg.seed);
  });
  EpochedSeries mixed = apply_mixing(osc, uniform_mixing(3, cfg.mix));
  const FrequencyRange full{1.0, osc.sampling_rate / 2.0};
  SpectralConnectivity actual =
      stage("coherence-actual", [&] { return coherence_squared(osc, full); });
  UnmixResult io_raw = stage("unmix-raw", [&] {
    return innovations_orthogonalize(osc.flatten(), cfg.order_flat);
  });
  UnmixResult io_mixed = stage("unmix-mixed", [&] {
    return innovations_orthogonalize(mixed.flatten(), cfg.order_flat);
  });
  SpectralConnectivity coh_raw = stage("coherence-unmixed-raw", [&] {
    return coherence_squared(to_epochs(io_raw.unmixed, osc.epoch_length),
                             full);
  });
  SpectralConnectivity coh_mixed = stage("coherence-unmixed-mixed", [&] {
    return coherence_squared(to_epochs(io_mixed.unmixed, osc.epoch_length),
                             full);
  });
  sink.emit("coherence_actual.csv", "connectivity",
            connectivity_to_csv(actual));
  sink.emit("coherence_unmixed_raw.csv", "connectivity",
            connectivity_to_csv(coh_raw));
  sink.emit("coherence_unmixed_mixed.csv", "connectivity",
            connectivity_to_csv(coh_mixed));
  sink.emit("mixing_estimate_raw.csv", "mixing",
            matrix_to_csv(io_raw.mixing_estimate));
  sink.emit("mixing_estimate_mixed.csv", "mixing",
            matrix_to_csv(io_mixed.mixing_estimate));
  if (cfg.write_plots)
    sink.emit("coherence_panels.svg", "plot",
              connectivity_grid_svg(
                  "coherence after innovations unmixing",
                  {&actual, &coh_raw, &coh_mixed},
                  {kActualColor, kCorrectedColor, kSecondaryColor}, 1.0, 30.0,
                  false));
}

inline void run_sec11_ampmod(const ResolvedConfig& cfg, ExperimentSink& sink) {
  AmpModData amp = stage("generate", [&] {
    return gen_ampmod(ampmod_spec(cfg), cfg.seed);
  });
  TimeSeriesMatrix mixed = apply_mixing(amp.signals, uniform_mixing(3, cfg.mix));
  UnmixResult io_raw = stage("unmix-raw", [&] {
    return innovations_orthogonalize(amp.signals, cfg.order_flat);
  });
  UnmixResult io_mixed = stage("unmix-mixed", [&] {
    return innovations_orthogonalize(mixed, cfg.order_flat);
  });
  CorrelationMatrix env_raw = stage("correlate-envelope-raw", [&] {
    return envelope_correlation(io_raw.unmixed);
  });
  CorrelationMatrix env_mixed = stage("correlate-envelope-mixed", [&] {
    return envelope_correlation(io_mixed.unmixed);
  });
  sink.emit("envelope_correlation_unmixed_raw.csv", "correlation",
            matrix_to_csv(env_raw.values));
  sink.emit("envelope_correlation_unmixed_mixed.csv", "correlation",
            matrix_to_csv(env_mixed.values));
  sink.emit("mixing_estimate_raw.csv", "mixing",
            matrix_to_csv(io_raw.mixing_estimate));
  sink.emit("mixing_estimate_mixed.csv", "mixing",
            matrix_to_csv(io_mixed.mixing_estimate));
}

}  // namespace detail

inline void write_manifest(const Manifest& manifest,
                           const std::filesystem::path& path) {
  std::string out = "unmixio-manifest 1\n";
  out += "experiment: " + manifest.experiment + "\n";
  out += "seed: " + std::to_string(manifest.seed) + "\n";
  out += "stream: " + std::to_string(manifest.stream) + "\n";
  for (const auto& [key, value] : manifest.params)
    out += "param: " + key + "=" + value + "\n";
  for (const ManifestEntry& e : manifest.entries)
    out += "file: " + e.file + " role=" + e.role + " digest=" + e.digest +
           "\n";
  write_text(out, path);
}

inline Manifest read_manifest(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  Manifest m;
  m.directory = path.parent_path();
  std::size_t pos = 0;
  Index lineno = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != "unmixio-manifest 1")
        throw ParseError(path.string() + ": not a manifest (bad header '" +
                         line + "')");
      saw_header = true;
      continue;
    }
    const auto fail = [&](const std::string& why) {
      throw ParseError(path.string() + ": line " + std::to_string(lineno) +
                       ": " + why);
    };
    const std::size_t colon = line.find(": ");
    if (colon == std::string::npos) fail("expected 'key: value'");
    const std::string key = line.substr(0, colon);
    const std::string value = line.substr(colon + 2);
    if (key == "experiment") {
      m.experiment = value;
    } else if (key == "seed" || key == "stream") {
      std::uint64_t parsed = 0;
      auto [ptr, ec] = std::from_chars(value.data(),
                                       value.data() + value.size(), parsed);
      if (ec != std::errc{} || ptr != value.data() + value.size())
        fail("bad integer '" + value + "'");
      (key == "seed" ? m.seed : m.stream) = parsed;
    } else if (key == "param") {
      const std::size_t eq = value.find('=');
      if (eq == std::string::npos) fail("expected 'param: key=value'");
      m.params.emplace_back(value.substr(0, eq), value.substr(eq + 1));
    } else if (key == "file") {
      ManifestEntry entry;
      std::size_t sp1 = value.find(' ');
      if (sp1 == std::string::npos) fail("expected 'file: name role= digest='");
      entry.file = value.substr(0, sp1);
      std::string rest = value.substr(sp1 + 1);
      const std::string role_tag = "role=";
      const std::string digest_tag = "digest=";
      std::size_t role_at = rest.find(role_tag);
      std::size_t digest_at = rest.find(digest_tag);
      if (role_at == std::string::npos || digest_at == std::string::npos)
        fail("missing role= or digest=");
      entry.role = rest.substr(role_at + role_tag.size(),
                               rest.find(' ', role_at) - role_at -
                                   role_tag.size());
      entry.digest = rest.substr(digest_at + digest_tag.size());
      m.entries.push_back(std::move(entry));
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (!saw_header) throw ParseError(path.string() + ": empty manifest");
  if (m.experiment.empty())
    throw ParseError(path.string() + ": manifest has no experiment id");
  return m;
}

// Runs one experiment, writing every output plus "manifest.txt" into
// cfg.out_dir.
inline Manifest run_experiment(const ExperimentConfig& cfg) {
  const std::string& id = cfg.experiment;
  experiment_summary(id);  // validates the id
  detail::ResolvedConfig resolved = detail::resolve(cfg);
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec)
    throw IoError("cannot create output directory " + cfg.out_dir.string() +
                  ": " + ec.message());
  detail::ExperimentSink sink;
  sink.dir = cfg.out_dir;
  sink.manifest.experiment = id;
  sink.manifest.seed = cfg.seed.seed;
  sink.manifest.stream = cfg.seed.stream;
  sink.manifest.directory = cfg.out_dir;
  auto param = [&](const std::string& k, const std::string& v) {
    sink.manifest.params.emplace_back(k, v);
  };
  param("samples", std::to_string(resolved.n_samples));
  param("epochs", std::to_string(resolved.epochs));
  param("epoch_length", std::to_string(resolved.epoch_length));
  param("mix", format_value(resolved.mix));
  param("order_var", std::to_string(resolved.order_var));
  param("order_flat", std::to_string(resolved.order_flat));

  if (id == "table1") detail::run_table1(resolved, sink);
  else if (id == "table3") detail::run_table3(resolved, sink);
  else if (id == "fig2") detail::run_fig2(resolved, sink);
  else if (id == "fig3") detail::run_fig3(resolved, sink);
  else if (id == "appendix3") detail::run_appendix3(resolved, sink);
  else if (id == "sec7-envelope") detail::run_sec7_envelope(resolved, sink);
  else if (id == "sec9-unmix") detail::run_sec9_unmix(resolved, sink);
  else if (id == "sec10-oscillators")
    detail::run_sec10_oscillators(resolved, sink);
  else if (id == "sec11-ampmod") detail::run_sec11_ampmod(resolved, sink);
  else throw InvalidArgument("unknown experiment id: " + id);

  write_manifest(sink.manifest, cfg.out_dir / "manifest.txt");
  return sink.manifest;
}

struct FileComparison {
  std::string file;
  bool compared = false;
  bool present = true;  // listed in both manifests
  bool pass = false;
  double max_abs_deviation = 0.0;
  std::string note;
  std::vector<std::string> violations;  // capped listing of worst entries
};

struct ComparisonReport {
  bool pass = false;
  double tolerance = 0.0;
  std::vector<FileComparison> files;

  std::string to_string() const {
    std::string out = "comparison tolerance " + format_value(tolerance) +
                      ": " + (pass ? "PASS" : "FAIL") + "\n";
    for (const FileComparison& f : files) {
      out += "  " + f.file + ": ";
      if (!f.compared) {
        out += "skipped (" + f.note + ")\n";
        continue;
      }
      if (!f.present) {
        out += "FAIL (" + f.note + ")\n";
        continue;
      }
      out += (f.pass ? "ok" : "FAIL");
      out += ", max |dev| = " + format_value(f.max_abs_deviation);
      if (!f.note.empty()) out += " (" + f.note + ")";
      out += "\n";
      for (const std::string& v : f.violations) out += "    " + v + "\n";
    }
    return out;
  }
};

namespace detail {

inline std::vector<double> numeric_tokens(const std::string& text) {
  std::vector<double> values;
  std::size_t i = 0;
  const auto is_sep = [](char c) {
    return c == ' ' || c == '\t' || c == ',' || c == '\n' || c == '\r';
  };
  while (i < text.size()) {
    while (i < text.size() && is_sep(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_sep(text[i])) ++i;
    if (i == start) continue;
    double v = 0.0;
    const char* begin = text.data() + start;
    const char* end = text.data() + i;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec == std::errc{} && ptr == end) values.push_back(v);
  }
  return values;
}

}  // namespace detail

// Compares the numeric content of two runs of the same experiment: every
// non-plot file present in both manifests must agree entrywise within the
// tolerance. Digest equality short-circuits a file as identical.
inline ComparisonReport compare_runs(const std::filesystem::path& manifest_a,
                                     const std::filesystem::path& manifest_b,
                                     double tolerance) {
  if (!(tolerance >= 0.0))
    throw InvalidArgument("tolerance must be nonnegative");
  const Manifest a = read_manifest(manifest_a);
  const Manifest b = read_manifest(manifest_b);
  if (a.experiment != b.experiment)
    throw InvalidArgument("manifests describe different experiments: " +
                          a.experiment + " vs " + b.experiment);
  ComparisonReport report;
  report.tolerance = tolerance;
  report.pass = true;
  for (const ManifestEntry& ea : a.entries) {
    FileComparison fc;
    fc.file = ea.file;
    const ManifestEntry* eb = nullptr;
    for (const ManifestEntry& candidate : b.entries)
      if (candidate.file == ea.file) {
        eb = &candidate;
        break;
      }
    if (!eb) {
      fc.note = "missing from second run";
      fc.compared = true;
      fc.present = false;
      fc.pass = false;
      report.pass = false;
      report.files.push_back(std::move(fc));
      continue;
    }
    if (ea.role == "plot") {
      fc.note = "plot, not compared numerically";
      report.files.push_back(std::move(fc));
      continue;
    }
    if (ea.digest == eb->digest) {
      fc.compared = true;
      fc.pass = true;
      fc.note = "byte-identical";
      report.files.push_back(std::move(fc));
      continue;
    }
    const std::vector<double> va =
        detail::numeric_tokens(read_text(a.directory / ea.file));
    const std::vector<double> vb =
        detail::numeric_tokens(read_text(b.directory / eb->file));
    fc.compared = true;
    if (va.size() != vb.size()) {
      fc.pass = false;
      fc.note = "value count differs: " + std::to_string(va.size()) + " vs " +
                std::to_string(vb.size());
      report.pass = false;
      report.files.push_back(std::move(fc));
      continue;
    }
    constexpr std::size_t kMaxViolations = 10;
    for (std::size_t i = 0; i < va.size(); ++i) {
      const double dev = std::abs(va[i] - vb[i]);
      fc.max_abs_deviation = std::max(fc.max_abs_deviation, dev);
      if (dev > tolerance && fc.violations.size() < kMaxViolations)
        fc.violations.push_back("value " + std::to_string(i + 1) + ": " +
                                format_value(va[i]) + " vs " +
                                format_value(vb[i]) + " (|dev| " +
                                format_value(dev) + ")");
    }
    fc.pass = fc.max_abs_deviation <= tolerance;
    if (!fc.pass) report.pass = false;
    report.files.push_back(std::move(fc));
  }
  for (const ManifestEntry& eb : b.entries) {
    bool in_a = false;
    for (const ManifestEntry& ea : a.entries)
      if (ea.file == eb.file) {
        in_a = true;
        break;
      }
    if (!in_a) {
      FileComparison fc;
      fc.file = eb.file;
      fc.compared = true;
      fc.present = false;
      fc.pass = false;
      fc.note = "missing from first run";
      report.pass = false;
      report.files.push_back(std::move(fc));
    }
  }
  return report;
}

}  // namespace unmixio
