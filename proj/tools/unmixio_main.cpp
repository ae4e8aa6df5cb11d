// Command-line front end. Exit codes: 0 success, 1 comparison mismatch,
// 2 usage/config error, 3 numerical failure, 4 I/O failure.

#include "unmixio/unmixio.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

namespace fs = std::filesystem;
using namespace unmixio;

void write_or_print(const std::string& content, const std::string& out_path) {
  if (out_path.empty())
    std::fputs(content.c_str(), stdout);
  else
    write_text(content, out_path);
}

std::string correlation_to_long_csv(const Matrix& corr) {
  std::string out = "freq_hz,from,to,value\n";
  for (Index from = 1; from <= corr.cols(); ++from)
    for (Index to = 1; to <= corr.rows(); ++to)
      out += "0," + std::to_string(from) + "," + std::to_string(to) + "," +
             format_value(corr(to - 1, from - 1)) + "\n";
  return out;
}

std::string fit_to_csv(const VarModel& model) {
  std::string out = "matrix,row,col,value\n";
  auto emit = [&](const std::string& name, const Matrix& m) {
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c)
        out += name + "," + std::to_string(r + 1) + "," +
               std::to_string(c + 1) + "," + format_value(m(r, c)) + "\n";
  };
  for (std::size_t k = 0; k < model.coefficients.size(); ++k)
    emit("A" + std::to_string(k + 1), model.coefficients[k]);
  emit("innovation_covariance", model.innovation_covariance);
  return out;
}

std::string diagnostics_csv(const OrthogonalFactorization& f,
                            std::optional<double> condition = {}) {
  std::string out = "key,value\n";
  out += "iterations," + std::to_string(f.iterations) + "\n";
  out += "converged," + std::string(f.converged ? "1" : "0") + "\n";
  out += "objective," + format_value(f.objective) + "\n";
  if (condition) out += "mixing_condition," + format_value(*condition) + "\n";
  return out;
}

struct GenOptions {
  std::string family;
  std::string out;
  std::string envelopes_out;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t stream = 0;
  Index samples = 25600;
  Index epochs = 100;
  Index epoch_length = 256;
  double rate = 256.0;
  double mix = 0.0;
  bool mix_set = false;
};

void run_gen(const GenOptions& opt) {
  const SeedSpec seed{opt.seed, opt.stream};
  TimeSeriesMatrix x;
  TimeSeriesMatrix envelopes;
  bool have_envelopes = false;
  if (opt.family == "var5") {
    x = gen_var5(opt.samples, seed);
  } else if (opt.family == "oscillators") {
    OscillatorSpec spec = OscillatorSpec::standard();
    spec.epochs = opt.epochs;
    spec.epoch_length = opt.epoch_length;
    spec.sampling_rate = opt.rate;
    x = gen_oscillators(spec, seed).flatten();
  } else if (opt.family == "ampmod") {
    AmpModSpec spec = AmpModSpec::standard();
    spec.n_samples = opt.samples;
    spec.sampling_rate = opt.rate;
    AmpModData data = gen_ampmod(spec, seed);
    x = std::move(data.signals);
    envelopes = std::move(data.true_envelopes);
    have_envelopes = true;
  } else {
    throw InvalidArgument("unknown family: " + opt.family);
  }
  if (!opt.envelopes_out.empty() && !have_envelopes)
    throw InvalidArgument("--envelopes-out is only valid for --family ampmod");
  if (opt.mix_set) x = apply_mixing(x, uniform_mixing(x.channels(), opt.mix));
  write_matrix(x, opt.out);
  std::fprintf(stderr, "wrote %s (%lld x %lld)\n", opt.out.c_str(),
               static_cast<long long>(x.samples()),
               static_cast<long long>(x.channels()));
  if (!opt.envelopes_out.empty()) {
    write_matrix(envelopes, opt.envelopes_out);
    std::fprintf(stderr, "wrote %s (%lld x %lld)\n", opt.envelopes_out.c_str(),
                 static_cast<long long>(envelopes.samples()),
                 static_cast<long long>(envelopes.channels()));
  }
}

struct FitOptions {
  std::string input;
  std::string out;
  int order = 0;
  int max_order = 0;
  bool demean = false;
};

void run_fit(const FitOptions& opt) {
  const TimeSeriesMatrix x = read_matrix(opt.input);
  const VarFit fit = fit_var(x, opt.order, opt.demean);
  write_or_print(fit_to_csv(fit.model), opt.out);
  std::fprintf(stderr, "order %d, %lld residual rows\n", fit.model.order,
               static_cast<long long>(fit.model.n_effective));
}

void run_order(const FitOptions& opt) {
  const TimeSeriesMatrix x = read_matrix(opt.input);
  const OrderSelection sel = select_order_aic(x, opt.max_order, opt.demean);
  std::string out = "order,aic\n";
  for (std::size_t i = 0; i < sel.scores.size(); ++i)
    out += std::to_string(i + 1) + "," + format_value(sel.scores[i]) + "\n";
  write_or_print(out, opt.out);
  std::fprintf(stderr, "selected order %d\n", sel.best_order);
}

struct UnmixOptions {
  std::string input;
  std::string out_dir = ".";
  int order = 0;
  double rate = 0.0;
};

void run_unmix(const UnmixOptions& opt) {
  const TimeSeriesMatrix x = read_matrix(opt.input, opt.rate);
  const UnmixResult result = innovations_orthogonalize(x, opt.order);
  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);
  write_matrix(result.unmixed, dir / "unmixed.txt");
  write_text(matrix_to_csv(result.mixing_estimate),
             dir / "mixing_estimate.csv");
  Eigen::JacobiSVD<Matrix> svd(result.mixing_estimate);
  const double condition = svd.singularValues()(0) /
                           svd.singularValues()(svd.singularValues().size() - 1);
  write_text(diagnostics_csv(result.factorization, condition),
             dir / "diagnostics.csv");
  std::fprintf(stderr, "wrote unmixed.txt, mixing_estimate.csv, "
                       "diagnostics.csv under %s\n", opt.out_dir.c_str());
}

void run_lc(const UnmixOptions& opt) {
  const TimeSeriesMatrix x = read_matrix(opt.input, opt.rate);
  const LeakageCorrection lc = leakage_correct(x);
  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);
  write_matrix(lc.corrected, dir / "corrected.txt");
  std::string scale = "channel,scale\n";
  for (Index c = 0; c < lc.factorization.scale.size(); ++c)
    scale += std::to_string(c + 1) + "," +
             format_value(lc.factorization.scale(c)) + "\n";
  write_text(scale, dir / "scale.csv");
  write_text(diagnostics_csv(lc.factorization), dir / "diagnostics.csv");
  std::fprintf(stderr, "wrote corrected.txt, scale.csv, diagnostics.csv "
                       "under %s\n", opt.out_dir.c_str());
}

struct ConnOptions {
  std::string input;
  std::string measure;
  std::string out;
  double rate = 256.0;
  Index epoch_length = 0;
  int order = 0;
  double fmin = 1.0;
  double fmax = 0.0;  // 0 = rate/2
};

void run_conn(const ConnOptions& opt) {
  const TimeSeriesMatrix x = read_matrix(opt.input, opt.rate);
  const double fmax = opt.fmax > 0.0 ? opt.fmax : opt.rate / 2.0;
  if (opt.measure == "corr0") {
    write_or_print(correlation_to_long_csv(lag_zero_correlation(x).values),
                   opt.out);
  } else if (opt.measure == "envcorr") {
    write_or_print(correlation_to_long_csv(envelope_correlation(x).values),
                   opt.out);
  } else if (opt.measure == "coh") {
    if (opt.epoch_length < 1)
      throw InvalidArgument("--epoch-length is required for coh");
    const SpectralConnectivity c =
        coherence_squared(to_epochs(x, opt.epoch_length), {opt.fmin, fmax});
    write_or_print(detail::connectivity_to_csv(c), opt.out);
  } else if (opt.measure == "icoh") {
    if (opt.order < 1)
      throw InvalidArgument("--order is required for icoh");
    std::vector<double> grid;
    for (double f = std::max(1.0, opt.fmin); f <= fmax && f < opt.rate / 2.0;
         f += 1.0)
      grid.push_back(f);
    if (grid.empty()) throw InvalidArgument("frequency grid is empty");
    const SpectralConnectivity c =
        icoh(fit_var(x, opt.order).model, grid, opt.rate);
    write_or_print(detail::connectivity_to_csv(c), opt.out);
  } else {
    throw InvalidArgument("unknown measure: " + opt.measure);
  }
}

struct ReproOptions {
  std::string experiment;
  std::string out;
  std::string config;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t stream = 0;
  int order = 0;
  double mix = kDefaultMix;
  Index samples = 0;
  Index epochs = 0;
  Index epoch_length = 0;
  bool no_plots = false;
};

// Flat key=value config with optional [repro] sections; keys mirror the long
// option names. Command-line flags win, so a key is only applied when its
// option was not given.
void apply_repro_config(ReproOptions& opt, const CLI::App& repro) {
  std::ifstream in(opt.config);
  if (!in) throw ParseError("cannot read config file " + opt.config);

  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  auto parse_u64 = [&](const std::string& key, const std::string& v) {
    std::uint64_t value = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), value);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
      throw ParseError("config key " + key + " needs an unsigned integer, "
                       "got '" + v + "'");
    return value;
  };
  auto parse_index = [&](const std::string& key, const std::string& v) {
    return static_cast<Index>(parse_u64(key, v));
  };
  auto parse_f64 = [&](const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double value = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty())
      throw ParseError("config key " + key + " needs a number, got '" + v +
                       "'");
    return value;
  };
  auto parse_bool = [&](const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ParseError("config key " + key + " needs a boolean, got '" + v +
                     "'");
  };

  std::string line, section;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line is not key=value: '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!section.empty() && section != "repro") continue;
    for (char& c : key)
      if (c == '_') c = '-';

    if (key == "seed") {
      if (repro.count("--seed") == 0) opt.seed = parse_u64(key, value);
    } else if (key == "stream") {
      if (repro.count("--stream") == 0) opt.stream = parse_u64(key, value);
    } else if (key == "out") {
      if (repro.count("--out") == 0) opt.out = value;
    } else if (key == "order") {
      if (repro.count("--order") == 0)
        opt.order = static_cast<int>(parse_u64(key, value));
    } else if (key == "mix") {
      if (repro.count("--mix") == 0) opt.mix = parse_f64(key, value);
    } else if (key == "samples") {
      if (repro.count("--samples") == 0) opt.samples = parse_index(key, value);
    } else if (key == "epochs") {
      if (repro.count("--epochs") == 0) opt.epochs = parse_index(key, value);
    } else if (key == "epoch-length") {
      if (repro.count("--epoch-length") == 0)
        opt.epoch_length = parse_index(key, value);
    } else if (key == "no-plots") {
      if (repro.count("--no-plots") == 0)
        opt.no_plots = parse_bool(key, value);
    } else {
      throw ParseError("unknown config key '" + key + "'");
    }
  }
}

void run_repro(const ReproOptions& opt) {
  ExperimentConfig cfg;
  cfg.experiment = opt.experiment;
  cfg.seed = {opt.seed, opt.stream};
  cfg.out_dir = opt.out.empty() ? fs::path(opt.experiment) : fs::path(opt.out);
  cfg.order = opt.order;
  cfg.mix = opt.mix;
  cfg.n_samples = opt.samples;
  cfg.epochs = opt.epochs;
  cfg.epoch_length = opt.epoch_length;
  cfg.write_plots = !opt.no_plots;
  const Manifest manifest = run_experiment(cfg);
  std::printf("%s\n", (cfg.out_dir / "manifest.txt").string().c_str());
  std::fprintf(stderr, "experiment %s: %zu files under %s\n",
               manifest.experiment.c_str(), manifest.entries.size(),
               cfg.out_dir.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resolve instantaneous linear mixtures of multivariate time "
               "series via innovations orthogonalization"};
  app.require_subcommand(1);
  int exit_code = 0;

  GenOptions gen_opt;
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic recording");
  gen->add_option("--family", gen_opt.family,
                  "signal family: var5, oscillators or ampmod")
      ->required()
      ->check(CLI::IsMember({"var5", "oscillators", "ampmod"}));
  gen->add_option("--out", gen_opt.out, "output series file")->required();
  gen->add_option("--envelopes-out", gen_opt.envelopes_out,
                  "also write the true envelopes (ampmod only)");
  gen->add_option("--seed", gen_opt.seed, "seed")->capture_default_str();
  gen->add_option("--stream", gen_opt.stream, "seed stream")
      ->capture_default_str();
  gen->add_option("--samples", gen_opt.samples,
                  "sample count (var5, ampmod)")->capture_default_str();
  gen->add_option("--epochs", gen_opt.epochs, "epoch count (oscillators)")
      ->capture_default_str();
  gen->add_option("--epoch-length", gen_opt.epoch_length,
                  "samples per epoch (oscillators)")->capture_default_str();
  gen->add_option("--rate", gen_opt.rate, "sampling rate in Hz")
      ->capture_default_str();
  CLI::Option* mix_flag = gen->add_option(
      "--mix", gen_opt.mix, "apply uniform mixing with this off-diagonal "
                            "weight after generation");
  gen->callback([&] {
    gen_opt.mix_set = mix_flag->count() > 0;
    run_gen(gen_opt);
  });

  FitOptions fit_opt;
  CLI::App* fit = app.add_subcommand("fit", "fit a vector autoregression and "
                                            "print its coefficients as CSV");
  fit->add_option("--input", fit_opt.input, "series file")->required();
  fit->add_option("--order", fit_opt.order, "model order")->required();
  fit->add_flag("--demean", fit_opt.demean, "remove channel means first");
  fit->add_option("--out", fit_opt.out, "write CSV here instead of stdout");
  fit->callback([&] { run_fit(fit_opt); });

  FitOptions order_opt;
  CLI::App* order = app.add_subcommand(
      "order", "score model orders 1..max and report the information "
               "criterion minimum");
  order->add_option("--input", order_opt.input, "series file")->required();
  order->add_option("--max-order", order_opt.max_order, "largest order to try")
      ->required();
  order->add_flag("--demean", order_opt.demean, "remove channel means first");
  order->add_option("--out", order_opt.out,
                    "write CSV here instead of stdout");
  order->callback([&] { run_order(order_opt); });

  UnmixOptions unmix_opt;
  CLI::App* unmix = app.add_subcommand(
      "unmix", "estimate and invert the mixing matrix via innovations "
               "orthogonalization");
  unmix->add_option("--input", unmix_opt.input, "series file")->required();
  unmix->add_option("--order", unmix_opt.order, "autoregression order")
      ->required();
  unmix->add_option("--out-dir", unmix_opt.out_dir, "output directory")
      ->capture_default_str();
  unmix->add_option("--rate", unmix_opt.rate, "sampling rate in Hz");
  unmix->callback([&] { run_unmix(unmix_opt); });

  UnmixOptions lc_opt;
  CLI::App* lc = app.add_subcommand(
      "lc", "orthogonalize the signals themselves (leakage-style correction)");
  lc->add_option("--input", lc_opt.input, "series file")->required();
  lc->add_option("--out-dir", lc_opt.out_dir, "output directory")
      ->capture_default_str();
  lc->add_option("--rate", lc_opt.rate, "sampling rate in Hz");
  lc->callback([&] { run_lc(lc_opt); });

  ConnOptions conn_opt;
  CLI::App* conn = app.add_subcommand(
      "conn", "connectivity measures as long-format CSV "
              "(freq_hz,from,to,value)");
  conn->add_option("--input", conn_opt.input, "series file")->required();
  conn->add_option("--measure", conn_opt.measure,
                   "corr0, coh, icoh or envcorr")
      ->required()
      ->check(CLI::IsMember({"corr0", "coh", "icoh", "envcorr"}));
  conn->add_option("--rate", conn_opt.rate, "sampling rate in Hz")
      ->capture_default_str();
  conn->add_option("--epoch-length", conn_opt.epoch_length,
                   "samples per epoch (coh)");
  conn->add_option("--order", conn_opt.order, "autoregression order (icoh)");
  conn->add_option("--fmin", conn_opt.fmin, "lowest frequency in Hz")
      ->capture_default_str();
  conn->add_option("--fmax", conn_opt.fmax,
                   "highest frequency in Hz (default rate/2)");
  conn->add_option("--out", conn_opt.out, "write CSV here instead of stdout");
  conn->callback([&] { run_conn(conn_opt); });

  ReproOptions repro_opt;
  CLI::App* repro = app.add_subcommand(
      "repro", "run a bundled experiment and write its outputs plus a "
               "digest manifest");
  repro->add_option("experiment", repro_opt.experiment,
                    "one of: table1 table3 fig2 fig3 appendix3 sec7-envelope "
                    "sec9-unmix sec10-oscillators sec11-ampmod")
      ->required();
  repro->add_option("--seed", repro_opt.seed, "seed")->capture_default_str();
  repro->add_option("--stream", repro_opt.stream, "seed stream")
      ->capture_default_str();
  repro->add_option("--out", repro_opt.out,
                    "output directory (default: the experiment id)");
  repro->add_option("--order", repro_opt.order,
                    "override the autoregression order");
  repro->add_option("--mix", repro_opt.mix, "uniform mixing weight")
      ->capture_default_str();
  repro->add_option("--samples", repro_opt.samples, "override sample count");
  repro->add_option("--epochs", repro_opt.epochs, "override epoch count");
  repro->add_option("--epoch-length", repro_opt.epoch_length,
                    "override samples per epoch");
  repro->add_flag("--no-plots", repro_opt.no_plots, "skip SVG output");
  repro->add_option("--config", repro_opt.config,
                    "read option defaults from a key=value file "
                    "(command-line flags win)");
  repro->callback([&] {
    if (!repro_opt.config.empty()) apply_repro_config(repro_opt, *repro);
    run_repro(repro_opt);
  });

  std::string compare_a, compare_b;
  double compare_tol = 0.0;
  CLI::App* compare = app.add_subcommand(
      "compare", "compare two experiment runs through their manifests");
  compare->add_option("manifest_a", compare_a, "first manifest")->required();
  compare->add_option("manifest_b", compare_b, "second manifest")->required();
  compare->add_option("--tolerance", compare_tol,
                      "largest acceptable absolute deviation")
      ->capture_default_str();
  compare->callback([&] {
    const ComparisonReport report =
        compare_runs(compare_a, compare_b, compare_tol);
    std::fputs(report.to_string().c_str(), stdout);
    if (!report.pass) exit_code = 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const unmixio::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const unmixio::InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const unmixio::NumericError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const unmixio::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return exit_code;
}
