// wavecancoh: simulate, estimate, permutation-test and replicate from the
// command line.
//
// Exit codes: 0 success, 1 usage, 2 parse, 3 validation, 4 numerical, 5 I/O.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wavecancoh/wavecancoh.hpp"

namespace wc = wavecancoh;
namespace fs = std::filesystem;
using wc::io::json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kParse = 2, kValidation = 3, kNumerical = 4, kIo = 5 };

int exit_code_for(const wc::Error& e) {
  switch (e.category()) {
    case wc::ErrorCategory::parse:
      return kParse;
    case wc::ErrorCategory::numerical:
      return kNumerical;
    case wc::ErrorCategory::io:
      return kIo;
    case wc::ErrorCategory::validation:
      break;
  }
  return kValidation;
}

wc::FrequencyBand parse_band(const std::string& text) {
  const auto colon = text.find(':');
  wc::detail::require(colon != std::string::npos, wc::Errc::invalid_argument, "band must look like LO:HI");
  try {
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw wc::Error(wc::Errc::invalid_argument, "band bounds must be numbers: '" + text + "'");
  }
}

std::string numbered(const std::string& stem, int r, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%04d", r + 1);
  return stem + buf + ext;
}

std::vector<fs::path> csv_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw wc::Error(wc::Errc::io, dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw wc::Error(wc::Errc::empty_group, "no .csv fields found in " + dir.string());
  return out;
}

std::string csv_header(const std::string& hash, const std::string& columns) {
  return "# config_hash=" + hash + "\n" + columns + "\n";
}

// --------------------------------------------------------------------------

struct SimulateArgs {
  std::string builtin = "c1";
  std::string spec_file;
  int length = 1024;
  int reps = 1;
  std::uint64_t seed = 0;
  std::string family = "haar";
  int num_scales = 0;
  double fs = 1.0;
  double time_origin = 0.0;
  std::string out = "panels";
};

void run_simulate_mvlsw(const SimulateArgs& a) {
  const wc::LwsSpec spec = a.spec_file.empty() ? (a.builtin == "c1" ? wc::builtin_c1_spec()
                                                                      : throw wc::Error(wc::Errc::invalid_argument,
                                                                                        "unknown builtin spec '" + a.builtin + "'"))
                                               : wc::io::spec_from_json(wc::io::read_json(a.spec_file));
  spec.validate();
  wc::detail::require(a.length >= 2 && a.reps >= 1 && a.fs > 0.0, wc::Errc::invalid_argument,
                      "need T >= 2, reps >= 1 and fs > 0");
  const int J = a.num_scales > 0 ? a.num_scales : wc::default_num_scales(a.length);
  const auto system = wc::cached_system(a.family, J);

  const json config{{"command", "simulate mvlsw"}, {"spec", wc::io::to_json(spec)}, {"T", a.length},
                    {"reps", a.reps}, {"seed", a.seed}, {"family", system->filter.name},
                    {"num_scales", J}, {"fs", a.fs}, {"time_origin", a.time_origin}};
  const std::string hash = wc::io::config_hash(config);

  wc::io::PanelManifest m;
  m.P = spec.P;
  m.Q = spec.Q;
  m.fs = a.fs;
  m.seed = a.seed;
  m.spec_id = spec.id;
  for (const auto& [j, pieces] : spec.scales) {
    for (const auto& piece : pieces) {
      if (piece.u_start > 0.0 && std::find(m.change_points.begin(), m.change_points.end(), piece.u_start) == m.change_points.end()) {
        m.change_points.push_back(piece.u_start);
      }
    }
  }
  std::sort(m.change_points.begin(), m.change_points.end());
  m.time_origin = a.time_origin;
  m.length = a.length;
  m.config_hash = hash;

  std::vector<std::string> names(static_cast<std::size_t>(a.reps));
  wc::parallel_for(names.size(), [&](std::size_t r) {
    const auto sim = wc::simulate_mvlsw(spec, a.length, *system, wc::derive_seed(a.seed, r));
    names[r] = numbered("panel", static_cast<int>(r), ".csv");
    wc::io::write_panel(fs::path(a.out) / names[r], sim.panel.values, hash);
  });
  m.files = names;
  json mj = wc::io::to_json(m);
  mj["config"] = config;
  wc::io::write_json(fs::path(a.out) / "manifest.json", mj);
  std::cout << "wrote " << a.reps << " panel(s) with " << spec.dim() << " channels to " << a.out << "\n";
}

void run_simulate_ar2(const SimulateArgs& a) {
  const wc::Ar2MixtureSpec spec = wc::Ar2MixtureSpec::standard();
  wc::detail::require(a.reps >= 1, wc::Errc::invalid_argument, "reps must be >= 1");
  const json config{{"command", "simulate ar2mix"}, {"T", a.length}, {"reps", a.reps}, {"seed", a.seed},
                    {"eta", spec.eta}, {"sharpness", spec.sharpness}, {"alpha", spec.alpha},
                    {"beta", spec.beta}, {"change_point", spec.change_point}, {"fs", spec.fs},
                    {"time_origin", a.time_origin}};
  const std::string hash = wc::io::config_hash(config);
  std::vector<std::string> names(static_cast<std::size_t>(a.reps));
  wc::parallel_for(names.size(), [&](std::size_t r) {
    const auto sim = wc::simulate_ar2_mixture(spec, a.length, wc::derive_seed(a.seed, r));
    names[r] = numbered("panel", static_cast<int>(r), ".csv");
    wc::io::write_panel(fs::path(a.out) / names[r], wc::fuse(sim.x, sim.y).values, hash);
  });
  wc::io::PanelManifest m;
  m.P = spec.P();
  m.Q = spec.Q();
  m.fs = spec.fs;
  m.seed = a.seed;
  m.spec_id = "ar2mix";
  m.change_points = {spec.change_point};
  m.time_origin = a.time_origin;
  m.length = a.length;
  m.files = names;
  m.config_hash = hash;
  json mj = wc::io::to_json(m);
  mj["config"] = config;
  wc::io::write_json(fs::path(a.out) / "manifest.json", mj);
  std::cout << "wrote " << a.reps << " panel(s): X with " << m.P << " channels, Y with " << m.Q << " to " << a.out
            << "\n";
}

// --------------------------------------------------------------------------

struct EstimateArgs {
  std::string input;
  std::string manifest;
  int P = 0;
  std::string out = "field.csv";
  std::string method = "wavelet";
  std::string family = "haar";
  int num_scales = 0;
  int half_width = -1;
  double epsilon = 1e-8;
  std::vector<int> scales;
  int lag = 0;
  std::string direction = "xy";
  std::string band = "25:50";
  int window = 128;
  int hop = 8;
  double sigma = 0.0;
  std::optional<double> fs;
  std::optional<double> time_origin;
  std::string dump_lws;
};

void run_estimate(const EstimateArgs& a) {
  int P = a.P;
  double fs = 1.0;
  double origin = 0.0;
  if (!a.manifest.empty()) {
    const auto m = wc::io::manifest_from_json(wc::io::read_json(a.manifest));
    if (P == 0) P = m.P;
    fs = m.fs;
    origin = m.time_origin;
  }
  if (a.fs) fs = *a.fs;
  if (a.time_origin) origin = *a.time_origin;
  wc::detail::require(P > 0, wc::Errc::invalid_argument, "the group split must be given with --P or --manifest");
  wc::detail::require(a.direction == "xy" || a.direction == "yx", wc::Errc::invalid_argument,
                      "--direction must be xy or yx");
  wc::detail::require(a.method == "wavelet" || a.method == "lsp", wc::Errc::invalid_argument,
                      "--method must be wavelet or lsp");
  wc::detail::require(fs > 0.0, wc::Errc::invalid_argument, "sampling rate must be positive");

  const wc::TimeSeriesPanel panel = wc::io::read_panel(a.input, P);
  Eigen::MatrixXd x = panel.x();
  Eigen::MatrixXd y = panel.y();
  if (a.direction == "yx") std::swap(x, y);

  json config{{"command", "estimate"}, {"method", a.method}, {"P", P}, {"direction", a.direction},
              {"epsilon", a.epsilon}, {"fs", fs}, {"time_origin", origin}, {"T", panel.length()}};
  wc::CancohField field;
  if (a.method == "lsp") {
    wc::detail::require(a.lag == 0, wc::Errc::invalid_argument, "--lag is only supported by the wavelet method");
    wc::StftConfig stft;
    stft.window = a.window;
    stft.hop = a.hop;
    stft.sigma = a.sigma;
    stft.fs = fs;
    const auto band = parse_band(a.band);
    config["band_hz"] = {band.lo, band.hi};
    config["stft"] = {{"window", stft.window}, {"hop", stft.hop}, {"sigma", stft.resolved_sigma()}};
    field = wc::lsp_cancoh(x, y, band, stft, a.epsilon);
    field.time_origin = origin;
  } else {
    wc::detail::require(a.lag >= 0, wc::Errc::invalid_argument, "--lag must be >= 0");
    const int usable = panel.length() - a.lag;
    wc::CancohConfig cfg;
    cfg.family = wc::make_filter(a.family).name;
    cfg.num_scales = a.num_scales > 0 ? a.num_scales : wc::default_num_scales(usable);
    cfg.half_width = a.half_width >= 0 ? a.half_width : wc::default_half_width(usable);
    cfg.epsilon = a.epsilon;
    cfg.scales = a.scales.empty() ? wc::default_scales(usable, cfg.num_scales) : a.scales;
    cfg.fs = fs;
    cfg.time_origin = origin;
    config["family"] = cfg.family;
    config["num_scales"] = cfg.num_scales;
    config["half_width"] = cfg.half_width;
    config["scales"] = cfg.scales;
    config["lag"] = a.lag;
    field = wc::causal_wavecancoh(x, y, a.lag, cfg);
    if (!a.dump_lws.empty()) {
      const auto system = wc::cached_system(cfg.family, cfg.num_scales);
      const auto lws = wc::estimate_lws(wc::lagged_joint(x, y, a.lag).values, *system, cfg.half_width);
      wc::io::write_atomic(a.dump_lws, wc::io::lws_csv(lws.values, wc::io::config_hash(config)));
    }
  }
  field.direction = a.direction;
  wc::io::write_field(a.out, field, config);
  std::cout << "wrote " << field.points.size() << " points to " << a.out << "\n";
}

// --------------------------------------------------------------------------

struct PermtestArgs {
  std::string dir_a;
  std::string dir_b;
  std::vector<int> scales;
  std::vector<double> probes;
  double window = 0.2;
  int n_perm = 1000;
  std::uint64_t seed = 0;
  bool corrected = false;
  bool with_distribution = false;
  std::string out = "permtest";
};

wc::TrialCollection load_collection(const std::string& dir, const std::string& label) {
  wc::TrialCollection c;
  c.label = label;
  std::string hash;
  for (const auto& p : csv_files(dir)) {
    auto loaded = wc::io::read_field(p);
    if (c.trials.empty()) hash = loaded.config_hash;
    wc::detail::require(loaded.config_hash == hash, wc::Errc::grid_mismatch,
                        p.string() + " was produced with a different configuration");
    c.trials.push_back(std::move(loaded.field));
  }
  return c;
}

void run_permtest(const PermtestArgs& a) {
  const auto group_a = load_collection(a.dir_a, "A");
  const auto group_b = load_collection(a.dir_b, "B");
  wc::detail::require(!a.probes.empty(), wc::Errc::invalid_argument, "at least one probe time is required");
  const std::vector<int> scales = a.scales.empty() ? group_a.trials.front().scales : a.scales;
  const json config{{"command", "permtest"}, {"scales", scales}, {"probes", a.probes}, {"window", a.window},
                    {"n_perm", a.n_perm}, {"seed", a.seed}, {"corrected", a.corrected},
                    {"trials_a", group_a.trials.size()}, {"trials_b", group_b.trials.size()}};
  const std::string hash = wc::io::config_hash(config);

  std::vector<wc::PermTestReport> reports(scales.size() * a.probes.size());
  for (std::size_t s = 0; s < scales.size(); ++s) {
    for (std::size_t i = 0; i < a.probes.size(); ++i) {
      wc::PermTestOptions opts;
      opts.n_perm = a.n_perm;
      opts.seed = wc::derive_seed(a.seed, static_cast<std::uint64_t>(scales[s]), i);
      opts.corrected = a.corrected;
      reports[s * a.probes.size() + i] = wc::perm_test(group_a, group_b, scales[s], a.probes[i], a.window, opts);
    }
  }
  json all = json::array();
  for (std::size_t s = 0; s < scales.size(); ++s) {
    for (std::size_t i = 0; i < a.probes.size(); ++i) {
      json r = wc::io::to_json(reports[s * a.probes.size() + i], a.with_distribution);
      r["config_hash"] = hash;
      wc::io::write_json(fs::path(a.out) / ("report_j" + std::to_string(scales[s]) + "_t" + std::to_string(i + 1) + ".json"), r);
      all.push_back(r);
    }
  }
  wc::io::write_json(fs::path(a.out) / "reports.json", json{{"config", config}, {"config_hash", hash}, {"reports", all}});
  wc::io::write_atomic(fs::path(a.out) / "summary.csv", wc::io::summary_table(scales, a.probes, reports, hash));
  std::cout << "wrote " << reports.size() << " report(s) to " << a.out << "\n";
}

// --------------------------------------------------------------------------

struct ReplicateArgs {
  std::string experiment;
  int reps = 0;
  std::uint64_t seed = 11;
  int length = 1024;
  int half_width = -1;
  std::vector<int> lags{0, 10, 20, 30, 40, 50};
  int delay = 20;
  std::string out = "replicate";
};

void run_replicate(const ReplicateArgs& a) {
  using wc::io::format_double;
  if (a.experiment == "fig2-left") {
    wc::MvlswExperimentConfig cfg;
    cfg.replicates = a.reps > 0 ? a.reps : 200;
    cfg.length = a.length;
    cfg.seed = a.seed;
    cfg.estimator.half_width = a.half_width;
    const auto res = wc::run_mvlsw_experiment(cfg);
    const json config{{"command", "replicate fig2-left"}, {"reps", cfg.replicates}, {"T", cfg.length},
                      {"seed", cfg.seed}, {"scale", cfg.scale}, {"num_scales", res.num_scales},
                      {"half_width", res.half_width}, {"level", cfg.level}};
    const std::string hash = wc::io::config_hash(config);
    std::string csv = csv_header(hash, "k,u,truth,mean,lo,hi");
    for (std::size_t k = 0; k < res.u.size(); ++k) {
      csv += std::to_string(k) + "," + format_double(res.u[k]) + "," + format_double(res.truth[k]) + "," +
             format_double(res.band.mean[k]) + "," + format_double(res.band.lo[k]) + "," + format_double(res.band.hi[k]) + "\n";
    }
    wc::io::write_atomic(fs::path(a.out) / "fig2_left.csv", csv);
    const double first = wc::interval_mean(res.band.mean, res.u, 0.1, 0.4);
    const double second = wc::interval_mean(res.band.mean, res.u, 0.6, 0.9);
    wc::io::write_json(fs::path(a.out) / "fig2_left.json",
                       json{{"config", config}, {"config_hash", hash}, {"mean_first", first}, {"mean_second", second},
                            {"truth_first", res.truth.front()}, {"truth_second", res.truth.back()}});
    std::cout << "mean rho on [0.1,0.4] = " << first << ", on [0.6,0.9] = " << second << "\n";
  } else if (a.experiment == "fig2-right") {
    wc::MixtureExperimentConfig cfg;
    cfg.replicates = a.reps > 0 ? a.reps : 50;
    cfg.length = a.length;
    cfg.seed = a.seed;
    cfg.estimator.half_width = a.half_width;
    const auto res = wc::run_mixture_experiment(cfg);
    const json config{{"command", "replicate fig2-right"}, {"reps", cfg.replicates}, {"T", cfg.length},
                      {"seed", cfg.seed}, {"scale", cfg.scale}, {"band_hz", {cfg.band.lo, cfg.band.hi}},
                      {"half_width", a.half_width}, {"stft", {{"window", cfg.stft.window}, {"hop", cfg.stft.hop}}}};
    const std::string hash = wc::io::config_hash(config);
    std::string wav = csv_header(hash, "k,u,mean");
    for (std::size_t k = 0; k < res.wavelet.u.size(); ++k) {
      wav += std::to_string(k) + "," + format_double(res.wavelet.u[k]) + "," + format_double(res.wavelet.mean[k]) + "\n";
    }
    std::string lsp = csv_header(hash, "center,u,mean");
    for (std::size_t k = 0; k < res.fourier.u.size(); ++k) {
      lsp += std::to_string(wc::stft_centers(cfg.length, cfg.stft)[k]) + "," + format_double(res.fourier.u[k]) + "," +
             format_double(res.fourier.mean[k]) + "\n";
    }
    wc::io::write_atomic(fs::path(a.out) / "fig2_right_wavecancoh.csv", wav);
    wc::io::write_atomic(fs::path(a.out) / "fig2_right_lsp.csv", lsp);
    wc::io::write_json(fs::path(a.out) / "fig2_right.json",
                       json{{"config", config}, {"config_hash", hash},
                            {"wavecancoh", {{"first_half", res.wavelet.first_half}, {"second_half", res.wavelet.second_half}}},
                            {"lsp", {{"first_half", res.fourier.first_half}, {"second_half", res.fourier.second_half}}}});
    std::cout << "wavecancoh drop = " << res.wavelet.drop() << ", lsp drop = " << res.fourier.drop() << "\n";
  } else if (a.experiment == "causal-sweep") {
    wc::LagSweepConfig cfg;
    cfg.replicates = a.reps > 0 ? a.reps : 20;
    cfg.length = a.length;
    cfg.seed = a.seed;
    cfg.lags = a.lags;
    cfg.delay = a.delay;
    cfg.estimator.half_width = a.half_width;
    const auto res = wc::run_lag_sweep(cfg);
    const json config{{"command", "replicate causal-sweep"}, {"reps", cfg.replicates}, {"T", cfg.length},
                      {"seed", cfg.seed}, {"lags", cfg.lags}, {"delay", cfg.delay}, {"num_scales", res.num_scales},
                      {"half_width", res.half_width}, {"scales", res.scales}};
    const std::string hash = wc::io::config_hash(config);
    std::string csv = csv_header(hash, "direction,scale,lag,mean_rho");
    for (const auto* dir : {"xy", "yx"}) {
      const auto& table = std::string(dir) == "xy" ? res.mean_xy : res.mean_yx;
      for (std::size_t s = 0; s < res.scales.size(); ++s) {
        for (std::size_t l = 0; l < res.lags.size(); ++l) {
          csv += std::string(dir) + "," + std::to_string(res.scales[s]) + "," + std::to_string(res.lags[l]) + "," +
                 format_double(table[s][l]) + "\n";
        }
      }
    }
    wc::io::write_atomic(fs::path(a.out) / "causal_sweep.csv", csv);
    wc::io::write_json(fs::path(a.out) / "causal_sweep.json", json{{"config", config}, {"config_hash", hash}});
    std::cout << "wrote lag table for " << res.scales.size() << " scale(s) and " << res.lags.size() << " lag(s)\n";
  } else {
    throw wc::Error(wc::Errc::invalid_argument, "unknown experiment '" + a.experiment +
                                                    "' (expected fig2-left, fig2-right or causal-sweep)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet canonical coherence for grouped nonstationary time series"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic panels");
  simulate->require_subcommand(1);
  auto* mvlsw = simulate->add_subcommand("mvlsw", "Multivariate locally stationary wavelet process");
  mvlsw->add_option("--builtin", sim.builtin, "Builtin specification (c1)");
  mvlsw->add_option("--spec", sim.spec_file, "JSON spectral specification");
  mvlsw->add_option("--family", sim.family, "Wavelet family (haar, d4)");
  mvlsw->add_option("--J", sim.num_scales, "Number of scales (default floor(log2 T))");
  mvlsw->add_option("--fs", sim.fs, "Sampling rate recorded in the manifest");
  auto* ar2 = simulate->add_subcommand("ar2mix", "Two-regime AR(2) mixture");
  for (auto* sub : {mvlsw, ar2}) {
    sub->add_option("--T", sim.length, "Series length")->check(CLI::Range(2, 1 << 24));
    sub->add_option("--reps", sim.reps, "Number of replicates")->check(CLI::PositiveNumber);
    sub->add_option("--seed", sim.seed, "Master seed");
    sub->add_option("--time-origin", sim.time_origin, "Seconds of sample 0");
    sub->add_option("--out", sim.out, "Output directory");
  }

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate the coherence field of a panel");
  estimate->add_option("--input", est.input, "Panel CSV")->required();
  estimate->add_option("--manifest", est.manifest, "Manifest JSON providing P, fs and time origin");
  estimate->add_option("--P", est.P, "Number of X channels");
  estimate->add_option("--out", est.out, "Output field CSV (metadata goes to the .json sidecar)");
  estimate->add_option("--method", est.method, "wavelet or lsp");
  estimate->add_option("--family", est.family, "Wavelet family (haar, d4)");
  estimate->add_option("--J", est.num_scales, "Number of scales");
  estimate->add_option("--M", est.half_width, "Smoothing half-width (default ceil(T^0.7 / 2))");
  estimate->add_option("--epsilon", est.epsilon, "Relative eigenvalue floor");
  estimate->add_option("--scales", est.scales, "Scales to evaluate")->delimiter(',');
  estimate->add_option("--lag", est.lag, "Lead of Y over X in samples");
  estimate->add_option("--direction", est.direction, "xy or yx");
  estimate->add_option("--band", est.band, "Frequency band LO:HI in Hz for --method lsp");
  estimate->add_option("--window", est.window, "STFT window length");
  estimate->add_option("--hop", est.hop, "STFT hop");
  estimate->add_option("--sigma", est.sigma, "Gaussian smoothing width over window centers (samples)");
  estimate->add_option("--fs", est.fs, "Sampling rate in Hz");
  estimate->add_option("--time-origin", est.time_origin, "Seconds of sample 0");
  estimate->add_option("--dump-lws", est.dump_lws, "Also write the LWS matrices to this CSV");

  PermtestArgs perm;
  auto* permtest = app.add_subcommand("permtest", "Windowed trial-permutation test between two conditions");
  permtest->add_option("--a", perm.dir_a, "Directory of condition A fields")->required();
  permtest->add_option("--b", perm.dir_b, "Directory of condition B fields")->required();
  permtest->add_option("--scales", perm.scales, "Scales to test (default: all in the fields)")->delimiter(',');
  permtest->add_option("--probes", perm.probes, "Probe times in seconds")->delimiter(',')->required();
  permtest->add_option("--window", perm.window, "Window width in seconds");
  permtest->add_option("--n-perm", perm.n_perm, "Number of permutations")->check(CLI::PositiveNumber);
  permtest->add_option("--seed", perm.seed, "Master seed");
  permtest->add_flag("--corrected", perm.corrected, "Report (1 + count) / (n_perm + 1)");
  permtest->add_flag("--with-distribution", perm.with_distribution, "Include permuted statistics in the reports");
  permtest->add_option("--out", perm.out, "Output directory");

  ReplicateArgs rep;
  auto* replicate = app.add_subcommand("replicate", "Run a replicate experiment");
  replicate->add_option("experiment", rep.experiment, "fig2-left, fig2-right or causal-sweep")->required();
  replicate->add_option("--reps", rep.reps, "Replicates (defaults 200, 50, 20)");
  replicate->add_option("--seed", rep.seed, "Master seed");
  replicate->add_option("--T", rep.length, "Series length");
  replicate->add_option("--M", rep.half_width, "Smoothing half-width");
  replicate->add_option("--lags", rep.lags, "Lags for causal-sweep")->delimiter(',');
  replicate->add_option("--delay", rep.delay, "True delay of the causal-sweep surrogate");
  replicate->add_option("--out", rep.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*mvlsw) run_simulate_mvlsw(sim);
    else if (*ar2) run_simulate_ar2(sim);
    else if (*estimate) run_estimate(est);
    else if (*permtest) run_permtest(perm);
    else if (*replicate) run_replicate(rep);
  } catch (const wc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}
