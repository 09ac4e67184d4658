#ifndef WAVECANCOH_EXPERIMENTS_HPP
#define WAVECANCOH_EXPERIMENTS_HPP

/** @file
 * Replicate drivers: simulate, estimate and aggregate. Replicate r always
 * uses derive_seed(seed, r), so results do not depend on the worker count.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wavecancoh/baseline.hpp"
#include "wavecancoh/cancoh.hpp"
#include "wavecancoh/error.hpp"
#include "wavecancoh/inference.hpp"
#include "wavecancoh/parallel.hpp"
#include "wavecancoh/rng.hpp"
#include "wavecancoh/simulate.hpp"
#include "wavecancoh/wavelets.hpp"

namespace wavecancoh {

/// Mean of curve[i] over grid points with lo <= u(i) <= hi.
inline double interval_mean(const std::vector<double>& curve, const std::vector<double>& u, double lo, double hi) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (u[i] >= lo && u[i] <= hi) {
      sum += curve[i];
      ++n;
    }
  }
  detail::require(n > 0, Errc::invalid_argument, "no grid points inside the averaging interval");
  return sum / n;
}

inline std::vector<double> column_mean(const std::vector<std::vector<double>>& curves) {
  std::vector<double> out(curves.front().size(), 0.0);
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.size(); ++i) out[i] += c[i];
  }
  for (auto& v : out) v /= static_cast<double>(curves.size());
  return out;
}

// --------------------------------------------------------------------------
// Block-switch MvLSW replicates

struct MvlswExperimentConfig {
  int replicates = 200;
  int length = 1024;
  int scale = 2;
  double level = 0.95;
  std::uint64_t seed = 11;
  CancohConfig estimator;  // scales are overridden by `scale`
  LwsSpec spec = builtin_c1_spec();
};

struct MvlswExperimentResult {
  std::vector<double> u;
  std::vector<double> truth;
  std::vector<std::vector<double>> curves;
  WaldBand band;
  int num_scales = 0;
  int half_width = 0;
};

inline MvlswExperimentResult run_mvlsw_experiment(const MvlswExperimentConfig& cfg) {
  detail::require(cfg.replicates >= 2, Errc::invalid_argument, "need at least 2 replicates");
  const int T = cfg.length;
  CancohConfig est = cfg.estimator;
  est.scales = {cfg.scale};
  if (est.num_scales <= 0) est.num_scales = default_num_scales(T);
  const auto system = cached_system(est.family, est.num_scales);

  MvlswExperimentResult out;
  out.curves.resize(static_cast<std::size_t>(cfg.replicates));
  parallel_for(out.curves.size(), [&](std::size_t r) {
    const auto sim = simulate_mvlsw(cfg.spec, T, *system, derive_seed(cfg.seed, r));
    const CancohField f = wavecancoh(sim.panel.x(), sim.panel.y(), est);
    out.curves[r] = f.rho_curve(cfg.scale);
  });
  for (int k = 0; k < T; ++k) {
    const double u = static_cast<double>(k) / T;
    out.u.push_back(u);
    out.truth.push_back(true_cancoh_from_spec(cfg.spec, cfg.scale, u));
  }
  out.band = wald_band(out.curves, cfg.level);
  out.num_scales = est.num_scales;
  out.half_width = est.half_width >= 0 ? est.half_width : default_half_width(T);
  return out;
}

// --------------------------------------------------------------------------
// AR(2) mixture: wavelet versus Fourier baseline

struct MixtureExperimentConfig {
  int replicates = 50;
  int length = 1024;
  int scale = 1;
  FrequencyBand band{25.0, 50.0};
  std::uint64_t seed = 5;
  CancohConfig estimator;
  StftConfig stft;
  Ar2MixtureSpec spec = Ar2MixtureSpec::standard();
};

struct MixtureCurves {
  std::vector<double> u;
  std::vector<double> mean;
  double first_half = 0.0;
  double second_half = 0.0;

  double drop() const { return first_half - second_half; }
};

struct MixtureExperimentResult {
  MixtureCurves wavelet;
  MixtureCurves fourier;
};

namespace detail {

inline void summarize_halves(MixtureCurves& c, double change_point) {
  double s1 = 0.0, s2 = 0.0;
  int n1 = 0, n2 = 0;
  for (std::size_t i = 0; i < c.u.size(); ++i) {
    if (c.u[i] < change_point) {
      s1 += c.mean[i];
      ++n1;
    } else {
      s2 += c.mean[i];
      ++n2;
    }
  }
  c.first_half = n1 > 0 ? s1 / n1 : 0.0;
  c.second_half = n2 > 0 ? s2 / n2 : 0.0;
}

}  // namespace detail

inline MixtureExperimentResult run_mixture_experiment(const MixtureExperimentConfig& cfg) {
  detail::require(cfg.replicates >= 1, Errc::invalid_argument, "need at least 1 replicate");
  const int T = cfg.length;
  CancohConfig est = cfg.estimator;
  est.scales = {cfg.scale};
  est.fs = cfg.spec.fs;
  StftConfig stft = cfg.stft;
  stft.fs = cfg.spec.fs;

  std::vector<std::vector<double>> wav(static_cast<std::size_t>(cfg.replicates));
  std::vector<std::vector<double>> four(static_cast<std::size_t>(cfg.replicates));
  std::vector<double> wav_u;
  std::vector<double> four_u;
  parallel_for(wav.size(), [&](std::size_t r) {
    const auto sim = simulate_ar2_mixture(cfg.spec, T, derive_seed(cfg.seed, r));
    wav[r] = wavecancoh(sim.x, sim.y, est).rho_curve(cfg.scale);
    four[r] = lsp_cancoh(sim.x, sim.y, cfg.band, stft, est.epsilon).rho_curve(0);
  });
  for (int k = 0; k < T; ++k) wav_u.push_back(static_cast<double>(k) / T);
  for (int c : stft_centers(T, stft)) four_u.push_back(static_cast<double>(c) / T);

  MixtureExperimentResult out;
  out.wavelet.u = wav_u;
  out.wavelet.mean = column_mean(wav);
  out.fourier.u = four_u;
  out.fourier.mean = column_mean(four);
  detail::summarize_halves(out.wavelet, cfg.spec.change_point);
  detail::summarize_halves(out.fourier, cfg.spec.change_point);
  return out;
}

// --------------------------------------------------------------------------
// Lag sweep on a shifted-copy surrogate

/// X is white noise in R^P; channel q of Y is channel (q mod P) of X delayed
/// by `delay` samples plus independent noise with standard deviation
/// `noise`. Samples before the start are drawn fresh.
struct ShiftedCopy {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
};

inline ShiftedCopy shifted_copy(int T, int P, int Q, int delay, double noise, std::uint64_t seed) {
  detail::require(T > delay && delay >= 0 && P > 0 && Q > 0, Errc::invalid_argument, "invalid surrogate shape");
  Stream rng(derive_seed(seed, 4));
  Eigen::MatrixXd ext(T + delay, P);
  for (Eigen::Index t = 0; t < ext.rows(); ++t) {
    for (int p = 0; p < P; ++p) ext(t, p) = rng.normal();
  }
  ShiftedCopy out;
  out.x = ext.bottomRows(T);
  out.y.resize(T, Q);
  for (int t = 0; t < T; ++t) {
    for (int q = 0; q < Q; ++q) out.y(t, q) = ext(t, q % P) + noise * rng.normal();
  }
  return out;
}

struct LagSweepConfig {
  std::vector<int> lags{0, 10, 20, 30, 40, 50};
  int replicates = 20;
  int length = 1024;
  int x_channels = 4;
  int y_channels = 5;
  int delay = 20;
  double noise = 1.0;
  double interior = 0.1;  // fraction trimmed from each end of u
  std::uint64_t seed = 3;
  CancohConfig estimator;
};

/// mean_xy[s][l] and mean_yx[s][l]: replicate mean of the interior-mean rho
/// at scale scales[s] and lag lags[l], for X -> Y and Y -> X.
struct LagSweepResult {
  std::vector<int> scales;
  std::vector<int> lags;
  int num_scales = 0;
  int half_width = 0;
  std::vector<std::vector<double>> mean_xy;
  std::vector<std::vector<double>> mean_yx;
};

/// Interior mean of a causal field at one scale, over lo <= u <= hi.
inline double interior_mean(const CancohField& f, int j, double lo, double hi) {
  const auto curve = f.rho_curve(j);
  std::vector<double> u(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) u[i] = f.u(i);
  return interval_mean(curve, u, lo, hi);
}

inline LagSweepResult run_lag_sweep(const LagSweepConfig& cfg) {
  detail::require(!cfg.lags.empty() && cfg.replicates >= 1, Errc::invalid_argument, "empty lag sweep");
  const int max_lag = *std::max_element(cfg.lags.begin(), cfg.lags.end());
  detail::require(*std::min_element(cfg.lags.begin(), cfg.lags.end()) >= 0 && max_lag < cfg.length,
                  Errc::invalid_argument, "lags must lie in [0, T)");
  const int usable = cfg.length - max_lag;
  CancohConfig est = cfg.estimator;
  if (est.num_scales <= 0) est.num_scales = default_num_scales(usable);
  if (est.half_width < 0) est.half_width = default_half_width(usable);
  if (est.scales.empty()) est.scales = default_scales(usable, est.num_scales);
  const double lo = cfg.interior;
  const double hi = static_cast<double>(usable) / cfg.length - cfg.interior;

  LagSweepResult out;
  out.scales = est.scales;
  out.lags = cfg.lags;
  out.num_scales = est.num_scales;
  out.half_width = est.half_width;
  const std::size_t S = est.scales.size();
  const std::size_t L = cfg.lags.size();
  std::vector<std::vector<double>> per_rep(static_cast<std::size_t>(cfg.replicates), std::vector<double>(2 * S * L));
  parallel_for(per_rep.size(), [&](std::size_t r) {
    const auto sur = shifted_copy(cfg.length, cfg.x_channels, cfg.y_channels, cfg.delay, cfg.noise, derive_seed(cfg.seed, r));
    for (std::size_t l = 0; l < L; ++l) {
      const auto fxy = causal_wavecancoh(sur.x, sur.y, cfg.lags[l], est);
      const auto fyx = causal_wavecancoh(sur.y, sur.x, cfg.lags[l], est);
      for (std::size_t s = 0; s < S; ++s) {
        per_rep[r][s * L + l] = interior_mean(fxy, est.scales[s], lo, hi);
        per_rep[r][S * L + s * L + l] = interior_mean(fyx, est.scales[s], lo, hi);
      }
    }
  });
  const auto mean = column_mean(per_rep);
  out.mean_xy.assign(S, std::vector<double>(L));
  out.mean_yx.assign(S, std::vector<double>(L));
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t l = 0; l < L; ++l) {
      out.mean_xy[s][l] = mean[s * L + l];
      out.mean_yx[s][l] = mean[S * L + s * L + l];
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// Trial collections for the permutation test

/// `trials` block-switch replicates with cross-block levels (first, second),
/// estimated at `scales`. Trial r uses derive_seed(seed, r).
inline TrialCollection simulate_trials(const std::string& label, double first, double second, int trials, int T,
                                       const CancohConfig& est, std::uint64_t seed) {
  const LwsSpec spec = block_switch_spec(first, second);
  CancohConfig cfg = est;
  if (cfg.num_scales <= 0) cfg.num_scales = default_num_scales(T);
  const auto system = cached_system(cfg.family, cfg.num_scales);
  TrialCollection out;
  out.label = label;
  out.trials.resize(static_cast<std::size_t>(trials));
  parallel_for(out.trials.size(), [&](std::size_t r) {
    const auto sim = simulate_mvlsw(spec, T, *system, derive_seed(seed, r));
    out.trials[r] = wavecancoh(sim.panel.x(), sim.panel.y(), cfg);
  });
  return out;
}

}  // namespace wavecancoh

#endif  // WAVECANCOH_EXPERIMENTS_HPP
