#ifndef WAVECANCOH_BASELINE_HPP
#define WAVECANCOH_BASELINE_HPP

/** @file
 * Comparison methods: lag-tau canonical correlation in the time domain and
 * a short-time Fourier ("LSP") localized canonical coherence.
 */

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "wavecancoh/cancoh.hpp"
#include "wavecancoh/error.hpp"
#include "wavecancoh/lws.hpp"
#include "wavecancoh/panel.hpp"

namespace wavecancoh {

// --------------------------------------------------------------------------
// Classical canonical correlation

struct ClassicalCcaResult {
  double rho = 0.0;      // sqrt(lambda), the unsquared canonical correlation
  double lambda = 0.0;   // largest eigenvalue, clamped to [0, 1]
  double lambda_raw = 0.0;
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  bool regularized = false;
};

struct LaggedCovariance {
  SpectralBlocks blocks;
  int samples = 0;
};

/// Centered sample covariance of the aligned pairs (X_t, Y_{t-tau}).
inline LaggedCovariance lagged_covariance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int tau) {
  detail::require(x.rows() == y.rows(), Errc::dimension_mismatch, "X and Y lengths differ");
  const auto T = static_cast<int>(x.rows());
  const int n = T - std::abs(tau);
  detail::require(n > x.cols() + y.cols(), Errc::insufficient_length,
                  "T - |tau| must exceed P + Q for lag " + std::to_string(tau));
  const int x0 = tau >= 0 ? tau : 0;
  const int y0 = tau >= 0 ? 0 : -tau;
  Eigen::MatrixXd xs = x.middleRows(x0, n);
  Eigen::MatrixXd ys = y.middleRows(y0, n);
  xs.rowwise() -= xs.colwise().mean();
  ys.rowwise() -= ys.colwise().mean();
  LaggedCovariance out;
  out.samples = n;
  out.blocks.xx = xs.transpose() * xs / n;
  out.blocks.yy = ys.transpose() * ys / n;
  out.blocks.xy = xs.transpose() * ys / n;
  out.blocks.yx = out.blocks.xy.transpose();
  return out;
}

/// rho(tau) = sqrt of the largest eigenvalue of Sigma_XX^-1 Sigma_XY Sigma_YY^-1 Sigma_YX.
/// Singular auto-covariances are retried once with a relative eigenvalue
/// floor on the joint covariance.
inline ClassicalCcaResult classical_cca(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int tau,
                                        double epsilon = 1e-8) {
  const LaggedCovariance cov = lagged_covariance(x, y, tau);
  ClassicalCcaResult out;
  CancohPoint pt;
  try {
    pt = cancoh_at(cov.blocks);
  } catch (const Error& e) {
    if (e.code() != Errc::conditioning) throw;
    const auto P = static_cast<int>(x.cols());
    Eigen::MatrixXd joint(cov.blocks.xx.rows() + cov.blocks.yy.rows(), cov.blocks.xx.cols() + cov.blocks.yy.cols());
    joint << cov.blocks.xx, cov.blocks.xy, cov.blocks.yx, cov.blocks.yy;
    try {
      pt = cancoh_from_joint(joint, P, epsilon);
    } catch (const Error&) {
      throw Error(Errc::rank_deficient, "degenerate sample covariance at lag " + std::to_string(tau));
    }
    out.regularized = true;
  }
  out.lambda_raw = pt.rho_raw;
  out.lambda = pt.rho;
  out.rho = std::sqrt(pt.rho);
  out.a = pt.a;
  out.b = pt.b;
  return out;
}

// --------------------------------------------------------------------------
// Short-time Fourier local spectra

struct StftConfig {
  int window = 128;      // samples
  double sigma = 0.0;    // Gaussian smoothing width over centers, samples; <= 0: window / 6
  int hop = 8;           // samples
  double fs = 1.0;       // Hz

  double resolved_sigma() const { return sigma > 0.0 ? sigma : window / 6.0; }
};

/// f(u, omega) on a (center, bin) grid. Each entry is a D x D Hermitian
/// matrix normalized so that, for white noise, the average of the two-sided
/// density over all bins equals the variance.
struct LocalSpectrum {
  std::vector<int> centers;        // sample index of each window center
  std::vector<double> freqs_hz;    // one-sided grid 0..fs/2
  int dim = 0;
  int window = 0;
  double sigma = 0.0;
  int hop = 0;
  double fs = 1.0;
  std::vector<Eigen::MatrixXcd> values;  // values[c * bins + b]

  std::size_t bins() const { return freqs_hz.size(); }
  const Eigen::MatrixXcd& at(std::size_t c, std::size_t b) const { return values[c * bins() + b]; }
};

/// Hann taper scaled to unit energy.
inline std::vector<double> unit_energy_hann(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  double energy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 0.5) / n);
    w[static_cast<std::size_t>(i)] = v;
    energy += v * v;
  }
  for (auto& v : w) v /= std::sqrt(energy);
  return w;
}

/// Sample index of each window center: start + window/2 for start = 0, hop, ...
inline std::vector<int> stft_centers(int T, const StftConfig& cfg) {
  std::vector<int> out;
  for (int start = 0; start + cfg.window <= T; start += cfg.hop) out.push_back(start + cfg.window / 2);
  return out;
}

inline LocalSpectrum stft_spectrum(const Eigen::MatrixXd& panel, const StftConfig& cfg) {
  const auto T = static_cast<int>(panel.rows());
  const auto D = static_cast<int>(panel.cols());
  detail::require(cfg.window >= 2 && cfg.window <= T, Errc::invalid_argument,
                  "STFT window must lie in [2, T]");
  detail::require(cfg.hop >= 1, Errc::invalid_argument, "STFT hop must be >= 1");
  detail::require(cfg.fs > 0.0, Errc::invalid_argument, "sampling rate must be positive");
  detail::require(panel.allFinite(), Errc::invalid_data, "panel contains non-finite values");

  const int N = cfg.window;
  const int bins = N / 2 + 1;
  LocalSpectrum out;
  out.dim = D;
  out.window = N;
  out.sigma = cfg.resolved_sigma();
  out.hop = cfg.hop;
  out.fs = cfg.fs;
  for (int b = 0; b < bins; ++b) out.freqs_hz.push_back(b * cfg.fs / N);

  const auto taper = unit_energy_hann(N);
  Eigen::FFT<double> fft;
  std::vector<double> buf(static_cast<std::size_t>(N));
  std::vector<std::complex<double>> spec;

  std::vector<Eigen::MatrixXcd> raw;
  out.centers = stft_centers(T, cfg);
  for (int center : out.centers) {
    const int start = center - N / 2;
    Eigen::MatrixXcd coeffs(bins, D);
    for (int d = 0; d < D; ++d) {
      const double mean = panel.col(d).segment(start, N).mean();
      for (int i = 0; i < N; ++i) buf[static_cast<std::size_t>(i)] = taper[static_cast<std::size_t>(i)] * (panel(start + i, d) - mean);
      fft.fwd(spec, buf);
      for (int b = 0; b < bins; ++b) coeffs(b, d) = spec[static_cast<std::size_t>(b)];
    }
    for (int b = 0; b < bins; ++b) {
      const Eigen::VectorXcd f = coeffs.row(b).transpose();
      raw.push_back(f * f.adjoint());
    }
  }

  const auto C = out.centers.size();
  const double sigma = out.sigma;
  out.values.assign(C * static_cast<std::size_t>(bins), Eigen::MatrixXcd::Zero(D, D));
  for (std::size_t c = 0; c < C; ++c) {
    double total = 0.0;
    for (std::size_t c2 = 0; c2 < C; ++c2) {
      const double dist = out.centers[c2] - out.centers[c];
      if (std::abs(dist) > 3.0 * sigma) continue;
      const double w = std::exp(-0.5 * dist * dist / (sigma * sigma));
      total += w;
      for (int b = 0; b < bins; ++b) out.values[c * bins + b] += w * raw[c2 * bins + b];
    }
    for (int b = 0; b < bins; ++b) {
      auto& m = out.values[c * bins + b];
      m /= total;
      m = 0.5 * (m + m.adjoint()).eval();
    }
  }
  return out;
}

/// Localized canonical coherence over a frequency band: the real part of the
/// band-averaged local spectrum goes through the same whitened solver as the
/// wavelet path. Scale label 0 carries the band.
inline CancohField lsp_cancoh(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, FrequencyBand band,
                              const StftConfig& cfg = {}, double epsilon = 1e-8) {
  detail::require(band.lo >= 0.0 && band.hi > band.lo && band.hi <= cfg.fs / 2.0, Errc::invalid_argument,
                  "band must satisfy 0 <= lo < hi <= fs/2");
  const TimeSeriesPanel panel = fuse(x, y);
  const LocalSpectrum spec = stft_spectrum(panel.values, cfg);
  std::vector<std::size_t> in_band;
  for (std::size_t b = 0; b < spec.bins(); ++b) {
    if (spec.freqs_hz[b] >= band.lo && spec.freqs_hz[b] <= band.hi) in_band.push_back(b);
  }
  detail::require(!in_band.empty(), Errc::invalid_argument, "no frequency bins fall inside the band");

  CancohField field;
  field.P = panel.P;
  field.Q = panel.Q();
  field.scales = {0};
  field.grid = spec.centers;
  field.length_ref = panel.length();
  field.family = "stft";
  field.half_width = 0;
  field.epsilon = epsilon;
  field.fs = cfg.fs;
  field.band = band;
  const int D = panel.channels();
  for (std::size_t c = 0; c < spec.centers.size(); ++c) {
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(D, D);
    for (auto b : in_band) avg += spec.at(c, b).real();
    avg /= static_cast<double>(in_band.size());
    try {
      field.points.push_back(cancoh_from_joint(avg, panel.P, epsilon));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " at center " + std::to_string(spec.centers[c]));
    }
  }
  return field;
}

}  // namespace wavecancoh

#endif  // WAVECANCOH_BASELINE_HPP
