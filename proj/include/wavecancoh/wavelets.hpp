#ifndef WAVECANCOH_WAVELETS_HPP
#define WAVECANCOH_WAVELETS_HPP

/** @file
 * Discrete non-decimated wavelet systems.
 *
 * Scales are 1-based throughout: scale 1 is the finest. The discrete wavelet
 * at scale j is the filter-bank cascade
 *
 *     psi_j = h^(1) * h^(2) * ... * h^(j-1) * g^(j)
 *
 * where x^(i) is filter x upsampled by 2^(i-1). Its support length is
 * (2^j - 1)(L - 1) + 1 for a length-L filter. The autocorrelation wavelet
 * Psi_j(tau) = sum_n psi_j[n] psi_j[n + tau] and the Gram matrix
 * A_jl = sum_tau Psi_j(tau) Psi_l(tau) are tabulated from these sequences,
 * so every supported family goes through the same construction.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "wavecancoh/error.hpp"
#include "wavecancoh/panel.hpp"

namespace wavecancoh {

struct WaveletFilter {
  std::string name;
  std::vector<double> lowpass;
  std::vector<double> highpass;

  int length() const { return static_cast<int>(lowpass.size()); }
};

/// Orthonormal filter for a named family. Supported: "haar", "d4"
/// (Daubechies extremal phase, four taps; alias "db2").
inline WaveletFilter make_filter(const std::string& name) {
  WaveletFilter f;
  if (name == "haar") {
    const double r = 1.0 / std::sqrt(2.0);
    f.name = "haar";
    f.lowpass = {r, r};
  } else if (name == "d4" || name == "db2") {
    const double s3 = std::sqrt(3.0);
    const double denom = 4.0 * std::sqrt(2.0);
    f.name = "d4";
    f.lowpass = {(1.0 + s3) / denom, (3.0 + s3) / denom, (3.0 - s3) / denom, (1.0 - s3) / denom};
  } else {
    throw Error(Errc::unsupported_family, "unsupported wavelet family '" + name + "'");
  }
  // Quadrature mirror: g[n] = (-1)^n h[L-1-n].
  const auto L = f.lowpass.size();
  f.highpass.resize(L);
  for (std::size_t n = 0; n < L; ++n) {
    f.highpass[n] = (n % 2 == 0 ? 1.0 : -1.0) * f.lowpass[L - 1 - n];
  }
  return f;
}

/// Symmetric lag sequence Psi_j(tau), stored for tau >= 0.
struct AutocorrelationWavelet {
  std::vector<double> half;

  int max_lag() const { return static_cast<int>(half.size()) - 1; }

  double operator()(int tau) const {
    const auto a = static_cast<std::size_t>(tau < 0 ? -tau : tau);
    return a < half.size() ? half[a] : 0.0;
  }
};

/// Immutable after construction; safe to share between threads.
struct WaveletSystem {
  WaveletFilter filter;
  int num_scales = 0;
  std::vector<std::vector<double>> psi;       // psi[j-1]
  std::vector<AutocorrelationWavelet> acw;    // acw[j-1]
  Eigen::MatrixXd gram;
  Eigen::MatrixXd gram_inv;

  const std::vector<double>& wavelet(int j) const { return psi.at(static_cast<std::size_t>(j - 1)); }
  int support(int j) const { return static_cast<int>(wavelet(j).size()); }
};

inline constexpr std::int64_t kDefaultMaxSupport = std::int64_t{1} << 20;
inline constexpr int kMaxDefaultScales = 14;

inline std::int64_t wavelet_support(int filter_length, int j) {
  return ((std::int64_t{1} << j) - 1) * (filter_length - 1) + 1;
}

/// floor(log2 T), capped at 14 and at least 1.
inline int default_num_scales(int T) {
  int J = 0;
  while ((std::int64_t{2} << J) <= T) ++J;
  return std::clamp(J, 1, kMaxDefaultScales);
}

namespace detail {

inline std::vector<double> convolve_upsampled(const std::vector<double>& x,
                                              const std::vector<double>& filter, std::size_t step) {
  const std::size_t n = x.size() + (filter.size() - 1) * step;
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t m = 0; m < filter.size(); ++m) out[i + m * step] += x[i] * filter[m];
  }
  return out;
}

inline AutocorrelationWavelet autocorrelate(const std::vector<double>& psi) {
  const std::size_t L = psi.size();
  AutocorrelationWavelet out;
  out.half.assign(L, 0.0);
  for (std::size_t tau = 0; tau < L; ++tau) {
    double s = 0.0;
    for (std::size_t n = 0; n + tau < L; ++n) s += psi[n] * psi[n + tau];
    out.half[tau] = s;
  }
  return out;
}

}  // namespace detail

inline WaveletSystem build_system(const std::string& filter_name, int J,
                                  std::int64_t max_support = kDefaultMaxSupport) {
  WaveletSystem sys;
  sys.filter = make_filter(filter_name);
  detail::require(J >= 1, Errc::invalid_argument, "number of scales must be >= 1");
  const int L = sys.filter.length();
  detail::require(J < 40 && wavelet_support(L, J) <= max_support, Errc::scale_overflow,
                  "wavelet support at scale " + std::to_string(J) + " exceeds the cap of " +
                      std::to_string(max_support) + " samples");
  sys.num_scales = J;

  std::vector<double> cascade{1.0};
  for (int j = 1; j <= J; ++j) {
    const std::size_t step = std::size_t{1} << (j - 1);
    sys.psi.push_back(detail::convolve_upsampled(cascade, sys.filter.highpass, step));
    cascade = detail::convolve_upsampled(cascade, sys.filter.lowpass, step);
  }
  for (const auto& p : sys.psi) sys.acw.push_back(detail::autocorrelate(p));

  sys.gram.resize(J, J);
  for (int j = 0; j < J; ++j) {
    for (int l = j; l < J; ++l) {
      const auto& a = sys.acw[j].half;
      const auto& b = sys.acw[l].half;
      const std::size_t n = std::min(a.size(), b.size());
      double s = a[0] * b[0];
      for (std::size_t tau = 1; tau < n; ++tau) s += 2.0 * a[tau] * b[tau];
      sys.gram(j, l) = s;
      sys.gram(l, j) = s;
    }
  }
  sys.gram_inv = sys.gram.llt().solve(Eigen::MatrixXd::Identity(J, J));
  return sys;
}

/// Process-wide cache of built systems keyed by (family, J).
inline std::shared_ptr<const WaveletSystem> cached_system(const std::string& filter_name, int J) {
  static std::mutex mu;
  static std::map<std::pair<std::string, int>, std::shared_ptr<const WaveletSystem>> cache;
  const auto canonical = make_filter(filter_name).name;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{canonical, J}];
  if (!slot) slot = std::make_shared<const WaveletSystem>(build_system(canonical, J));
  return slot;
}

inline const AutocorrelationWavelet& autocorrelation_wavelet(const WaveletSystem& system, int j) {
  detail::require(j >= 1 && j <= system.num_scales, Errc::scale_out_of_range,
                  "scale " + std::to_string(j) + " outside 1.." + std::to_string(system.num_scales));
  return system.acw[static_cast<std::size_t>(j - 1)];
}

/// Wavelet coefficients d_{j,k} for every scale and every shift k in [0, T).
struct CoefficientField {
  std::vector<Eigen::MatrixXd> scales;  // scales[j-1] is T x D

  int num_scales() const { return static_cast<int>(scales.size()); }
  int length() const { return scales.empty() ? 0 : static_cast<int>(scales.front().rows()); }
  int channels() const { return scales.empty() ? 0 : static_cast<int>(scales.front().cols()); }
};

/// Non-decimated transform with periodic boundaries:
/// d_{j,k} = sum_n psi_j[n] Z_{(k+n) mod T}, summed in ascending n.
inline CoefficientField ndwt(const Eigen::MatrixXd& z, const WaveletSystem& system) {
  const auto T = z.rows();
  const int J = system.num_scales;
  detail::require(T >= (Eigen::Index{1} << J), Errc::insufficient_length,
                  "series length " + std::to_string(T) + " is shorter than 2^J = " +
                      std::to_string(1LL << J));
  detail::require(z.allFinite(), Errc::invalid_data, "panel contains non-finite values");

  CoefficientField out;
  out.scales.reserve(static_cast<std::size_t>(J));
  for (int j = 1; j <= J; ++j) {
    const auto& psi = system.wavelet(j);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(T, z.cols());
    for (std::size_t n = 0; n < psi.size(); ++n) {
      const Eigen::Index s = static_cast<Eigen::Index>(n % static_cast<std::size_t>(T));
      const double w = psi[n];
      d.topRows(T - s).noalias() += w * z.bottomRows(T - s);
      if (s > 0) d.bottomRows(s).noalias() += w * z.topRows(s);
    }
    out.scales.push_back(std::move(d));
  }
  return out;
}

inline CoefficientField ndwt(const TimeSeriesPanel& panel, const WaveletSystem& system) {
  return ndwt(panel.values, system);
}

struct FrequencyBand {
  double lo = 0.0;
  double hi = 0.0;
};

/// Approximate frequency interval [fs / 2^(j+1), fs / 2^j] covered by scale j.
inline FrequencyBand scale_to_band(int j, double fs) {
  detail::require(fs > 0.0 && std::isfinite(fs), Errc::invalid_argument, "sampling rate must be positive");
  detail::require(j >= 1, Errc::scale_out_of_range, "scale must be >= 1");
  return {std::ldexp(fs, -(j + 1)), std::ldexp(fs, -j)};
}

/// Decimated filter-bank pyramid; level j output is stored at index j-1.
struct DwtPyramid {
  std::vector<Eigen::VectorXd> approx;
  std::vector<Eigen::VectorXd> detail;
};

inline DwtPyramid dwt_pyramid(const Eigen::VectorXd& signal, const WaveletSystem& system) {
  const int J = system.num_scales;
  const auto T = signal.size();
  const Eigen::Index block = Eigen::Index{1} << J;
  detail::require(T > 0 && T % block == 0, Errc::invalid_length,
                  "signal length " + std::to_string(T) + " is not a multiple of 2^J = " +
                      std::to_string(block));
  const auto& h = system.filter.lowpass;
  const auto& g = system.filter.highpass;
  DwtPyramid out;
  Eigen::VectorXd prev = signal;
  for (int j = 1; j <= J; ++j) {
    const auto N = prev.size();
    Eigen::VectorXd a(N / 2);
    Eigen::VectorXd d(N / 2);
    for (Eigen::Index n = 0; n < N / 2; ++n) {
      double sa = 0.0;
      double sd = 0.0;
      for (std::size_t k = 0; k < h.size(); ++k) {
        auto idx = (2 * n - static_cast<Eigen::Index>(k)) % N;
        if (idx < 0) idx += N;
        sa += h[k] * prev[idx];
        sd += g[k] * prev[idx];
      }
      a[n] = sa;
      d[n] = sd;
    }
    out.approx.push_back(a);
    out.detail.push_back(d);
    prev = std::move(a);
  }
  return out;
}

}  // namespace wavecancoh

#endif  // WAVECANCOH_WAVELETS_HPP
