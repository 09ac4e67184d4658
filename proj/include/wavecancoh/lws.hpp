#ifndef WAVECANCOH_LWS_HPP
#define WAVECANCOH_LWS_HPP

/** @file
 * Local wavelet spectral (LWS) matrix estimation.
 *
 * Pipeline: raw periodogram I_{l,k} = d_{l,k} d_{l,k}^T, rectangular
 * smoothing over k with half-width M (periodic wrap), then bias correction
 * S_{j,k} = sum_l (A^-1)_{jl} I~_{l,k}. Corrected matrices can be indefinite;
 * regularize() floors eigenvalues before any block inversion.
 *
 * Storage is one packed upper triangle per (j, k): a full field needs
 * 8 * J * T * D(D+1)/2 bytes (J=10, T=1024, D=10: 4.5 MB).
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wavecancoh/error.hpp"
#include "wavecancoh/linalg.hpp"
#include "wavecancoh/panel.hpp"
#include "wavecancoh/wavelets.hpp"

namespace wavecancoh {

/// J x T grid of D x D symmetric matrices in packed form.
class SymmetricField {
 public:
  SymmetricField() = default;
  SymmetricField(int num_scales, int length, int dim)
      : J_(num_scales), T_(length), D_(dim),
        data_(static_cast<std::size_t>(num_scales) * length * packed_size(dim), 0.0) {}

  int num_scales() const { return J_; }
  int length() const { return T_; }
  int dim() const { return D_; }

  Eigen::Map<Eigen::VectorXd> packed(int j, int k) {
    return Eigen::Map<Eigen::VectorXd>(data_.data() + offset(j, k), packed_size(D_));
  }
  Eigen::Map<const Eigen::VectorXd> packed(int j, int k) const {
    return Eigen::Map<const Eigen::VectorXd>(data_.data() + offset(j, k), packed_size(D_));
  }

  Eigen::MatrixXd matrix(int j, int k) const { return unpack_symmetric(packed(j, k), D_); }
  void set_matrix(int j, int k, const Eigen::MatrixXd& m) {
    auto p = packed(j, k);
    pack_symmetric(m, p);
  }

  const std::vector<double>& raw() const { return data_; }

 private:
  std::size_t offset(int j, int k) const {
    return (static_cast<std::size_t>(j - 1) * T_ + static_cast<std::size_t>(k)) * packed_size(D_);
  }

  int J_ = 0;
  int T_ = 0;
  int D_ = 0;
  std::vector<double> data_;
};

struct PeriodogramField {
  enum class Kind { raw, smoothed };

  SymmetricField values;
  Kind kind = Kind::raw;
  int half_width = 0;
};

struct LwsEstimate {
  SymmetricField values;
  int half_width = 0;
  double epsilon = 0.0;
  bool regularized = false;
};

/// ceil(T^0.7 / 2), with values within rounding of an integer taken as
/// that integer (T = 1024 gives exactly 64).
inline int default_half_width(int T) {
  const double v = std::pow(static_cast<double>(T), 0.7) / 2.0;
  const double nearest = std::round(v);
  if (std::abs(v - nearest) <= 1e-9 * std::max(1.0, v)) return static_cast<int>(nearest);
  return static_cast<int>(std::ceil(v));
}

inline PeriodogramField raw_periodogram(const CoefficientField& d) {
  const int J = d.num_scales();
  const int T = d.length();
  const int D = d.channels();
  for (const auto& s : d.scales) {
    detail::require(s.allFinite(), Errc::invalid_data, "wavelet coefficients contain non-finite values");
  }
  PeriodogramField out{SymmetricField(J, T, D), PeriodogramField::Kind::raw, 0};
  for (int j = 1; j <= J; ++j) {
    const auto& coeffs = d.scales[static_cast<std::size_t>(j - 1)];
    for (int k = 0; k < T; ++k) {
      auto p = out.values.packed(j, k);
      int idx = 0;
      for (int r = 0; r < D; ++r) {
        const double dr = coeffs(k, r);
        for (int c = r; c < D; ++c, ++idx) p[idx] = dr * coeffs(k, c);
      }
    }
  }
  return out;
}

/// Rectangular smoothing, I~_{l,k} = (2M+1)^-1 sum_{m=-M..M} I_{l,(k+m) mod T}.
/// Each window is summed directly in ascending m.
inline PeriodogramField smooth(const PeriodogramField& in, int M) {
  const int T = in.values.length();
  detail::require(M >= 0, Errc::invalid_argument, "smoothing half-width must be >= 0");
  detail::require(2 * static_cast<long long>(M) + 1 <= T, Errc::window_range,
                  "smoothing window 2M+1 = " + std::to_string(2LL * M + 1) +
                      " is longer than the series (" + std::to_string(T) + ")");
  PeriodogramField out{in.values, PeriodogramField::Kind::smoothed, M};
  if (M == 0) return out;
  const int J = in.values.num_scales();
  const double width = 2.0 * M + 1.0;
  Eigen::VectorXd acc(packed_size(in.values.dim()));
  for (int j = 1; j <= J; ++j) {
    for (int k = 0; k < T; ++k) {
      acc.setZero();
      for (int m = -M; m <= M; ++m) {
        int idx = (k + m) % T;
        if (idx < 0) idx += T;
        acc += in.values.packed(j, idx);
      }
      out.values.packed(j, k) = acc / width;
    }
  }
  return out;
}

/// Gram-inverse bias correction. The output is symmetric but not necessarily PSD.
inline LwsEstimate correct(const PeriodogramField& smoothed, const WaveletSystem& system) {
  const int J = smoothed.values.num_scales();
  detail::require(J == system.num_scales, Errc::dimension_mismatch,
                  "periodogram has " + std::to_string(J) + " scales but the wavelet system has " +
                      std::to_string(system.num_scales));
  const int T = smoothed.values.length();
  LwsEstimate out{SymmetricField(J, T, smoothed.values.dim()), smoothed.half_width, 0.0, false};
  for (int j = 1; j <= J; ++j) {
    for (int k = 0; k < T; ++k) {
      auto dst = out.values.packed(j, k);
      for (int l = 1; l <= J; ++l) dst += system.gram_inv(j - 1, l - 1) * smoothed.values.packed(l, k);
    }
  }
  return out;
}

/// Eigenvalue floor at epsilon. When epsilon = 0 and the input is already
/// PSD the matrix is returned unchanged.
inline Eigen::MatrixXd regularize_matrix(const Eigen::MatrixXd& s, double epsilon) {
  detail::require(epsilon >= 0.0, Errc::invalid_argument, "epsilon must be >= 0");
  Eigen::MatrixXd out = s;
  floor_eigenvalues(out, epsilon);
  return out;
}

/// epsilon = factor * |mean diagonal|, or factor itself when the diagonal averages to zero.
inline double relative_epsilon(const Eigen::MatrixXd& s, double factor) {
  const double scale = std::abs(s.diagonal().mean());
  return scale > 0.0 ? factor * scale : factor;
}

inline LwsEstimate regularize(const LwsEstimate& s, double epsilon) {
  detail::require(epsilon >= 0.0, Errc::invalid_argument, "epsilon must be >= 0");
  LwsEstimate out = s;
  for (int j = 1; j <= s.values.num_scales(); ++j) {
    for (int k = 0; k < s.values.length(); ++k) {
      Eigen::MatrixXd m = s.values.matrix(j, k);
      if (floor_eigenvalues(m, epsilon) > 0) out.values.set_matrix(j, k, m);
    }
  }
  out.epsilon = epsilon;
  out.regularized = true;
  return out;
}

struct SpectralBlocks {
  Eigen::MatrixXd xx;
  Eigen::MatrixXd xy;
  Eigen::MatrixXd yx;
  Eigen::MatrixXd yy;
};

inline SpectralBlocks partition(const Eigen::MatrixXd& s, int P) {
  const auto D = static_cast<int>(s.rows());
  detail::require(s.rows() == s.cols(), Errc::dimension_mismatch, "spectral matrix must be square");
  detail::require(P > 0 && P < D, Errc::invalid_argument,
                  "group split P = " + std::to_string(P) + " must lie in 1.." + std::to_string(D - 1));
  const int Q = D - P;
  return {s.topLeftCorner(P, P), s.topRightCorner(P, Q), s.bottomLeftCorner(Q, P),
          s.bottomRightCorner(Q, Q)};
}

/// Row t is (X_t, Y_{t+h}) for t = 0..T-h-1.
inline TimeSeriesPanel lagged_joint(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int h) {
  detail::require(x.rows() == y.rows(), Errc::dimension_mismatch, "X and Y lengths differ");
  const auto T = static_cast<int>(x.rows());
  detail::require(h >= 0 && h < T, Errc::invalid_argument,
                  "lag " + std::to_string(h) + " must lie in [0, " + std::to_string(T) + ")");
  return fuse(x.topRows(T - h), y.bottomRows(T - h));
}

/// Raw periodogram, smoothing and correction in one call (no regularization).
/// Stages run one at a time so at most two J x T packed fields are alive.
inline LwsEstimate estimate_lws(const Eigen::MatrixXd& z, const WaveletSystem& system, int M) {
  PeriodogramField p = raw_periodogram(ndwt(z, system));
  p = smooth(p, M);
  return correct(p, system);
}

}  // namespace wavecancoh

#endif  // WAVECANCOH_LWS_HPP
