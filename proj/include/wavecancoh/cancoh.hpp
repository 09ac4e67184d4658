#ifndef WAVECANCOH_CANCOH_HPP
#define WAVECANCOH_CANCOH_HPP

/** @file
 * Scale-specific wavelet canonical coherence.
 *
 * For blocks (S_XX, S_XY, S_YY) the coherence is the largest eigenvalue of
 * S_XX^-1 S_XY S_YY^-1 S_YX. It is computed through whitening: with
 * Cholesky factors S_XX = L_X L_X^T and S_YY = L_Y L_Y^T, the top singular
 * triple (sigma, u, v) of K = L_X^-1 S_XY L_Y^-T gives rho_raw = sigma^2,
 * a = L_X^-T u and b = L_Y^-T v, which already satisfy a^T S_XX a = 1 and
 * b^T S_YY b = 1.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wavecancoh/error.hpp"
#include "wavecancoh/lws.hpp"
#include "wavecancoh/panel.hpp"
#include "wavecancoh/wavelets.hpp"

namespace wavecancoh {

struct ConditionFlags {
  double epsilon = 0.0;       // eigenvalue floor applied to the joint matrix
  int floored = 0;            // number of eigenvalues raised to the floor
  bool degenerate = false;    // top two singular values tie
};

struct CancohPoint {
  double rho = 0.0;
  double rho_raw = 0.0;
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  ConditionFlags flags;
};

inline constexpr double kTieTolerance = 1e-10;

namespace detail {

/// Largest-magnitude entry positive; ties go to the lowest index.
inline void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (v.size() > 0 && v[best] < 0.0) v = -v;
}

}  // namespace detail

inline CancohPoint cancoh_at(const Eigen::MatrixXd& s_xx, const Eigen::MatrixXd& s_xy,
                             const Eigen::MatrixXd& s_yx, const Eigen::MatrixXd& s_yy) {
  const auto P = s_xx.rows();
  const auto Q = s_yy.rows();
  detail::require(s_xx.cols() == P && s_yy.cols() == Q && s_xy.rows() == P && s_xy.cols() == Q &&
                      s_yx.rows() == Q && s_yx.cols() == P,
                  Errc::dimension_mismatch, "inconsistent spectral block shapes");
  detail::require(P > 0 && Q > 0, Errc::dimension_mismatch, "empty spectral block");
  (void)s_yx;  // S_YX = S_XY^T; only S_XY enters the whitened form

  Eigen::LLT<Eigen::MatrixXd> lx(s_xx);
  Eigen::LLT<Eigen::MatrixXd> ly(s_yy);
  detail::require(lx.info() == Eigen::Success, Errc::conditioning, "S_XX is not positive definite");
  detail::require(ly.info() == Eigen::Success, Errc::conditioning, "S_YY is not positive definite");

  // K = L_X^-1 S_XY L_Y^-T
  Eigen::MatrixXd k = lx.matrixL().solve(s_xy);
  k = ly.matrixL().solve(k.transpose()).transpose();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(k, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  detail::require(sigma.allFinite(), Errc::conditioning, "non-finite singular values");

  CancohPoint out;
  out.rho_raw = sigma[0] * sigma[0];
  out.rho = std::clamp(out.rho_raw, 0.0, 1.0);
  if (sigma.size() >= 2) out.flags.degenerate = (sigma[0] - sigma[1]) <= kTieTolerance * sigma[0];
  out.a = lx.matrixU().solve(Eigen::VectorXd(svd.matrixU().col(0)));
  out.b = ly.matrixU().solve(Eigen::VectorXd(svd.matrixV().col(0)));
  detail::fix_sign(out.a);
  detail::fix_sign(out.b);
  return out;
}

inline CancohPoint cancoh_at(const SpectralBlocks& blocks) {
  return cancoh_at(blocks.xx, blocks.xy, blocks.yx, blocks.yy);
}

struct CancohConfig {
  std::string family = "haar";
  int num_scales = 0;          // 0: floor(log2 T), capped at 14
  int half_width = -1;         // < 0: ceil(T^0.7 / 2)
  double epsilon = 1e-8;       // relative eigenvalue floor
  std::vector<int> scales;     // empty: every j with 2^j <= T/8
  double fs = 1.0;             // Hz, metadata only
  double time_origin = 0.0;    // seconds of sample 0, metadata only
};

/// Coherence for every requested scale on a shared time grid. Points are
/// stored scale-major. Fields from the Fourier baseline carry a frequency
/// band and the single scale label 0.
struct CancohField {
  int P = 0;
  int Q = 0;
  std::vector<int> scales;
  std::vector<int> grid;        // sample index of each time point
  double length_ref = 0.0;      // u = grid[i] / length_ref
  std::vector<CancohPoint> points;

  std::string family = "haar";
  int num_scales = 0;
  int half_width = 0;
  double epsilon = 0.0;
  int lag = 0;
  std::string direction = "xy";
  double fs = 1.0;
  double time_origin = 0.0;
  std::optional<FrequencyBand> band;

  std::size_t size() const { return grid.size(); }

  std::size_t scale_slot(int j) const {
    auto it = std::find(scales.begin(), scales.end(), j);
    detail::require(it != scales.end(), Errc::scale_out_of_range,
                    "scale " + std::to_string(j) + " is not present in the field");
    return static_cast<std::size_t>(it - scales.begin());
  }

  const CancohPoint& at(int j, std::size_t i) const { return points[scale_slot(j) * size() + i]; }

  double u(std::size_t i) const { return grid[i] / length_ref; }
  double seconds(std::size_t i) const { return time_origin + grid[i] / fs; }

  std::vector<double> rho_curve(int j) const {
    const std::size_t base = scale_slot(j) * size();
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = points[base + i].rho;
    return out;
  }
};

/// All j with 2^j <= T/8, limited to the available J.
inline std::vector<int> default_scales(int T, int J) {
  std::vector<int> out;
  for (int j = 1; j <= J && (std::int64_t{1} << j) * 8 <= T; ++j) out.push_back(j);
  return out;
}

/// Regularizes a joint spectral matrix, splits it and evaluates the coherence.
inline CancohPoint cancoh_from_joint(const Eigen::MatrixXd& joint, int P, double epsilon_factor) {
  Eigen::MatrixXd s = joint;
  ConditionFlags flags;
  flags.epsilon = relative_epsilon(s, epsilon_factor);
  flags.floored = floor_eigenvalues(s, flags.epsilon);
  CancohPoint pt = cancoh_at(partition(s, P));
  pt.flags.epsilon = flags.epsilon;
  pt.flags.floored = flags.floored;
  return pt;
}

namespace detail {

inline CancohField run_pipeline(const TimeSeriesPanel& panel, const CancohConfig& cfg, double length_ref,
                                int lag) {
  const int T = panel.length();
  detail::require(panel.P > 0 && panel.Q() > 0, Errc::invalid_argument, "both groups need channels");
  detail::require(cfg.epsilon >= 0.0, Errc::invalid_argument, "epsilon must be >= 0");
  const int J = cfg.num_scales > 0 ? cfg.num_scales : default_num_scales(T);
  const int M = cfg.half_width >= 0 ? cfg.half_width : default_half_width(T);
  std::vector<int> scales = cfg.scales.empty() ? default_scales(T, J) : cfg.scales;
  detail::require(!scales.empty(), Errc::invalid_argument, "no scales to evaluate for T = " + std::to_string(T));
  for (int j : scales) {
    detail::require(j >= 1 && j <= J, Errc::scale_out_of_range,
                    "requested scale " + std::to_string(j) + " outside 1.." + std::to_string(J));
  }

  const auto system = cached_system(cfg.family, J);
  const LwsEstimate lws = estimate_lws(panel.values, *system, M);

  CancohField field;
  field.P = panel.P;
  field.Q = panel.Q();
  field.scales = scales;
  field.grid.resize(static_cast<std::size_t>(T));
  for (int k = 0; k < T; ++k) field.grid[static_cast<std::size_t>(k)] = k;
  field.length_ref = length_ref;
  field.family = system->filter.name;
  field.num_scales = J;
  field.half_width = M;
  field.epsilon = cfg.epsilon;
  field.lag = lag;
  field.fs = cfg.fs;
  field.time_origin = cfg.time_origin;
  field.points.reserve(scales.size() * static_cast<std::size_t>(T));
  for (int j : scales) {
    for (int k = 0; k < T; ++k) {
      try {
        field.points.push_back(cancoh_from_joint(lws.values.matrix(j, k), panel.P, cfg.epsilon));
      } catch (const Error& e) {
        throw Error(e.code(), std::string(e.what()) + " at scale " + std::to_string(j) + ", k = " +
                                  std::to_string(k));
      }
    }
  }
  return field;
}

}  // namespace detail

/// Fuse, estimate LWS matrices, partition and solve, for every requested (j, k).
inline CancohField wavecancoh(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const CancohConfig& cfg = {}) {
  const TimeSeriesPanel panel = fuse(x, y);
  return detail::run_pipeline(panel, cfg, static_cast<double>(panel.length()), 0);
}

/// Coherence between X_t and Y_{t+h}, on t = 0..T-h-1 with u = t / T.
/// Defaults for J and M resolve against the lagged length T - h. The
/// reverse direction is obtained by swapping the arguments.
inline CancohField causal_wavecancoh(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int h,
                                     const CancohConfig& cfg = {}) {
  const TimeSeriesPanel panel = lagged_joint(x, y, h);
  return detail::run_pipeline(panel, cfg, static_cast<double>(x.rows()), h);
}

}  // namespace wavecancoh

#endif  // WAVECANCOH_CANCOH_HPP
