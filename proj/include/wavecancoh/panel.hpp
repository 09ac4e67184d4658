#ifndef WAVECANCOH_PANEL_HPP
#define WAVECANCOH_PANEL_HPP

#include <Eigen/Dense>

#include <string>

#include "wavecancoh/error.hpp"

namespace wavecancoh {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A T x D multichannel record. Channels [0, P) form group X, the rest group Y.
struct TimeSeriesPanel {
  Matrix values;
  int P = 0;

  int length() const { return static_cast<int>(values.rows()); }
  int channels() const { return static_cast<int>(values.cols()); }
  int Q() const { return channels() - P; }

  auto x() const { return values.leftCols(P); }
  auto y() const { return values.rightCols(Q()); }
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Concatenates X (T x P) and Y (T x Q) column-wise.
inline TimeSeriesPanel fuse(const Matrix& x, const Matrix& y) {
  detail::require(x.rows() == y.rows(), Errc::dimension_mismatch,
                  "X and Y must have the same number of samples (" + std::to_string(x.rows()) +
                      " vs " + std::to_string(y.rows()) + ")");
  detail::require(x.cols() > 0 && y.cols() > 0, Errc::dimension_mismatch,
                  "both groups need at least one channel");
  TimeSeriesPanel panel;
  panel.values.resize(x.rows(), x.cols() + y.cols());
  panel.values << x, y;
  panel.P = static_cast<int>(x.cols());
  return panel;
}

}  // namespace wavecancoh

#endif  // WAVECANCOH_PANEL_HPP
