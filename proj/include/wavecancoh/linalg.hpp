#ifndef WAVECANCOH_LINALG_HPP
#define WAVECANCOH_LINALG_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <utility>

#include "wavecancoh/error.hpp"

namespace wavecancoh {

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

inline double min_eigenvalue(const Eigen::MatrixXd& s) {
  if (s.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(s), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Replaces s by V diag(max(lambda, floor)) V^T. Returns the number of
/// eigenvalues that were raised.
inline int floor_eigenvalues(Eigen::MatrixXd& s, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(s));
  Eigen::VectorXd lambda = es.eigenvalues();
  int raised = 0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < floor) {
      lambda[i] = floor;
      ++raised;
    }
  }
  if (raised == 0) return 0;
  const auto& v = es.eigenvectors();
  s = symmetrized(v * lambda.asDiagonal() * v.transpose());
  return raised;
}

/// Packed upper-triangle storage, row-major: (r, c) with r <= c lives at
/// r*D - r*(r-1)/2 + (c - r).
inline constexpr int packed_size(int D) { return D * (D + 1) / 2; }

inline constexpr int packed_index(int r, int c, int D) {
  if (r > c) std::swap(r, c);
  return r * D - r * (r - 1) / 2 + (c - r);
}

template <typename Packed>
Eigen::MatrixXd unpack_symmetric(const Packed& p, int D) {
  Eigen::MatrixXd m(D, D);
  int idx = 0;
  for (int r = 0; r < D; ++r) {
    for (int c = r; c < D; ++c, ++idx) {
      m(r, c) = p[idx];
      m(c, r) = p[idx];
    }
  }
  return m;
}

template <typename Packed>
void pack_symmetric(const Eigen::MatrixXd& m, Packed& out) {
  const auto D = static_cast<int>(m.rows());
  int idx = 0;
  for (int r = 0; r < D; ++r) {
    for (int c = r; c < D; ++c, ++idx) out[idx] = 0.5 * (m(r, c) + m(c, r));
  }
}

}  // namespace wavecancoh

#endif  // WAVECANCOH_LINALG_HPP
