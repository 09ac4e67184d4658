#ifndef WAVECANCOH_SIMULATE_HPP
#define WAVECANCOH_SIMULATE_HPP

/** @file
 * Simulators with known ground-truth coherence.
 *
 * - MvLSW processes Z_t = sum_j sum_k V_j(k/T) psi_{j,k}(t) z_{j,k} built from
 *   a piecewise-constant spectral specification S_j(u) = V_j(u) V_j(u)^T.
 * - A two-regime mixture of latent AR(2) sources whose fifth (gamma)
 *   component is partially shared between the groups in the first regime.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "wavecancoh/error.hpp"
#include "wavecancoh/linalg.hpp"
#include "wavecancoh/panel.hpp"
#include "wavecancoh/rng.hpp"
#include "wavecancoh/wavelets.hpp"

namespace wavecancoh {

// --------------------------------------------------------------------------
// Spectral specifications

/// S_j(u) = matrix for u_start <= u < next piece's u_start.
struct SpectrumPiece {
  double u_start = 0.0;
  Eigen::MatrixXd matrix;
};

struct LwsSpec {
  std::string id;
  int P = 0;
  int Q = 0;
  int num_scales = 0;
  std::map<int, std::vector<SpectrumPiece>> scales;

  int dim() const { return P + Q; }

  /// Zero for scales without pieces.
  Eigen::MatrixXd at(int j, double u) const {
    auto it = scales.find(j);
    if (it == scales.end() || it->second.empty()) return Eigen::MatrixXd::Zero(dim(), dim());
    const auto& pieces = it->second;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (pieces[i].u_start <= u) idx = i;
    }
    return pieces[idx].matrix;
  }

  void validate() const {
    detail::require(P > 0 && Q > 0, Errc::invalid_argument, "spec needs P > 0 and Q > 0");
    detail::require(num_scales >= 1, Errc::invalid_argument, "spec needs at least one scale");
    const int D = dim();
    for (const auto& [j, pieces] : scales) {
      detail::require(j >= 1 && j <= num_scales, Errc::scale_out_of_range,
                      "spec scale " + std::to_string(j) + " outside 1.." + std::to_string(num_scales));
      double prev = -1.0;
      for (const auto& piece : pieces) {
        detail::require(piece.u_start > prev && piece.u_start >= 0.0 && piece.u_start < 1.0,
                        Errc::invalid_argument, "spectrum breakpoints must increase within [0, 1)");
        prev = piece.u_start;
        const auto& m = piece.matrix;
        detail::require(m.rows() == D && m.cols() == D, Errc::dimension_mismatch,
                        "spectral matrix must be " + std::to_string(D) + " x " + std::to_string(D));
        detail::require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12, Errc::invalid_argument,
                        "spectral matrix is not symmetric");
        for (int r = 0; r < P; ++r) {
          for (int c = P; c < D; ++c) {
            detail::require(m(r, c) == m(c, r), Errc::invalid_argument,
                            "cross block S_XY must equal S_YX^T exactly");
          }
        }
        detail::require(min_eigenvalue(m) >= -1e-10, Errc::not_psd, "spectral matrix is not PSD");
      }
      detail::require(!pieces.empty() && pieces.front().u_start == 0.0, Errc::invalid_argument,
                      "the first spectrum piece must start at u = 0");
    }
  }
};

/// Six-by-four block-switch specification: non-zero only at scale 2, with the
/// cross-block level c = first for u < 0.5 and c = second for u >= 0.5.
inline LwsSpec block_switch_spec(double first, double second) {
  Eigen::MatrixXd sxx = 8.0 * Eigen::MatrixXd::Identity(6, 6);
  for (auto [r, c] : {std::pair{1, 2}, {1, 3}, {2, 6}, {4, 5}}) {
    sxx(r - 1, c - 1) = 1.0;
    sxx(c - 1, r - 1) = 1.0;
  }
  Eigen::MatrixXd syy = 6.0 * Eigen::MatrixXd::Identity(4, 4);
  for (auto [r, c] : {std::pair{1, 3}, {2, 3}, {2, 4}}) {
    syy(r - 1, c - 1) = 1.0;
    syy(c - 1, r - 1) = 1.0;
  }
  auto joint = [&](double level) {
    Eigen::MatrixXd sxy = Eigen::MatrixXd::Zero(6, 4);
    for (auto [r, c] : {std::pair{1, 1}, {1, 4}, {2, 2}, {3, 4}, {4, 1}}) sxy(r - 1, c - 1) = level;
    Eigen::MatrixXd s(10, 10);
    s << sxx, sxy, sxy.transpose(), syy;
    return s;
  };
  LwsSpec spec;
  spec.id = (first == 1.0 && second == 2.0) ? "c1" : "block-switch";
  spec.P = 6;
  spec.Q = 4;
  spec.num_scales = 2;
  spec.scales[2] = {{0.0, joint(first)}, {0.5, joint(second)}};
  return spec;
}

/// The reference case c = 1 then c = 2.
inline LwsSpec builtin_c1_spec() { return block_switch_spec(1.0, 2.0); }

/// Lower-triangular V with V V^T = S. Plain Cholesky when S is positive
/// definite; otherwise the eigenvalue-floored square root Q sqrt(L) is
/// re-triangularized by an unpivoted QR of its transpose.
inline Eigen::MatrixXd transfer_from_spectrum(const Eigen::MatrixXd& s) {
  detail::require(s.rows() == s.cols(), Errc::dimension_mismatch, "spectral matrix must be square");
  const auto D = s.rows();
  if (D == 0) return s;
  detail::require((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-10, Errc::invalid_argument,
                  "spectral matrix is not symmetric");
  const Eigen::MatrixXd sym = symmetrized(s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  detail::require(es.eigenvalues().minCoeff() >= -1e-10, Errc::not_psd,
                  "spectral matrix has a negative eigenvalue");

  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() == Eigen::Success) {
    Eigen::MatrixXd v = llt.matrixL();
    if (v.allFinite() && ((v * v.transpose() - sym).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + sym.cwiseAbs().maxCoeff()))) {
      return v;
    }
  }

  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd square_root = es.eigenvectors() * root.asDiagonal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(square_root.transpose());
  Eigen::MatrixXd v = qr.matrixQR().triangularView<Eigen::Upper>();
  v.transposeInPlace();
  for (Eigen::Index c = 0; c < D; ++c) {
    // Column sign flips leave V V^T unchanged; make the leading entry positive.
    Eigen::Index lead = c;
    while (lead < D && std::abs(v(lead, c)) <= 1e-300) ++lead;
    if (lead < D && v(lead, c) < 0.0) v.col(c) = -v.col(c);
  }
  return v;
}

struct MvlswRealization {
  TimeSeriesPanel panel;
  std::string spec_id;
  std::uint64_t seed = 0;
};

/// Innovations are independent standard Gaussian vectors; shifts k run from
/// -(L_j - 1) to T - 1 so every sample receives a full wavelet overlap, and
/// V_j is evaluated at u = max(k, 0) / T.
inline MvlswRealization simulate_mvlsw(const LwsSpec& spec, int T, const WaveletSystem& system,
                                       std::uint64_t seed) {
  spec.validate();
  detail::require(spec.num_scales <= system.num_scales, Errc::scale_overflow,
                  "spec uses " + std::to_string(spec.num_scales) + " scales but the wavelet system has " +
                      std::to_string(system.num_scales));
  detail::require(T >= (1LL << system.num_scales), Errc::insufficient_length,
                  "T = " + std::to_string(T) + " is shorter than 2^J");
  const int D = spec.dim();

  MvlswRealization out;
  out.panel.values = Eigen::MatrixXd::Zero(T, D);
  out.panel.P = spec.P;
  out.spec_id = spec.id;
  out.seed = seed;

  Eigen::VectorXd z(D);
  for (const auto& [j, pieces] : spec.scales) {
    if (pieces.empty()) continue;
    std::vector<Eigen::MatrixXd> transfer;
    for (const auto& piece : pieces) transfer.push_back(transfer_from_spectrum(piece.matrix));
    const auto& psi = system.wavelet(j);
    const int L = static_cast<int>(psi.size());
    Stream rng(derive_seed(seed, 1, static_cast<std::uint64_t>(j)));
    std::size_t piece = 0;
    for (int k = -(L - 1); k < T; ++k) {
      const double u = static_cast<double>(std::max(k, 0)) / T;
      while (piece + 1 < pieces.size() && pieces[piece + 1].u_start <= u) ++piece;
      for (int d = 0; d < D; ++d) z[d] = rng.normal();
      const Eigen::VectorXd v = transfer[piece] * z;
      for (int n = 0; n < L; ++n) {
        const int t = k + n;
        if (t >= 0 && t < T) out.panel.values.row(t) += psi[static_cast<std::size_t>(n)] * v.transpose();
      }
    }
  }
  return out;
}

/// Largest eigenvalue of S_XX^-1 S_XY S_YY^-1 S_YX on the exact specification,
/// by a dense non-symmetric eigensolver.
inline double true_cancoh_from_spec(const LwsSpec& spec, int j, double u) {
  const Eigen::MatrixXd s = spec.at(j, u);
  const int P = spec.P;
  const int Q = spec.Q;
  const Eigen::MatrixXd sxx = s.topLeftCorner(P, P);
  const Eigen::MatrixXd syy = s.bottomRightCorner(Q, Q);
  const Eigen::MatrixXd sxy = s.topRightCorner(P, Q);
  const Eigen::MatrixXd syx = s.bottomLeftCorner(Q, P);
  auto nonsingular = [](const Eigen::MatrixXd& m) {
    const double scale = m.cwiseAbs().maxCoeff();
    return scale > 0.0 && min_eigenvalue(m) > 1e-12 * scale;
  };
  detail::require(nonsingular(sxx) && nonsingular(syy), Errc::rank_deficient,
                  "auto-spectral blocks are singular at scale " + std::to_string(j));
  const Eigen::MatrixXd ma = sxx.partialPivLu().solve(sxy) * syy.partialPivLu().solve(syx);
  Eigen::EigenSolver<Eigen::MatrixXd> es(ma, false);
  return es.eigenvalues().real().maxCoeff();
}

// --------------------------------------------------------------------------
// AR(2) mixtures

struct Ar2Coefficients {
  double phi1 = 0.0;
  double phi2 = 0.0;
};

/// phi1 = 2 cos(2 pi eta) e^-s, phi2 = -e^-2s.
inline Ar2Coefficients ar2_coefficients(double eta, double s) {
  detail::require(eta > 0.0 && eta < 0.5, Errc::invalid_argument, "AR(2) frequency must lie in (0, 0.5)");
  detail::require(s > 0.0 && std::isfinite(s), Errc::invalid_argument, "AR(2) sharpness must be positive");
  // cos(2 pi eta) written as sin(pi (1/2 - 2 eta)) so eta = 1/4 gives exactly 0.
  const double c = std::sin(std::numbers::pi * (0.5 - 2.0 * eta));
  return {2.0 * c * std::exp(-s), -std::exp(-2.0 * s)};
}

inline bool is_stationary(const Ar2Coefficients& c) {
  return std::abs(c.phi2) < 1.0 && c.phi2 + c.phi1 < 1.0 && c.phi2 - c.phi1 < 1.0;
}

/// Non-zero pattern of one mixing-matrix row and the total its weights sum to.
struct MixingRow {
  std::vector<int> support;  // 0-based latent component indices
  double total = 1.0;
};

struct Ar2MixtureSpec {
  std::vector<double> eta;
  std::vector<double> sharpness;
  std::vector<MixingRow> b1, b2, c1, c2;  // X regime 1/2, Y regime 1/2
  double alpha = 0.7;
  double beta = 0.6;
  double change_point = 0.5;
  double fs = 100.0;
  int shared_component = 4;               // 0-based; the gamma source

  int K() const { return static_cast<int>(eta.size()); }
  int P() const { return static_cast<int>(b1.size()); }
  int Q() const { return static_cast<int>(c1.size()); }

  /// Delta/theta/alpha/beta/gamma sources mixed into X in R^4 and Y in R^3.
  /// Rows drawn at random sum to 1.0.
  static Ar2MixtureSpec standard() {
    Ar2MixtureSpec s;
    s.eta = {0.02, 0.06, 0.10, 0.175, 0.375};
    s.sharpness = {0.03, 0.03, 0.03, 0.05, 0.05};
    s.b1 = {{{4}, 0.95}, {{4}, 0.90}, {{0, 1}, 1.0}, {{0, 1, 2}, 1.0}};
    s.b2 = {{{1, 2}, 1.0}, {{2}, 0.80}, {{0}, 0.90}, {{1, 2}, 1.0}};
    s.c1 = {{{4}, 0.95}, {{4}, 0.90}, {{1, 2}, 1.0}};
    s.c2 = {{{3}, 0.90}, {{2}, 1.0}, {{0}, 1.0}};
    return s;
  }

  void validate() const {
    detail::require(K() > 0 && sharpness.size() == eta.size(), Errc::invalid_argument,
                    "eta and sharpness must have the same non-zero length");
    for (int k = 0; k < K(); ++k) {
      detail::require(is_stationary(ar2_coefficients(eta[k], sharpness[k])), Errc::invalid_argument,
                      "AR(2) component " + std::to_string(k + 1) + " is not stationary");
    }
    detail::require(P() > 0 && Q() > 0 && b2.size() == b1.size() && c2.size() == c1.size(),
                    Errc::dimension_mismatch, "mixing matrices have inconsistent row counts");
    for (const auto* rows : {&b1, &b2, &c1, &c2}) {
      for (const auto& row : *rows) {
        detail::require(!row.support.empty() && row.total > 0.0, Errc::invalid_argument,
                        "mixing rows need a non-empty support and positive total");
        for (int c : row.support) {
          detail::require(c >= 0 && c < K(), Errc::invalid_argument, "mixing support index out of range");
        }
      }
    }
    detail::require(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0, Errc::invalid_argument,
                    "shared weights must lie in [0, 1]");
    detail::require(change_point > 0.0 && change_point < 1.0, Errc::invalid_argument,
                    "change point must lie in (0, 1)");
    detail::require(shared_component >= 0 && shared_component < K(), Errc::invalid_argument,
                    "shared component index out of range");
    detail::require(fs > 0.0, Errc::invalid_argument, "sampling rate must be positive");
  }
};

struct Ar2MixtureRealization {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  Eigen::MatrixXd b1, b2, c1, c2;
};

inline constexpr int kAr2BurnIn = 500;

/// Weights on each row's support: independent uniforms rescaled to the row total.
inline Eigen::MatrixXd draw_mixing(const std::vector<MixingRow>& rows, int K, Stream& rng) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), K);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double sum = 0.0;
    for (int c : rows[r].support) {
      const double w = rng.uniform();
      m(static_cast<Eigen::Index>(r), c) = w;
      sum += w;
    }
    m.row(static_cast<Eigen::Index>(r)) *= rows[r].total / sum;
  }
  return m;
}

/// Zero-initialized AR(2) with standard Gaussian noise; burn-in discarded.
inline Eigen::VectorXd ar2_series(const Ar2Coefficients& c, int T, Stream& rng, int burn_in = kAr2BurnIn) {
  Eigen::VectorXd out(T);
  double prev1 = 0.0;
  double prev2 = 0.0;
  for (int i = -burn_in; i < T; ++i) {
    const double v = c.phi1 * prev1 + c.phi2 * prev2 + rng.normal();
    prev2 = prev1;
    prev1 = v;
    if (i >= 0) out[i] = v;
  }
  return out;
}

inline Ar2MixtureRealization simulate_ar2_mixture(const Ar2MixtureSpec& spec, int T, std::uint64_t seed) {
  spec.validate();
  detail::require(T > 0 && T % 2 == 0, Errc::invalid_argument, "T must be positive and even");
  const int K = spec.K();

  Ar2MixtureRealization out;
  {
    Stream rng(derive_seed(seed, 2));
    out.b1 = draw_mixing(spec.b1, K, rng);
    out.b2 = draw_mixing(spec.b2, K, rng);
    out.c1 = draw_mixing(spec.c1, K, rng);
    out.c2 = draw_mixing(spec.c2, K, rng);
  }

  auto latent = [&](std::uint64_t group) {
    Eigen::MatrixXd z(T, K);
    for (int k = 0; k < K; ++k) {
      Stream rng(derive_seed(seed, 3, group, static_cast<std::uint64_t>(k)));
      z.col(k) = ar2_series(ar2_coefficients(spec.eta[k], spec.sharpness[k]), T, rng);
    }
    return z;
  };
  Eigen::MatrixXd zx = latent(0);
  Eigen::MatrixXd zy = latent(1);
  const int g = spec.shared_component;
  Stream shared_rng(derive_seed(seed, 3, 2, static_cast<std::uint64_t>(g)));
  const Eigen::VectorXd shared =
      ar2_series(ar2_coefficients(spec.eta[g], spec.sharpness[g]), T, shared_rng);

  const int first = static_cast<int>(std::floor(spec.change_point * T));
  zx.col(g).head(first) = spec.alpha * shared.head(first) + (1.0 - spec.alpha) * zx.col(g).head(first);
  zy.col(g).head(first) = spec.beta * shared.head(first) + (1.0 - spec.beta) * zy.col(g).head(first);

  out.x.resize(T, spec.P());
  out.y.resize(T, spec.Q());
  out.x.topRows(first) = zx.topRows(first) * out.b1.transpose();
  out.x.bottomRows(T - first) = zx.bottomRows(T - first) * out.b2.transpose();
  out.y.topRows(first) = zy.topRows(first) * out.c1.transpose();
  out.y.bottomRows(T - first) = zy.bottomRows(T - first) * out.c2.transpose();
  return out;
}

}  // namespace wavecancoh

#endif  // WAVECANCOH_SIMULATE_HPP
