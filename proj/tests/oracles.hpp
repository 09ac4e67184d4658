#ifndef WAVECANCOH_TESTS_ORACLES_HPP
#define WAVECANCOH_TESTS_ORACLES_HPP

// Reference computations used only by the tests. Each one follows a route
// that shares no code with the library path it checks.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

/// Haar wavelet at scale j in closed form: +2^(-j/2) on the first half of
/// its 2^j support, -2^(-j/2) on the second.
inline std::vector<double> haar_wavelet(int j) {
  const int n = 1 << j;
  const double v = std::pow(2.0, -0.5 * j);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = i < n / 2 ? v : -v;
  return out;
}

/// sum_tau Psi_j(tau) Psi_l(tau) with Psi built by a full double loop over
/// lags in [-(n-1), n-1].
inline double gram_entry(const std::vector<double>& a, const std::vector<double>& b) {
  auto acf = [](const std::vector<double>& x, int tau) {
    double s = 0.0;
    const int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
      const int k = i + tau;
      if (k >= 0 && k < n) s += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(k)];
    }
    return s;
  };
  const int span = static_cast<int>(std::max(a.size(), b.size()));
  double s = 0.0;
  for (int tau = -span; tau <= span; ++tau) s += acf(a, tau) * acf(b, tau);
  return s;
}

/// Direct NDWT with modular indexing, one output at a time.
inline double ndwt_coefficient(const Eigen::VectorXd& z, const std::vector<double>& psi, int k) {
  const auto T = static_cast<int>(z.size());
  double s = 0.0;
  for (std::size_t n = 0; n < psi.size(); ++n) s += psi[n] * z[(k + static_cast<int>(n)) % T];
  return s;
}

/// Largest real eigenvalue of M_a = Sxx^-1 Sxy Syy^-1 Syx via explicit
/// inverses and a general eigensolver.
inline double largest_eig_ma(const Eigen::MatrixXd& sxx, const Eigen::MatrixXd& sxy, const Eigen::MatrixXd& syy) {
  const Eigen::MatrixXd ma = sxx.inverse() * sxy * syy.inverse() * sxy.transpose();
  Eigen::EigenSolver<Eigen::MatrixXd> es(ma, false);
  return es.eigenvalues().real().maxCoeff();
}

inline double largest_eig_mb(const Eigen::MatrixXd& sxx, const Eigen::MatrixXd& sxy, const Eigen::MatrixXd& syy) {
  const Eigen::MatrixXd mb = syy.inverse() * sxy.transpose() * sxx.inverse() * sxy;
  Eigen::EigenSolver<Eigen::MatrixXd> es(mb, false);
  return es.eigenvalues().real().maxCoeff();
}

/// Random symmetric positive definite matrix with eigenvalues in [lo, hi].
inline Eigen::MatrixXd random_spd(int n, std::mt19937_64& gen, double lo = 0.5, double hi = 3.0) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(lo, hi);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = nd(gen);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = ud(gen);
  return q * d.asDiagonal() * q.transpose();
}

/// Joint (P+Q) x (P+Q) positive definite matrix, returned as its blocks.
struct Blocks {
  Eigen::MatrixXd xx, xy, yy;
};

inline Blocks random_blocks(int P, int Q, std::mt19937_64& gen) {
  const Eigen::MatrixXd s = random_spd(P + Q, gen);
  return {s.topLeftCorner(P, P), s.topRightCorner(P, Q), s.bottomRightCorner(Q, Q)};
}

/// Kolmogorov two-sided asymptotic p-value with the Stephens small-sample
/// adjustment, for the one-sample statistic D_n against U(0, 1).
inline double ks_uniform_pvalue(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = std::clamp(x[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  if (lambda < 1e-3) return 1.0;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    p += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

/// Naive DFT coefficient sum_n x[n] exp(-2 pi i m n / N).
inline std::complex<double> dft(const std::vector<double>& x, int m) {
  const auto N = static_cast<double>(x.size());
  std::complex<double> s = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double ang = -2.0 * M_PI * m * static_cast<double>(n) / N;
    s += x[n] * std::complex<double>(std::cos(ang), std::sin(ang));
  }
  return s;
}

}  // namespace oracle

#endif  // WAVECANCOH_TESTS_ORACLES_HPP
