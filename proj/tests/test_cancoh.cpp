#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wavecancoh/cancoh.hpp"
#include "wavecancoh/rng.hpp"
#include "wavecancoh/simulate.hpp"

using namespace wavecancoh;
using Catch::Approx;

namespace {

// Reference dense-eigensolver values for the block-switch specification at
// scale 2, frozen after the oracle run.
constexpr double kRhoLow = 0.06216122970780153;
constexpr double kRhoHigh = 0.24864491883120612;

Eigen::MatrixXd noise(int T, int D, std::uint64_t seed) {
  Stream rng(seed);
  Eigen::MatrixXd z(T, D);
  for (int t = 0; t < T; ++t)
    for (int d = 0; d < D; ++d) z(t, d) = rng.normal();
  return z;
}

}  // namespace

TEST_CASE("cancoh_at simple cases", "[cancoh]") {
  SECTION("zero cross block") {
    const auto pt = cancoh_at(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(3, 2),
                              Eigen::MatrixXd::Identity(3, 3));
    CHECK(pt.rho == 0.0);
    CHECK(pt.rho_raw == 0.0);
  }
  SECTION("scalar reduction") {
    const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
    const Eigen::MatrixXd half = Eigen::MatrixXd::Constant(1, 1, 0.5);
    const auto pt = cancoh_at(one, half, half, one);
    CHECK(pt.rho == Approx(0.25).margin(1e-15));
    CHECK(pt.a[0] == Approx(1.0));
    CHECK(pt.b[0] == Approx(1.0));
  }
  SECTION("tie flag") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
    const auto pt = cancoh_at(eye, 0.5 * eye, 0.5 * eye, eye);
    CHECK(pt.flags.degenerate);
    CHECK(pt.rho == Approx(0.25));
  }
  SECTION("errors") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd bad = eye;
    bad(1, 1) = -1.0;
    try {
      cancoh_at(bad, eye, eye, eye);
      FAIL("expected conditioning error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::conditioning);
      CHECK(e.category() == ErrorCategory::numerical);
    }
    CHECK_THROWS_AS(cancoh_at(eye, Eigen::MatrixXd::Zero(3, 2), eye, eye), Error);
  }
  SECTION("rho_raw above one is clamped") {
    const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
    const Eigen::MatrixXd big = Eigen::MatrixXd::Constant(1, 1, 1.5);
    const auto pt = cancoh_at(one, big, big, one);
    CHECK(pt.rho_raw == Approx(2.25));
    CHECK(pt.rho == 1.0);
  }
}

TEST_CASE("population constants of the block-switch specification", "[cancoh]") {
  const auto spec = builtin_c1_spec();
  const auto lo = cancoh_at(partition(spec.at(2, 0.25), 6));
  const auto hi = cancoh_at(partition(spec.at(2, 0.75), 6));
  CHECK(std::abs(lo.rho - true_cancoh_from_spec(spec, 2, 0.25)) < 1e-10);
  CHECK(std::abs(hi.rho - true_cancoh_from_spec(spec, 2, 0.75)) < 1e-10);
  CHECK(std::abs(lo.rho - kRhoLow) < 1e-10);
  CHECK(std::abs(hi.rho - kRhoHigh) < 1e-10);
  CHECK(kRhoLow < kRhoHigh);
}

TEST_CASE("whitened path agrees with both eigenproblems", "[cancoh][property]") {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int P = 1 + static_cast<int>(gen() % 8);
    const int Q = 1 + static_cast<int>(gen() % 8);
    const auto b = oracle::random_blocks(P, Q, gen);
    const double ma = oracle::largest_eig_ma(b.xx, b.xy, b.yy);
    const double mb = oracle::largest_eig_mb(b.xx, b.xy, b.yy);
    const auto pt = cancoh_at(b.xx, b.xy, b.xy.transpose(), b.yy);
    CHECK(std::abs(ma - mb) < 1e-8);
    CHECK(std::abs(pt.rho_raw - ma) < 1e-8);
    // a is an eigenvector of M_a with eigenvalue rho, b of M_b.
    const Eigen::MatrixXd Ma = b.xx.inverse() * b.xy * b.yy.inverse() * b.xy.transpose();
    const Eigen::MatrixXd Mb = b.yy.inverse() * b.xy.transpose() * b.xx.inverse() * b.xy;
    CHECK((Ma * pt.a - pt.rho_raw * pt.a).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, pt.a.cwiseAbs().maxCoeff()));
    CHECK((Mb * pt.b - pt.rho_raw * pt.b).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, pt.b.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("normalization and sign convention", "[cancoh][property]") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int P = 1 + static_cast<int>(gen() % 6);
    const int Q = 1 + static_cast<int>(gen() % 6);
    const auto b = oracle::random_blocks(P, Q, gen);
    const auto pt = cancoh_at(b.xx, b.xy, b.xy.transpose(), b.yy);
    CHECK(std::abs(pt.a.dot(b.xx * pt.a) - 1.0) < 1e-8);
    CHECK(std::abs(pt.b.dot(b.yy * pt.b) - 1.0) < 1e-8);
    Eigen::Index ia = 0, ib = 0;
    pt.a.cwiseAbs().maxCoeff(&ia);
    pt.b.cwiseAbs().maxCoeff(&ib);
    CHECK(pt.a[ia] > 0.0);
    CHECK(pt.b[ib] > 0.0);
    CHECK(pt.rho >= 0.0);
    CHECK(pt.rho <= 1.0);
  }
}

TEST_CASE("invariance to per-group invertible maps", "[cancoh][property]") {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 500; ++trial) {
    const int P = 1 + static_cast<int>(gen() % 5);
    const int Q = 1 + static_cast<int>(gen() % 5);
    const auto b = oracle::random_blocks(P, Q, gen);
    Eigen::MatrixXd G(P, P), H(Q, Q);
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j) G(i, j) = nd(gen) + (i == j ? 3.0 : 0.0);
    for (int i = 0; i < Q; ++i)
      for (int j = 0; j < Q; ++j) H(i, j) = nd(gen) + (i == j ? 3.0 : 0.0);
    const auto base = cancoh_at(b.xx, b.xy, b.xy.transpose(), b.yy);
    const Eigen::MatrixXd gxy = G * b.xy * H.transpose();
    const auto moved = cancoh_at(G * b.xx * G.transpose(), gxy, gxy.transpose(), H * b.yy * H.transpose());
    CHECK(std::abs(base.rho - moved.rho) < 1e-8);
  }
}

TEST_CASE("default scale subset", "[cancoh]") {
  CHECK(default_scales(1024, 10) == std::vector<int>{1, 2, 3, 4, 5, 6, 7});
  CHECK(default_scales(64, 6) == std::vector<int>{1, 2, 3});
  CHECK(default_scales(8, 3).empty());
}

TEST_CASE("wavecancoh field layout and invariants", "[cancoh]") {
  const Eigen::MatrixXd z = noise(256, 5, 1);
  CancohConfig cfg;
  cfg.half_width = 10;
  const auto f = wavecancoh::wavecancoh(z.leftCols(3), z.rightCols(2), cfg);
  CHECK(f.P == 3);
  CHECK(f.Q == 2);
  CHECK(f.scales == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(f.size() == 256u);
  CHECK(f.points.size() == 5u * 256u);
  CHECK(f.num_scales == 8);
  CHECK(f.half_width == 10);
  CHECK(f.u(128) == 0.5);
  for (const auto& pt : f.points) {
    CHECK(pt.rho >= 0.0);
    CHECK(pt.rho <= 1.0);
    CHECK(pt.a.size() == 3);
    CHECK(pt.b.size() == 2);
  }
  CancohConfig bad = cfg;
  bad.scales = {9};
  CHECK_THROWS_AS(wavecancoh::wavecancoh(z.leftCols(3), z.rightCols(2), bad), Error);
  CHECK_THROWS_AS(wavecancoh::wavecancoh(z.leftCols(3), z.rightCols(2).topRows(100), cfg), Error);
}

TEST_CASE("argument symmetry", "[cancoh][property]") {
  const Eigen::MatrixXd z = noise(512, 5, 2);
  const Eigen::MatrixXd x = z.leftCols(2);
  Eigen::MatrixXd y = z.rightCols(3);
  y.col(0) += 0.8 * x.col(1);
  const auto xy = wavecancoh::wavecancoh(x, y);
  const auto yx = wavecancoh::wavecancoh(y, x);
  double worst = 0.0;
  for (std::size_t i = 0; i < xy.points.size(); ++i) {
    worst = std::max(worst, std::abs(xy.points[i].rho - yx.points[i].rho));
    CHECK(xy.points[i].a.size() == yx.points[i].b.size());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("permuted copy is fully coherent", "[cancoh]") {
  const Eigen::MatrixXd x = noise(512, 3, 3);
  Eigen::MatrixXd y(512, 3);
  y << x.col(2), x.col(0), x.col(1);
  const auto f = wavecancoh::wavecancoh(x, y);
  for (int j : f.scales) {
    for (std::size_t k = 64; k < 448; ++k) CHECK(f.at(j, k).rho >= 0.99);
  }
}

TEST_CASE("constraints hold against the regularized blocks", "[cancoh]") {
  const auto spec = builtin_c1_spec();
  const auto sys = cached_system("haar", 10);
  const auto sim = simulate_mvlsw(spec, 1024, *sys, 5);
  const auto lws = estimate_lws(sim.panel.values, *sys, 64);
  for (int k = 0; k < 1024; k += 3) {
    Eigen::MatrixXd s = lws.values.matrix(2, k);
    floor_eigenvalues(s, relative_epsilon(s, 1e-8));
    const auto blocks = partition(s, 6);
    const auto pt = cancoh_from_joint(lws.values.matrix(2, k), 6, 1e-8);
    CHECK(std::abs(pt.a.dot(blocks.xx * pt.a) - 1.0) < 1e-8);
    CHECK(std::abs(pt.b.dot(blocks.yy * pt.b) - 1.0) < 1e-8);
  }
}

TEST_CASE("causal coherence reduces to the plain estimate at lag 0", "[cancoh]") {
  const Eigen::MatrixXd z = noise(300, 4, 4);
  const auto a = wavecancoh::wavecancoh(z.leftCols(2), z.rightCols(2));
  const auto b = causal_wavecancoh(z.leftCols(2), z.rightCols(2), 0);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].rho == b.points[i].rho);
    CHECK(a.points[i].rho_raw == b.points[i].rho_raw);
    CHECK(a.points[i].a == b.points[i].a);
    CHECK(a.points[i].b == b.points[i].b);
  }
  const auto c = causal_wavecancoh(z.leftCols(2), z.rightCols(2), 20);
  CHECK(c.size() == 280u);
  CHECK(c.lag == 20);
  CHECK(c.u(10) == 10.0 / 300.0);
  CHECK_THROWS_AS(causal_wavecancoh(z.leftCols(2), z.rightCols(2), 300), Error);
}

TEST_CASE("shifted copy peaks at the true lag", "[cancoh][montecarlo]") {
  int hits = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Stream rng(derive_seed(55, seed));
    Eigen::MatrixXd ext(1034, 2);
    for (int t = 0; t < 1034; ++t)
      for (int d = 0; d < 2; ++d) ext(t, d) = rng.normal();
    const Eigen::MatrixXd x = ext.bottomRows(1024);
    const Eigen::MatrixXd y = ext.topRows(1024);  // Y_t = X_{t-10}
    CancohConfig cfg;
    cfg.num_scales = default_num_scales(1004);
    cfg.half_width = default_half_width(1004);
    cfg.scales = {1};
    double best = -1.0;
    int arg = -1;
    for (int h : {0, 10, 20}) {
      const auto f = causal_wavecancoh(x, y, h, cfg);
      double m = 0.0;
      for (std::size_t k = 100; k < 900; ++k) m += f.at(1, k).rho;
      if (m > best) {
        best = m;
        arg = h;
      }
    }
    hits += arg == 10;
  }
  CHECK(hits >= 18);
}

TEST_CASE("independent white noise stays below the null level on fine scales", "[cancoh][montecarlo]") {
  const int T = 4096;
  const int seeds = 50;
  const std::vector<int> fine{1, 2};
  std::vector<double> medians(fine.size(), 0.0);
  std::vector<double> floored(fine.size(), 0.0);
  CancohConfig cfg;
  cfg.scales = fine;
  for (int seed = 0; seed < seeds; ++seed) {
    const Eigen::MatrixXd z = noise(T, 4, derive_seed(808, seed));
    const auto f = wavecancoh::wavecancoh(z.leftCols(2), z.rightCols(2), cfg);
    for (std::size_t s = 0; s < fine.size(); ++s) {
      auto curve = f.rho_curve(fine[s]);
      std::nth_element(curve.begin(), curve.begin() + T / 2, curve.end());
      medians[s] += curve[T / 2] / seeds;
      for (std::size_t k = 0; k < f.size(); ++k) floored[s] += f.at(fine[s], k).flags.floored > 0 ? 1.0 / (T * seeds) : 0.0;
    }
  }
  for (std::size_t s = 0; s < fine.size(); ++s) {
    INFO("scale " << fine[s] << " mean time-median rho " << medians[s] << " floored fraction " << floored[s]);
    CHECK(medians[s] < 0.3);
    CHECK(floored[s] < 0.01);
  }
}

TEST_CASE("coarse-scale null estimates are floored and saturate", "[cancoh][montecarlo]") {
  const int T = 4096;
  const Eigen::MatrixXd z = noise(T, 4, derive_seed(808, 0));
  CancohConfig cfg;
  cfg.scales = {7, 8, 9};
  const auto f = wavecancoh::wavecancoh(z.leftCols(2), z.rightCols(2), cfg);
  for (int j : cfg.scales) {
    int floored = 0;
    for (std::size_t k = 0; k < f.size(); ++k) floored += f.at(j, k).flags.floored > 0;
    INFO("scale " << j);
    CHECK(floored > T / 2);
  }
}
