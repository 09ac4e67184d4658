#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "wavecancoh/simulate.hpp"

using namespace wavecancoh;
using Catch::Approx;

namespace {

double corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

}  // namespace

TEST_CASE("transfer matrix examples", "[simulate]") {
  CHECK(transfer_from_spectrum(Eigen::MatrixXd::Identity(3, 3)).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  Eigen::MatrixXd s(2, 2), v(2, 2);
  s << 4, 2, 2, 5;
  v << 2, 0, 1, 2;
  CHECK((transfer_from_spectrum(s) - v).cwiseAbs().maxCoeff() < 1e-14);
  s << 1, 1, 1, 1;
  v << 1, 0, 1, 0;
  CHECK((transfer_from_spectrum(s) - v).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(transfer_from_spectrum(Eigen::MatrixXd::Zero(2, 2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("transfer matrix round-trips positive semidefinite input", "[simulate][property]") {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 500; ++trial) {
    const int D = 1 + static_cast<int>(gen() % 10);
    const int rank = trial % 3 == 0 ? 1 + static_cast<int>(gen() % static_cast<unsigned>(D)) : D;
    Eigen::MatrixXd g(D, rank);
    for (int i = 0; i < D; ++i)
      for (int r = 0; r < rank; ++r) g(i, r) = nd(gen);
    const Eigen::MatrixXd s = g * g.transpose();
    const Eigen::MatrixXd v = transfer_from_spectrum(s);
    INFO("D=" << D << " rank=" << rank);
    CHECK((v * v.transpose() - s).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, s.cwiseAbs().maxCoeff()));
    CHECK(v.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("transfer matrix rejects indefinite input", "[simulate]") {
  Eigen::MatrixXd s(2, 2);
  s << 1, 2, 2, 1;
  try {
    transfer_from_spectrum(s);
    FAIL("expected not_psd");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_psd);
  }
  CHECK_THROWS_AS(transfer_from_spectrum(Eigen::MatrixXd::Identity(2, 3)), Error);
}

TEST_CASE("block-switch specification entries", "[simulate]") {
  const auto spec = builtin_c1_spec();
  CHECK(spec.id == "c1");
  CHECK(spec.P == 6);
  CHECK(spec.Q == 4);
  CHECK(spec.num_scales == 2);
  spec.validate();
  CHECK(spec.at(1, 0.3).cwiseAbs().maxCoeff() == 0.0);
  const auto a = spec.at(2, 0.2);
  const auto b = spec.at(2, 0.5);
  CHECK(a(0, 0) == 8.0);
  CHECK(a(6, 6) == 6.0);
  CHECK(a(0, 1) == 1.0);
  CHECK(a(1, 5) == 1.0);
  CHECK(a(7, 9) == 1.0);
  CHECK(a(0, 6) == 1.0);
  CHECK(a(0, 9) == 1.0);
  CHECK(a(3, 6) == 1.0);
  CHECK(b(0, 6) == 2.0);
  CHECK(b(2, 9) == 2.0);
  CHECK(b(9, 2) == 2.0);
  CHECK(a(4, 7) == 0.0);
  CHECK((a.topLeftCorner(6, 6) - b.topLeftCorner(6, 6)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(block_switch_spec(1.0, 1.0).id == "block-switch");
}

TEST_CASE("specification validation", "[simulate]") {
  auto spec = builtin_c1_spec();
  spec.scales[2][1].matrix(0, 6) = 5.0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = builtin_c1_spec();
  spec.scales[2][1].u_start = 0.0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = builtin_c1_spec();
  spec.scales[3] = spec.scales[2];
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = builtin_c1_spec();
  spec.scales[2][0].matrix(0, 0) = -1.0;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("AR(2) coefficients", "[simulate]") {
  const auto a = ar2_coefficients(0.375, 0.05);
  CHECK(a.phi1 == Approx(-1.345241553057264).epsilon(1e-13));
  CHECK(a.phi2 == Approx(-std::exp(-0.1)).epsilon(1e-15));
  const auto b = ar2_coefficients(0.02, 0.03);
  CHECK(b.phi1 == Approx(1.925586561316895).epsilon(1e-13));
  CHECK(b.phi2 == Approx(-std::exp(-0.06)).epsilon(1e-15));
  CHECK(ar2_coefficients(0.25, 0.1).phi1 == 0.0);
  CHECK_THROWS_AS(ar2_coefficients(0.5, 0.1), Error);
  CHECK_THROWS_AS(ar2_coefficients(0.1, 0.0), Error);
  const auto spec = Ar2MixtureSpec::standard();
  for (int k = 0; k < spec.K(); ++k) CHECK(is_stationary(ar2_coefficients(spec.eta[k], spec.sharpness[k])));
  CHECK_FALSE(is_stationary({1.5, -0.4}));
}

TEST_CASE("AR(2) periodogram peaks at the model peak", "[simulate][montecarlo]") {
  const double eta = 0.1;
  const double s = 0.03;
  const auto c = ar2_coefficients(eta, s);
  double model_peak = 0.0;
  double best = 0.0;
  for (int i = 1; i < 50000; ++i) {
    const double f = 0.5 * i / 50000.0;
    const std::complex<double> e = std::polar(1.0, -2.0 * std::numbers::pi * f);
    const double p = 1.0 / std::norm(1.0 - c.phi1 * e - c.phi2 * e * e);
    if (p > best) {
      best = p;
      model_peak = f;
    }
  }
  const int N = 1024;
  std::vector<double> avg(N / 2, 0.0);
  for (int r = 0; r < 20; ++r) {
    Stream rng(derive_seed(17, r));
    const Eigen::VectorXd x = ar2_series(c, N, rng);
    std::vector<double> xs(x.data(), x.data() + N);
    for (int m = 1; m < N / 2; ++m) avg[static_cast<std::size_t>(m)] += std::norm(oracle::dft(xs, m));
  }
  const auto peak = std::max_element(avg.begin(), avg.end()) - avg.begin();
  CHECK(std::abs(static_cast<double>(peak) / N - model_peak) <= 2.0 / N);
}

TEST_CASE("MvLSW simulation determinism and shape", "[simulate]") {
  const auto spec = builtin_c1_spec();
  const auto sys = cached_system("haar", 8);
  const auto a = simulate_mvlsw(spec, 256, *sys, 9);
  const auto b = simulate_mvlsw(spec, 256, *sys, 9);
  const auto c = simulate_mvlsw(spec, 256, *sys, 10);
  CHECK(a.panel.values.rows() == 256);
  CHECK(a.panel.values.cols() == 10);
  CHECK(a.panel.P == 6);
  CHECK(a.panel.values == b.panel.values);
  CHECK(a.panel.values != c.panel.values);

  LwsSpec zero = spec;
  zero.scales.clear();
  CHECK(simulate_mvlsw(zero, 256, *sys, 1).panel.values.cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(simulate_mvlsw(spec, 100, *sys, 1), Error);
  CHECK_THROWS_AS(simulate_mvlsw(spec, 256, *cached_system("haar", 1), 1), Error);
}

TEST_CASE("MvLSW simulation reproduces the local variance", "[simulate][montecarlo]") {
  // Only scale 2 is active, so Var(X_t) = S_2(u) sum_n psi_2(n)^2 = S_2(u).
  const auto spec = builtin_c1_spec();
  const auto sys = cached_system("haar", 8);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(10, 10);
  int n = 0;
  for (int r = 0; r < 200; ++r) {
    const auto sim = simulate_mvlsw(spec, 256, *sys, derive_seed(41, r));
    for (int t = 140; t < 256; t += 4) {
      acc += sim.panel.values.row(t).transpose() * sim.panel.values.row(t);
      ++n;
    }
  }
  acc /= n;
  const auto truth = spec.at(2, 0.75);
  for (int d = 0; d < 10; ++d) CHECK(acc(d, d) == Approx(truth(d, d)).epsilon(0.1));
  CHECK(acc(0, 6) == Approx(2.0).margin(0.3));
  CHECK(std::abs(acc(4, 7)) < 0.3);
}

TEST_CASE("AR(2) mixture structure", "[simulate]") {
  const auto spec = Ar2MixtureSpec::standard();
  CHECK(spec.K() == 5);
  CHECK(spec.P() == 4);
  CHECK(spec.Q() == 3);
  const auto sim = simulate_ar2_mixture(spec, 1024, 3);
  CHECK(sim.x.rows() == 1024);
  CHECK(sim.x.cols() == 4);
  CHECK(sim.y.cols() == 3);
  const auto again = simulate_ar2_mixture(spec, 1024, 3);
  CHECK(sim.x == again.x);
  CHECK(sim.y == again.y);

  auto check_rows = [&](const Eigen::MatrixXd& m, const std::vector<MixingRow>& rows) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      CHECK(m.row(ri).sum() == Approx(rows[r].total).epsilon(1e-12));
      for (int k = 0; k < 5; ++k) {
        const bool on = std::find(rows[r].support.begin(), rows[r].support.end(), k) != rows[r].support.end();
        if (on) CHECK(m(ri, k) > 0.0);
        else CHECK(m(ri, k) == 0.0);
      }
    }
  };
  check_rows(sim.b1, spec.b1);
  check_rows(sim.b2, spec.b2);
  check_rows(sim.c1, spec.c1);
  check_rows(sim.c2, spec.c2);

  CHECK_THROWS_AS(simulate_ar2_mixture(spec, 1023, 1), Error);
  auto bad = spec;
  bad.alpha = 1.5;
  CHECK_THROWS_AS(simulate_ar2_mixture(bad, 1024, 1), Error);
}

TEST_CASE("AR(2) mixture shares the gamma source only in the first regime", "[simulate][montecarlo]") {
  const auto spec = Ar2MixtureSpec::standard();
  const double a = spec.alpha;
  const double b = spec.beta;
  const double expected = a * b / std::sqrt((a * a + (1 - a) * (1 - a)) * (b * b + (1 - b) * (1 - b)));
  double first = 0.0;
  double second = 0.0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    const auto sim = simulate_ar2_mixture(spec, 4096, derive_seed(77, r));
    first += corr(sim.x.col(0).head(2048), sim.y.col(0).head(2048)) / reps;
    second += corr(sim.x.col(0).tail(2048), sim.y.col(0).tail(2048)) / reps;
  }
  CHECK(first == Approx(expected).margin(0.05));
  CHECK(std::abs(second) < 0.05);
}
