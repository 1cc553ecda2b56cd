#include <cmath>

#include "doctest.h"
#include "ofm/data/dataset.hpp"
#include "ofm/metrics/metrics.hpp"
#include "support/oracles.hpp"

using namespace ofm;

namespace {

FunctionBatch constant_batch(const GridSpec& grid, int count, double value) {
  FunctionBatch b = FunctionBatch::zeros(grid, count, 1);
  b.values.setConstant(value);
  return b;
}

FunctionBatch gp_batch(double l, int m, int count, std::uint64_t seed) {
  KernelConfig k;
  k.family = KernelFamily::Matern;
  k.l = l;
  k.zeta = 1.5;
  return gen_gp_functions(k, GridSpec::line(m), count, seed, 4).samples;
}

}  // namespace

TEST_CASE("smse: zero on perfect prediction, one on the global mean") {
  GridSpec grid = GridSpec::line(8);
  Rng rng(1, 0);
  FunctionBatch truth = FunctionBatch::zeros(grid, 1, 1);
  truth.values = rng.normal_mat(1, 8);
  Eigen::VectorXd pred = truth.values.row(0).transpose();
  CHECK(smse(pred, truth) == 0.0);

  FunctionBatch many = FunctionBatch::zeros(grid, 30, 1);
  many.values = rng.normal_mat(30, 8);
  Eigen::VectorXd mean_pred = Eigen::VectorXd::Constant(8, many.values.mean());
  CHECK(smse(mean_pred, many) == doctest::Approx(1.0).epsilon(1e-14));

  // shifting both by a constant changes nothing
  FunctionBatch shifted = many;
  shifted.values.array() += 5.0;
  CHECK(smse(mean_pred.array() + 5.0, shifted) ==
        doctest::Approx(smse(mean_pred, many)).epsilon(1e-12));

  CHECK_THROWS_AS(smse(mean_pred, constant_batch(grid, 4, 2.0)), std::invalid_argument);
  CHECK_THROWS_AS(smse(Eigen::VectorXd::Zero(7), many), std::invalid_argument);
}

TEST_CASE("msll: hand values and the literal per-point formula") {
  GridSpec grid = GridSpec::line(4);
  FunctionBatch truth = FunctionBatch::zeros(grid, 1, 1);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(4), var = Eigen::VectorXd::Ones(4);

  // truth equals the mean, unit variance: 0.5 log(2 pi)
  CHECK(msll(mean, var, truth) == doctest::Approx(0.5 * std::log(2 * M_PI)).epsilon(1e-14));

  // unit residual adds exactly one half
  truth.values.setOnes();
  CHECK(msll(mean, var, truth) ==
        doctest::Approx(0.5 * std::log(2 * M_PI) + 0.5).epsilon(1e-14));

  // mixed variances against a manual loop
  Rng rng(2, 0);
  FunctionBatch batch = FunctionBatch::zeros(grid, 6, 1);
  batch.values = rng.normal_mat(6, 4);
  Eigen::VectorXd mu = rng.normal_vec(4);
  Eigen::VectorXd v(4);
  v << 0.5, 1.0, 2.0, 0.25;
  double want = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 4; ++j) {
      double r = batch.values(i, j) - mu[j];
      want += 0.5 * std::log(2 * M_PI * v[j]) + r * r / (2 * v[j]);
    }
  want /= 24.0;
  CHECK(msll(mu, v, batch) == doctest::Approx(want).epsilon(1e-14));

  Eigen::VectorXd bad = v;
  bad[2] = 0.0;
  CHECK_THROWS_AS(msll(mu, bad, batch), std::invalid_argument);
  bad[2] = -1.0;
  CHECK_THROWS_AS(msll(mu, bad, batch), std::invalid_argument);
}

TEST_CASE("msll prefers the true residual variance") {
  GridSpec grid = GridSpec::line(16);
  Rng rng(5, 0);
  const double true_var = 0.49;
  FunctionBatch truth = FunctionBatch::zeros(grid, 2000, 1);
  truth.values = std::sqrt(true_var) * rng.normal_mat(2000, 16);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(16);

  auto at = [&](double v) {
    return msll(mean, Eigen::VectorXd::Constant(16, v), truth);
  };
  double best = at(true_var);
  for (double v : {0.25 * true_var, 0.5 * true_var, 2.0 * true_var, 4.0 * true_var})
    CHECK(best < at(v));
}

TEST_CASE("distribution diagnostics: identical sets score zero, order never matters") {
  FunctionBatch a = gp_batch(0.3, 32, 60, 3);
  DistributionDiagnostics same = distribution_diagnostics(a, a);
  CHECK(same.density_mse == 0.0);
  CHECK(same.autocov_mse == 0.0);
  CHECK(same.spectra_mse == 0.0);

  FunctionBatch b = gp_batch(0.3, 32, 60, 4);
  DistributionDiagnostics ab = distribution_diagnostics(a, b);
  DistributionDiagnostics ba = distribution_diagnostics(b, a);
  CHECK(ab.density_mse == ba.density_mse);
  CHECK(ab.autocov_mse == ba.autocov_mse);
  CHECK(ab.spectra_mse == ba.spectra_mse);
  CHECK(ab.density_mse > 0.0);
}

TEST_CASE("distribution diagnostics: two-spike histogram closed form") {
  GridSpec grid = GridSpec::line(8);
  FunctionBatch zeros = constant_batch(grid, 50, 0.0);
  FunctionBatch ones = constant_batch(grid, 50, 1.0);
  DistributionDiagnostics d = distribution_diagnostics(zeros, ones);
  // all mass in the first vs last of 64 bins: (1 + 1) / 64
  CHECK(d.density_mse == doctest::Approx(2.0 / 64.0).epsilon(1e-14));
  CHECK(d.autocov_mse == 0.0);  // both autocovariances vanish after centering
  CHECK(std::isfinite(d.spectra_mse));
  CHECK(d.spectra_mse > 0.0);
}

TEST_CASE("distribution diagnostics: manual small-batch oracle") {
  GridSpec grid = GridSpec::line(6);
  Rng rng(9, 0);
  FunctionBatch a = FunctionBatch::zeros(grid, 50, 1), b = FunctionBatch::zeros(grid, 50, 1);
  a.values = rng.normal_mat(50, 6);
  b.values = rng.normal_mat(50, 6).array() * 1.4 + 0.2;
  DistributionDiagnostics d = distribution_diagnostics(a, b);

  // density by hand
  double lo = std::min(a.values.minCoeff(), b.values.minCoeff());
  double hi = std::max(a.values.maxCoeff(), b.values.maxCoeff());
  Eigen::VectorXd ha = Eigen::VectorXd::Zero(64), hb = Eigen::VectorXd::Zero(64);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 6; ++j) {
      ha[std::min(63, int((a.values(i, j) - lo) / (hi - lo) * 64))] += 1.0 / 300.0;
      hb[std::min(63, int((b.values(i, j) - lo) / (hi - lo) * 64))] += 1.0 / 300.0;
    }
  CHECK(d.density_mse == doctest::Approx((ha - hb).squaredNorm() / 64.0).epsilon(1e-12));

  // autocovariance by hand
  auto curve = [&](const FunctionBatch& set) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(4);
    for (int i = 0; i < set.size(); ++i) {
      Eigen::VectorXd u = set.values.row(i).transpose();
      double mu = u.mean();
      for (int k = 0; k < 4; ++k) {
        double s = 0.0;
        for (int p = 0; p + k < 6; ++p) s += (u[p] - mu) * (u[p + k] - mu);
        c[k] += s / 6.0;
      }
    }
    return (c / set.size()).eval();
  };
  double want_ac = (curve(a) - curve(b)).squaredNorm() / 4.0;
  CHECK(d.autocov_mse == doctest::Approx(want_ac).epsilon(1e-12));

  // spectra by hand through the dense transform
  auto power = [&](const FunctionBatch& set) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(4);
    for (int i = 0; i < set.size(); ++i) {
      SpectralCoeffs c = spectral_forward(set.sample(i), grid);
      p += c.c.cwiseAbs2().col(0);
    }
    return (p / set.size()).eval();
  };
  Eigen::ArrayXd pa = power(a).array() + 1e-30, pb = power(b).array() + 1e-30;
  CHECK(d.spectra_mse == doctest::Approx((pa.log() - pb.log()).square().mean()).epsilon(1e-12));
}

TEST_CASE("distribution diagnostics separate rough from smooth ensembles") {
  FunctionBatch rough = gp_batch(0.05, 32, 120, 5);
  FunctionBatch smooth = gp_batch(0.5, 32, 120, 6);
  FunctionBatch rough2 = gp_batch(0.05, 32, 120, 7);

  DistributionDiagnostics near = distribution_diagnostics(rough, rough2);
  DistributionDiagnostics far = distribution_diagnostics(rough, smooth);
  CHECK(far.autocov_mse > 5.0 * near.autocov_mse);
  CHECK(far.spectra_mse > 5.0 * near.spectra_mse);
}

TEST_CASE("distribution diagnostics reject unusable inputs") {
  FunctionBatch a = gp_batch(0.3, 16, 50, 1);
  FunctionBatch small = gp_batch(0.3, 16, 49, 1);
  CHECK_THROWS_AS(distribution_diagnostics(a, small), std::invalid_argument);
  CHECK_THROWS_AS(distribution_diagnostics(small, a), std::invalid_argument);
  FunctionBatch other = gp_batch(0.3, 24, 50, 1);
  CHECK_THROWS_AS(distribution_diagnostics(a, other), std::invalid_argument);
}
