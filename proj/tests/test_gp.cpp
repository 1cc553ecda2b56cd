#include <cmath>

#include "doctest.h"
#include "ofm/gp/kernel.hpp"
#include "ofm/gp/prior.hpp"
#include "support/oracles.hpp"

using namespace ofm;

namespace {

Eigen::RowVectorXd pt(double x) {
  Eigen::RowVectorXd p(1);
  p << x;
  return p;
}

Eigen::RowVectorXd pt2(double x, double y) {
  Eigen::RowVectorXd p(2);
  p << x, y;
  return p;
}

}  // namespace

TEST_CASE("matern kernel matches the closed forms") {
  KernelConfig cfg;
  cfg.family = KernelFamily::Matern;
  cfg.sigma2 = 1.7;
  cfg.l = 0.3;

  for (double d : {0.0, 0.05, 0.2, 0.7, 1.0}) {
    cfg.zeta = 0.5;
    CHECK(kernel_eval(cfg, pt(0.0), pt(d)) == doctest::Approx(1.7 * std::exp(-d / 0.3)).epsilon(1e-14));

    cfg.zeta = 1.5;
    double s3 = std::sqrt(3.0) * d / 0.3;
    CHECK(kernel_eval(cfg, pt(0.0), pt(d)) ==
          doctest::Approx(1.7 * (1.0 + s3) * std::exp(-s3)).epsilon(1e-14));

    cfg.zeta = 2.5;
    double s5 = std::sqrt(5.0) * d / 0.3;
    CHECK(kernel_eval(cfg, pt(0.0), pt(d)) ==
          doctest::Approx(1.7 * (1.0 + s5 + s5 * s5 / 3.0) * std::exp(-s5)).epsilon(1e-14));
  }

  // variance on the diagonal, decay off it
  cfg.zeta = 1.5;
  CHECK(kernel_eval(cfg, pt(0.4), pt(0.4)) == doctest::Approx(1.7));
  double prev = kernel_eval(cfg, pt(0.0), pt(0.0));
  for (double d : {0.1, 0.2, 0.4, 0.8}) {
    double k = kernel_eval(cfg, pt(0.0), pt(d));
    CHECK(k < prev);
    prev = k;
  }

  // 2d distances are euclidean
  cfg.zeta = 0.5;
  double d = std::sqrt(0.3 * 0.3 + 0.4 * 0.4);
  CHECK(kernel_eval(cfg, pt2(0.0, 0.0), pt2(0.3, 0.4)) ==
        doctest::Approx(1.7 * std::exp(-d / 0.3)).epsilon(1e-14));
}

TEST_CASE("rational quadratic kernel matches the closed form") {
  KernelConfig cfg;
  cfg.family = KernelFamily::RationalQuadratic;
  cfg.sigma2 = 0.9;
  cfg.l = 0.25;
  cfg.alpha = 1.5;
  for (double d : {0.0, 0.1, 0.6}) {
    double want = 0.9 * std::pow(1.0 + d * d / (2.0 * 1.5 * 0.25 * 0.25), -1.5);
    CHECK(kernel_eval(cfg, pt(0.2), pt(0.2 + d)) == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("gibbs kernel: closed form, symmetry, growing length-scale") {
  KernelConfig cfg;
  cfg.family = KernelFamily::Gibbs;
  cfg.sigma2 = 1.0;
  cfg.l0 = 0.05;
  cfg.l1 = 0.25;

  auto ls = [&](double x) { return cfg.l0 + cfg.l1 * x; };
  auto want = [&](double x, double y) {
    double lx = ls(x), ly = ls(y);
    double denom = lx * lx + ly * ly;
    return std::sqrt(2.0 * lx * ly / denom) * std::exp(-(x - y) * (x - y) / denom);
  };

  CHECK(kernel_eval(cfg, pt(0.0), pt(0.0)) == doctest::Approx(1.0));
  CHECK(kernel_eval(cfg, pt(0.3), pt(0.3)) == doctest::Approx(1.0));
  CHECK(kernel_eval(cfg, pt(0.2), pt(0.7)) == doctest::Approx(want(0.2, 0.7)).epsilon(1e-14));
  CHECK(kernel_eval(cfg, pt(0.2), pt(0.7)) == kernel_eval(cfg, pt(0.7), pt(0.2)));

  // correlation over a fixed offset strengthens where l(x) is larger
  double near0 = kernel_eval(cfg, pt(0.05), pt(0.15));
  double near1 = kernel_eval(cfg, pt(0.85), pt(0.95));
  CHECK(near1 > near0);

  // non-positive length-scale inside the domain is an error
  cfg.l1 = -1.0;
  CHECK_THROWS_AS(kernel_eval(cfg, pt(0.5), pt(0.5)), std::invalid_argument);
}

TEST_CASE("kernel hyperparameter validation") {
  KernelConfig cfg;
  cfg.family = KernelFamily::Matern;
  cfg.zeta = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.zeta = 1.5;
  cfg.sigma2 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.sigma2 = 1.0;
  cfg.l = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.l = 0.3;
  CHECK_NOTHROW(cfg.validate());

  cfg.family = KernelFamily::RationalQuadratic;
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  CHECK(kernel_family_from_string("matern") == KernelFamily::Matern);
  CHECK(kernel_family_from_string("rational_quadratic") == KernelFamily::RationalQuadratic);
  CHECK(kernel_family_from_string("gibbs") == KernelFamily::Gibbs);
  CHECK_THROWS_AS(kernel_family_from_string("cubic"), std::invalid_argument);
  CHECK(to_string(KernelFamily::Gibbs) == "gibbs");
}

TEST_CASE("gram matrix is symmetric with the variance on the diagonal") {
  KernelConfig cfg;
  cfg.family = KernelFamily::Matern;
  cfg.sigma2 = 2.3;
  cfg.l = 0.2;
  cfg.zeta = 2.5;
  Eigen::MatrixXd x = GridSpec::line(33, -1.0, 2.0).coordinates();
  Eigen::MatrixXd k = build_gram(cfg, x);
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((k.diagonal().array() - 2.3).abs().maxCoeff() < 1e-14);
}

TEST_CASE("sub-grid gram is exactly a submatrix of the full gram") {
  KernelConfig cfg;
  cfg.family = KernelFamily::Gibbs;
  Eigen::MatrixXd x = GridSpec::line(64).coordinates();
  Eigen::MatrixXd full = build_gram(cfg, x);

  std::vector<int> keep = {0, 3, 17, 18, 40, 63};
  Eigen::MatrixXd xsub(int(keep.size()), 1);
  for (size_t i = 0; i < keep.size(); ++i) xsub.row(int(i)) = x.row(keep[i]);
  Eigen::MatrixXd sub = build_gram(cfg, xsub);

  for (size_t i = 0; i < keep.size(); ++i)
    for (size_t j = 0; j < keep.size(); ++j)
      CHECK(sub(int(i), int(j)) == full(keep[i], keep[j]));
}

TEST_CASE("rough reference kernel factors with at most 1e-8 jitter at 256 points") {
  KernelConfig cfg;
  cfg.family = KernelFamily::Matern;
  cfg.l = 0.01;
  cfg.zeta = 0.5;
  GpPrior prior = make_prior(cfg, GridSpec::line(256));
  CHECK(prior.jitter <= 1e-8 * prior.gram.diagonal().mean());

  Eigen::MatrixXd recon = prior.chol * prior.chol.transpose();
  Eigen::MatrixXd target = prior.gram;
  target.diagonal().array() += prior.jitter;
  CHECK(oracle::rel_err(recon, target, 1e-6) < 1e-9);
}

TEST_CASE("cholesky jitter ladder gives up on an indefinite matrix") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  CHECK_THROWS_AS(cholesky_with_jitter(bad), std::runtime_error);
}

TEST_CASE("prior draws are deterministic per seed and stream") {
  KernelConfig cfg;
  cfg.family = KernelFamily::Matern;
  GpPrior prior = make_prior(cfg, GridSpec::line(24));

  Rng a(77, 0), b(77, 0), c(77, 1);
  FunctionBatch ba = cholesky_sample(prior, 4, 2, a);
  FunctionBatch bb = cholesky_sample(prior, 4, 2, b);
  FunctionBatch bc = cholesky_sample(prior, 4, 2, c);
  CHECK(ba.values == bb.values);
  CHECK(ba.values != bc.values);
  CHECK(ba.size() == 4);
  CHECK(ba.channels == 2);
  CHECK(ba.sample(0).rows() == 24);
  CHECK(ba.sample(0).cols() == 2);
  // channels are independent draws, not copies
  CHECK(ba.sample(0).col(0) != ba.sample(0).col(1));
}

TEST_CASE("empirical covariance of many draws matches the gram matrix") {
  KernelConfig cfg;
  cfg.family = KernelFamily::Matern;
  cfg.l = 0.3;
  cfg.zeta = 1.5;
  GpPrior prior = make_prior(cfg, GridSpec::line(16));

  Rng rng(2024, 0);
  const int draws = 10000;
  FunctionBatch batch = cholesky_sample(prior, draws, 1, rng);
  Eigen::MatrixXd cov = batch.values.transpose() * batch.values / double(draws);
  CHECK((cov - prior.gram).norm() / prior.gram.norm() < 0.10);
}

TEST_CASE("gaussian log-density matches a dense oracle and a 2x2 hand formula") {
  KernelConfig cfg;
  cfg.family = KernelFamily::Matern;
  cfg.sigma2 = 1.4;
  cfg.l = 0.35;
  cfg.zeta = 2.5;
  GpPrior prior = make_prior(cfg, GridSpec::line(9));

  Rng rng(5, 0);
  Eigen::VectorXd u = rng.normal_vec(9);

  Eigen::MatrixXd kj = prior.gram;
  kj.diagonal().array() += prior.jitter;
  double want = -0.5 * u.dot(kj.inverse() * u) - 0.5 * std::log(kj.determinant()) -
                0.5 * 9.0 * std::log(2.0 * M_PI);
  CHECK(gaussian_logpdf(prior, u) == doctest::Approx(want).epsilon(1e-10));

  GpPrior tiny = make_prior(cfg, GridSpec::line(2));
  double v = tiny.gram(0, 0) + tiny.jitter, r = tiny.gram(0, 1);
  double a = 0.3, b = -1.1;
  double det = v * v - r * r;
  double quad = (v * a * a - 2.0 * r * a * b + v * b * b) / det;
  double hand = -0.5 * quad - 0.5 * std::log(det) - std::log(2.0 * M_PI);
  Eigen::VectorXd u2(2);
  u2 << a, b;
  CHECK(gaussian_logpdf(tiny, u2) == doctest::Approx(hand).epsilon(1e-12));

  CHECK_THROWS_AS(gaussian_logpdf(prior, u2), std::invalid_argument);
}

TEST_CASE("log-density gradient equals -K^{-1} u and the finite difference") {
  KernelConfig cfg;
  cfg.family = KernelFamily::Matern;
  GpPrior prior = make_prior(cfg, GridSpec::line(12));

  Rng rng(9, 0);
  Eigen::VectorXd u = rng.normal_vec(12);
  Eigen::VectorXd grad = gaussian_logpdf_grad(prior, u);

  Eigen::MatrixXd kj = prior.gram;
  kj.diagonal().array() += prior.jitter;
  CHECK(oracle::rel_err(grad, -kj.inverse() * u) < 1e-9);

  Eigen::MatrixXd fd = oracle::fd_grad(
      [&](const Eigen::MatrixXd& v) { return gaussian_logpdf(prior, Eigen::VectorXd(v)); }, u);
  CHECK(oracle::rel_err(grad, fd, 1e-6) < 1e-6);
}

TEST_CASE("closed-form regression posterior matches the dense formula") {
  KernelConfig cfg;
  cfg.family = KernelFamily::Matern;
  cfg.l = 0.3;
  cfg.zeta = 1.5;
  GpPrior prior = make_prior(cfg, GridSpec::line(20));

  std::vector<int> idx = {2, 7, 11, 16};
  Eigen::VectorXd y(4);
  y << 0.5, -0.2, 0.9, 0.1;
  double noise = 0.1;
  GpPosterior post = gp_regression(prior, idx, y, noise);

  Eigen::MatrixXd koo(4, 4);
  Eigen::MatrixXd kxo(20, 4);
  for (int j = 0; j < 4; ++j) {
    kxo.col(j) = prior.gram.col(idx[j]);
    for (int i = 0; i < 4; ++i) koo(i, j) = prior.gram(idx[i], idx[j]);
  }
  koo.diagonal().array() += noise * noise;
  Eigen::MatrixXd koo_inv = koo.inverse();
  CHECK(oracle::rel_err(post.mean, kxo * koo_inv * y, 1e-8) < 1e-8);
  CHECK(oracle::rel_err(post.cov, prior.gram - kxo * koo_inv * kxo.transpose(), 1e-8) < 1e-8);

  // variance shrinks at observed points, mean tracks the data as noise -> 0
  Eigen::VectorXd var = post.pointwise_var();
  for (int j = 0; j < 4; ++j) CHECK(var[idx[j]] < prior.gram(idx[j], idx[j]));
  GpPosterior sharp = gp_regression(prior, idx, y, 1e-4);
  for (int j = 0; j < 4; ++j) CHECK(std::abs(sharp.mean[idx[j]] - y[j]) < 1e-3);

  // samples are deterministic per rng state and spread matches the covariance
  Rng r1(3, 0), r2(3, 0);
  CHECK(post.sample(r1) == post.sample(r2));

  CHECK_THROWS_AS(gp_regression(prior, {}, Eigen::VectorXd(), noise), std::invalid_argument);
  CHECK_THROWS_AS(gp_regression(prior, {50}, y.head(1), noise), std::invalid_argument);
  CHECK_THROWS_AS(gp_regression(prior, idx, y, 0.0), std::invalid_argument);
}

TEST_CASE("regression recovers a smooth truth from dense low-noise data") {
  KernelConfig cfg;
  cfg.family = KernelFamily::Matern;
  cfg.l = 0.3;
  cfg.zeta = 2.5;
  GpPrior prior = make_prior(cfg, GridSpec::line(48));

  Rng rng(41, 0);
  FunctionBatch truth = cholesky_sample(prior, 1, 1, rng);
  Eigen::VectorXd u = truth.sample(0).col(0);

  std::vector<int> idx;
  Eigen::VectorXd y(12);
  Rng noise_rng(42, 0);
  for (int j = 0; j < 12; ++j) {
    idx.push_back(2 + 4 * j);
    y[j] = u[idx.back()] + 0.01 * noise_rng.normal();
  }
  GpPosterior post = gp_regression(prior, idx, y, 0.01);
  double prior_mse = u.squaredNorm() / 48.0;
  double post_mse = (u - post.mean).squaredNorm() / 48.0;
  CHECK(post_mse < 0.05 * prior_mse);
}
