#include <complex>

#include "doctest.h"
#include "ofm/fno/operator.hpp"
#include "support/oracles.hpp"

using namespace ofm;

namespace {

FnoConfig tiny_cfg() {
  FnoConfig cfg;
  cfg.modes0 = 4;
  cfg.width = 4;
  cfg.n_layers = 2;
  cfg.time_features = 2;
  return cfg;
}

/* Band-limited test signal: K harmonics sampled on the grid's own points. */
Eigen::MatrixXd harmonic_signal(int n, int channels, int harmonics, Rng& rng) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, channels);
  for (int ch = 0; ch < channels; ++ch)
    for (int k = 0; k < harmonics; ++k) {
      double a = rng.normal(), b = rng.normal();
      for (int p = 0; p < n; ++p) {
        double th = 2.0 * M_PI * double(k) * double(p) / double(n);
        u(p, ch) += a * std::cos(th) + b * std::sin(th);
      }
    }
  return u;
}

/* Dense complex-arithmetic reference for the 1d truncated convolution. */
Eigen::MatrixXd conv_oracle_1d(const Eigen::MatrixXd& u, const SpectralWeights& w, int m0) {
  const int n = int(u.rows()), cin = int(u.cols()), cout = int(w.re[0].cols());
  const int half = n / 2 + 1;
  Eigen::MatrixXcd c(half, cin);
  for (int ch = 0; ch < cin; ++ch) c.col(ch) = oracle::dft(u.col(ch));
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(half, cout);
  for (int k = 0; k < m0; ++k) {
    Eigen::MatrixXcd wk =
        w.re[k].cast<std::complex<double>>() +
        std::complex<double>(0.0, 1.0) * w.im[k].cast<std::complex<double>>();
    y.row(k) = c.row(k) * wk;
  }
  Eigen::MatrixXd out(n, cout);
  for (int ch = 0; ch < cout; ++ch)
    for (int p = 0; p < n; ++p) {
      std::complex<double> acc(0.0, 0.0);
      for (int k = 0; k < half; ++k) {
        double pair = (k == 0 || 2 * k == n) ? 1.0 : 2.0;
        double th = 2.0 * M_PI * double(k) * double(p) / double(n);
        acc += pair * y(k, ch) * std::complex<double>(std::cos(th), std::sin(th));
      }
      out(p, ch) = acc.real() / double(n);
    }
  return out;
}

SpectralWeights random_weights(int slots, int cin, int cout, Rng& rng) {
  SpectralWeights w;
  for (int k = 0; k < slots; ++k) {
    w.re.push_back(rng.normal_mat(cin, cout));
    w.im.push_back(rng.normal_mat(cin, cout));
  }
  return w;
}

}  // namespace

TEST_CASE("init is deterministic and the zero operator maps everything to zero") {
  FnoConfig cfg = tiny_cfg();
  Rng r1(5, 0), r2(5, 0), r3(6, 0);
  OperatorParams a = init_params(cfg, r1);
  OperatorParams b = init_params(cfg, r2);
  OperatorParams c = init_params(cfg, r3);
  CHECK(flatten_params(a) == flatten_params(b));
  CHECK(flatten_params(a) != flatten_params(c));

  GridSpec grid = GridSpec::line(16);
  Rng data(1, 0);
  Eigen::MatrixXd u = data.normal_mat(16, 1);
  OperatorParams z = zero_params(cfg);
  CHECK(operator_forward(z, 0.3, u, grid).cwiseAbs().maxCoeff() == 0.0);

  // zeroing just the projection also annihilates the output
  a.w_proj2.setZero();
  a.b_proj2.setZero();
  CHECK(operator_forward(a, 0.7, u, grid).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("parameter count matches the closed-form formula") {
  FnoConfig cfg;
  cfg.modes0 = 16;
  cfg.width = 32;
  cfg.n_layers = 4;
  Rng rng(3, 0);
  OperatorParams p = init_params(cfg, rng);

  std::int64_t lift = (1 + 1 + 1) * 32 + 32;
  std::int64_t time = 8 * 32;
  std::int64_t per_layer = 16 * 2 * 32 * 32 + 32 * 32 + 32;
  std::int64_t proj = 32 * 64 + 64 + 64 * 1 + 1;
  CHECK(p.param_count() == lift + time + 4 * per_layer + proj);
  CHECK(flatten_params(p).size() == p.param_count());
}

TEST_CASE("flatten/unflatten round-trips exactly") {
  FnoConfig cfg = tiny_cfg();
  Rng rng(9, 0);
  OperatorParams p = init_params(cfg, rng);
  Eigen::VectorXd flat = flatten_params(p);

  OperatorParams q = zero_params(cfg);
  unflatten_params(flat, q);
  CHECK(flatten_params(q) == flat);
  CHECK(q.w_lift == p.w_lift);
  CHECK(q.layers[1].spec.im[2] == p.layers[1].spec.im[2]);

  Eigen::VectorXd bad(flat.size() + 1);
  CHECK_THROWS_AS(unflatten_params(bad, q), std::invalid_argument);
}

TEST_CASE("truncated spectral convolution matches a dense complex oracle") {
  Rng rng(21, 0);
  GridSpec grid = GridSpec::line(24);
  Eigen::MatrixXd u = rng.normal_mat(24, 3);
  SpectralWeights w = random_weights(7, 3, 2, rng);
  Eigen::MatrixXd got = spectral_conv(u, w, grid, ModeSpec{7, 0});
  CHECK(oracle::rel_err(got, conv_oracle_1d(u, w, 7), 1e-6) < 1e-8);
}

TEST_CASE("identity weights act as an ideal low-pass in 2d") {
  Rng rng(4, 0);
  GridSpec grid = GridSpec::plane(12, 10);
  Eigen::MatrixXd u = rng.normal_mat(120, 1);

  ModeSpec modes{3, 3};
  SpectralWeights eye;
  for (int k = 0; k < 2 * 3 * 3; ++k) {
    eye.re.push_back(Eigen::MatrixXd::Identity(1, 1));
    eye.im.push_back(Eigen::MatrixXd::Zero(1, 1));
  }
  Eigen::MatrixXd got = spectral_conv(u, eye, grid, modes);

  // reference: zero all coefficients outside the retained corner blocks
  SpectralCoeffs c = spectral_forward(u, grid);
  const int ky_half = 10 / 2 + 1;
  for (int kx = 0; kx < 12; ++kx)
    for (int ky = 0; ky < ky_half; ++ky) {
      bool keep_x = kx < 3 || kx >= 12 - 3;
      bool keep_y = ky < 3;
      if (!(keep_x && keep_y)) c.c(kx * ky_half + ky, 0) = 0.0;
    }
  CHECK(oracle::rel_err(got, spectral_inverse(c), 1e-6) < 1e-10);
}

TEST_CASE("band-limited convolution is resolution independent") {
  Rng rng(31, 0);
  SpectralWeights w = random_weights(10, 1, 1, rng);
  Rng sig(32, 0);
  Eigen::MatrixXd coarse = harmonic_signal(64, 1, 6, sig);
  Rng sig2(32, 0);
  Eigen::MatrixXd fine = harmonic_signal(128, 1, 6, sig2);

  Eigen::MatrixXd out64 = spectral_conv(coarse, w, GridSpec::line(64), ModeSpec{10, 0});
  Eigen::MatrixXd out128 = spectral_conv(fine, w, GridSpec::line(128), ModeSpec{10, 0});
  for (int p = 0; p < 64; ++p) CHECK(std::abs(out128(2 * p, 0) - out64(p, 0)) < 1e-6);
}

TEST_CASE("one parameter set evaluates across grids and resolutions") {
  FnoConfig cfg;
  cfg.modes0 = 10;
  cfg.width = 16;
  cfg.n_layers = 3;
  Rng rng(8, 0);
  OperatorParams p = init_params(cfg, rng);

  for (int n : {32, 64, 128}) {
    Rng data(2, 0);
    Eigen::MatrixXd u = data.normal_mat(n, 1);
    Eigen::MatrixXd out = operator_forward(p, 0.5, u, GridSpec::line(n));
    CHECK(out.rows() == n);
    CHECK(out.cols() == 1);
  }

  // restriction of the fine evaluation agrees with the coarse evaluation
  Rng sig(12, 0);
  Eigen::MatrixXd coarse = harmonic_signal(64, 1, 6, sig);
  Rng sig2(12, 0);
  Eigen::MatrixXd fine = harmonic_signal(128, 1, 6, sig2);
  Eigen::MatrixXd out64 = operator_forward(p, 0.4, coarse, GridSpec::line(64));
  Eigen::MatrixXd out128 = operator_forward(p, 0.4, fine, GridSpec::line(128));
  double rms = 0.0;
  for (int q = 0; q < 64; ++q) {
    double d = out128(2 * q, 0) - out64(q, 0);
    rms += d * d;
  }
  rms = std::sqrt(rms / 64.0);
  double scale = std::sqrt(out64.squaredNorm() / 64.0);
  CHECK(rms < 1e-3 * std::max(1.0, scale));

  // 2d shape contract
  FnoConfig cfg2;
  cfg2.dim = 2;
  cfg2.modes0 = 4;
  cfg2.modes1 = 4;
  cfg2.width = 8;
  cfg2.n_layers = 2;
  Rng rng2(9, 0);
  OperatorParams p2 = init_params(cfg2, rng2);
  Rng data2(3, 0);
  Eigen::MatrixXd u2 = data2.normal_mat(32 * 32, 1);
  Eigen::MatrixXd out2 = operator_forward(p2, 0.2, u2, GridSpec::plane(32, 32));
  CHECK(out2.rows() == 32 * 32);
  CHECK(out2.cols() == 1);
}

TEST_CASE("gradients w.r.t. input and parameters match finite differences") {
  FnoConfig cfg = tiny_cfg();
  GridSpec grid = GridSpec::line(16);
  Rng rng(17, 0);
  OperatorParams p = init_params(cfg, rng);
  Eigen::MatrixXd u = rng.normal_mat(16, 1);
  Eigen::MatrixXd v = rng.normal_mat(16, 1);  // fixed cotangent

  auto scalar_of = [&](const OperatorParams& params, const Eigen::MatrixXd& uin) {
    return (operator_forward(params, 0.6, uin, grid).array() * v.array()).sum();
  };

  Tape tape;
  int uid = tape.input(u);
  int out = operator_record(tape, p, 0.6, uid, grid);
  OperatorGrads grads = make_grads(p);
  tape.backward(out, v, sink_of(grads));

  Eigen::MatrixXd fd_u =
      oracle::fd_grad([&](const Eigen::MatrixXd& x) { return scalar_of(p, x); }, u);
  CHECK(oracle::rel_err(tape.input_grad(uid), fd_u, 1e-5) < 1e-4);

  Eigen::VectorXd flat = flatten_params(p);
  Eigen::VectorXd analytic = flatten_grads(grads);
  OperatorParams work = p;
  for (int j = 0; j < flat.size(); j += 7) {  // probe a spread of coordinates
    Eigen::VectorXd mod = flat;
    const double h = 1e-5;
    mod[j] = flat[j] + h;
    unflatten_params(mod, work);
    double fp = scalar_of(work, u);
    mod[j] = flat[j] - h;
    unflatten_params(mod, work);
    double fm = scalar_of(work, u);
    double fd = (fp - fm) / (2.0 * h);
    CHECK(std::abs(analytic[j] - fd) / std::max(std::abs(fd), 1e-5) < 1e-4);
  }
}

TEST_CASE("batch evaluation matches per-sample evaluation and is thread invariant") {
  FnoConfig cfg = tiny_cfg();
  Rng rng(23, 0);
  OperatorParams p = init_params(cfg, rng);

  FunctionBatch batch = FunctionBatch::zeros(GridSpec::line(16), 5);
  batch.values = rng.normal_mat(5, 16);

  FunctionBatch out1 = operator_forward(p, 0.25, batch, 1);
  FunctionBatch out2 = operator_forward(p, 0.25, batch, 3);
  CHECK(out1.values == out2.values);
  for (int s = 0; s < 5; ++s) {
    Eigen::MatrixXd want = operator_forward(p, 0.25, batch.sample(s), batch.grid);
    CHECK(Eigen::MatrixXd(out1.sample(s)) == want);
  }
}

TEST_CASE("the field depends on t") {
  FnoConfig cfg = tiny_cfg();
  Rng rng(29, 0);
  OperatorParams p = init_params(cfg, rng);
  Rng data(1, 0);
  Eigen::MatrixXd u = data.normal_mat(16, 1);
  GridSpec grid = GridSpec::line(16);
  Eigen::MatrixXd a = operator_forward(p, 0.1, u, grid);
  Eigen::MatrixXd b = operator_forward(p, 0.9, u, grid);
  CHECK((a - b).cwiseAbs().maxCoeff() > 1e-8);
}

TEST_CASE("config validation and shape errors") {
  FnoConfig cfg;
  cfg.dim = 3;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = tiny_cfg();
  cfg.time_features = 3;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = tiny_cfg();
  cfg.activation = "relu";
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = tiny_cfg();
  Rng rng(2, 0);
  OperatorParams p = init_params(cfg, rng);
  Eigen::MatrixXd u2 = rng.normal_mat(16, 2);
  CHECK_THROWS_AS(operator_forward(p, 0.5, u2, GridSpec::line(16)), std::invalid_argument);
  // four grid points cannot carry four modes (max is floor(4/2)+1 = 3)
  Eigen::MatrixXd u_small = rng.normal_mat(4, 1);
  CHECK_THROWS_AS(operator_forward(p, 0.5, u_small, GridSpec::line(4)), std::invalid_argument);

  FunctionBatch wrong = FunctionBatch::zeros(GridSpec::line(16), 2, 3);
  CHECK_THROWS_AS(operator_forward(p, 0.5, wrong, 1), std::invalid_argument);
}

TEST_CASE("tanh activation variant runs and differs from gelu") {
  FnoConfig cfg = tiny_cfg();
  Rng r1(5, 0);
  OperatorParams pg = init_params(cfg, r1);
  cfg.activation = "tanh";
  Rng r2(5, 0);
  OperatorParams pt = init_params(cfg, r2);

  Rng data(8, 0);
  Eigen::MatrixXd u = data.normal_mat(16, 1);
  GridSpec grid = GridSpec::line(16);
  CHECK((operator_forward(pg, 0.5, u, grid) - operator_forward(pt, 0.5, u, grid))
            .cwiseAbs()
            .maxCoeff() > 1e-10);
}
