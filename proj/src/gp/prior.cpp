#include "ofm/gp/prior.hpp"

#include <cmath>
#include <stdexcept>

namespace ofm {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& k, double* jitter_out) {
  const double scale = k.diagonal().mean();
  const double ladder[] = {0.0, 1e-10, 1e-8, 1e-6};
  for (double step : ladder) {
    Eigen::MatrixXd trial = k;
    const double jitter = step * scale;
    if (jitter > 0.0) trial.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(trial);
    if (llt.info() == Eigen::Success) {
      if (jitter_out) *jitter_out = jitter;
      return llt.matrixL();
    }
  }
  throw std::runtime_error("cholesky_with_jitter: factorization failed at jitter 1e-6 * mean diagonal");
}

GpPrior make_prior(const KernelConfig& kernel, const GridSpec& grid) {
  kernel.validate();
  grid.validate();
  GpPrior prior;
  prior.grid = grid;
  prior.kernel = kernel;
  prior.gram = build_gram(kernel, grid.coordinates());
  prior.chol = cholesky_with_jitter(prior.gram, &prior.jitter);
  return prior;
}

FunctionBatch cholesky_sample(const GpPrior& prior, int count, int channels, Rng& rng) {
  if (count <= 0 || channels <= 0)
    throw std::invalid_argument("cholesky_sample: count and channels must be positive");
  const int n = prior.points();
  FunctionBatch batch = FunctionBatch::zeros(prior.grid, count, channels);
  for (int s = 0; s < count; ++s) {
    for (int ch = 0; ch < channels; ++ch) {
      Eigen::VectorXd z = rng.normal_vec(n);
      batch.values.row(s).segment(ch * n, n) = (prior.chol * z).transpose();
    }
  }
  return batch;
}

double gaussian_logpdf(const GpPrior& prior, const Eigen::VectorXd& u) {
  const int n = prior.points();
  if (int(u.size()) != n)
    throw std::invalid_argument("gaussian_logpdf: vector length does not match grid");
  Eigen::VectorXd w = prior.chol.triangularView<Eigen::Lower>().solve(u);
  const double quad = w.squaredNorm();
  const double logdet_half = prior.chol.diagonal().array().log().sum();
  return -0.5 * quad - logdet_half - 0.5 * n * kLog2Pi;
}

Eigen::VectorXd gaussian_logpdf_grad(const GpPrior& prior, const Eigen::VectorXd& u) {
  const int n = prior.points();
  if (int(u.size()) != n)
    throw std::invalid_argument("gaussian_logpdf_grad: vector length does not match grid");
  Eigen::VectorXd w = prior.chol.triangularView<Eigen::Lower>().solve(u);
  return -prior.chol.transpose().triangularView<Eigen::Upper>().solve(w);
}

GpPosterior gp_regression(const GpPrior& prior, const std::vector<int>& obs_idx,
                          const Eigen::VectorXd& obs_values, double noise_std) {
  const int n = prior.points();
  const int m = int(obs_idx.size());
  if (m == 0) throw std::invalid_argument("gp_regression: no observations");
  if (int(obs_values.size()) != m)
    throw std::invalid_argument("gp_regression: index/value count mismatch");
  if (noise_std <= 0.0) throw std::invalid_argument("gp_regression: noise_std must be positive");
  for (int idx : obs_idx)
    if (idx < 0 || idx >= n) throw std::invalid_argument("gp_regression: observation index out of range");

  // K_oo + sigma^2 I and K_*o assembled from the full Gram matrix so the
  // posterior is exactly consistent with the prior's discretization.
  Eigen::MatrixXd k_oo(m, m);
  Eigen::MatrixXd k_xo(n, m);
  for (int j = 0; j < m; ++j) {
    k_xo.col(j) = prior.gram.col(obs_idx[j]);
    for (int i = 0; i < m; ++i) k_oo(i, j) = prior.gram(obs_idx[i], obs_idx[j]);
  }
  k_oo.diagonal().array() += noise_std * noise_std;

  Eigen::LLT<Eigen::MatrixXd> llt(k_oo);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("gp_regression: observation system not positive definite");

  GpPosterior post;
  post.mean = k_xo * llt.solve(obs_values);
  post.cov = prior.gram - k_xo * llt.solve(k_xo.transpose());
  // Symmetrize before factoring: the subtraction loses exact symmetry.
  post.cov = 0.5 * (post.cov + post.cov.transpose()).eval();
  post.chol = cholesky_with_jitter(post.cov, &post.jitter);
  return post;
}

}  // namespace ofm
