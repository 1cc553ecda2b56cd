#pragma once

#include <Eigen/Dense>

#include "ofm/core/batch.hpp"
#include "ofm/core/grid.hpp"
#include "ofm/core/rng.hpp"
#include "ofm/gp/kernel.hpp"

namespace ofm {

/* A zero-mean GP discretized on a grid: Gram matrix plus its Cholesky factor.
 * Factorization escalates jitter (0, then 1e-10/1e-8/1e-6 times the mean
 * diagonal) and records what was added; L*L^T reproduces K + jitter*I. */
struct GpPrior {
  GridSpec grid;
  KernelConfig kernel;
  Eigen::MatrixXd gram;   // without jitter
  Eigen::MatrixXd chol;   // lower factor of gram + jitter*I
  double jitter = 0.0;

  int points() const { return grid.points(); }
};

GpPrior make_prior(const KernelConfig& kernel, const GridSpec& grid);

/* Lower Cholesky factor of a symmetric PSD matrix with the jitter ladder;
 * throws after the ladder is exhausted.  jitter_out receives what was added. */
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& k, double* jitter_out = nullptr);

/* Draws 'count' functions with 'channels' independent channels each. */
FunctionBatch cholesky_sample(const GpPrior& prior, int count, int channels, Rng& rng);

/* log N(u; 0, K+jitter*I) through triangular solves; u is a flat vector over
 * points (single channel). */
double gaussian_logpdf(const GpPrior& prior, const Eigen::VectorXd& u);

/* Gradient of the above: -K^{-1} u. */
Eigen::VectorXd gaussian_logpdf_grad(const GpPrior& prior, const Eigen::VectorXd& u);

/* Closed-form GP regression on the prior's grid given noisy point
 * observations: posterior mean and covariance (with its own jittered factor
 * for drawing samples). */
struct GpPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd chol;
  double jitter = 0.0;

  Eigen::VectorXd sample(Rng& rng) const { return mean + chol * rng.normal_vec(int(mean.size())); }
  Eigen::VectorXd pointwise_var() const { return cov.diagonal(); }
};

GpPosterior gp_regression(const GpPrior& prior, const std::vector<int>& obs_idx,
                          const Eigen::VectorXd& obs_values, double noise_std);

}  // namespace ofm
