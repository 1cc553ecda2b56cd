#pragma once

#include <string>

#include "ofm/core/batch.hpp"

namespace ofm {

/* Mean squared error of pred_mean against every sample in truth, normalized
 * by the pooled variance of the truth values.  Predicting the global truth
 * mean scores exactly 1. */
double smse(const Eigen::VectorXd& pred_mean, const FunctionBatch& truth);

/* Mean standardized log loss: the average over truth samples and points of
 * 0.5 log(2 pi var_j) + (truth_ij - mean_j)^2 / (2 var_j).  This is the raw
 * predictive log loss; no trivial-model baseline is subtracted. */
double msll(const Eigen::VectorXd& pred_mean, const Eigen::VectorXd& pred_var,
            const FunctionBatch& truth);

/* How far apart two sample sets are as distributions over functions:
 *   density_mse  64-bin normalized histograms of pointwise values over the
 *                pooled range of both sets
 *   autocov_mse  mean per-sample biased autocovariance curves, lags 0..n/2
 *   spectra_mse  mean power spectra compared on a log scale
 * All three are zero when the sets are identical and symmetric in (a, b). */
struct DistributionDiagnostics {
  double density_mse = 0.0, autocov_mse = 0.0, spectra_mse = 0.0;
};

DistributionDiagnostics distribution_diagnostics(const FunctionBatch& a, const FunctionBatch& b);

/* Everything a quality evaluation produces, ready for serialization. */
struct MetricsReport {
  double smse = 0.0, msll = 0.0;
  double density_mse = 0.0, autocov_mse = 0.0, spectra_mse = 0.0;
  long n_pred = 0, n_truth = 0;
  std::string config_echo;
};

}  // namespace ofm
