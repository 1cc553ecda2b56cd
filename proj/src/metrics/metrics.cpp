#include "ofm/metrics/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "ofm/core/spectral.hpp"

namespace ofm {

namespace {

void check_shapes(const Eigen::VectorXd& pred, const FunctionBatch& truth) {
  if (truth.size() < 1) throw std::invalid_argument("metrics: empty truth set");
  if (pred.size() != truth.values.cols())
    throw std::invalid_argument("metrics: prediction has " + std::to_string(pred.size()) +
                                " entries, truth samples have " +
                                std::to_string(truth.values.cols()));
}

}  // namespace

double smse(const Eigen::VectorXd& pred_mean, const FunctionBatch& truth) {
  check_shapes(pred_mean, truth);
  double num = (truth.values.rowwise() - pred_mean.transpose()).array().square().mean();
  double gmean = truth.values.mean();
  double var = (truth.values.array() - gmean).square().mean();
  if (!(var > 0.0))
    throw std::invalid_argument("smse: truth set has zero variance, nothing to normalize by");
  return num / var;
}

double msll(const Eigen::VectorXd& pred_mean, const Eigen::VectorXd& pred_var,
            const FunctionBatch& truth) {
  check_shapes(pred_mean, truth);
  if (pred_var.size() != pred_mean.size())
    throw std::invalid_argument("msll: mean and variance sizes differ");
  if (!(pred_var.minCoeff() > 0.0) || !pred_var.allFinite())
    throw std::invalid_argument("msll: predictive variance must be positive everywhere");

  double acc = 0.0;
  const int n = truth.size(), w = int(truth.values.cols());
  for (int j = 0; j < w; ++j) {
    double half_log = 0.5 * std::log(2.0 * M_PI * pred_var[j]);
    double inv2v = 0.5 / pred_var[j];
    for (int i = 0; i < n; ++i) {
      double r = truth.values(i, j) - pred_mean[j];
      acc += half_log + r * r * inv2v;
    }
  }
  return acc / (double(n) * double(w));
}

DistributionDiagnostics distribution_diagnostics(const FunctionBatch& a,
                                                 const FunctionBatch& b) {
  if (a.size() < 50 || b.size() < 50)
    throw std::invalid_argument("distribution_diagnostics: need at least 50 samples per set (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                                ")");
  if (!(a.grid == b.grid) || a.channels != b.channels)
    throw std::invalid_argument("distribution_diagnostics: sample sets live on different grids");

  DistributionDiagnostics out;
  const int w = int(a.values.cols());

  // pointwise-value histograms over the pooled range
  const int bins = 64;
  double lo = std::min(a.values.minCoeff(), b.values.minCoeff());
  double hi = std::max(a.values.maxCoeff(), b.values.maxCoeff());
  if (hi > lo) {
    Eigen::VectorXd ha = Eigen::VectorXd::Zero(bins), hb = Eigen::VectorXd::Zero(bins);
    double scale = double(bins) / (hi - lo);
    auto fill = [&](const FunctionBatch& set, Eigen::VectorXd& h) {
      for (int i = 0; i < set.size(); ++i)
        for (int j = 0; j < w; ++j) {
          int bin = std::min(bins - 1, int((set.values(i, j) - lo) * scale));
          h[bin] += 1.0;
        }
      h /= double(set.size()) * double(w);
    };
    fill(a, ha);
    fill(b, hb);
    out.density_mse = (ha - hb).squaredNorm() / double(bins);
  }

  // mean of per-sample biased autocovariance curves
  const int lags = w / 2 + 1;
  auto mean_autocov = [&](const FunctionBatch& set) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(lags);
    for (int i = 0; i < set.size(); ++i) {
      Eigen::ArrayXd u = set.values.row(i).transpose().array();
      u -= u.mean();
      for (int k = 0; k < lags; ++k)
        acc[k] += (u.head(w - k) * u.tail(w - k)).sum() / double(w);
    }
    return (acc / double(set.size())).eval();
  };
  out.autocov_mse = (mean_autocov(a) - mean_autocov(b)).squaredNorm() / double(lags);

  // mean power spectra, compared on a log scale (floored to stay finite)
  auto mean_power = [&](const FunctionBatch& set) {
    Eigen::VectorXd acc;
    for (int i = 0; i < set.size(); ++i) {
      SpectralCoeffs c = spectral_forward(set.sample(i), set.grid);
      Eigen::VectorXd p = c.c.cwiseAbs2().rowwise().mean();
      acc = acc.size() ? (acc + p).eval() : p;
    }
    return (acc / double(set.size())).eval();
  };
  Eigen::ArrayXd pa = mean_power(a).array() + 1e-30, pb = mean_power(b).array() + 1e-30;
  out.spectra_mse = (pa.log() - pb.log()).square().mean();
  return out;
}

}  // namespace ofm
