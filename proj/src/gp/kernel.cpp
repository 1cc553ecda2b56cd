#include "ofm/gp/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace ofm {

void KernelConfig::validate() const {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("kernel: sigma2 must be > 0");
  switch (family) {
    case KernelFamily::Matern:
      if (!(l > 0.0)) throw std::invalid_argument("kernel: lengthscale must be > 0");
      if (zeta != 0.5 && zeta != 1.5 && zeta != 2.5)
        throw std::invalid_argument("kernel: matern smoothness must be 0.5, 1.5 or 2.5");
      break;
    case KernelFamily::RationalQuadratic:
      if (!(l > 0.0)) throw std::invalid_argument("kernel: lengthscale must be > 0");
      if (!(alpha > 0.0)) throw std::invalid_argument("kernel: rq alpha must be > 0");
      break;
    case KernelFamily::Gibbs:
      break;  // positivity of l(x) depends on the domain; checked at Gram build
  }
}

KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "matern") return KernelFamily::Matern;
  if (s == "rational_quadratic") return KernelFamily::RationalQuadratic;
  if (s == "gibbs") return KernelFamily::Gibbs;
  throw std::invalid_argument("kernel: unknown family '" + s + "'");
}

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Matern: return "matern";
    case KernelFamily::RationalQuadratic: return "rational_quadratic";
    case KernelFamily::Gibbs: return "gibbs";
  }
  return "?";
}

namespace {

double matern(double d, double l, double zeta, double s2) {
  if (zeta == 0.5) return s2 * std::exp(-d / l);
  if (zeta == 1.5) {
    double a = std::sqrt(3.0) * d / l;
    return s2 * (1.0 + a) * std::exp(-a);
  }
  double a = std::sqrt(5.0) * d / l;
  return s2 * (1.0 + a + 5.0 * d * d / (3.0 * l * l)) * std::exp(-a);
}

double gibbs(double x, double y, const KernelConfig& c) {
  double lx = c.l0 + c.l1 * x, ly = c.l0 + c.l1 * y;
  if (!(lx > 0.0) || !(ly > 0.0))
    throw std::invalid_argument("kernel: gibbs lengthscale l0 + l1*x must stay positive");
  double s = lx * lx + ly * ly;
  double d = x - y;
  return c.sigma2 * std::sqrt(2.0 * lx * ly / s) * std::exp(-d * d / s);
}

}  // namespace

double kernel_eval(const KernelConfig& cfg, const Eigen::RowVectorXd& x,
                   const Eigen::RowVectorXd& y) {
  cfg.validate();
  if (x.size() != y.size()) throw std::invalid_argument("kernel: point dimension mismatch");
  switch (cfg.family) {
    case KernelFamily::Matern:
      return matern((x - y).norm(), cfg.l, cfg.zeta, cfg.sigma2);
    case KernelFamily::RationalQuadratic: {
      double d2 = (x - y).squaredNorm();
      return cfg.sigma2 * std::pow(1.0 + d2 / (2.0 * cfg.alpha * cfg.l * cfg.l), -cfg.alpha);
    }
    case KernelFamily::Gibbs:
      if (x.size() != 1) throw std::invalid_argument("kernel: gibbs is 1d-only");
      return gibbs(x[0], y[0], cfg);
  }
  throw std::logic_error("kernel: unreachable");
}

Eigen::MatrixXd build_gram(const KernelConfig& cfg, const Eigen::MatrixXd& points) {
  cfg.validate();
  int n = int(points.rows());
  if (n == 0) throw std::invalid_argument("build_gram: empty point list");
  if (cfg.family == KernelFamily::Gibbs && points.cols() != 1)
    throw std::invalid_argument("build_gram: gibbs is 1d-only");
  Eigen::MatrixXd k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double v = kernel_eval(cfg, points.row(i), points.row(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

}  // namespace ofm
