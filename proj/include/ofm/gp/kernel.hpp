#pragma once

#include <string>
#include <Eigen/Dense>

namespace ofm {

enum class KernelFamily { Matern, RationalQuadratic, Gibbs };

/* Stationary kernels take the Euclidean distance between points; the Gibbs
 * kernel is nonstationary with a linearly varying lengthscale l(x) = l0 + l1*x
 * and is defined for 1d inputs only. */
struct KernelConfig {
  KernelFamily family = KernelFamily::Matern;
  double sigma2 = 1.0;   // marginal variance
  double l = 0.3;        // lengthscale (matern, rq)
  double zeta = 1.5;     // matern smoothness, one of {0.5, 1.5, 2.5}
  double alpha = 1.0;    // rq shape
  double l0 = 0.05;      // gibbs intercept
  double l1 = 0.25;      // gibbs slope

  void validate() const;
};

KernelFamily kernel_family_from_string(const std::string& s);
std::string to_string(KernelFamily f);

/* k(x, x') for single points (row vectors of equal dimension). */
double kernel_eval(const KernelConfig& cfg, const Eigen::RowVectorXd& x,
                   const Eigen::RowVectorXd& y);

/* Dense Gram matrix over an explicit point list (rows = points).  Evaluates
 * each pair the same way kernel_eval does, so the Gram of a subset of points
 * is exactly the corresponding submatrix. */
Eigen::MatrixXd build_gram(const KernelConfig& cfg, const Eigen::MatrixXd& points);

}  // namespace ofm
