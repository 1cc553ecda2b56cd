#pragma once

#include <array>
#include <stdexcept>
#include <Eigen/Dense>

namespace ofm {

/* Uniform evaluation grid on a box, 1d or 2d.  Points sample one period:
 * x_p = lo + p * (hi - lo) / n, right endpoint excluded, so doubling the
 * resolution nests the coarse grid and spectral index k means continuous
 * frequency k / (hi - lo) at every resolution.  2d grids flatten row-major:
 * p = ix * ny + iy. */
struct GridSpec {
  int dim = 1;
  std::array<int, 2> shape{0, 1};
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};

  static GridSpec line(int n, double a = 0.0, double b = 1.0) {
    GridSpec g;
    g.dim = 1;
    g.shape = {n, 1};
    g.lo = {a, 0.0};
    g.hi = {b, 1.0};
    g.validate();
    return g;
  }

  static GridSpec plane(int nx, int ny, double ax = 0.0, double bx = 1.0,
                        double ay = 0.0, double by = 1.0) {
    GridSpec g;
    g.dim = 2;
    g.shape = {nx, ny};
    g.lo = {ax, ay};
    g.hi = {bx, by};
    g.validate();
    return g;
  }

  void validate() const {
    if (dim != 1 && dim != 2) throw std::invalid_argument("grid: dim must be 1 or 2");
    for (int d = 0; d < dim; ++d) {
      if (shape[d] < 2) throw std::invalid_argument("grid: need >= 2 points per dimension");
      if (!(hi[d] > lo[d])) throw std::invalid_argument("grid: empty domain");
    }
  }

  int points() const { return dim == 1 ? shape[0] : shape[0] * shape[1]; }

  double step(int d) const { return (hi[d] - lo[d]) / shape[d]; }

  /* points x dim coordinate table in flatten order. */
  Eigen::MatrixXd coordinates() const {
    Eigen::MatrixXd x(points(), dim);
    if (dim == 1) {
      for (int i = 0; i < shape[0]; ++i) x(i, 0) = lo[0] + i * step(0);
    } else {
      for (int ix = 0; ix < shape[0]; ++ix)
        for (int iy = 0; iy < shape[1]; ++iy) {
          int p = ix * shape[1] + iy;
          x(p, 0) = lo[0] + ix * step(0);
          x(p, 1) = lo[1] + iy * step(1);
        }
    }
    return x;
  }

  /* Coordinates rescaled to [0,1]^dim; used as operator input channels so the
   * vector field is resolution and domain agnostic. */
  Eigen::MatrixXd unit_coordinates() const {
    Eigen::MatrixXd x = coordinates();
    for (int d = 0; d < dim; ++d)
      x.col(d) = (x.col(d).array() - lo[d]) / (hi[d] - lo[d]);
    return x;
  }

  bool operator==(const GridSpec& o) const {
    return dim == o.dim && shape == o.shape && lo == o.lo && hi == o.hi;
  }
};

}  // namespace ofm
