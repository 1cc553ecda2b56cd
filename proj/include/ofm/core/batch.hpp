#pragma once

#include <Eigen/Dense>

#include "ofm/core/grid.hpp"

namespace ofm {

/* A batch of discretized functions on a shared grid.  Each row is one sample,
 * flattened channel-major: values(s, ch * points + p).  Rows are stored
 * contiguously so a sample can be viewed as a points x channels matrix without
 * copying. */
struct FunctionBatch {
  GridSpec grid;
  int channels = 1;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> values;

  int size() const { return int(values.rows()); }

  Eigen::Map<const Eigen::MatrixXd> sample(int s) const {
    return {values.row(s).data(), grid.points(), channels};
  }

  void set_sample(int s, const Eigen::MatrixXd& m) {
    Eigen::Map<Eigen::MatrixXd>(values.row(s).data(), grid.points(), channels) = m;
  }

  static FunctionBatch zeros(const GridSpec& g, int count, int channels = 1) {
    FunctionBatch b;
    b.grid = g;
    b.channels = channels;
    b.values.setZero(count, g.points() * channels);
    return b;
  }
};

}  // namespace ofm
