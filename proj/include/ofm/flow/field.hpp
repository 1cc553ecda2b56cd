#pragma once

#include <memory>
#include <Eigen/Dense>

#include "ofm/core/grid.hpp"
#include "ofm/fno/operator.hpp"

namespace ofm {

/* One recorded evaluation of a vector field at (t, u).  The value is fixed;
 * vjp() may be called any number of times with different cotangents (each
 * sweep is independent), which is what divergence estimation and discrete
 * adjoints need. */
class FieldTape {
 public:
  virtual ~FieldTape() = default;
  virtual const Eigen::MatrixXd& value() const = 0;
  virtual Eigen::MatrixXd vjp(const Eigen::MatrixXd& cotangent) = 0;
};

/* A time-dependent vector field G(t, u) on function values (points x
 * channels).  Implementations must be pure: record() may run concurrently
 * from different threads. */
class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual std::unique_ptr<FieldTape> record(double t, const Eigen::MatrixXd& u,
                                            const GridSpec& grid) const = 0;
  Eigen::MatrixXd eval(double t, const Eigen::MatrixXd& u, const GridSpec& grid) const {
    return record(t, u, grid)->value();
  }
};

/* The learned operator as a vector field.  Tapes draw from a thread-local
 * pool, so steady-state integration does not allocate. */
class FnoField : public VectorField {
 public:
  explicit FnoField(const OperatorParams* params) : params_(params) {}
  std::unique_ptr<FieldTape> record(double t, const Eigen::MatrixXd& u,
                                    const GridSpec& grid) const override;
  const OperatorParams& params() const { return *params_; }

 private:
  const OperatorParams* params_;
};

}  // namespace ofm
