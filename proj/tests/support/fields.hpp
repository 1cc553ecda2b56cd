#pragma once

/* Closed-form vector fields with hand-written vjps, used to pin the solvers
 * and divergence estimators against analytic answers. */

#include <memory>
#include <Eigen/Dense>

#include "ofm/flow/field.hpp"

namespace testfields {

class ClosedFormTape final : public ofm::FieldTape {
 public:
  ClosedFormTape(Eigen::MatrixXd value, std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> vjp)
      : value_(std::move(value)), vjp_(std::move(vjp)) {}
  const Eigen::MatrixXd& value() const override { return value_; }
  Eigen::MatrixXd vjp(const Eigen::MatrixXd& cot) override { return vjp_(cot); }

 private:
  Eigen::MatrixXd value_;
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> vjp_;
};

/* G(t, u) = c (constant in both arguments). */
class ConstantField final : public ofm::VectorField {
 public:
  explicit ConstantField(Eigen::MatrixXd c) : c_(std::move(c)) {}
  std::unique_ptr<ofm::FieldTape> record(double, const Eigen::MatrixXd& u,
                                         const ofm::GridSpec&) const override {
    return std::make_unique<ClosedFormTape>(c_, [rows = u.rows(), cols = u.cols()](
                                                    const Eigen::MatrixXd&) {
      return Eigen::MatrixXd::Zero(rows, cols);
    });
  }

 private:
  Eigen::MatrixXd c_;
};

/* G(t, u) = alpha * u. */
class ScalingField final : public ofm::VectorField {
 public:
  explicit ScalingField(double alpha) : alpha_(alpha) {}
  std::unique_ptr<ofm::FieldTape> record(double, const Eigen::MatrixXd& u,
                                         const ofm::GridSpec&) const override {
    return std::make_unique<ClosedFormTape>(
        alpha_ * u, [a = alpha_](const Eigen::MatrixXd& v) { return (a * v).eval(); });
  }

 private:
  double alpha_;
};

/* G(t, u) = reshape(A vec(u)); vec is column-major over the state matrix. */
class MatrixField final : public ofm::VectorField {
 public:
  explicit MatrixField(Eigen::MatrixXd a) : a_(std::move(a)) {}
  std::unique_ptr<ofm::FieldTape> record(double, const Eigen::MatrixXd& u,
                                         const ofm::GridSpec&) const override {
    Eigen::Map<const Eigen::VectorXd> x(u.data(), u.size());
    Eigen::VectorXd y = a_ * x;
    Eigen::MatrixXd val = Eigen::Map<Eigen::MatrixXd>(y.data(), u.rows(), u.cols());
    return std::make_unique<ClosedFormTape>(val, [this, rows = u.rows(),
                                                  cols = u.cols()](const Eigen::MatrixXd& v) {
      Eigen::Map<const Eigen::VectorXd> vv(v.data(), v.size());
      Eigen::VectorXd g = a_.transpose() * vv;
      return Eigen::MatrixXd(Eigen::Map<Eigen::MatrixXd>(g.data(), rows, cols));
    });
  }

 private:
  Eigen::MatrixXd a_;
};

}  // namespace testfields
