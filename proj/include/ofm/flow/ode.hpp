#pragma once

#include <memory>
#include <string>
#include <vector>
#include <Eigen/Dense>

#include "ofm/flow/divergence.hpp"
#include "ofm/flow/field.hpp"

namespace ofm {

struct SolverConfig {
  std::string kind = "dopri45_adaptive";  // rk4_fixed | dopri45_adaptive
  int steps = 50;                         // rk4_fixed
  double atol = 1e-5, rtol = 1e-5;        // dopri45_adaptive
  int max_evals = 200000;
  void validate() const;
};

/* Result of one trajectory.  'div' holds the signed integral of the field's
 * divergence from t0 to t1: one entry in exact mode, one per probe in
 * hutchinson mode (probes are drawn once and frozen along the trajectory),
 * empty when divergence was not requested. */
struct FlowTrace {
  Eigen::MatrixXd u;
  Eigen::VectorXd div;
  long nfe = 0;
  std::vector<double> accepted_steps;  // adaptive only

  double div_integral() const { return div.size() ? div.mean() : 0.0; }
  double div_std_error() const {
    if (div.size() < 2) return 0.0;
    double m = div.mean();
    double var = (div.array() - m).square().sum() / double(div.size() - 1);
    return std::sqrt(var / double(div.size()));
  }
};

/* Solves du/dt = G(t,u) from t0 to t1 (either direction); when div_cfg is
 * given, co-integrates the divergence alongside the state. */
FlowTrace integrate(const VectorField& field, const Eigen::MatrixXd& u_start,
                    const GridSpec& grid, double t0, double t1, const SolverConfig& solver,
                    const DivergenceConfig* div_cfg = nullptr, Rng* rng = nullptr);

/* Fixed-step RK4 transport that keeps every stage recording so the exact
 * discrete adjoint can be swept afterwards: backward(lambda) returns
 * d<lambda, u(t1)> / d u(t0) for the step sequence actually taken. */
class Rk4Flow {
 public:
  Rk4Flow(const VectorField& field, const GridSpec& grid, double t0, double t1, int steps);
  const Eigen::MatrixXd& forward(const Eigen::MatrixXd& u0);
  Eigen::MatrixXd backward(const Eigen::MatrixXd& lambda) const;
  const Eigen::MatrixXd& result() const { return u1_; }

 private:
  const VectorField& field_;
  GridSpec grid_;
  double t0_, t1_;
  int steps_;
  double h_ = 0.0;
  std::vector<std::unique_ptr<FieldTape>> tapes_;  // 4 per step
  Eigen::MatrixXd u1_;
};

}  // namespace ofm
