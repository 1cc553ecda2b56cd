#pragma once

#include <string>
#include <vector>
#include <Eigen/Dense>

#include "ofm/core/rng.hpp"
#include "ofm/flow/field.hpp"

namespace ofm {

struct DivergenceConfig {
  std::string mode = "exact";  // exact | hutchinson
  int n_probes = 32;
  std::string probe_law = "rademacher";  // rademacher | gaussian
  void validate() const;
};

/* Divergence of the field w.r.t. the flattened state, from one recorded
 * evaluation.  Exact mode sweeps the tape once per state entry (m*c sweeps);
 * the probe form computes eps' J eps for each given probe. */
double exact_divergence(FieldTape& tape, long rows, long cols);
Eigen::VectorXd probe_divergences(FieldTape& tape, const std::vector<Eigen::MatrixXd>& probes);

/* Mean-zero identity-covariance probes shaped rows x cols. */
std::vector<Eigen::MatrixXd> draw_probes(const DivergenceConfig& cfg, long rows, long cols,
                                         Rng& rng);

struct DivergenceEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for exact or a single probe
};

DivergenceEstimate divergence(const VectorField& field, double t, const Eigen::MatrixXd& u,
                              const GridSpec& grid, const DivergenceConfig& cfg, Rng* rng);

}  // namespace ofm
