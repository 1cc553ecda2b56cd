#pragma once

#include "ofm/flow/ode.hpp"
#include "ofm/gp/prior.hpp"

namespace ofm {

struct LikelihoodResult {
  double logp = 0.0;          // log_prior_u0 + backward divergence integral
  double log_prior_u0 = 0.0;  // reference-GP log density of the recovered u0
  double div_integral = 0.0;  // integral of the divergence from t=1 down to 0
  double std_error = 0.0;     // spread across probes (0 in exact mode)
  long nfe = 0;

  Eigen::MatrixXd u0;  // transported state at t=0
};

/* Log density of u1 under the flow-transported reference measure: transport
 * u1 backward to t=0 while co-integrating the field's divergence, then add
 * the reference-GP log density of the terminal state.  Channels are treated
 * as independent draws of the reference GP. */
LikelihoodResult log_likelihood(const VectorField& field, const Eigen::MatrixXd& u1,
                                const GpPrior& ref, const SolverConfig& solver,
                                const DivergenceConfig& div_cfg, Rng& rng);

}  // namespace ofm
