#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ofm/flow/ode.hpp"
#include "ofm/gp/prior.hpp"
#include "ofm/ot/coupling.hpp"

namespace ofm {

struct TrainConfig {
  double sigma_min = 1e-4;
  int batch = 64;
  int epochs = 100;
  double lr = 1e-3;
  std::string optimizer = "adam";  // adam | sgd
  std::uint64_t seed = 0;
  int threads = 1;
  int checkpoint_every = 0;  // epochs between checkpoint callbacks (0 = off)
  bool ot_coupling = true;   // pair h0/h1 by optimal assignment vs independently
  void validate() const;
};

/* The stochastic interpolant between a coupled pair at time t: the straight
 * line t*h1 + (1-t)*h0 plus sigma_min-scaled reference-GP noise.  At
 * sigma_min = 0 this hits h0 exactly at t=0 and h1 at t=1. */
Eigen::MatrixXd conditional_sample(const Eigen::MatrixXd& h0, const Eigen::MatrixXd& h1, double t,
                                   double sigma_min, const GpPrior& ref, Rng& rng);

/* Mean over pairs and grid entries of |G(t, h_t) - (h1 - h0)|^2, with fresh
 * t ~ U(0,1) per pair.  When grads is non-null, parameter gradients of the
 * loss are accumulated into it. */
double cfm_loss(const OperatorParams& params, const CoupledBatch& coupled, const GpPrior& ref,
                double sigma_min, Rng& rng, OperatorGrads* grads, int n_threads = 1);

struct TrainResult {
  OperatorParams params;
  std::vector<double> loss_history;  // per-epoch mean
  bool aborted = false;
  int aborted_epoch = -1;
};

/* Minibatch loop: draw h0 from the reference, pair with data functions by
 * minimum-cost assignment, regress the field onto h1 - h0, update.  Stops
 * early and returns the last end-of-epoch params if the loss diverges. */
TrainResult train_prior(
    const FunctionBatch& data, const GpPrior& ref, const FnoConfig& arch, const TrainConfig& cfg,
    const std::function<void(int, const OperatorParams&, double)>& on_checkpoint = nullptr);

struct SampleStats {
  FunctionBatch batch;
  double mean_nfe = 0.0;
};

/* Pushes reference draws through the flow t: 0 -> 1. */
SampleStats sample_prior(const VectorField& field, const GpPrior& ref, int count, int channels,
                         const SolverConfig& solver, Rng& rng, int n_threads = 1);

}  // namespace ofm
