#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ofm/flow/likelihood.hpp"
#include "ofm/flow/ode.hpp"
#include "ofm/gp/prior.hpp"

namespace ofm {

struct ObservationSet {
  std::vector<int> indices;  // into the query grid
  Eigen::VectorXd values;
  double noise_std = 0.1;
  void validate(int grid_points) const;
  int count() const { return int(indices.size()); }
};

struct SgldConfig {
  long iterations = 40000;  // N
  long burn_in = 3000;
  long thinning = 10;
  double temperature = 1.0;
  double lr_initial = 5e-3;
  double lr_final = 4e-3;  // exponential interpolation between the two
  std::string posterior_mode = "exact_reparam";  // exact_reparam | paper_eq17
  std::uint64_t seed = 0;
  void validate() const;
};

struct PosteriorChain {
  GridSpec grid;
  std::vector<Eigen::VectorXd> latents;       // recorded a iterates
  std::vector<Eigen::VectorXd> pushforwards;  // u = Phi_1(a) for each record
  std::vector<double> log_posteriors;
  int size() const { return int(latents.size()); }
};

struct LogPosterior {
  double value = 0.0;      // misfit + prior term (additive constant dropped)
  double misfit = 0.0;     // -sum (obs - u(a))^2 / (2 sigma^2)
  double log_prior = 0.0;  // reference logpdf(a), or log P(u(a)) in eq17 mode
  Eigen::VectorXd u;       // pushforward Phi_1(a), from the transport just run
};

/* Unnormalized log posterior over the latent a.
 * exact_reparam: misfit(Phi_1(a)) + gaussian_logpdf(a); the flow Jacobian
 *   cancels under the change of variables, so no divergence is needed.
 * paper_eq17:    misfit(Phi_1(a)) + log P(Phi_1(a)) with log P evaluated by
 *   the divergence-augmented backward ODE.
 * When grad is non-null it receives d(value)/da computed through the
 * fixed-step RK4 discrete adjoint (solver.steps steps).  In eq17 mode the
 * gradient omits the divergence-integral term (it would need second-order
 * sweeps); up to solver error that term's contribution cancels exactly
 * against the transported log-density Jacobian, so the two modes ascend the
 * same target. */
LogPosterior log_posterior(const VectorField& field, const Eigen::VectorXd& a,
                           const ObservationSet& obs, const GpPrior& ref,
                           const SolverConfig& solver, const DivergenceConfig& div_cfg,
                           const std::string& mode, Rng& rng, Eigen::VectorXd* grad = nullptr);

/* Adam-normalized ascent on the exact_reparam log posterior from a = 0,
 * returning the iterate with the best value seen.  Raw gradient ascent is not
 * used: with small noise_std the misfit curvature 1/sigma^2 makes fixed-step
 * ascent at useful rates unstable, while normalized steps are not. */
Eigen::VectorXd map_estimate(const VectorField& field, const ObservationSet& obs,
                             const GpPrior& ref, const SolverConfig& solver, int steps = 200,
                             double lr = 1e-2);

/* Langevin chain a' = a + (eta/2) grad + sqrt(eta T) N(0, I) with eta
 * interpolated exponentially from lr_initial to lr_final, initialized at the
 * MAP estimate; records every thinning-th iterate after burn-in, so the chain
 * holds floor((iterations - burn_in) / thinning) samples.  A non-finite or
 * astronomically large iterate aborts with diagnostics rather than letting
 * the chain wander off. */
PosteriorChain sgld_chain(const VectorField& field, const ObservationSet& obs, const GpPrior& ref,
                          const SgldConfig& sgld, const SolverConfig& solver,
                          const DivergenceConfig& div_cfg);

struct PosteriorSummary {
  Eigen::VectorXd mean, stddev, q05, q95;  // per grid point, over pushforwards
};

/* Elementwise statistics over the chain's pushforward samples (population
 * std; quantiles by linear interpolation).  Needs >= 2 samples. */
PosteriorSummary summarize_posterior(const PosteriorChain& chain);

}  // namespace ofm
