#pragma once

#include <cstdint>

#include "ofm/gp/prior.hpp"
#include "ofm/regression/posterior.hpp"

namespace ofm {

struct Bounds {
  double lower = -1.2, upper = 1.2;
  void validate() const;
};

/* A generated corpus: the draws plus everything needed to regenerate them. */
struct Dataset {
  FunctionBatch samples;
  KernelConfig kernel;
  Bounds bounds;          // active only when truncated
  bool truncated = false;
  std::uint64_t seed = 0;
  long draws = 0;  // proposals consumed, including rejected ones

  const GridSpec& grid() const { return samples.grid; }
  int size() const { return samples.size(); }
  double acceptance_rate() const { return draws ? double(size()) / double(draws) : 0.0; }
};

/* I.i.d. GP draws.  Every sample has its own child rng stream, so the result
 * is bit-identical for any thread count. */
Dataset gen_gp_functions(const KernelConfig& kernel, const GridSpec& grid, int count,
                         std::uint64_t seed, int n_threads = 1);

/* Truncated-GP draws: whole functions are rejected until max|u| fits strictly
 * inside the bounds (no pointwise clipping).  The proposal budget (1e6 draws
 * total, split evenly across samples) guards against bounds the kernel
 * essentially never satisfies. */
Dataset gen_tgp_functions(const KernelConfig& kernel, const GridSpec& grid, const Bounds& bounds,
                          int count, std::uint64_t seed, int n_threads = 1);

/* Picks n_obs grid positions uniformly without replacement and perturbs the
 * function values with N(0, noise_std^2).  noise_std = 0 yields exact
 * observations (fine as data; Gaussian-likelihood regression still requires a
 * positive noise level). */
ObservationSet subsample_observations(const Eigen::VectorXd& u, int n_obs, double noise_std,
                                      Rng& rng);

}  // namespace ofm
