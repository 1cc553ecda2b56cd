#include "ofm/data/dataset.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "ofm/core/parallel.hpp"

namespace ofm {

void Bounds::validate() const {
  if (!(lower < upper))
    throw std::invalid_argument("bounds: lower (" + std::to_string(lower) +
                                ") must be below upper (" + std::to_string(upper) + ")");
}

Dataset gen_gp_functions(const KernelConfig& kernel, const GridSpec& grid, int count,
                         std::uint64_t seed, int n_threads) {
  if (count < 1) throw std::invalid_argument("gen_gp_functions: count must be >= 1");
  GpPrior prior = make_prior(kernel, grid);

  Dataset ds;
  ds.samples = FunctionBatch::zeros(grid, count, 1);
  ds.kernel = kernel;
  ds.seed = seed;
  ds.draws = count;

  const Rng base(seed, 0);
  const int m = grid.points();
  parallel_shards(count, n_threads, [&](int, int begin, int end) {
    for (int i = begin; i < end; ++i) {
      Rng ri = base.split(std::uint64_t(i));
      ds.samples.set_sample(i, prior.chol * ri.normal_vec(m));
    }
  });
  return ds;
}

Dataset gen_tgp_functions(const KernelConfig& kernel, const GridSpec& grid, const Bounds& bounds,
                          int count, std::uint64_t seed, int n_threads) {
  if (count < 1) throw std::invalid_argument("gen_tgp_functions: count must be >= 1");
  bounds.validate();
  GpPrior prior = make_prior(kernel, grid);

  Dataset ds;
  ds.samples = FunctionBatch::zeros(grid, count, 1);
  ds.kernel = kernel;
  ds.bounds = bounds;
  ds.truncated = true;
  ds.seed = seed;

  const long budget = 1000000;
  const long per_slot = std::max<long>(100, (budget + count - 1) / count);
  const Rng base(seed, 0);
  const int m = grid.points();
  std::atomic<long> total_draws{0};

  parallel_shards(count, n_threads, [&](int, int begin, int end) {
    long local = 0;
    for (int i = begin; i < end; ++i) {
      Rng ri = base.split(std::uint64_t(i));
      bool accepted = false;
      for (long attempt = 0; attempt < per_slot; ++attempt) {
        Eigen::VectorXd u = prior.chol * ri.normal_vec(m);
        ++local;
        if (u.maxCoeff() < bounds.upper && u.minCoeff() > bounds.lower) {
          ds.samples.set_sample(i, u);
          accepted = true;
          break;
        }
      }
      if (!accepted)
        throw std::runtime_error(
            "gen_tgp_functions: rejection budget exceeded (" + std::to_string(per_slot) +
            " proposals for one sample); bounds are too tight for this kernel");
    }
    total_draws += local;
  });
  ds.draws = total_draws.load();
  return ds;
}

ObservationSet subsample_observations(const Eigen::VectorXd& u, int n_obs, double noise_std,
                                      Rng& rng) {
  const int m = int(u.size());
  if (n_obs < 0 || n_obs > m)
    throw std::invalid_argument("subsample_observations: n_obs " + std::to_string(n_obs) +
                                " outside [0, " + std::to_string(m) + "]");
  if (noise_std < 0.0 || !std::isfinite(noise_std))
    throw std::invalid_argument("subsample_observations: noise_std must be >= 0 and finite");

  std::vector<int> perm = rng.permutation(m);
  ObservationSet obs;
  obs.noise_std = noise_std;
  obs.indices.assign(perm.begin(), perm.begin() + n_obs);
  obs.values.resize(n_obs);
  for (int i = 0; i < n_obs; ++i)
    obs.values[i] = u[obs.indices[size_t(i)]] + noise_std * rng.normal();
  return obs;
}

}  // namespace ofm
