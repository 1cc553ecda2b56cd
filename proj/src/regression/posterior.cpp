#include "ofm/regression/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace ofm {

void ObservationSet::validate(int grid_points) const {
  if (values.size() != Eigen::Index(indices.size()))
    throw std::invalid_argument("observations: " + std::to_string(indices.size()) +
                                " indices but " + std::to_string(values.size()) + " values");
  if (!(noise_std > 0.0) || !std::isfinite(noise_std))
    throw std::invalid_argument("observations: noise_std must be positive and finite");
  if (values.size() && !values.allFinite())
    throw std::invalid_argument("observations: values must be finite");
  std::unordered_set<int> seen;
  for (int idx : indices) {
    if (idx < 0 || idx >= grid_points)
      throw std::invalid_argument("observations: index " + std::to_string(idx) +
                                  " outside grid of " + std::to_string(grid_points) + " points");
    if (!seen.insert(idx).second)
      throw std::invalid_argument("observations: duplicate index " + std::to_string(idx));
  }
}

void SgldConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("sgld: iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations)
    throw std::invalid_argument("sgld: burn_in must be in [0, iterations)");
  if (thinning < 1) throw std::invalid_argument("sgld: thinning must be >= 1");
  if (!(temperature >= 0.0)) throw std::invalid_argument("sgld: temperature must be >= 0");
  if (!(lr_initial > 0.0) || !(lr_final > 0.0))
    throw std::invalid_argument("sgld: step sizes must be positive");
  if (lr_final > lr_initial)
    throw std::invalid_argument("sgld: lr_final must not exceed lr_initial");
  if (posterior_mode != "exact_reparam" && posterior_mode != "paper_eq17")
    throw std::invalid_argument("sgld: unknown posterior_mode '" + posterior_mode + "'");
}

namespace {

double misfit_value(const ObservationSet& obs, const Eigen::VectorXd& u) {
  double s = 0.0;
  for (int i = 0; i < obs.count(); ++i) {
    double r = obs.values[i] - u[obs.indices[i]];
    s += r * r;
  }
  return -0.5 * s / (obs.noise_std * obs.noise_std);
}

Eigen::VectorXd misfit_grad(const ObservationSet& obs, const Eigen::VectorXd& u) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(u.size());
  double inv_var = 1.0 / (obs.noise_std * obs.noise_std);
  for (int i = 0; i < obs.count(); ++i)
    g[obs.indices[i]] += (obs.values[i] - u[obs.indices[i]]) * inv_var;
  return g;
}

}  // namespace

LogPosterior log_posterior(const VectorField& field, const Eigen::VectorXd& a,
                           const ObservationSet& obs, const GpPrior& ref,
                           const SolverConfig& solver, const DivergenceConfig& div_cfg,
                           const std::string& mode, Rng& rng, Eigen::VectorXd* grad) {
  if (mode != "exact_reparam" && mode != "paper_eq17")
    throw std::invalid_argument("log_posterior: unknown mode '" + mode + "'");
  obs.validate(ref.points());
  solver.validate();
  if (a.size() != ref.points())
    throw std::invalid_argument("log_posterior: latent has " + std::to_string(a.size()) +
                                " entries for a grid of " + std::to_string(ref.points()) +
                                " points");

  LogPosterior out;
  if (mode == "exact_reparam") {
    if (grad) {
      Rk4Flow flow(field, ref.grid, 0.0, 1.0, solver.steps);
      out.u = flow.forward(a).col(0);
      out.misfit = misfit_value(obs, out.u);
      out.log_prior = gaussian_logpdf(ref, a);
      out.value = out.misfit + out.log_prior;
      *grad = flow.backward(misfit_grad(obs, out.u)).col(0) + gaussian_logpdf_grad(ref, a);
    } else {
      out.u = integrate(field, a, ref.grid, 0.0, 1.0, solver).u.col(0);
      out.misfit = misfit_value(obs, out.u);
      out.log_prior = gaussian_logpdf(ref, a);
      out.value = out.misfit + out.log_prior;
    }
    return out;
  }

  // paper_eq17: score the pushforward itself.  The divergence integral enters
  // the value; the gradient keeps the terms reachable with first-order sweeps
  // (transport adjoints of the misfit and of the pulled-back reference
  // density), which matches the exact_reparam gradient up to solver error.
  if (grad) {
    Rk4Flow fwd(field, ref.grid, 0.0, 1.0, solver.steps);
    out.u = fwd.forward(a).col(0);
    LikelihoodResult ll = log_likelihood(field, out.u, ref, solver, div_cfg, rng);
    out.misfit = misfit_value(obs, out.u);
    out.log_prior = ll.logp;
    out.value = out.misfit + out.log_prior;

    Rk4Flow bwd(field, ref.grid, 1.0, 0.0, solver.steps);
    Eigen::VectorXd u0 = bwd.forward(out.u).col(0);
    Eigen::VectorXd g_u = misfit_grad(obs, out.u);
    g_u += bwd.backward(gaussian_logpdf_grad(ref, u0)).col(0);
    *grad = fwd.backward(g_u).col(0);
  } else {
    out.u = integrate(field, a, ref.grid, 0.0, 1.0, solver).u.col(0);
    LikelihoodResult ll = log_likelihood(field, out.u, ref, solver, div_cfg, rng);
    out.misfit = misfit_value(obs, out.u);
    out.log_prior = ll.logp;
    out.value = out.misfit + out.log_prior;
  }
  return out;
}

Eigen::VectorXd map_estimate(const VectorField& field, const ObservationSet& obs,
                             const GpPrior& ref, const SolverConfig& solver, int steps,
                             double lr) {
  obs.validate(ref.points());
  if (steps < 1) throw std::invalid_argument("map_estimate: steps must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("map_estimate: lr must be positive");

  const int m = ref.points();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m), best = a, g(m);
  Eigen::ArrayXd mom = Eigen::ArrayXd::Zero(m), vel = Eigen::ArrayXd::Zero(m);
  double best_value = -std::numeric_limits<double>::infinity();
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Rng unused(0);
  DivergenceConfig no_div;

  for (int it = 0; it < steps; ++it) {
    LogPosterior lp =
        log_posterior(field, a, obs, ref, solver, no_div, "exact_reparam", unused, &g);
    if (!g.allFinite() || !std::isfinite(lp.value))
      throw std::runtime_error("map_estimate: non-finite objective at step " +
                               std::to_string(it));
    if (lp.value > best_value) {
      best_value = lp.value;
      best = a;
    }
    mom = b1 * mom + (1.0 - b1) * g.array();
    vel = b2 * vel + (1.0 - b2) * g.array().square();
    double c1 = 1.0 - std::pow(b1, it + 1), c2 = 1.0 - std::pow(b2, it + 1);
    a.array() += lr * (mom / c1) / ((vel / c2).sqrt() + eps);
  }
  return best;
}

PosteriorChain sgld_chain(const VectorField& field, const ObservationSet& obs, const GpPrior& ref,
                          const SgldConfig& sgld, const SolverConfig& solver,
                          const DivergenceConfig& div_cfg) {
  sgld.validate();
  obs.validate(ref.points());
  solver.validate();
  div_cfg.validate();

  const int m = ref.points();
  Eigen::VectorXd a = map_estimate(field, obs, ref, solver);
  Rng rng(sgld.seed, 1);

  PosteriorChain chain;
  chain.grid = ref.grid;
  long expected = (sgld.iterations - sgld.burn_in) / sgld.thinning;
  chain.latents.reserve(size_t(expected));
  chain.pushforwards.reserve(size_t(expected));
  chain.log_posteriors.reserve(size_t(expected));

  const double log_ratio = std::log(sgld.lr_final / sgld.lr_initial);
  Eigen::VectorXd g(m);
  for (long t = 0; t < sgld.iterations; ++t) {
    double frac = sgld.iterations > 1 ? double(t) / double(sgld.iterations - 1) : 0.0;
    double eta = sgld.lr_initial * std::exp(log_ratio * frac);

    LogPosterior lp =
        log_posterior(field, a, obs, ref, solver, div_cfg, sgld.posterior_mode, rng, &g);
    if (t >= sgld.burn_in && (t - sgld.burn_in) % sgld.thinning == sgld.thinning - 1) {
      chain.latents.push_back(a);
      chain.pushforwards.push_back(lp.u);
      chain.log_posteriors.push_back(lp.value);
    }

    a += 0.5 * eta * g;
    if (sgld.temperature > 0.0) a += std::sqrt(eta * sgld.temperature) * rng.normal_vec(m);

    if (!a.allFinite() || a.norm() > 1e8) {
      std::ostringstream msg;
      msg << "sgld_chain: diverged at iteration " << t << " (|a| = " << a.norm()
          << ", step size " << eta << ", last log posterior " << lp.value
          << "); reduce the step size or enlarge noise_std";
      throw std::runtime_error(msg.str());
    }
  }
  return chain;
}

PosteriorSummary summarize_posterior(const PosteriorChain& chain) {
  const int n = chain.size();
  if (n == 0) throw std::invalid_argument("summarize_posterior: empty chain");
  if (n < 2) throw std::invalid_argument("summarize_posterior: need at least 2 samples");
  const int m = int(chain.pushforwards[0].size());

  Eigen::MatrixXd s(n, m);
  for (int i = 0; i < n; ++i) {
    if (chain.pushforwards[i].size() != m)
      throw std::invalid_argument("summarize_posterior: ragged chain");
    s.row(i) = chain.pushforwards[i].transpose();
  }

  PosteriorSummary out;
  out.mean = s.colwise().mean().transpose();
  out.stddev = ((s.rowwise() - out.mean.transpose()).array().square().colwise().sum() /
                double(n))
                   .sqrt()
                   .transpose();
  out.q05.resize(m);
  out.q95.resize(m);
  std::vector<double> col(static_cast<size_t>(n));
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) col[size_t(i)] = s(i, j);
    std::sort(col.begin(), col.end());
    auto quantile = [&](double q) {
      double pos = q * double(n - 1);
      long lo = long(std::floor(pos));
      double w = pos - double(lo);
      return w == 0.0 ? col[size_t(lo)] : (1.0 - w) * col[size_t(lo)] + w * col[size_t(lo) + 1];
    };
    out.q05[j] = quantile(0.05);
    out.q95[j] = quantile(0.95);
  }
  return out;
}

}  // namespace ofm
