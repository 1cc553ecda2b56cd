#include "ofm/flow/likelihood.hpp"

#include <stdexcept>

namespace ofm {

LikelihoodResult log_likelihood(const VectorField& field, const Eigen::MatrixXd& u1,
                                const GpPrior& ref, const SolverConfig& solver,
                                const DivergenceConfig& div_cfg, Rng& rng) {
  if (u1.rows() != ref.grid.points())
    throw std::invalid_argument("log_likelihood: state rows != reference grid points");

  FlowTrace tr = integrate(field, u1, ref.grid, 1.0, 0.0, solver, &div_cfg, &rng);

  LikelihoodResult out;
  out.u0 = std::move(tr.u);
  for (long c = 0; c < u1.cols(); ++c) out.log_prior_u0 += gaussian_logpdf(ref, out.u0.col(c));
  // log P(u1) = log P(u0) - int_0^1 div dt; the backward trace carries
  // int_1^0 div dt, which is that integral already negated.
  out.div_integral = tr.div_integral();
  out.std_error = tr.div_std_error();
  out.logp = out.log_prior_u0 + out.div_integral;
  out.nfe = tr.nfe;
  return out;
}

}  // namespace ofm
