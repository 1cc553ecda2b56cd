#include "ofm/flow/divergence.hpp"

#include <cmath>
#include <stdexcept>

namespace ofm {

void DivergenceConfig::validate() const {
  if (mode != "exact" && mode != "hutchinson")
    throw std::invalid_argument("divergence: mode must be exact or hutchinson");
  if (n_probes < 1) throw std::invalid_argument("divergence: n_probes must be >= 1");
  if (probe_law != "rademacher" && probe_law != "gaussian")
    throw std::invalid_argument("divergence: probe_law must be rademacher or gaussian");
}

double exact_divergence(FieldTape& tape, long rows, long cols) {
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(rows, cols);
  double trace = 0.0;
  for (long c = 0; c < cols; ++c)
    for (long r = 0; r < rows; ++r) {
      basis(r, c) = 1.0;
      trace += tape.vjp(basis)(r, c);
      basis(r, c) = 0.0;
    }
  return trace;
}

Eigen::VectorXd probe_divergences(FieldTape& tape, const std::vector<Eigen::MatrixXd>& probes) {
  Eigen::VectorXd est(long(probes.size()));
  for (size_t i = 0; i < probes.size(); ++i)
    est[long(i)] = (tape.vjp(probes[i]).array() * probes[i].array()).sum();
  return est;
}

std::vector<Eigen::MatrixXd> draw_probes(const DivergenceConfig& cfg, long rows, long cols,
                                         Rng& rng) {
  std::vector<Eigen::MatrixXd> probes(cfg.n_probes);
  for (auto& p : probes) {
    p.resize(rows, cols);
    if (cfg.probe_law == "gaussian") {
      p = rng.normal_mat(int(rows), int(cols));
    } else {
      for (long c = 0; c < cols; ++c)
        for (long r = 0; r < rows; ++r) p(r, c) = rng.rademacher();
    }
  }
  return probes;
}

DivergenceEstimate divergence(const VectorField& field, double t, const Eigen::MatrixXd& u,
                              const GridSpec& grid, const DivergenceConfig& cfg, Rng* rng) {
  cfg.validate();
  std::unique_ptr<FieldTape> tape = field.record(t, u, grid);
  DivergenceEstimate out;
  if (cfg.mode == "exact") {
    out.value = exact_divergence(*tape, u.rows(), u.cols());
    return out;
  }
  if (rng == nullptr) throw std::invalid_argument("divergence: hutchinson mode needs an rng");
  Eigen::VectorXd est = probe_divergences(*tape, draw_probes(cfg, u.rows(), u.cols(), *rng));
  out.value = est.mean();
  if (est.size() > 1) {
    double var = (est.array() - out.value).square().sum() / double(est.size() - 1);
    out.std_error = std::sqrt(var / double(est.size()));
  }
  return out;
}

}  // namespace ofm
