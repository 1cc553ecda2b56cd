#include "ofm/flow/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ofm {

void SolverConfig::validate() const {
  if (kind != "rk4_fixed" && kind != "dopri45_adaptive")
    throw std::invalid_argument("solver: kind must be rk4_fixed or dopri45_adaptive");
  if (steps < 1) throw std::invalid_argument("solver: steps must be >= 1");
  if (atol <= 0.0 || rtol <= 0.0) throw std::invalid_argument("solver: tolerances must be > 0");
  if (max_evals < 1) throw std::invalid_argument("solver: max_evals must be >= 1");
}

namespace {

/* ODE state with the divergence accumulators carried alongside. */
struct Aug {
  Eigen::MatrixXd u;
  Eigen::VectorXd d;

  Aug axpy(double a, const Aug& k) const {
    return {u + a * k.u, d.size() ? (d + a * k.d).eval() : Eigen::VectorXd()};
  }
};

struct Rhs {
  const VectorField& field;
  const GridSpec& grid;
  const DivergenceConfig* div_cfg;
  const std::vector<Eigen::MatrixXd>* probes;
  long* nfe;
  int max_evals;

  Aug operator()(double t, const Aug& y) const {
    if (++*nfe > max_evals) throw std::runtime_error("integrate: max_evals budget exceeded");
    std::unique_ptr<FieldTape> tape = field.record(t, y.u, grid);
    Aug k;
    k.u = tape->value();
    if (div_cfg == nullptr) return k;
    if (div_cfg->mode == "exact") {
      k.d.resize(1);
      k.d[0] = exact_divergence(*tape, y.u.rows(), y.u.cols());
    } else {
      k.d = probe_divergences(*tape, *probes);
    }
    return k;
  }
};

FlowTrace run_rk4(const Rhs& rhs, Aug y, double t0, double t1, int steps) {
  const double h = (t1 - t0) / double(steps);
  for (int s = 0; s < steps; ++s) {
    const double t = t0 + s * h;
    Aug k1 = rhs(t, y);
    Aug k2 = rhs(t + 0.5 * h, y.axpy(0.5 * h, k1));
    Aug k3 = rhs(t + 0.5 * h, y.axpy(0.5 * h, k2));
    Aug k4 = rhs(t + h, y.axpy(h, k3));
    y.u += (h / 6.0) * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
    if (y.d.size()) y.d += (h / 6.0) * (k1.d + 2.0 * k2.d + 2.0 * k3.d + k4.d);
  }
  FlowTrace out;
  out.u = std::move(y.u);
  out.div = std::move(y.d);
  return out;
}

double error_norm(const Aug& e, const Aug& y0, const Aug& y1, double atol, double rtol) {
  double acc = 0.0;
  long n = 0;
  auto add = [&](const Eigen::MatrixXd& err, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    for (long j = 0; j < err.cols(); ++j)
      for (long i = 0; i < err.rows(); ++i) {
        double sc = atol + rtol * std::max(std::abs(a(i, j)), std::abs(b(i, j)));
        double q = err(i, j) / sc;
        acc += q * q;
        ++n;
      }
  };
  add(e.u, y0.u, y1.u);
  if (e.d.size()) add(e.d, y0.d, y1.d);
  return std::sqrt(acc / double(n));
}

/* Dormand-Prince 5(4) with FSAL and PI step control. */
FlowTrace run_dopri45(const Rhs& rhs, Aug y, double t0, double t1, double atol, double rtol) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                      b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  FlowTrace out;
  const double span = t1 - t0;
  double t = t0;
  double h = span / 20.0;
  double err_prev = 1.0;
  Aug k1 = rhs(t, y);

  while ((span > 0.0) ? (t < t1) : (t > t1)) {
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
      throw std::runtime_error("integrate: step size underflow");
    if ((span > 0.0) ? (t + h > t1) : (t + h < t1)) h = t1 - t;

    Aug k2 = rhs(t + h * 0.2, y.axpy(h * a21, k1));
    Aug k3 = rhs(t + h * 0.3, y.axpy(h * a31, k1).axpy(h * a32, k2));
    Aug k4 = rhs(t + h * 0.8, y.axpy(h * a41, k1).axpy(h * a42, k2).axpy(h * a43, k3));
    Aug k5 = rhs(t + h * (8.0 / 9.0),
                 y.axpy(h * a51, k1).axpy(h * a52, k2).axpy(h * a53, k3).axpy(h * a54, k4));
    Aug k6 = rhs(t + h, y.axpy(h * a61, k1)
                            .axpy(h * a62, k2)
                            .axpy(h * a63, k3)
                            .axpy(h * a64, k4)
                            .axpy(h * a65, k5));
    Aug ynew = y.axpy(h * b1, k1).axpy(h * b3, k3).axpy(h * b4, k4).axpy(h * b5, k5).axpy(h * b6,
                                                                                          k6);
    Aug k7 = rhs(t + h, ynew);

    Aug err = Aug{Eigen::MatrixXd::Zero(y.u.rows(), y.u.cols()),
                  y.d.size() ? Eigen::VectorXd::Zero(y.d.size()).eval() : Eigen::VectorXd()}
                  .axpy(h * e1, k1)
                  .axpy(h * e3, k3)
                  .axpy(h * e4, k4)
                  .axpy(h * e5, k5)
                  .axpy(h * e6, k6)
                  .axpy(h * e7, k7);
    double err_n = error_norm(err, y, ynew, atol, rtol);

    if (err_n <= 1.0) {
      t += h;
      y = std::move(ynew);
      k1 = std::move(k7);  // first-same-as-last
      out.accepted_steps.push_back(h);
      err_prev = std::max(err_n, 1e-4);
    }
    double fac = 0.9 * std::pow(std::max(err_n, 1e-10), -0.14) * std::pow(err_prev, 0.08);
    h *= std::clamp(fac, 0.2, 5.0);
  }
  out.u = std::move(y.u);
  out.div = std::move(y.d);
  return out;
}

}  // namespace

FlowTrace integrate(const VectorField& field, const Eigen::MatrixXd& u_start,
                    const GridSpec& grid, double t0, double t1, const SolverConfig& solver,
                    const DivergenceConfig* div_cfg, Rng* rng) {
  solver.validate();
  if (t0 < 0.0 || t0 > 1.0 || t1 < 0.0 || t1 > 1.0)
    throw std::invalid_argument("integrate: t0 and t1 must lie in [0,1]");
  if (u_start.rows() != grid.points())
    throw std::invalid_argument("integrate: state rows != grid points");

  Aug y{u_start, Eigen::VectorXd()};
  std::vector<Eigen::MatrixXd> probes;
  if (div_cfg != nullptr) {
    div_cfg->validate();
    if (div_cfg->mode == "exact") {
      y.d = Eigen::VectorXd::Zero(1);
    } else {
      if (rng == nullptr) throw std::invalid_argument("integrate: hutchinson mode needs an rng");
      probes = draw_probes(*div_cfg, u_start.rows(), u_start.cols(), *rng);
      y.d = Eigen::VectorXd::Zero(div_cfg->n_probes);
    }
  }

  if (t0 == t1) {
    FlowTrace out;
    out.u = u_start;
    out.div = y.d;
    return out;
  }

  long nfe = 0;
  Rhs rhs{field, grid, div_cfg, &probes, &nfe, solver.max_evals};
  FlowTrace out = solver.kind == "rk4_fixed" ? run_rk4(rhs, std::move(y), t0, t1, solver.steps)
                                             : run_dopri45(rhs, std::move(y), t0, t1, solver.atol,
                                                           solver.rtol);
  out.nfe = nfe;
  return out;
}

Rk4Flow::Rk4Flow(const VectorField& field, const GridSpec& grid, double t0, double t1, int steps)
    : field_(field), grid_(grid), t0_(t0), t1_(t1), steps_(steps) {
  if (steps < 1) throw std::invalid_argument("Rk4Flow: steps must be >= 1");
  h_ = (t1 - t0) / double(steps);
}

const Eigen::MatrixXd& Rk4Flow::forward(const Eigen::MatrixXd& u0) {
  tapes_.clear();
  tapes_.reserve(4 * size_t(steps_));
  Eigen::MatrixXd u = u0;
  for (int s = 0; s < steps_; ++s) {
    const double t = t0_ + s * h_;
    tapes_.push_back(field_.record(t, u, grid_));
    const Eigen::MatrixXd& k1 = tapes_.back()->value();
    tapes_.push_back(field_.record(t + 0.5 * h_, u + (0.5 * h_) * k1, grid_));
    const Eigen::MatrixXd& k2 = tapes_.back()->value();
    tapes_.push_back(field_.record(t + 0.5 * h_, u + (0.5 * h_) * k2, grid_));
    const Eigen::MatrixXd& k3 = tapes_.back()->value();
    tapes_.push_back(field_.record(t + h_, u + h_ * k3, grid_));
    const Eigen::MatrixXd& k4 = tapes_.back()->value();
    u += (h_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  u1_ = std::move(u);
  return u1_;
}

Eigen::MatrixXd Rk4Flow::backward(const Eigen::MatrixXd& lambda) const {
  if (tapes_.size() != 4 * size_t(steps_))
    throw std::logic_error("Rk4Flow: backward before forward");
  Eigen::MatrixXd lam = lambda;
  for (int s = steps_ - 1; s >= 0; --s) {
    FieldTape& f1 = *tapes_[4 * s + 0];
    FieldTape& f2 = *tapes_[4 * s + 1];
    FieldTape& f3 = *tapes_[4 * s + 2];
    FieldTape& f4 = *tapes_[4 * s + 3];
    // adjoints of u_{n+1} = u_n + h/6 (k1 + 2 k2 + 2 k3 + k4)
    Eigen::MatrixXd w4 = f4.vjp((h_ / 6.0) * lam);
    Eigen::MatrixXd w3 = f3.vjp((h_ / 3.0) * lam + h_ * w4);
    Eigen::MatrixXd w2 = f2.vjp((h_ / 3.0) * lam + (0.5 * h_) * w3);
    Eigen::MatrixXd w1 = f1.vjp((h_ / 6.0) * lam + (0.5 * h_) * w2);
    lam += w1 + w2 + w3 + w4;
  }
  return lam;
}

}  // namespace ofm
