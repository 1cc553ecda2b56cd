#include "ofm/fno/operator.hpp"

#include <cmath>
#include <stdexcept>

#include "ofm/core/parallel.hpp"

namespace ofm {

void FnoConfig::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("fno: dim must be 1 or 2");
  if (modes0 < 1) throw std::invalid_argument("fno: modes0 must be >= 1");
  if (dim == 2 && modes1 < 1) throw std::invalid_argument("fno: modes1 must be >= 1");
  if (width < 1) throw std::invalid_argument("fno: width must be >= 1");
  if (n_layers < 1) throw std::invalid_argument("fno: n_layers must be >= 1");
  if (in_channels < 1 || out_channels < 1)
    throw std::invalid_argument("fno: channel counts must be >= 1");
  if (time_features < 0 || time_features % 2 != 0)
    throw std::invalid_argument("fno: time_features must be even and >= 0");
  if (activation != "gelu" && activation != "tanh")
    throw std::invalid_argument("fno: activation must be gelu or tanh");
}

std::vector<const Eigen::MatrixXd*> OperatorParams::mat_slots() const {
  std::vector<const Eigen::MatrixXd*> s = {&w_lift, &b_lift, &w_time};
  for (const auto& l : layers) {
    s.push_back(&l.w_bypass);
    s.push_back(&l.b);
  }
  s.push_back(&w_proj1);
  s.push_back(&b_proj1);
  s.push_back(&w_proj2);
  s.push_back(&b_proj2);
  return s;
}

std::vector<Eigen::MatrixXd*> OperatorParams::mat_slots() {
  std::vector<Eigen::MatrixXd*> s = {&w_lift, &b_lift, &w_time};
  for (auto& l : layers) {
    s.push_back(&l.w_bypass);
    s.push_back(&l.b);
  }
  s.push_back(&w_proj1);
  s.push_back(&b_proj1);
  s.push_back(&w_proj2);
  s.push_back(&b_proj2);
  return s;
}

std::int64_t OperatorParams::param_count() const {
  std::int64_t n = 0;
  for (const auto* m : mat_slots()) n += m->size();
  for (const auto& l : layers)
    for (int k = 0; k < l.spec.slots(); ++k) n += l.spec.re[k].size() + l.spec.im[k].size();
  return n;
}

OperatorParams init_params(const FnoConfig& cfg, Rng& rng) {
  cfg.validate();
  auto kaiming = [&rng](int fan_in, int fan_out) {
    const double bound = std::sqrt(1.0 / double(fan_in));
    return rng.uniform_mat(fan_in, fan_out, -bound, bound);
  };

  OperatorParams p;
  p.cfg = cfg;
  p.w_lift = kaiming(cfg.lift_inputs(), cfg.width);
  p.b_lift = Eigen::MatrixXd::Zero(1, cfg.width);
  p.w_time = cfg.time_features > 0 ? kaiming(cfg.time_features, cfg.width)
                                   : Eigen::MatrixXd(0, cfg.width);

  const double spec_scale = 1.0 / double(cfg.width) / double(cfg.width);
  p.layers.resize(cfg.n_layers);
  for (auto& l : p.layers) {
    l.spec.re.resize(cfg.spectral_slots());
    l.spec.im.resize(cfg.spectral_slots());
    for (int k = 0; k < cfg.spectral_slots(); ++k) {
      l.spec.re[k] = spec_scale * rng.uniform_mat(cfg.width, cfg.width, 0.0, 1.0);
      l.spec.im[k] = spec_scale * rng.uniform_mat(cfg.width, cfg.width, 0.0, 1.0);
    }
    l.w_bypass = kaiming(cfg.width, cfg.width);
    l.b = Eigen::MatrixXd::Zero(1, cfg.width);
  }

  p.w_proj1 = kaiming(cfg.width, cfg.proj_hidden());
  p.b_proj1 = Eigen::MatrixXd::Zero(1, cfg.proj_hidden());
  p.w_proj2 = kaiming(cfg.proj_hidden(), cfg.out_channels);
  p.b_proj2 = Eigen::MatrixXd::Zero(1, cfg.out_channels);
  return p;
}

OperatorParams zero_params(const FnoConfig& cfg) {
  Rng rng(0, 0);
  OperatorParams p = init_params(cfg, rng);
  for (auto* m : p.mat_slots()) m->setZero();
  for (auto& l : p.layers)
    for (int k = 0; k < l.spec.slots(); ++k) {
      l.spec.re[k].setZero();
      l.spec.im[k].setZero();
    }
  return p;
}

void OperatorGrads::setZero() {
  for (auto& m : mats) m.setZero();
  for (auto& s : specs)
    for (size_t k = 0; k < s.re.size(); ++k) {
      s.re[k].setZero();
      s.im[k].setZero();
    }
}

OperatorGrads make_grads(const OperatorParams& p) {
  OperatorGrads g;
  for (const auto* m : p.mat_slots()) g.mats.push_back(Eigen::MatrixXd::Zero(m->rows(), m->cols()));
  for (const auto& l : p.layers) {
    SpectralWeights s;
    for (int k = 0; k < l.spec.slots(); ++k) {
      s.re.push_back(Eigen::MatrixXd::Zero(l.spec.re[k].rows(), l.spec.re[k].cols()));
      s.im.push_back(Eigen::MatrixXd::Zero(l.spec.im[k].rows(), l.spec.im[k].cols()));
    }
    g.specs.push_back(std::move(s));
  }
  return g;
}

GradSink sink_of(OperatorGrads& g) { return GradSink{&g.mats, &g.specs}; }

namespace {

template <class MatPtrs, class SpecAt>
Eigen::VectorXd flatten_impl(const MatPtrs& mats, int n_layers, const SpecAt& spec_at,
                             std::int64_t total) {
  Eigen::VectorXd v(total);
  std::int64_t at = 0;
  for (const auto* m : mats) {
    v.segment(at, m->size()) = Eigen::Map<const Eigen::VectorXd>(m->data(), m->size());
    at += m->size();
  }
  for (int l = 0; l < n_layers; ++l) {
    const SpectralWeights& s = spec_at(l);
    for (int k = 0; k < s.slots(); ++k) {
      v.segment(at, s.re[k].size()) =
          Eigen::Map<const Eigen::VectorXd>(s.re[k].data(), s.re[k].size());
      at += s.re[k].size();
      v.segment(at, s.im[k].size()) =
          Eigen::Map<const Eigen::VectorXd>(s.im[k].data(), s.im[k].size());
      at += s.im[k].size();
    }
  }
  return v;
}

}  // namespace

Eigen::VectorXd flatten_params(const OperatorParams& p) {
  return flatten_impl(p.mat_slots(), p.cfg.n_layers,
                      [&](int l) -> const SpectralWeights& { return p.layers[l].spec; },
                      p.param_count());
}

Eigen::VectorXd flatten_grads(const OperatorGrads& g) {
  std::vector<const Eigen::MatrixXd*> mats;
  for (const auto& m : g.mats) mats.push_back(&m);
  std::int64_t total = 0;
  for (const auto* m : mats) total += m->size();
  for (const auto& s : g.specs)
    for (int k = 0; k < s.slots(); ++k) total += s.re[k].size() + s.im[k].size();
  return flatten_impl(mats, int(g.specs.size()),
                      [&](int l) -> const SpectralWeights& { return g.specs[l]; }, total);
}

void unflatten_params(const Eigen::VectorXd& v, OperatorParams& p) {
  if (v.size() != p.param_count())
    throw std::invalid_argument("unflatten_params: size mismatch");
  std::int64_t at = 0;
  for (auto* m : p.mat_slots()) {
    Eigen::Map<Eigen::VectorXd>(m->data(), m->size()) = v.segment(at, m->size());
    at += m->size();
  }
  for (auto& l : p.layers)
    for (int k = 0; k < l.spec.slots(); ++k) {
      auto& re = l.spec.re[k];
      auto& im = l.spec.im[k];
      Eigen::Map<Eigen::VectorXd>(re.data(), re.size()) = v.segment(at, re.size());
      at += re.size();
      Eigen::Map<Eigen::VectorXd>(im.data(), im.size()) = v.segment(at, im.size());
      at += im.size();
    }
}

namespace {

Eigen::MatrixXd time_embedding(double t, int features) {
  Eigen::MatrixXd e(1, features);
  double omega = M_PI;
  for (int i = 0; i < features / 2; ++i) {
    e(0, 2 * i) = std::sin(omega * t);
    e(0, 2 * i + 1) = std::cos(omega * t);
    omega *= 2.0;
  }
  return e;
}

int activate(Tape& tape, int x, const FnoConfig& cfg) {
  return cfg.activation == "gelu" ? tape.gelu(x) : tape.tanh(x);
}

}  // namespace

int operator_record(Tape& tape, const OperatorParams& p, double t, int u_node,
                    const GridSpec& grid) {
  const FnoConfig& cfg = p.cfg;
  if (grid.dim != cfg.dim) throw std::invalid_argument("operator_record: grid dim != config dim");
  const long rows = tape.value(u_node).rows();
  const long cols = tape.value(u_node).cols();
  if (rows != grid.points() || cols != cfg.in_channels)
    throw std::invalid_argument("operator_record: input is not points x in_channels");
  const SpectralBasis& basis = spectral_basis(grid, cfg.mode_spec());

  Eigen::MatrixXd extra(grid.points(), 1 + cfg.dim);
  extra.col(0).setConstant(t);
  extra.rightCols(cfg.dim) = grid.unit_coordinates();
  int feats = tape.hstack(u_node, tape.constant(extra));

  int v = tape.bias_row(tape.matmul(feats, tape.param(&p.w_lift, 0)), tape.param(&p.b_lift, 1));
  if (cfg.time_features > 0) {
    int emb = tape.constant(time_embedding(t, cfg.time_features));
    v = tape.bias_row(v, tape.matmul(emb, tape.param(&p.w_time, 2)));
  }

  for (int l = 0; l < cfg.n_layers; ++l) {
    const FnoLayerParams& layer = p.layers[l];
    int mixed = tape.spectral_mix(v, &basis, &layer.spec, l);
    int bypass = tape.matmul(v, tape.param(&layer.w_bypass, 3 + 2 * l));
    int z = tape.bias_row(tape.add(mixed, bypass), tape.param(&layer.b, 4 + 2 * l));
    v = l + 1 < cfg.n_layers ? activate(tape, z, cfg) : z;
  }

  const int base = 3 + 2 * cfg.n_layers;
  int hidden = activate(tape,
                        tape.bias_row(tape.matmul(v, tape.param(&p.w_proj1, base)),
                                      tape.param(&p.b_proj1, base + 1)),
                        cfg);
  return tape.bias_row(tape.matmul(hidden, tape.param(&p.w_proj2, base + 2)),
                       tape.param(&p.b_proj2, base + 3));
}

Eigen::MatrixXd operator_forward(const OperatorParams& p, double t, const Eigen::MatrixXd& u,
                                 const GridSpec& grid) {
  Tape tape;
  int out = operator_record(tape, p, t, tape.input(u), grid);
  return tape.value(out);
}

FunctionBatch operator_forward(const OperatorParams& p, double t, const FunctionBatch& u,
                               int n_threads) {
  if (u.channels != p.cfg.in_channels)
    throw std::invalid_argument("operator_forward: batch channels != config in_channels");
  FunctionBatch out = FunctionBatch::zeros(u.grid, u.size(), p.cfg.out_channels);
  parallel_shards(u.size(), n_threads, [&](int, int begin, int end) {
    Tape tape;
    for (int s = begin; s < end; ++s) {
      tape.reset();
      int o = operator_record(tape, p, t, tape.input(u.sample(s)), u.grid);
      out.set_sample(s, tape.value(o));
    }
  });
  return out;
}

Eigen::MatrixXd spectral_conv(const Eigen::MatrixXd& u, const SpectralWeights& w,
                              const GridSpec& grid, ModeSpec modes) {
  Tape tape;
  int out = tape.spectral_mix(tape.input(u), &spectral_basis(grid, modes), &w);
  return tape.value(out);
}

}  // namespace ofm
