#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>
#include <Eigen/Dense>

#include "ofm/core/spectral.hpp"

namespace ofm {

/* Per-layer truncated spectral mixing weights: one win x wout complex matrix
 * per retained slot of a SpectralBasis, stored as split real/imaginary parts
 * (all hot-path arithmetic is real gemms). */
template <class S>
struct SpectralWeightsT {
  using M = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<M> re, im;
  int slots() const { return int(re.size()); }
};
using SpectralWeights = SpectralWeightsT<double>;

/* Destination for parameter gradients accumulated by Tape::backward.  Entries
 * are preallocated by the caller and indexed by the slot ids that were given
 * to Tape::param / Tape::spectral_mix.  Spectral gradients follow the
 * d/dRe, d/dIm convention. */
template <class S>
struct GradSinkT {
  std::vector<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>>* mats = nullptr;
  std::vector<SpectralWeightsT<S>>* specs = nullptr;
};
using GradSink = GradSinkT<double>;

/* Reverse-mode tape over dense matrices.  A graph is recorded per evaluation
 * (define-by-run) and may be swept backward any number of times with
 * different cotangents; gradients of earlier sweeps are discarded.  Values
 * are points x channels matrices; vectors are n x 1.  Node storage is pooled
 * across reset() calls, so re-recording an identically-shaped graph does not
 * allocate. */
template <class S>
class TapeT {
 public:
  using M = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

  enum class Op : std::uint8_t {
    Input, Const, Param,
    Add, Sub, AddScaled, Scale, Hadamard,
    MatMul, BiasRow, HStack,
    Gelu, Tanh, Sin, Square,
    SumAll,
    SpectralMix,
  };

  bool check_finite = true;

  int size() const { return used_; }
  const M& value(int id) const { return nodes_[check_id(id)].val; }

  void reset() {
    clear_grads();
    used_ = 0;
  }

  // ---- leaves ---------------------------------------------------------------
  int input(const M& v) {
    Node& n = begin(Op::Input, -1, -1);
    n.val = v;
    return commit();
  }
  int constant(const M& v) {
    Node& n = begin(Op::Const, -1, -1);
    n.val = v;
    return commit();
  }
  /* Differentiable leaf referencing caller-owned storage; gradients go to
   * sink.mats[slot].  The pointee must outlive the sweep. */
  int param(const M* p, int slot) {
    Node& n = begin(Op::Param, -1, -1);
    n.val = *p;
    n.slot = slot;
    return commit();
  }

  // ---- elementwise and linear ops --------------------------------------------
  int add(int a, int b) {
    same_shape(a, b, "add");
    Node& n = begin(Op::Add, a, b);
    n.val = nodes_[a].val + nodes_[b].val;
    return commit();
  }
  int sub(int a, int b) {
    same_shape(a, b, "sub");
    Node& n = begin(Op::Sub, a, b);
    n.val = nodes_[a].val - nodes_[b].val;
    return commit();
  }
  /* a + beta * b */
  int add_scaled(int a, int b, S beta) {
    same_shape(a, b, "add_scaled");
    Node& n = begin(Op::AddScaled, a, b);
    n.alpha = beta;
    n.val = nodes_[a].val + beta * nodes_[b].val;
    return commit();
  }
  int scale(int a, S alpha) {
    check_id(a);
    Node& n = begin(Op::Scale, a, -1);
    n.alpha = alpha;
    n.val = alpha * nodes_[a].val;
    return commit();
  }
  int hadamard(int a, int b) {
    same_shape(a, b, "hadamard");
    Node& n = begin(Op::Hadamard, a, b);
    n.val = nodes_[a].val.cwiseProduct(nodes_[b].val);
    return commit();
  }
  int matmul(int a, int b) {
    if (nodes_[check_id(a)].val.cols() != nodes_[check_id(b)].val.rows())
      shape_error("matmul", a, b);
    Node& n = begin(Op::MatMul, a, b);
    n.val.resize(nodes_[a].val.rows(), nodes_[b].val.cols());
    n.val.noalias() = nodes_[a].val * nodes_[b].val;
    return commit();
  }
  /* X + ones * b, where b is a 1 x w node. */
  int bias_row(int x, int b) {
    const M& xv = nodes_[check_id(x)].val;
    const M& bv = nodes_[check_id(b)].val;
    if (bv.rows() != 1 || bv.cols() != xv.cols()) shape_error("bias_row", x, b);
    Node& n = begin(Op::BiasRow, x, b);
    n.val = nodes_[x].val.rowwise() + nodes_[b].val.row(0);
    return commit();
  }
  int hstack(int a, int b) {
    if (nodes_[check_id(a)].val.rows() != nodes_[check_id(b)].val.rows())
      shape_error("hstack", a, b);
    Node& n = begin(Op::HStack, a, b);
    n.val.resize(nodes_[a].val.rows(), nodes_[a].val.cols() + nodes_[b].val.cols());
    n.val.leftCols(nodes_[a].val.cols()) = nodes_[a].val;
    n.val.rightCols(nodes_[b].val.cols()) = nodes_[b].val;
    return commit();
  }

  int gelu(int a) {
    check_id(a);
    Node& n = begin(Op::Gelu, a, -1);
    const M& x = nodes_[a].val;
    n.aux = x.unaryExpr([](S v) { return S(0.5) * (S(1) + std::erf(v * S(M_SQRT1_2))); });
    n.val = x.cwiseProduct(n.aux);  // x * cdf(x)
    // overwrite aux with the saved derivative cdf(x) + x * pdf(x)
    n.aux += x.cwiseProduct(((x.array().square() * S(-0.5)).exp() * S(0.3989422804014326779)).matrix());
    return commit();
  }
  int tanh(int a) {
    check_id(a);
    Node& n = begin(Op::Tanh, a, -1);
    n.val = nodes_[a].val.array().tanh().matrix();
    n.aux = (S(1) - n.val.array().square()).matrix();
    return commit();
  }
  int sin(int a) {
    check_id(a);
    Node& n = begin(Op::Sin, a, -1);
    n.val = nodes_[a].val.array().sin().matrix();
    n.aux = nodes_[a].val.array().cos().matrix();
    return commit();
  }
  int square(int a) {
    check_id(a);
    Node& n = begin(Op::Square, a, -1);
    n.val = nodes_[a].val.cwiseProduct(nodes_[a].val);
    return commit();
  }
  int sum_all(int a) {
    check_id(a);
    Node& n = begin(Op::SumAll, a, -1);
    n.val.resize(1, 1);
    n.val(0, 0) = nodes_[a].val.sum();
    return commit();
  }

  /* Truncated spectral convolution: inverse(W_s . forward(x)) in the basis'
   * conventions.  Weight gradients (if requested) land in sink.specs[slot]. */
  int spectral_mix(int x, const SpectralBasis* basis, const SpectralWeightsT<S>* w, int slot = -1) {
    static_assert(std::is_same_v<S, double>, "spectral_mix uses the double-precision basis");
    const M& xv = nodes_[check_id(x)].val;
    if (xv.rows() != basis->grid.points())
      throw std::invalid_argument("spectral_mix: rows != basis grid points");
    if (w->slots() != basis->slots)
      throw std::invalid_argument("spectral_mix: weight slot count != basis slots");
    int win = int(xv.cols());
    int wout = int(w->re[0].cols());
    int s = basis->slots;

    Node& n = begin(Op::SpectralMix, x, -1);
    n.aux.resize(2 * s, win);  // saved spectrum of x: packed [re; im]
    n.aux.topRows(s).noalias() = basis->Tre * nodes_[x].val;
    n.aux.bottomRows(s).noalias() = basis->Tim * nodes_[x].val;
    scratch_.resize(2 * s, wout);  // packed [Yre; Yim]
    for (int k = 0; k < s; ++k) {
      if (int(w->re[k].rows()) != win)
        throw std::invalid_argument("spectral_mix: weight rows != channels");
      scratch_.row(k).noalias() = n.aux.row(k) * w->re[k];
      scratch_.row(k).noalias() -= n.aux.row(s + k) * w->im[k];
      scratch_.row(s + k).noalias() = n.aux.row(k) * w->im[k];
      scratch_.row(s + k).noalias() += n.aux.row(s + k) * w->re[k];
    }
    n.val.resize(nodes_[x].val.rows(), wout);
    n.val.noalias() = basis->Gre * scratch_.topRows(s);
    n.val.noalias() -= basis->Gim * scratch_.bottomRows(s);
    n.basis = basis;
    n.sw = w;
    n.slot = slot;
    return commit();
  }

  // ---- reverse sweep ----------------------------------------------------------
  /* Accumulates cotangent 'seed' at 'root' and sweeps the whole tape.
   * Gradients w.r.t. Input leaves are then available via input_grad();
   * parameter gradients are added into 'sink' when want_param_grads. */
  void backward(int root, const M& seed, GradSinkT<S> sink = {}, bool want_param_grads = true) {
    backward_multi({{root, &seed}}, sink, want_param_grads);
  }

  void backward_multi(const std::vector<std::pair<int, const M*>>& seeds, GradSinkT<S> sink = {},
                      bool want_param_grads = true) {
    clear_grads();
    grads_.resize(nodes_.size());
    has_grad_.resize(nodes_.size(), 0);
    int top = -1;
    for (auto& [root, seed] : seeds) {
      const M& rv = nodes_[check_id(root)].val;
      if (seed->rows() != rv.rows() || seed->cols() != rv.cols())
        throw std::invalid_argument("backward: cotangent shape mismatch");
      acc(root, *seed);
      top = std::max(top, root);
    }
    for (int i = top; i >= 0; --i) {
      if (!has_grad_[i]) continue;
      pull(i, sink, want_param_grads);
    }
  }

  /* Gradient w.r.t. an Input leaf after backward (zero if the leaf does not
   * influence any seeded output). */
  M input_grad(int id) const {
    check_id(id);
    if (nodes_[id].op != Op::Input) throw std::invalid_argument("input_grad: not an Input leaf");
    if (id >= int(has_grad_.size()) || !has_grad_[id])
      return M::Zero(nodes_[id].val.rows(), nodes_[id].val.cols());
    return grads_[id];
  }

 private:
  struct Node {
    Op op = Op::Const;
    int a = -1, b = -1;
    S alpha = S(0);
    int slot = -1;
    M val;
    M aux;
    const SpectralBasis* basis = nullptr;
    const SpectralWeightsT<S>* sw = nullptr;
  };

  int check_id(int id) const {
    if (id < 0 || id >= used_) throw std::out_of_range("tape: bad node id");
    return id;
  }

  void same_shape(int a, int b, const char* what) {
    const M& av = nodes_[check_id(a)].val;
    const M& bv = nodes_[check_id(b)].val;
    if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_error(what, a, b);
  }

  [[noreturn]] void shape_error(const char* what, int a, int b) const {
    auto dim = [&](int id) {
      return std::to_string(nodes_[id].val.rows()) + "x" + std::to_string(nodes_[id].val.cols());
    };
    throw std::invalid_argument(std::string("tape ") + what + ": shape mismatch " + dim(a) +
                                " vs " + dim(b));
  }

  /* Reuses pooled node storage; parents must be read through nodes_[] only
   * after begin() returns (the pool vector may grow). */
  Node& begin(Op op, int a, int b) {
    if (used_ == int(nodes_.size())) nodes_.emplace_back();
    Node& n = nodes_[used_];
    n.op = op;
    n.a = a;
    n.b = b;
    n.alpha = S(0);
    n.slot = -1;
    n.basis = nullptr;
    n.sw = nullptr;
    return n;
  }

  int commit() {
    const Node& n = nodes_[used_];
    if (check_finite && !n.val.allFinite())
      throw std::runtime_error("tape: non-finite value at node " + std::to_string(used_) +
                               " (op " + std::to_string(int(n.op)) + ")");
    return used_++;
  }

  void clear_grads() {
    for (int i : touched_) has_grad_[i] = 0;
    touched_.clear();
  }

  template <class Expr>
  void acc(int id, const Expr& g) {
    if (!has_grad_[id]) {
      grads_[id] = g;
      has_grad_[id] = 1;
      touched_.push_back(id);
    } else {
      grads_[id] += g;
    }
  }

  void pull(int i, GradSinkT<S>& sink, bool want_params) {
    Node& n = nodes_[i];
    const M& g = grads_[i];
    switch (n.op) {
      case Op::Input:
      case Op::Const:
        break;
      case Op::Param:
        if (want_params && sink.mats != nullptr && n.slot >= 0) (*sink.mats)[n.slot] += g;
        break;
      case Op::Add:
        acc(n.a, g);
        acc(n.b, g);
        break;
      case Op::Sub:
        acc(n.a, g);
        acc(n.b, (-g).eval());
        break;
      case Op::AddScaled:
        acc(n.a, g);
        acc(n.b, (n.alpha * g).eval());
        break;
      case Op::Scale:
        acc(n.a, (n.alpha * g).eval());
        break;
      case Op::Hadamard:
        acc(n.a, g.cwiseProduct(nodes_[n.b].val));
        acc(n.b, g.cwiseProduct(nodes_[n.a].val));
        break;
      case Op::MatMul:
        acc(n.a, (g * nodes_[n.b].val.transpose()).eval());
        acc(n.b, (nodes_[n.a].val.transpose() * g).eval());
        break;
      case Op::BiasRow:
        acc(n.a, g);
        acc(n.b, g.colwise().sum().eval());
        break;
      case Op::HStack:
        acc(n.a, g.leftCols(nodes_[n.a].val.cols()).eval());
        acc(n.b, g.rightCols(nodes_[n.b].val.cols()).eval());
        break;
      case Op::Gelu:
      case Op::Tanh:
      case Op::Sin:
        acc(n.a, g.cwiseProduct(n.aux));
        break;
      case Op::Square:
        acc(n.a, (S(2) * g.cwiseProduct(nodes_[n.a].val)).eval());
        break;
      case Op::SumAll:
        acc(n.a, (g(0, 0) * M::Ones(nodes_[n.a].val.rows(), nodes_[n.a].val.cols())).eval());
        break;
      case Op::SpectralMix:
        pull_spectral(n, g, sink, want_params);
        break;
    }
  }

  void pull_spectral(Node& n, const M& g, GradSinkT<S>& sink, bool want_params) {
    if constexpr (!std::is_same_v<S, double>) {
      (void)n; (void)g; (void)sink; (void)want_params;
      throw std::logic_error("spectral ops are double-only");
    } else {
    const SpectralBasis* B = n.basis;
    int s = B->slots;
    int wout = int(g.cols());
    int win = int(nodes_[n.a].val.cols());
    scratch_.resize(2 * s, wout);  // spectrum of the cotangent: [Gre; Gim]
    scratch_.topRows(s).noalias() = B->Tre * g;
    scratch_.bottomRows(s).noalias() = B->Tim * g;
    scratch2_.resize(2 * s, win);  // cotangent spectrum mixed with W^H
    for (int k = 0; k < s; ++k) {
      const auto& wre = n.sw->re[k];
      const auto& wim = n.sw->im[k];
      scratch2_.row(k).noalias() = scratch_.row(k) * wre.transpose();
      scratch2_.row(k).noalias() += scratch_.row(s + k) * wim.transpose();
      scratch2_.row(s + k).noalias() = scratch_.row(s + k) * wre.transpose();
      scratch2_.row(s + k).noalias() -= scratch_.row(k) * wim.transpose();
    }
    acc(n.a, (B->Gre * scratch2_.topRows(s) - B->Gim * scratch2_.bottomRows(s)).eval());
    if (want_params && sink.specs != nullptr && n.slot >= 0) {
      auto& wg = (*sink.specs)[n.slot];
      for (int k = 0; k < s; ++k) {
        S c = S(B->wslot[k] * B->inv_points);
        auto xr = n.aux.row(k).transpose(), xi = n.aux.row(s + k).transpose();
        auto gr = scratch_.row(k), gi = scratch_.row(s + k);
        wg.re[k].noalias() += c * (xr * gr + xi * gi);
        wg.im[k].noalias() += c * (xr * gi - xi * gr);
      }
    }
    }
  }

  std::vector<Node> nodes_;
  int used_ = 0;
  std::vector<M> grads_;
  std::vector<std::uint8_t> has_grad_;
  std::vector<int> touched_;
  M scratch_, scratch2_;
};

using Tape = TapeT<double>;

/* A reusable graph recipe: builds the same computation on a fresh tape for
 * whatever inputs are supplied.  Convenience surface for closed-form programs
 * and tests; operator code drives TapeT directly. */
struct Program {
  int n_inputs = 0;
  std::function<std::vector<int>(Tape&, const std::vector<int>&)> build;
};

/* Evaluates the program, returning its output values. */
inline std::vector<Eigen::MatrixXd> forward(const Program& prog,
                                            const std::vector<Eigen::MatrixXd>& inputs) {
  if (int(inputs.size()) != prog.n_inputs)
    throw std::invalid_argument("forward: wrong number of inputs");
  Tape tape;
  std::vector<int> in_ids;
  in_ids.reserve(inputs.size());
  for (const auto& v : inputs) in_ids.push_back(tape.input(v));
  std::vector<Eigen::MatrixXd> out;
  for (int id : prog.build(tape, in_ids)) out.push_back(tape.value(id));
  return out;
}

/* Evaluates, then sweeps backward with one cotangent per output; returns the
 * gradient w.r.t. every input. */
inline std::vector<Eigen::MatrixXd> vjp(const Program& prog,
                                        const std::vector<Eigen::MatrixXd>& inputs,
                                        const std::vector<Eigen::MatrixXd>& cotangents) {
  if (int(inputs.size()) != prog.n_inputs)
    throw std::invalid_argument("vjp: wrong number of inputs");
  Tape tape;
  std::vector<int> in_ids;
  in_ids.reserve(inputs.size());
  for (const auto& v : inputs) in_ids.push_back(tape.input(v));
  std::vector<int> out_ids = prog.build(tape, in_ids);
  if (out_ids.size() != cotangents.size())
    throw std::invalid_argument("vjp: wrong number of cotangents");
  std::vector<std::pair<int, const Eigen::MatrixXd*>> seeds;
  for (size_t i = 0; i < out_ids.size(); ++i) seeds.push_back({out_ids[i], &cotangents[i]});
  tape.backward_multi(seeds);
  std::vector<Eigen::MatrixXd> grads;
  grads.reserve(in_ids.size());
  for (int id : in_ids) grads.push_back(tape.input_grad(id));
  return grads;
}

}  // namespace ofm
