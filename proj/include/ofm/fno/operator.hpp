#pragma once

#include <cstdint>
#include <string>
#include <vector>
#include <Eigen/Dense>

#include "ofm/core/batch.hpp"
#include "ofm/core/rng.hpp"
#include "ofm/core/tape.hpp"

namespace ofm {

/* Time-conditioned Fourier neural operator G(t, u): lift -> n_layers of
 * (truncated spectral mixing + pointwise bypass) -> two-layer projection.
 * The scalar t and the normalized grid coordinates enter as extra lifted
 * channels, so a single parameter set evaluates on any grid fine enough to
 * carry the retained modes. */
struct FnoConfig {
  int dim = 1;
  int modes0 = 32;  // retained modes along dim 0
  int modes1 = 12;  // along dim 1 (2d only)
  int width = 64;
  int n_layers = 4;
  int in_channels = 1;
  int out_channels = 1;
  int time_features = 8;            // sinusoidal t-embedding size (even, 0 disables)
  std::string activation = "gelu";  // gelu | tanh

  void validate() const;
  ModeSpec mode_spec() const {
    return dim == 1 ? ModeSpec{modes0, 0} : ModeSpec{modes0, modes1};
  }
  int lift_inputs() const { return in_channels + 1 + dim; }
  int proj_hidden() const { return 2 * width; }
  int spectral_slots() const { return dim == 1 ? modes0 : 2 * modes0 * modes1; }
};

struct FnoLayerParams {
  SpectralWeights spec;      // per-slot width x width complex mixing
  Eigen::MatrixXd w_bypass;  // width x width
  Eigen::MatrixXd b;         // 1 x width
};

/* All learnable state.  Dense params are enumerated by mat_slots() in a fixed
 * order (also the flatten order); spectral weights of layer l use slot l. */
struct OperatorParams {
  FnoConfig cfg;
  Eigen::MatrixXd w_lift;  // lift_inputs x width
  Eigen::MatrixXd b_lift;  // 1 x width
  Eigen::MatrixXd w_time;  // time_features x width (empty when disabled)
  std::vector<FnoLayerParams> layers;
  Eigen::MatrixXd w_proj1;  // width x proj_hidden
  Eigen::MatrixXd b_proj1;
  Eigen::MatrixXd w_proj2;  // proj_hidden x out_channels
  Eigen::MatrixXd b_proj2;

  std::vector<const Eigen::MatrixXd*> mat_slots() const;
  std::vector<Eigen::MatrixXd*> mat_slots();
  std::int64_t param_count() const;
};

/* Spectral weights ~ U[0,1) / width^2; pointwise weights Kaiming-uniform
 * U[-sqrt(1/fan_in), +sqrt(1/fan_in)]; biases zero.  Deterministic in rng. */
OperatorParams init_params(const FnoConfig& cfg, Rng& rng);
OperatorParams zero_params(const FnoConfig& cfg);

/* Gradient accumulators matching an OperatorParams layout. */
struct OperatorGrads {
  std::vector<Eigen::MatrixXd> mats;
  std::vector<SpectralWeights> specs;
  void setZero();
};
OperatorGrads make_grads(const OperatorParams& p);
GradSink sink_of(OperatorGrads& g);

/* Flat views in mat_slots-then-spectral(re,im per slot) order. */
Eigen::VectorXd flatten_params(const OperatorParams& p);
void unflatten_params(const Eigen::VectorXd& v, OperatorParams& p);
Eigen::VectorXd flatten_grads(const OperatorGrads& g);

/* Records G(t, u) on the tape and returns the output node id.  The node at
 * u_node must hold points x in_channels values living on 'grid'. */
int operator_record(Tape& tape, const OperatorParams& p, double t, int u_node,
                    const GridSpec& grid);

/* Single-shot evaluations on a scratch tape. */
Eigen::MatrixXd operator_forward(const OperatorParams& p, double t, const Eigen::MatrixXd& u,
                                 const GridSpec& grid);
FunctionBatch operator_forward(const OperatorParams& p, double t, const FunctionBatch& u,
                               int n_threads = 1);

/* One truncated spectral convolution by itself: transform, per-mode complex
 * channel mixing, inverse transform. */
Eigen::MatrixXd spectral_conv(const Eigen::MatrixXd& u, const SpectralWeights& w,
                              const GridSpec& grid, ModeSpec modes);

}  // namespace ofm
