#include "ofm/flow/cfm.hpp"

#include <cmath>
#include <stdexcept>

#include "ofm/core/parallel.hpp"

namespace ofm {

void TrainConfig::validate() const {
  if (sigma_min < 0.0) throw std::invalid_argument("train: sigma_min must be >= 0");
  if (batch < 1) throw std::invalid_argument("train: batch must be >= 1");
  if (epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
  if (lr <= 0.0) throw std::invalid_argument("train: lr must be > 0");
  if (optimizer != "adam" && optimizer != "sgd")
    throw std::invalid_argument("train: optimizer must be adam or sgd");
  if (threads < 1) throw std::invalid_argument("train: threads must be >= 1");
  if (checkpoint_every < 0) throw std::invalid_argument("train: checkpoint_every must be >= 0");
}

Eigen::MatrixXd conditional_sample(const Eigen::MatrixXd& h0, const Eigen::MatrixXd& h1, double t,
                                   double sigma_min, const GpPrior& ref, Rng& rng) {
  if (h0.rows() != h1.rows() || h0.cols() != h1.cols())
    throw std::invalid_argument("conditional_sample: endpoint shapes differ");
  Eigen::MatrixXd mean = t * h1 + (1.0 - t) * h0;
  if (sigma_min == 0.0) return mean;
  for (long c = 0; c < mean.cols(); ++c)
    mean.col(c) += sigma_min * (ref.chol * rng.normal_vec(int(mean.rows())));
  return mean;
}

double cfm_loss(const OperatorParams& params, const CoupledBatch& coupled, const GpPrior& ref,
                double sigma_min, Rng& rng, OperatorGrads* grads, int n_threads) {
  const FunctionBatch& h0 = coupled.h0;
  const FunctionBatch& h1 = coupled.h1;
  if (!(h0.grid == ref.grid))
    throw std::invalid_argument("cfm_loss: reference prior grid differs from batch grid");
  const int b = h0.size();
  const long entries = h0.values.cols();

  // all stochastic draws happen up front so sharding cannot change them
  std::vector<double> ts(static_cast<size_t>(b));
  std::vector<Eigen::MatrixXd> hts(static_cast<size_t>(b));
  for (int s = 0; s < b; ++s) {
    ts[size_t(s)] = rng.uniform();
    hts[size_t(s)] =
        conditional_sample(h0.sample(s), h1.sample(s), ts[size_t(s)], sigma_min, ref, rng);
  }

  std::vector<double> shard_loss(size_t(n_threads), 0.0);
  std::vector<OperatorGrads> shard_grads;
  if (grads != nullptr)
    for (int i = 0; i < n_threads; ++i) shard_grads.push_back(make_grads(params));

  parallel_shards(b, n_threads, [&](int shard, int begin, int end) {
    Tape tape;
    for (int s = begin; s < end; ++s) {
      try {
        tape.reset();
        int out = operator_record(tape, params, ts[size_t(s)], tape.input(hts[size_t(s)]),
                                  h0.grid);
        Eigen::MatrixXd residual =
            tape.value(out) - Eigen::MatrixXd(h1.sample(s) - h0.sample(s));
        double l = residual.squaredNorm() / double(entries);
        if (!std::isfinite(l)) throw std::runtime_error("non-finite loss");
        shard_loss[size_t(shard)] += l;
        if (grads != nullptr) {
          Eigen::MatrixXd cot = (2.0 / double(b) / double(entries)) * residual;
          tape.backward(out, cot, sink_of(shard_grads[size_t(shard)]));
        }
      } catch (const std::exception& e) {
        throw std::runtime_error("cfm_loss: pair " + std::to_string(s) + ": " + e.what());
      }
    }
  });

  if (grads != nullptr)
    for (auto& sg : shard_grads) {
      for (size_t i = 0; i < grads->mats.size(); ++i) grads->mats[i] += sg.mats[i];
      for (size_t l = 0; l < grads->specs.size(); ++l)
        for (int k = 0; k < grads->specs[l].slots(); ++k) {
          grads->specs[l].re[k] += sg.specs[l].re[k];
          grads->specs[l].im[k] += sg.specs[l].im[k];
        }
    }

  double loss = 0.0;
  for (double l : shard_loss) loss += l;
  return loss / double(b);
}

namespace {

struct Adam {
  Eigen::VectorXd m, v;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long t = 0;

  explicit Adam(long n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& g, double lr) {
    ++t;
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    double c1 = 1.0 - std::pow(beta1, double(t));
    double c2 = 1.0 - std::pow(beta2, double(t));
    theta -= (lr / c1) * m.cwiseQuotient(((v / c2).cwiseSqrt().array() + eps).matrix());
  }
};

}  // namespace

TrainResult train_prior(const FunctionBatch& data, const GpPrior& ref, const FnoConfig& arch,
                        const TrainConfig& cfg,
                        const std::function<void(int, const OperatorParams&, double)>& on_checkpoint) {
  cfg.validate();
  arch.validate();
  if (!(data.grid == ref.grid))
    throw std::invalid_argument("train_prior: data grid differs from reference grid");
  if (data.channels != arch.in_channels || arch.in_channels != arch.out_channels)
    throw std::invalid_argument("train_prior: channel mismatch between data and operator");
  if (data.size() < cfg.batch)
    throw std::invalid_argument("train_prior: dataset smaller than one batch");

  Rng rng(cfg.seed, 0);
  TrainResult res;
  res.params = init_params(arch, rng);
  if (cfg.epochs == 0) return res;

  const int steps_per_epoch = data.size() / cfg.batch;
  const long total_steps = long(cfg.epochs) * steps_per_epoch;
  Adam adam(res.params.param_count());
  Eigen::VectorXd theta = flatten_params(res.params);
  OperatorGrads grads = make_grads(res.params);
  OperatorParams last_good = res.params;

  long global_step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> order = rng.permutation(data.size());
    double epoch_loss = 0.0;
    for (int bstart = 0; bstart + cfg.batch <= data.size(); bstart += cfg.batch) {
      FunctionBatch h1 = FunctionBatch::zeros(data.grid, cfg.batch, data.channels);
      for (int i = 0; i < cfg.batch; ++i)
        h1.values.row(i) = data.values.row(order[size_t(bstart + i)]);
      FunctionBatch h0 = cholesky_sample(ref, cfg.batch, data.channels, rng);

      CoupledBatch coupled;
      if (cfg.ot_coupling) {
        coupled = couple_minibatch(h0, h1);
      } else {
        coupled.h0 = h0;
        coupled.h1 = h1;
      }

      grads.setZero();
      double loss =
          cfm_loss(res.params, coupled, ref, cfg.sigma_min, rng, &grads, cfg.threads);
      epoch_loss += loss;
      if (!std::isfinite(loss) || loss > 1e6) {
        res.params = last_good;
        res.aborted = true;
        res.aborted_epoch = epoch;
        return res;
      }

      double lr = cfg.lr * 0.5 * (1.0 + std::cos(M_PI * double(global_step) / double(total_steps)));
      Eigen::VectorXd g = flatten_grads(grads);
      if (cfg.optimizer == "adam") {
        adam.step(theta, g, lr);
      } else {
        theta -= lr * g;
      }
      unflatten_params(theta, res.params);
      ++global_step;
    }
    res.loss_history.push_back(epoch_loss / double(steps_per_epoch));
    last_good = res.params;
    if (on_checkpoint && cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0)
      on_checkpoint(epoch + 1, res.params, res.loss_history.back());
  }
  return res;
}

SampleStats sample_prior(const VectorField& field, const GpPrior& ref, int count, int channels,
                         const SolverConfig& solver, Rng& rng, int n_threads) {
  if (count < 1) throw std::invalid_argument("sample_prior: count must be >= 1");
  SampleStats out;
  out.batch = cholesky_sample(ref, count, channels, rng);
  std::vector<double> nfe(size_t(count), 0.0);
  parallel_shards(count, n_threads, [&](int, int begin, int end) {
    for (int s = begin; s < end; ++s) {
      FlowTrace tr = integrate(field, out.batch.sample(s), ref.grid, 0.0, 1.0, solver);
      out.batch.set_sample(s, tr.u);
      nfe[size_t(s)] = double(tr.nfe);
    }
  });
  for (double x : nfe) out.mean_nfe += x / double(count);
  return out;
}

}  // namespace ofm
