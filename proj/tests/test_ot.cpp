#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "ofm/gp/prior.hpp"
#include "ofm/ot/coupling.hpp"
#include "support/oracles.hpp"

using namespace ofm;

namespace {

FunctionBatch random_batch(int count, int points, Rng& rng, int channels = 1) {
  FunctionBatch b = FunctionBatch::zeros(GridSpec::line(points), count, channels);
  b.values = rng.normal_mat(count, points * channels);
  return b;
}

double brute_force_cost(const Eigen::MatrixXd& cost) {
  const int n = int(cost.rows());
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += cost(i, p[i]);
    best = std::min(best, c);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

}  // namespace

TEST_CASE("squared cost matrix matches a naive double loop") {
  Rng rng(11, 0);
  FunctionBatch b0 = random_batch(6, 16, rng, 2);
  FunctionBatch b1 = random_batch(6, 16, rng, 2);
  Eigen::MatrixXd cost = sq_cost_matrix(b0, b1);

  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      double acc = 0.0;
      for (int d = 0; d < 32; ++d) {
        double diff = b0.values(i, d) - b1.values(j, d);
        acc += diff * diff;
      }
      CHECK(cost(i, j) == doctest::Approx(acc / 32.0).epsilon(1e-12));
    }

  CHECK(cost.minCoeff() >= 0.0);
  CHECK(sq_cost_matrix(b0, b0).diagonal().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cost of two constant functions is the squared offset") {
  FunctionBatch b0 = FunctionBatch::zeros(GridSpec::line(25), 1);
  FunctionBatch b1 = FunctionBatch::zeros(GridSpec::line(25), 1);
  b1.values.setConstant(3.0);
  CHECK(sq_cost_matrix(b0, b1)(0, 0) == doctest::Approx(9.0).epsilon(1e-14));
}

TEST_CASE("cost matrix rejects mismatched batches") {
  Rng rng(1, 0);
  FunctionBatch a = random_batch(3, 16, rng);
  FunctionBatch b = random_batch(3, 17, rng);
  FunctionBatch c = random_batch(4, 16, rng);
  CHECK_THROWS_AS(sq_cost_matrix(a, b), std::invalid_argument);
  CHECK_THROWS_AS(sq_cost_matrix(a, c), std::invalid_argument);
}

TEST_CASE("assignment picks the zero diagonal and the trivial 2x2") {
  Eigen::MatrixXd diag = Eigen::MatrixXd::Constant(4, 4, 9.0);
  diag.diagonal().setZero();
  CouplingPlan plan = min_cost_assignment(diag);
  for (int i = 0; i < 4; ++i) CHECK(plan.perm[i] == i);
  CHECK(plan.total_cost == 0.0);

  Eigen::MatrixXd two(2, 2);
  two << 0.0, 1.0, 1.0, 0.0;
  plan = min_cost_assignment(two);
  CHECK(plan.perm == std::vector<int>{0, 1});
  CHECK(plan.total_cost == 0.0);
}

TEST_CASE("assignment equals brute force on random 5x5 and 7x7 matrices") {
  Rng rng(123, 0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd cost = rng.uniform_mat(5, 5, 0.0, 1.0);
    CHECK(min_cost_assignment(cost).total_cost == brute_force_cost(cost));
  }
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd cost = rng.uniform_mat(7, 7, 0.0, 1.0);
    CHECK(min_cost_assignment(cost).total_cost == brute_force_cost(cost));
  }
}

TEST_CASE("assignment rejects bad matrices") {
  CHECK_THROWS_AS(min_cost_assignment(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(min_cost_assignment(Eigen::MatrixXd(0, 0)), std::invalid_argument);
  Eigen::MatrixXd nan2 = Eigen::MatrixXd::Zero(2, 2);
  nan2(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(min_cost_assignment(nan2), std::invalid_argument);
}

TEST_CASE("coupling a shuffled copy recovers the inverse shuffle") {
  Rng rng(7, 0);
  FunctionBatch b0 = random_batch(8, 24, rng);
  FunctionBatch b1 = b0;
  std::vector<int> shuffle = rng.permutation(8);
  for (int i = 0; i < 8; ++i) b1.values.row(i) = b0.values.row(shuffle[i]);

  CoupledBatch coupled = couple_minibatch(b0, b1);
  CHECK(coupled.plan.total_cost < 1e-12);
  CHECK(coupled.h0.values == b0.values);
  for (int i = 0; i < 8; ++i) CHECK(coupled.h1.values.row(i) == b0.values.row(i));
  // inverse shuffle: plan sends row i to the slot where the copy of i landed
  for (int i = 0; i < 8; ++i) CHECK(shuffle[coupled.plan.perm[i]] == i);
}

TEST_CASE("singleton batch pairs at its squared distance") {
  Rng rng(3, 0);
  FunctionBatch b0 = random_batch(1, 10, rng);
  FunctionBatch b1 = random_batch(1, 10, rng);
  CoupledBatch coupled = couple_minibatch(b0, b1);
  CHECK(coupled.plan.perm == std::vector<int>{0});
  CHECK(coupled.plan.total_cost ==
        doctest::Approx((b0.values - b1.values).squaredNorm() / 10.0).epsilon(1e-12));
}

TEST_CASE("optimal pairing never exceeds identity pairing and preserves marginals") {
  Rng rng(19, 0);
  for (int trial = 0; trial < 25; ++trial) {
    FunctionBatch b0 = random_batch(6, 12, rng);
    FunctionBatch b1 = random_batch(6, 12, rng);
    Eigen::MatrixXd cost = sq_cost_matrix(b0, b1);
    CoupledBatch coupled = couple_minibatch(b0, b1);
    CHECK(coupled.plan.total_cost <= cost.diagonal().sum() + 1e-12);

    std::vector<int> sorted = coupled.plan.perm;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 6; ++i) CHECK(sorted[i] == i);
  }
}

TEST_CASE("larger minibatches find cheaper per-pair plans on GP draws") {
  KernelConfig cfg;
  cfg.family = KernelFamily::Matern;
  cfg.l = 0.3;
  cfg.zeta = 1.5;
  GpPrior prior = make_prior(cfg, GridSpec::line(32));

  double mean32 = 0.0, mean128 = 0.0;
  const int trials = 50;
  Rng rng(77, 0);
  for (int t = 0; t < trials; ++t) {
    for (int b : {32, 128}) {
      FunctionBatch h0 = cholesky_sample(prior, b, 1, rng);
      FunctionBatch h1 = cholesky_sample(prior, b, 1, rng);
      double per_pair = couple_minibatch(h0, h1).plan.total_cost / double(b);
      (b == 32 ? mean32 : mean128) += per_pair / double(trials);
    }
  }
  CHECK(mean128 <= mean32);
}
