#pragma once

#include <vector>
#include <Eigen/Dense>

#include "ofm/core/batch.hpp"

namespace ofm {

/* Exact minimum-cost pairing within a minibatch.  Pairing two batches through
 * the optimal assignment (rather than independently) straightens the training
 * targets: each reference draw is matched to its nearest-in-L2 data function.
 */
struct CouplingPlan {
  std::vector<int> perm;  // pair i of batch0 with perm[i] of batch1
  double total_cost = 0.0;
};

/* cost(i,j) = mean over flattened values of (batch0_i - batch1_j)^2, so the
 * scale is resolution-independent. */
Eigen::MatrixXd sq_cost_matrix(const FunctionBatch& batch0, const FunctionBatch& batch1);

/* Exact linear assignment via shortest augmenting paths (Jonker-Volgenant
 * class, O(b^3)).  Ties resolve deterministically by scan order. */
CouplingPlan min_cost_assignment(const Eigen::MatrixXd& cost);

struct CoupledBatch {
  FunctionBatch h0;  // batch0, original order
  FunctionBatch h1;  // batch1 reordered so row i pairs with h0 row i
  CouplingPlan plan;
};

CoupledBatch couple_minibatch(const FunctionBatch& batch0, const FunctionBatch& batch1);

}  // namespace ofm
