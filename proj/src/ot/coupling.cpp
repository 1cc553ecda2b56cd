#include "ofm/ot/coupling.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ofm {

Eigen::MatrixXd sq_cost_matrix(const FunctionBatch& batch0, const FunctionBatch& batch1) {
  if (!(batch0.grid == batch1.grid) || batch0.channels != batch1.channels)
    throw std::invalid_argument("sq_cost_matrix: batches live on different grids");
  if (batch0.size() != batch1.size())
    throw std::invalid_argument("sq_cost_matrix: batch sizes differ");

  const double inv_d = 1.0 / double(batch0.values.cols());
  Eigen::VectorXd n0 = batch0.values.rowwise().squaredNorm();
  Eigen::VectorXd n1 = batch1.values.rowwise().squaredNorm();
  Eigen::MatrixXd cost =
      (n0.rowwise().replicate(batch1.size()) + n1.transpose().colwise().replicate(batch0.size()) -
       2.0 * batch0.values * batch1.values.transpose()) *
      inv_d;
  // the gemm form can go slightly negative for near-identical rows
  return cost.cwiseMax(0.0);
}

CouplingPlan min_cost_assignment(const Eigen::MatrixXd& cost) {
  const int n = int(cost.rows());
  if (cost.cols() != n || n == 0)
    throw std::invalid_argument("min_cost_assignment: cost matrix must be square and nonempty");
  if (!cost.allFinite())
    throw std::invalid_argument("min_cost_assignment: cost matrix has non-finite entries");

  // Shortest-augmenting-path assignment with dual potentials (1-based
  // scratch arrays; column 0 is the virtual root).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), char(0));
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  CouplingPlan plan;
  plan.perm.assign(n, -1);
  for (int j = 1; j <= n; ++j) plan.perm[p[j] - 1] = j - 1;

  std::vector<char> seen(n, 0);
  for (int i = 0; i < n; ++i) {
    const int j = plan.perm[i];
    if (j < 0 || j >= n || seen[j]) throw std::logic_error("min_cost_assignment: not a bijection");
    seen[j] = 1;
    plan.total_cost += cost(i, j);
  }
  return plan;
}

CoupledBatch couple_minibatch(const FunctionBatch& batch0, const FunctionBatch& batch1) {
  CoupledBatch out;
  out.plan = min_cost_assignment(sq_cost_matrix(batch0, batch1));
  out.h0 = batch0;
  out.h1 = batch1;
  for (int i = 0; i < batch1.size(); ++i) out.h1.values.row(i) = batch1.values.row(out.plan.perm[i]);
  return out;
}

}  // namespace ofm
