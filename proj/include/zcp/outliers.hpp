#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "zcp/calibrate.hpp"

namespace zcp {

inline constexpr double kBoundaryDeltaTol = 1e-7;

struct OutlierResult {
  std::vector<int> removed;  // sorted, distinct point indices
  double objective = 0.0;
  Eigen::VectorXd alpha;  // scaling factors of the final (reduced) fit
  std::string method;
  long nodes_expanded = 0;
  long lp_solves = 0;
  bool proven_optimal = true;
};

struct BoundaryInfo {
  std::vector<int> boundary;  // positions within the queried subset
  Eigen::VectorXd delta;      // per-point slack, aligned with the subset
};

/// Per-measurement slack LPs at the fitted alpha; a point is a boundary point
/// iff its slack is (numerically) zero. An all-zero alpha admits no reduction
/// and therefore no boundary points.
BoundaryInfo boundary_points(const CalibrationProblem& problem, const std::vector<int>& subset,
                             const Eigen::VectorXd& alpha_star,
                             double delta_tol = kBoundaryDeltaTol);

/// Exhaustive search tree over boundary points, depth n_out, memoized by
/// removal set.
OutlierResult detect_search(const CalibrationProblem& problem, int n_out);

/// Greedy variant keeping one child per level; ties broken by lowest index.
OutlierResult detect_greedy(const CalibrationProblem& problem, int n_out);

/// Mixed-integer formulation; exact when branch-and-bound terminates under
/// the node cap, otherwise the best incumbent is flagged.
OutlierResult detect_milp(const CalibrationProblem& problem, int n_out,
                          long node_cap = SolverOptions{}.node_cap);

/// Heuristic baseline: drop the n_out points with the largest prediction
/// error norm, then refit.
OutlierResult detect_rmse(const CalibrationProblem& problem, int n_out);

void to_json(nlohmann::json& j, const OutlierResult& r);

}  // namespace zcp
