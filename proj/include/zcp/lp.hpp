#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace zcp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Tolerances and resource limits shared by the LP and MILP solvers.
struct SolverOptions {
  double feas_tol = 1e-8;
  double opt_tol = 1e-9;
  double int_tol = 1e-6;
  long max_iterations = 1000000;
  long node_cap = 200000;
  int refactor_interval = 64;
  int stall_limit = 50;  // iterations without improvement before Bland's rule
};

/// min c'x  s.t.  a_ub x <= b_ub,  a_eq x = b_eq,  lo <= x <= hi.
/// Empty inequality/equality blocks are allowed; bounds may be +-inf.
struct LinearProgram {
  Eigen::VectorXd c;
  Eigen::SparseMatrix<double> a_ub;
  Eigen::VectorXd b_ub;
  Eigen::SparseMatrix<double> a_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b_ub.size() + b_eq.size()); }

  /// Throws std::invalid_argument on inconsistent dimensions or non-finite
  /// matrix entries.
  void validate() const;
};

/// A LinearProgram plus the indices of variables restricted to {0,1}.
struct MilpProgram {
  LinearProgram lp;
  std::vector<int> binary;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Minimum total constraint violation found in phase 1; zero when feasible.
  double infeasibility = 0.0;
  /// Row duals at the optimum (a_ub rows first, then a_eq rows).
  Eigen::VectorXd duals;
  long iterations = 0;
  long nodes = 0;
  /// MILP only: false when the node cap was hit and the incumbent may be
  /// suboptimal.
  bool proven_optimal = true;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two-phase simplex for bounded variables. Instances own mutable working
/// state: one solve at a time per instance, distinct instances may run on
/// distinct threads.
class SimplexSolver {
 public:
  explicit SimplexSolver(SolverOptions options = {}) : options_(options) {}

  LpSolution solve(const LinearProgram& lp);

  const SolverOptions& options() const { return options_; }

 private:
  SolverOptions options_;
};

LpSolution solve_lp(const LinearProgram& lp, const SolverOptions& options = {});

/// Best-first branch-and-bound over the binary variables, bounded by LP
/// relaxations. Exact when it terminates under options.node_cap; otherwise
/// returns the best incumbent with proven_optimal = false.
LpSolution solve_milp(const MilpProgram& milp, const SolverOptions& options = {});

/// Plain-text normalized form of a program, for debugging.
std::string dump_lp(const LinearProgram& lp);

}  // namespace zcp
