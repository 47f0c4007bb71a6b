#include "zcp/outliers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "zcp/parallel.hpp"

namespace zcp {

namespace {

std::vector<int> all_points(const CalibrationProblem& problem) {
  std::vector<int> all(static_cast<std::size_t>(problem.num_points()));
  std::iota(all.begin(), all.end(), 0);
  return all;
}

std::vector<int> without(const std::vector<int>& base, const std::set<int>& removed) {
  std::vector<int> out;
  out.reserve(base.size());
  for (int m : base) {
    if (!removed.count(m)) out.push_back(m);
  }
  return out;
}

void check_n_out(const CalibrationProblem& problem, int n_out) {
  if (n_out < 0) throw std::invalid_argument("outlier detection: n_out must be nonnegative");
  if (n_out >= problem.num_points()) {
    throw std::invalid_argument("outlier detection: n_out must leave at least one point");
  }
}

}  // namespace

BoundaryInfo boundary_points(const CalibrationProblem& problem, const std::vector<int>& subset,
                             const Eigen::VectorXd& alpha_star, double delta_tol) {
  const int nu = problem.num_generators();
  if (alpha_star.size() != nu) {
    throw std::invalid_argument("boundary_points: alpha size mismatch");
  }
  const double cap = alpha_star.size() > 0 ? alpha_star.maxCoeff() : 0.0;

  BoundaryInfo info;
  info.delta = Eigen::VectorXd::Constant(static_cast<int>(subset.size()), cap);
  if (cap <= delta_tol) {
    // Nothing can be reduced when alpha is (numerically) zero.
    return info;
  }

  Eigen::VectorXd f(nu);
  for (int j = 0; j < nu; ++j) f(j) = alpha_star(j) > 1e-12 ? 1.0 : 0.0;

  const int n_y = static_cast<int>(problem.fx(subset.empty() ? 0 : subset[0]).size());
  const auto solve_one = [&](int s_idx) {
    const std::size_t s = static_cast<std::size_t>(s_idx);
    const int m = subset[s];
    // Variables: beta (nu), delta (1); maximize delta.
    const int n_vars = nu + 1;
    LinearProgram lp;
    lp.c = Eigen::VectorXd::Zero(n_vars);
    lp.c(nu) = -1.0;
    lp.lo = Eigen::VectorXd::Constant(n_vars, -kInf);
    lp.hi = Eigen::VectorXd::Constant(n_vars, kInf);
    lp.lo(nu) = 0.0;
    lp.hi(nu) = cap;

    std::vector<Eigen::Triplet<double>> ub_trips, eq_trips;
    std::vector<double> ub_rhs, eq_rhs;
    // beta + f delta <= alpha*  and  -beta + f delta <= alpha*.
    for (int j = 0; j < nu; ++j) {
      int row = static_cast<int>(ub_rhs.size());
      ub_trips.emplace_back(row, j, 1.0);
      if (f(j) != 0.0) ub_trips.emplace_back(row, nu, f(j));
      ub_rhs.push_back(alpha_star(j));
      row = static_cast<int>(ub_rhs.size());
      ub_trips.emplace_back(row, j, -1.0);
      if (f(j) != 0.0) ub_trips.emplace_back(row, nu, f(j));
      ub_rhs.push_back(alpha_star(j));
    }
    // Containment at alpha*.
    if (problem.task() == Task::kRegression) {
      const Eigen::VectorXd rhs = problem.label(m) - problem.fx(m);
      const Eigen::MatrixXd& dg = problem.dg(m);
      for (int r = 0; r < n_y; ++r) {
        const int row = static_cast<int>(eq_rhs.size());
        for (int j = 0; j < nu; ++j) {
          if (dg(r, j) != 0.0) eq_trips.emplace_back(row, j, dg(r, j));
        }
        eq_rhs.push_back(rhs(r));
      }
    } else {
      const Eigen::MatrixXd t = class_constraint_matrix(n_y, problem.class_of(m));
      const Eigen::MatrixXd tdg = t * problem.dg(m);
      const Eigen::VectorXd tfx = t * problem.fx(m);
      for (int r = 0; r < n_y; ++r) {
        if (r == problem.class_of(m)) continue;
        const int row = static_cast<int>(ub_rhs.size());
        for (int j = 0; j < nu; ++j) {
          if (tdg(r, j) != 0.0) ub_trips.emplace_back(row, j, -tdg(r, j));
        }
        ub_rhs.push_back(tfx(r));
      }
    }

    lp.a_ub.resize(static_cast<int>(ub_rhs.size()), n_vars);
    lp.a_ub.setFromTriplets(ub_trips.begin(), ub_trips.end());
    lp.b_ub = Eigen::Map<Eigen::VectorXd>(ub_rhs.data(), static_cast<int>(ub_rhs.size()));
    lp.a_eq.resize(static_cast<int>(eq_rhs.size()), n_vars);
    lp.a_eq.setFromTriplets(eq_trips.begin(), eq_trips.end());
    lp.b_eq = Eigen::Map<Eigen::VectorXd>(eq_rhs.data(), static_cast<int>(eq_rhs.size()));

    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::kOptimal) {
      throw CalibrationError("boundary_points: containment infeasible at alpha* for point " +
                             std::to_string(m) + " (stale fit)");
    }
    info.delta(static_cast<int>(s)) = -sol.objective;
  };
  parallel_for(static_cast<int>(subset.size()), solve_one);
  for (std::size_t s = 0; s < subset.size(); ++s) {
    if (info.delta(static_cast<int>(s)) <= delta_tol) {
      info.boundary.push_back(static_cast<int>(s));
    }
  }
  return info;
}

namespace {

struct SearchContext {
  const CalibrationProblem& problem;
  int n_out;
  std::map<std::vector<int>, double> visited = {};  // removal set -> objective
  double best_objective = kInf;
  std::vector<int> best_removed = {};
  Eigen::VectorXd best_alpha = {};
  long nodes = 0;
  long lp_solves = 0;
};

void record_leaf(SearchContext& ctx, const std::vector<int>& removed, const FitResult& fit) {
  if (fit.objective < ctx.best_objective - 1e-15 ||
      (fit.objective <= ctx.best_objective + 1e-15 && removed < ctx.best_removed)) {
    ctx.best_objective = fit.objective;
    ctx.best_removed = removed;
    ctx.best_alpha = fit.alpha;
  }
}

void search_node(SearchContext& ctx, const std::vector<int>& removed, const FitResult& fit,
                 int depth) {
  ++ctx.nodes;
  if (depth == ctx.n_out) {
    record_leaf(ctx, removed, fit);
    return;
  }
  const std::set<int> removed_set(removed.begin(), removed.end());
  const std::vector<int> remaining = without(all_points(ctx.problem), removed_set);
  const BoundaryInfo info = boundary_points(ctx.problem, remaining, fit.alpha);
  ctx.lp_solves += static_cast<long>(remaining.size());
  if (info.boundary.empty()) {
    record_leaf(ctx, removed, fit);  // cannot go deeper along this branch
    return;
  }

  for (int pos : info.boundary) {
    const int m = remaining[static_cast<std::size_t>(pos)];
    std::vector<int> child = removed;
    child.insert(std::lower_bound(child.begin(), child.end(), m), m);
    if (ctx.visited.count(child)) continue;
    const std::set<int> child_set(child.begin(), child.end());
    const FitResult child_fit = ctx.problem.fit(without(all_points(ctx.problem), child_set));
    ++ctx.lp_solves;
    ctx.visited.emplace(child, child_fit.objective);
    search_node(ctx, child, child_fit, depth + 1);
  }
}

}  // namespace

OutlierResult detect_search(const CalibrationProblem& problem, int n_out) {
  check_n_out(problem, n_out);
  SearchContext ctx{problem, n_out};
  const FitResult base = problem.fit_all();
  ctx.lp_solves = 1;
  ctx.best_removed.assign(static_cast<std::size_t>(n_out), problem.num_points());
  search_node(ctx, {}, base, 0);

  OutlierResult res;
  res.method = "search";
  res.removed = ctx.best_removed;
  res.objective = ctx.best_objective;
  res.alpha = ctx.best_alpha;
  res.nodes_expanded = ctx.nodes;
  res.lp_solves = ctx.lp_solves;
  return res;
}

OutlierResult detect_greedy(const CalibrationProblem& problem, int n_out) {
  check_n_out(problem, n_out);
  OutlierResult res;
  res.method = "greedy";

  FitResult current = problem.fit_all();
  res.lp_solves = 1;
  std::set<int> removed;

  for (int level = 0; level < n_out; ++level) {
    const std::vector<int> remaining = without(all_points(problem), removed);
    const BoundaryInfo info = boundary_points(problem, remaining, current.alpha);
    res.lp_solves += static_cast<long>(remaining.size());
    if (info.boundary.empty()) break;

    int best_m = -1;
    FitResult best_fit;
    double best_obj = kInf;
    for (int pos : info.boundary) {
      const int m = remaining[static_cast<std::size_t>(pos)];
      std::set<int> child = removed;
      child.insert(m);
      const FitResult fit = problem.fit(without(all_points(problem), child));
      ++res.lp_solves;
      ++res.nodes_expanded;
      if (fit.objective < best_obj - 1e-15) {  // ties keep the lowest index
        best_obj = fit.objective;
        best_fit = fit;
        best_m = m;
      }
    }
    removed.insert(best_m);
    current = best_fit;
  }

  res.removed.assign(removed.begin(), removed.end());
  res.objective = current.objective;
  res.alpha = current.alpha;
  return res;
}

OutlierResult detect_milp(const CalibrationProblem& problem, int n_out, long node_cap) {
  check_n_out(problem, n_out);
  OutlierResult res;
  res.method = "milp";

  if (n_out == 0) {
    const FitResult base = problem.fit_all();
    res.objective = base.objective;
    res.alpha = base.alpha;
    res.lp_solves = 1;
    return res;
  }

  SolverOptions options;
  options.node_cap = node_cap;
  const MilpProgram milp = problem.outlier_milp(n_out);
  const LpSolution sol = solve_milp(milp, options);
  if (sol.status != LpStatus::kOptimal) {
    throw CalibrationError("detect_milp: outlier MILP not solvable");
  }

  const int n_m = problem.num_points();
  const int rho0 = problem.num_generators() * (1 + n_m);
  for (int m = 0; m < n_m; ++m) {
    if (sol.x(rho0 + m) < 0.5) res.removed.push_back(m);
  }
  res.nodes_expanded = sol.nodes;
  res.lp_solves = sol.nodes;
  res.proven_optimal = sol.proven_optimal;

  // Refit on the reduced set for the reported alpha; objectives agree within
  // solver tolerance.
  const std::set<int> removed_set(res.removed.begin(), res.removed.end());
  const FitResult refit = problem.fit(without(all_points(problem), removed_set));
  ++res.lp_solves;
  res.objective = refit.objective;
  res.alpha = refit.alpha;
  return res;
}

OutlierResult detect_rmse(const CalibrationProblem& problem, int n_out) {
  check_n_out(problem, n_out);
  const int n_m = problem.num_points();

  std::vector<int> order(static_cast<std::size_t>(n_m));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> err(static_cast<std::size_t>(n_m));
  for (int m = 0; m < n_m; ++m) {
    err[static_cast<std::size_t>(m)] = (problem.label(m) - problem.fx(m)).norm();
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ea = err[static_cast<std::size_t>(a)], eb = err[static_cast<std::size_t>(b)];
    if (ea != eb) return ea > eb;
    return a < b;  // ties: lowest index removed first
  });

  OutlierResult res;
  res.method = "rmse";
  res.removed.assign(order.begin(), order.begin() + n_out);
  std::sort(res.removed.begin(), res.removed.end());
  const std::set<int> removed_set(res.removed.begin(), res.removed.end());
  const FitResult fit = problem.fit(without(all_points(problem), removed_set));
  res.lp_solves = 1;
  res.objective = fit.objective;
  res.alpha = fit.alpha;
  return res;
}

void to_json(nlohmann::json& j, const OutlierResult& r) {
  j = {{"removed", r.removed},
       {"objective", r.objective},
       {"alpha", std::vector<double>(r.alpha.begin(), r.alpha.end())},
       {"method", r.method},
       {"stats",
        {{"nodes_expanded", r.nodes_expanded},
         {"lp_solves", r.lp_solves},
         {"proven_optimal", r.proven_optimal}}}};
}

}  // namespace zcp
