#include "zcp/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace zcp {

std::string cost_kind_name(CostKind k) {
  switch (k) {
    case CostKind::kInterval: return "interval";
    case CostKind::kRotatedInterval: return "rotated_interval";
    case CostKind::kGeneratorLengths: return "generator_lengths";
    case CostKind::kScore: return "score";
    case CostKind::kScoreDifference: return "score_difference";
  }
  return "interval";
}

CostKind cost_kind_from_name(const std::string& name) {
  if (name == "interval") return CostKind::kInterval;
  if (name == "rotated_interval") return CostKind::kRotatedInterval;
  if (name == "generator_lengths") return CostKind::kGeneratorLengths;
  if (name == "score") return CostKind::kScore;
  if (name == "score_difference") return CostKind::kScoreDifference;
  throw std::invalid_argument("unknown cost kind: " + name);
}

Zonotope prediction_set(const ZcpModel& m, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd d = uncertainty_jacobian(m.net, x, m.placement.indices);
  return Zonotope(m.net.forward(x),
                  d * m.placement.template_matrix * m.alpha.asDiagonal());
}

std::vector<Eigen::MatrixXd> random_rotations(int n_y, int n_r, std::uint64_t seed) {
  if (n_r < 0) throw std::invalid_argument("random_rotations: n_r must be nonnegative");
  std::vector<Eigen::MatrixXd> rots;
  rots.reserve(static_cast<std::size_t>(n_r) + 1);
  rots.push_back(Eigen::MatrixXd::Identity(n_y, n_y));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < n_r; ++i) {
    Eigen::MatrixXd a(n_y, n_y);
    for (int r = 0; r < n_y; ++r) {
      for (int c = 0; c < n_y; ++c) a(r, c) = gauss(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < n_y; ++c) {
      if (r(c, c) < 0.0) q.col(c) = -q.col(c);
    }
    rots.push_back(std::move(q));
  }
  return rots;
}

Eigen::MatrixXd class_constraint_matrix(int n_y, int cls) {
  if (cls < 0 || cls >= n_y) {
    throw std::invalid_argument("class_constraint_matrix: class out of range");
  }
  Eigen::MatrixXd t = -Eigen::MatrixXd::Identity(n_y, n_y);
  t.col(cls).array() += 1.0;
  return t;
}

Eigen::VectorXd cost_row(const Eigen::MatrixXd& dg, const Eigen::VectorXd& label, Task task,
                         const CostConfig& cost, const std::vector<Eigen::MatrixXd>& rotations) {
  const int nu = static_cast<int>(dg.cols());
  switch (cost.kind) {
    case CostKind::kInterval:
      return dg.cwiseAbs().colwise().sum().transpose();
    case CostKind::kRotatedInterval: {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(nu);
      for (const auto& rot : rotations) {
        acc += (rot * dg).cwiseAbs().colwise().sum().transpose();
      }
      return acc;
    }
    case CostKind::kGeneratorLengths: {
      Eigen::VectorXd acc(nu);
      for (int k = 0; k < nu; ++k) acc(k) = dg.col(k).norm();
      return acc;
    }
    case CostKind::kScore:
    case CostKind::kScoreDifference: {
      if (task != Task::kClassification) {
        throw std::invalid_argument("cost_row: score costs apply to classification only");
      }
      const double top = label.maxCoeff();
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(nu);
      for (int i = 0; i < label.size(); ++i) {
        if (label(i) == top) continue;  // correct classes carry no penalty
        if (cost.kind == CostKind::kScore) {
          acc += dg.row(i).cwiseAbs().transpose();
        } else {
          for (int j = 0; j < label.size(); ++j) {
            if (label(j) != top) continue;
            acc += (dg.row(i) - dg.row(j)).cwiseAbs().transpose();
          }
        }
      }
      return acc;
    }
  }
  throw std::invalid_argument("cost_row: unknown cost kind");
}

namespace {

std::vector<Eigen::MatrixXd> rotations_for(const CostConfig& cost, int n_y) {
  if (cost.kind != CostKind::kRotatedInterval) return {};
  if (cost.rotations < 0) {
    throw std::invalid_argument("rotated_interval cost: rotation count must be nonnegative");
  }
  return random_rotations(n_y, cost.rotations, cost.seed);
}

}  // namespace

CalibrationProblem::CalibrationProblem(const Mlp& net, const Placement& placement,
                                       const Dataset& data, const CostConfig& cost)
    : net_(net), placement_(placement), cost_(cost), task_(data.task) {
  if (data.size() == 0) throw std::invalid_argument("CalibrationProblem: empty dataset");
  if ((cost.kind == CostKind::kScore || cost.kind == CostKind::kScoreDifference) &&
      task_ != Task::kClassification) {
    throw std::invalid_argument("CalibrationProblem: score costs apply to classification only");
  }
  const auto rotations = rotations_for(cost, data.output_dim());

  for (int m = 0; m < data.size(); ++m) {
    const Eigen::VectorXd x = data.inputs.row(m).transpose();
    const Eigen::VectorXd y = data.outputs.row(m).transpose();
    const Eigen::MatrixXd d = uncertainty_jacobian(net_, x, placement_.indices);
    const Eigen::MatrixXd dg = d * placement_.template_matrix;
    const Eigen::VectorXd fx = net_.forward(x);

    if (task_ == Task::kClassification) {
      // Multi-label rows become one point per positive class.
      const double top = y.maxCoeff();
      if (top <= 0.0) {
        throw std::invalid_argument("CalibrationProblem: classification row " +
                                    std::to_string(m) + " has no positive class");
      }
      for (int cls = 0; cls < y.size(); ++cls) {
        if (y(cls) != top) continue;
        Point p;
        p.x = x;
        p.dg = dg;
        p.fx = fx;
        p.y = Eigen::VectorXd::Unit(y.size(), cls);
        p.cls = cls;
        p.cost = cost_row(dg, p.y, task_, cost_, rotations);
        points_.push_back(std::move(p));
      }
    } else {
      Point p;
      p.x = x;
      p.dg = dg;
      p.fx = fx;
      p.y = y;
      p.cost = cost_row(dg, y, task_, cost_, rotations);
      points_.push_back(std::move(p));
    }
  }
}

LinearProgram CalibrationProblem::assemble(const std::vector<int>& subset) const {
  const int nu = num_generators();
  const int n_y = static_cast<int>(points_.front().fx.size());
  const int n_s = static_cast<int>(subset.size());
  const int n_vars = nu * (1 + n_s);

  LinearProgram lp;
  lp.c = Eigen::VectorXd::Zero(n_vars);
  lp.lo = Eigen::VectorXd::Constant(n_vars, -kInf);
  lp.hi = Eigen::VectorXd::Constant(n_vars, kInf);
  lp.lo.head(nu).setZero();  // alpha >= 0

  std::vector<Eigen::Triplet<double>> ub_trips, eq_trips;
  std::vector<double> ub_rhs, eq_rhs;

  for (int s = 0; s < n_s; ++s) {
    const Point& p = points_[static_cast<std::size_t>(subset[static_cast<std::size_t>(s)])];
    const int beta0 = nu * (1 + s);
    lp.c.head(nu) += p.cost;

    // -alpha - beta_m <= 0 and -alpha + beta_m <= 0.
    for (int j = 0; j < nu; ++j) {
      const int row_minus = static_cast<int>(ub_rhs.size());
      ub_trips.emplace_back(row_minus, j, -1.0);
      ub_trips.emplace_back(row_minus, beta0 + j, -1.0);
      ub_rhs.push_back(0.0);
      const int row_plus = static_cast<int>(ub_rhs.size());
      ub_trips.emplace_back(row_plus, j, -1.0);
      ub_trips.emplace_back(row_plus, beta0 + j, 1.0);
      ub_rhs.push_back(0.0);
    }

    if (task_ == Task::kRegression) {
      // dg * beta_m = y - f(x).
      const Eigen::VectorXd rhs = p.y - p.fx;
      for (int r = 0; r < n_y; ++r) {
        const int row = static_cast<int>(eq_rhs.size());
        for (int j = 0; j < nu; ++j) {
          if (p.dg(r, j) != 0.0) eq_trips.emplace_back(row, beta0 + j, p.dg(r, j));
        }
        eq_rhs.push_back(rhs(r));
      }
    } else {
      // 0 <= T (f(x) + dg beta_m), skipping the all-zero true-class row.
      const Eigen::MatrixXd t = class_constraint_matrix(n_y, p.cls);
      const Eigen::MatrixXd tdg = t * p.dg;
      const Eigen::VectorXd tfx = t * p.fx;
      for (int r = 0; r < n_y; ++r) {
        if (r == p.cls) continue;
        const int row = static_cast<int>(ub_rhs.size());
        for (int j = 0; j < nu; ++j) {
          if (tdg(r, j) != 0.0) ub_trips.emplace_back(row, beta0 + j, -tdg(r, j));
        }
        ub_rhs.push_back(tfx(r));
      }
    }
  }

  lp.a_ub.resize(static_cast<int>(ub_rhs.size()), n_vars);
  lp.a_ub.setFromTriplets(ub_trips.begin(), ub_trips.end());
  lp.b_ub = Eigen::Map<Eigen::VectorXd>(ub_rhs.data(), static_cast<int>(ub_rhs.size()));
  lp.a_eq.resize(static_cast<int>(eq_rhs.size()), n_vars);
  lp.a_eq.setFromTriplets(eq_trips.begin(), eq_trips.end());
  lp.b_eq = Eigen::Map<Eigen::VectorXd>(eq_rhs.data(), static_cast<int>(eq_rhs.size()));
  return lp;
}

FitResult CalibrationProblem::fit(const std::vector<int>& subset) const {
  if (subset.empty()) throw std::invalid_argument("CalibrationProblem::fit: empty subset");
  for (int m : subset) {
    if (m < 0 || m >= num_points()) {
      throw std::invalid_argument("CalibrationProblem::fit: point index out of range");
    }
  }
  const LinearProgram lp = assemble(subset);
  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kUnbounded) {
    throw CalibrationError("calibration LP unbounded; cost coefficients degenerate");
  }
  if (sol.status == LpStatus::kInfeasible) {
    diagnose_infeasible(subset);
  }
  FitResult res;
  res.alpha = sol.x.head(num_generators());
  // Clip solver-tolerance negatives.
  res.alpha = res.alpha.cwiseMax(0.0);
  res.objective = sol.objective;
  res.lp_iterations = sol.iterations;
  return res;
}

FitResult CalibrationProblem::fit_all() const {
  std::vector<int> all(static_cast<std::size_t>(num_points()));
  std::iota(all.begin(), all.end(), 0);
  return fit(all);
}

void CalibrationProblem::diagnose_infeasible(const std::vector<int>& subset) const {
  // Elastic rerun: slacks on the containment rows expose which measurements
  // cannot be reached. Regression elasticizes the equality rows with p - q
  // pairs; classification adds one slack per margin row. The alpha/beta
  // coupling rows stay hard.
  const int n_y = static_cast<int>(points_.front().fx.size());
  const int nu = num_generators();
  const LinearProgram lp = assemble(subset);
  const int n_vars = lp.num_vars();
  const int rows_per_point = task_ == Task::kRegression ? n_y : n_y - 1;
  const int n_soft = rows_per_point * static_cast<int>(subset.size());
  const int n_slack = task_ == Task::kRegression ? 2 * n_soft : n_soft;

  LinearProgram elastic = lp;
  elastic.c = Eigen::VectorXd::Zero(n_vars + n_slack);
  elastic.c.tail(n_slack).setOnes();
  elastic.lo.conservativeResize(n_vars + n_slack);
  elastic.hi.conservativeResize(n_vars + n_slack);
  elastic.lo.tail(n_slack).setZero();
  elastic.hi.tail(n_slack).setConstant(kInf);

  std::vector<Eigen::Triplet<double>> trips;
  const auto widen = [&](const Eigen::SparseMatrix<double>& a) {
    trips.clear();
    for (int k = 0; k < a.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) {
        trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      }
    }
  };

  if (task_ == Task::kRegression) {
    widen(lp.a_eq);
    for (int r = 0; r < n_soft; ++r) {
      trips.emplace_back(r, n_vars + 2 * r, 1.0);
      trips.emplace_back(r, n_vars + 2 * r + 1, -1.0);
    }
    Eigen::SparseMatrix<double> a_eq(n_soft, n_vars + n_slack);
    a_eq.setFromTriplets(trips.begin(), trips.end());
    elastic.a_eq = std::move(a_eq);
    widen(lp.a_ub);
    Eigen::SparseMatrix<double> a_ub(lp.a_ub.rows(), n_vars + n_slack);
    a_ub.setFromTriplets(trips.begin(), trips.end());
    elastic.a_ub = std::move(a_ub);
  } else {
    // Margin rows sit after the 2*nu coupling rows of each point.
    widen(lp.a_ub);
    const int rows_per_block = 2 * nu + rows_per_point;
    for (int s = 0; s < static_cast<int>(subset.size()); ++s) {
      for (int r = 0; r < rows_per_point; ++r) {
        const int row = s * rows_per_block + 2 * nu + r;
        trips.emplace_back(row, n_vars + s * rows_per_point + r, -1.0);
      }
    }
    Eigen::SparseMatrix<double> a_ub(lp.a_ub.rows(), n_vars + n_slack);
    a_ub.setFromTriplets(trips.begin(), trips.end());
    elastic.a_ub = std::move(a_ub);
    Eigen::SparseMatrix<double> a_eq(0, n_vars + n_slack);
    elastic.a_eq = std::move(a_eq);
    elastic.b_eq.resize(0);
  }

  const LpSolution sol = solve_lp(elastic);
  std::ostringstream msg;
  msg << "calibration infeasible; unreachable measurements:";
  if (sol.status == LpStatus::kOptimal) {
    for (std::size_t s = 0; s < subset.size(); ++s) {
      double viol = 0.0;
      for (int r = 0; r < rows_per_point; ++r) {
        const int row = static_cast<int>(s) * rows_per_point + r;
        if (task_ == Task::kRegression) {
          viol += sol.x(n_vars + 2 * row) + sol.x(n_vars + 2 * row + 1);
        } else {
          viol += sol.x(n_vars + row);
        }
      }
      if (viol > 1e-6) msg << " " << subset[s] << " (violation " << viol << ")";
    }
  }
  throw CalibrationError(msg.str());
}

MilpProgram CalibrationProblem::outlier_milp(int n_out) const {
  const int n_m = num_points();
  if (n_out < 0 || n_out >= n_m) {
    throw std::invalid_argument("outlier_milp: require 0 <= n_out < n_m");
  }
  const int nu = num_generators();
  const int n_y = static_cast<int>(points_.front().fx.size());
  const int n_vars = nu * (1 + n_m) + n_m;  // alpha, beta blocks, rho
  const int rho0 = nu * (1 + n_m);

  MilpProgram milp;
  LinearProgram& lp = milp.lp;
  lp.c = Eigen::VectorXd::Zero(n_vars);
  lp.lo = Eigen::VectorXd::Constant(n_vars, -kInf);
  lp.hi = Eigen::VectorXd::Constant(n_vars, kInf);
  lp.lo.head(nu).setZero();
  lp.lo.tail(n_m).setZero();
  lp.hi.tail(n_m).setOnes();

  std::vector<Eigen::Triplet<double>> ub_trips, eq_trips;
  std::vector<double> ub_rhs, eq_rhs;

  for (int m = 0; m < n_m; ++m) {
    const Point& p = points_[static_cast<std::size_t>(m)];
    const int beta0 = nu * (1 + m);
    lp.c.head(nu) += p.cost;
    milp.binary.push_back(rho0 + m);

    for (int j = 0; j < nu; ++j) {
      int row = static_cast<int>(ub_rhs.size());
      ub_trips.emplace_back(row, j, -1.0);
      ub_trips.emplace_back(row, beta0 + j, -1.0);
      ub_rhs.push_back(0.0);
      row = static_cast<int>(ub_rhs.size());
      ub_trips.emplace_back(row, j, -1.0);
      ub_trips.emplace_back(row, beta0 + j, 1.0);
      ub_rhs.push_back(0.0);
    }

    if (task_ == Task::kRegression) {
      // dg beta_m - (y - f(x)) rho_m = 0.
      const Eigen::VectorXd rhs = p.y - p.fx;
      for (int r = 0; r < n_y; ++r) {
        const int row = static_cast<int>(eq_rhs.size());
        for (int j = 0; j < nu; ++j) {
          if (p.dg(r, j) != 0.0) eq_trips.emplace_back(row, beta0 + j, p.dg(r, j));
        }
        if (rhs(r) != 0.0) eq_trips.emplace_back(row, rho0 + m, -rhs(r));
        eq_rhs.push_back(0.0);
      }
    } else {
      // 0 <= T dg beta_m + T f(x) rho_m; rho_m = 0 frees the point.
      const Eigen::MatrixXd t = class_constraint_matrix(n_y, p.cls);
      const Eigen::MatrixXd tdg = t * p.dg;
      const Eigen::VectorXd tfx = t * p.fx;
      for (int r = 0; r < n_y; ++r) {
        if (r == p.cls) continue;
        const int row = static_cast<int>(ub_rhs.size());
        for (int j = 0; j < nu; ++j) {
          if (tdg(r, j) != 0.0) ub_trips.emplace_back(row, beta0 + j, -tdg(r, j));
        }
        if (tfx(r) != 0.0) ub_trips.emplace_back(row, rho0 + m, -tfx(r));
        ub_rhs.push_back(0.0);
      }
    }
  }

  // sum rho >= n_m - n_out.
  const int row = static_cast<int>(ub_rhs.size());
  for (int m = 0; m < n_m; ++m) ub_trips.emplace_back(row, rho0 + m, -1.0);
  ub_rhs.push_back(static_cast<double>(-(n_m - n_out)));

  lp.a_ub.resize(static_cast<int>(ub_rhs.size()), n_vars);
  lp.a_ub.setFromTriplets(ub_trips.begin(), ub_trips.end());
  lp.b_ub = Eigen::Map<Eigen::VectorXd>(ub_rhs.data(), static_cast<int>(ub_rhs.size()));
  lp.a_eq.resize(static_cast<int>(eq_rhs.size()), n_vars);
  lp.a_eq.setFromTriplets(eq_trips.begin(), eq_trips.end());
  lp.b_eq = Eigen::Map<Eigen::VectorXd>(eq_rhs.data(), static_cast<int>(eq_rhs.size()));
  return milp;
}

ZcpModel CalibrationProblem::make_model(const FitResult& fit) const {
  ZcpModel m{net_, placement_, fit.alpha, task_, cost_, fit.objective};
  return m;
}

ZcpModel fit_regression(const Mlp& net, const Placement& placement, const Dataset& data,
                        const CostConfig& cost) {
  if (data.task != Task::kRegression) {
    throw std::invalid_argument("fit_regression: dataset task must be regression");
  }
  CalibrationProblem problem(net, placement, data, cost);
  return problem.make_model(problem.fit_all());
}

ZcpModel fit_classification(const Mlp& net, const Placement& placement, const Dataset& data,
                            const CostConfig& cost) {
  if (data.task != Task::kClassification) {
    throw std::invalid_argument("fit_classification: dataset task must be classification");
  }
  CalibrationProblem problem(net, placement, data, cost);
  return problem.make_model(problem.fit_all());
}

void to_json(nlohmann::json& j, const CostConfig& c) {
  j = {{"kind", cost_kind_name(c.kind)}, {"rotations", c.rotations}, {"seed", c.seed}};
}

CostConfig cost_config_from_json(const nlohmann::json& j) {
  CostConfig c;
  c.kind = cost_kind_from_name(j.at("kind").get<std::string>());
  c.rotations = j.value("rotations", 0);
  c.seed = j.value("seed", std::uint64_t{0});
  return c;
}

nlohmann::json zcp_model_to_json(const ZcpModel& m, const std::string& model_ref) {
  nlohmann::json j;
  j["kind"] = "zcp";
  j["task"] = task_name(m.task);
  j["model_ref"] = model_ref;
  to_json(j["placement"], m.placement);
  j["alpha"] = std::vector<double>(m.alpha.begin(), m.alpha.end());
  to_json(j["cost"], m.cost);
  j["objective"] = m.objective;
  return j;
}

ZcpModel zcp_model_from_json(const nlohmann::json& j, Mlp net) {
  ZcpModel m{std::move(net),
             placement_from_json(j.at("placement")),
             Eigen::VectorXd(),
             task_from_name(j.at("task").get<std::string>()),
             cost_config_from_json(j.at("cost")),
             j.value("objective", 0.0)};
  const auto& ja = j.at("alpha");
  m.alpha.resize(static_cast<int>(ja.size()));
  for (std::size_t i = 0; i < ja.size(); ++i) m.alpha(static_cast<int>(i)) = ja[i].get<double>();
  return m;
}

}  // namespace zcp
