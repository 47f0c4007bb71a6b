#include "zcp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace zcp {

namespace {

// (n_m - n_out)-th smallest value of a score list (1-based order statistic).
double drop_largest_quantile(std::vector<double> scores, int n_out) {
  const int n_m = static_cast<int>(scores.size());
  if (n_out < 0 || n_out >= n_m) {
    throw std::invalid_argument("cp fit: require 0 <= n_out < n_m");
  }
  std::stable_sort(scores.begin(), scores.end());
  return scores[static_cast<std::size_t>(n_m - n_out - 1)];
}

}  // namespace

CpModel cp_fit_regression(const Mlp& net, const Dataset& data, int n_out) {
  if (data.task != Task::kRegression) {
    throw std::invalid_argument("cp_fit_regression: dataset task must be regression");
  }
  const Eigen::MatrixXd pred = net.forward_batch(data.inputs);
  CpModel m{net, Task::kRegression, Eigen::VectorXd(data.output_dim()), 1.0, n_out};
  for (int j = 0; j < data.output_dim(); ++j) {
    std::vector<double> scores(static_cast<std::size_t>(data.size()));
    for (int i = 0; i < data.size(); ++i) {
      scores[static_cast<std::size_t>(i)] = std::abs(pred(i, j) - data.outputs(i, j));
    }
    m.quantiles(j) = drop_largest_quantile(std::move(scores), n_out);
  }
  return m;
}

CpModel cp_fit_classification(const Mlp& net, const Dataset& data, int n_out) {
  if (data.task != Task::kClassification) {
    throw std::invalid_argument("cp_fit_classification: dataset task must be classification");
  }
  std::vector<double> scores;
  scores.reserve(static_cast<std::size_t>(data.size()));
  for (int i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd p = softmax(net.forward(data.inputs.row(i).transpose()));
    int cls = 0;
    data.outputs.row(i).maxCoeff(&cls);
    scores.push_back(1.0 - p(cls));
  }
  CpModel m{net, Task::kClassification, Eigen::VectorXd(), 1.0, n_out};
  m.q_class = drop_largest_quantile(std::move(scores), n_out);
  return m;
}

double cp_quantile(std::vector<double> scores, double epsilon) {
  const int n_m = static_cast<int>(scores.size());
  if (n_m == 0) throw std::invalid_argument("cp_quantile: empty score list");
  const int k = static_cast<int>(std::ceil((n_m + 1) * (1.0 - epsilon)));
  if (k > n_m) {
    throw std::invalid_argument(
        "cp_quantile: quantile level ceil((n_m+1)(1-eps)) = " + std::to_string(k) +
        " exceeds n_m = " + std::to_string(n_m) + "; use more data or a larger epsilon");
  }
  std::stable_sort(scores.begin(), scores.end());
  return scores[static_cast<std::size_t>(std::max(k, 1) - 1)];
}

Zonotope cp_prediction_box(const CpModel& m, const Eigen::VectorXd& x) {
  if (m.task != Task::kRegression) {
    throw std::invalid_argument("cp_prediction_box: regression models only");
  }
  return Zonotope(m.net.forward(x), Eigen::MatrixXd(m.quantiles.asDiagonal()));
}

std::vector<int> cp_prediction_classes(const CpModel& m, const Eigen::VectorXd& x) {
  if (m.task != Task::kClassification) {
    throw std::invalid_argument("cp_prediction_classes: classification models only");
  }
  const Eigen::VectorXd p = softmax(m.net.forward(x));
  std::vector<int> classes;
  for (int i = 0; i < p.size(); ++i) {
    if (1.0 - p(i) <= m.q_class) classes.push_back(i);
  }
  return classes;
}

std::string outlier_method_name(OutlierMethod m) {
  switch (m) {
    case OutlierMethod::kSearch: return "search";
    case OutlierMethod::kGreedy: return "greedy";
    case OutlierMethod::kMilp: return "milp";
    case OutlierMethod::kRmse: return "rmse";
  }
  return "greedy";
}

OutlierMethod outlier_method_from_name(const std::string& name) {
  if (name == "search") return OutlierMethod::kSearch;
  if (name == "greedy") return OutlierMethod::kGreedy;
  if (name == "milp") return OutlierMethod::kMilp;
  if (name == "rmse") return OutlierMethod::kRmse;
  throw std::invalid_argument("unknown outlier method: " + name);
}

OutlierResult run_outlier_method(const CalibrationProblem& problem, OutlierMethod method,
                                 int n_out) {
  switch (method) {
    case OutlierMethod::kSearch: return detect_search(problem, n_out);
    case OutlierMethod::kGreedy: return detect_greedy(problem, n_out);
    case OutlierMethod::kMilp: return detect_milp(problem, n_out);
    case OutlierMethod::kRmse: return detect_rmse(problem, n_out);
  }
  throw std::invalid_argument("unknown outlier method");
}

IpmModel ipm_fit(const Mlp& net, const Placement& placement, const Dataset& data,
                 const CostConfig& cost, int n_out, OutlierMethod method) {
  if (!placement.identity_template()) {
    throw std::invalid_argument("ipm_fit: the template must be the identity matrix");
  }
  CalibrationProblem problem(net, placement, data, cost);
  OutlierResult res;
  if (n_out == 0) {
    const FitResult fit = problem.fit_all();
    res.objective = fit.objective;
    res.alpha = fit.alpha;
  } else {
    res = run_outlier_method(problem, method, n_out);
  }
  ZcpModel zcp = problem.make_model(FitResult{res.alpha, res.objective, 0});
  return IpmModel{std::move(zcp)};
}

Zonotope ipm_prediction_set(const IpmModel& m, const Eigen::VectorXd& x) {
  return box_hull(prediction_set(m.zcp, x));
}

nlohmann::json cp_model_to_json(const CpModel& m, const std::string& model_ref) {
  nlohmann::json j;
  j["kind"] = "cp";
  j["task"] = task_name(m.task);
  j["model_ref"] = model_ref;
  j["n_out"] = m.n_out;
  if (m.task == Task::kRegression) {
    j["quantiles"] = std::vector<double>(m.quantiles.begin(), m.quantiles.end());
  } else {
    j["q_class"] = m.q_class;
  }
  return j;
}

CpModel cp_model_from_json(const nlohmann::json& j, Mlp net) {
  CpModel m{std::move(net), task_from_name(j.at("task").get<std::string>()), Eigen::VectorXd(),
            1.0, j.value("n_out", 0)};
  if (m.task == Task::kRegression) {
    const auto& q = j.at("quantiles");
    m.quantiles.resize(static_cast<int>(q.size()));
    for (std::size_t i = 0; i < q.size(); ++i) {
      m.quantiles(static_cast<int>(i)) = q[i].get<double>();
    }
  } else {
    m.q_class = j.at("q_class").get<double>();
  }
  return m;
}

}  // namespace zcp
