#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "zcp/calibrate.hpp"
#include "zcp/outliers.hpp"

namespace zcp {

/// Split conformal predictor: per-dimension score quantiles for regression,
/// one scalar softmax-score quantile for classification.
struct CpModel {
  Mlp net;
  Task task = Task::kRegression;
  Eigen::VectorXd quantiles;  // regression: one radius per output dimension
  double q_class = 1.0;       // classification score threshold
  int n_out = 0;
};

/// Per-dimension absolute prediction errors; the n_out largest scores per
/// dimension are permitted to violate.
CpModel cp_fit_regression(const Mlp& net, const Dataset& data, int n_out);

/// Scores 1 - softmax(f(x))_class; prediction set {i : 1 - softmax_i <= q}.
CpModel cp_fit_classification(const Mlp& net, const Dataset& data, int n_out);

/// k-th smallest score with k = ceil((n_m + 1)(1 - epsilon)).
double cp_quantile(std::vector<double> scores, double epsilon);

/// Axis-aligned box f(x) +- q as a zonotope.
Zonotope cp_prediction_box(const CpModel& m, const Eigen::VectorXd& x);

/// Classes whose softmax score clears the calibrated threshold.
std::vector<int> cp_prediction_classes(const CpModel& m, const Eigen::VectorXd& x);

enum class OutlierMethod { kSearch, kGreedy, kMilp, kRmse };
std::string outlier_method_name(OutlierMethod m);
OutlierMethod outlier_method_from_name(const std::string& name);

OutlierResult run_outlier_method(const CalibrationProblem& problem, OutlierMethod method,
                                 int n_out);

/// Interval predictor model: a ZCP fit with the identity (diagonal) template
/// whose prediction sets are box hulls of the underlying zonotopes.
struct IpmModel {
  ZcpModel zcp;
};

IpmModel ipm_fit(const Mlp& net, const Placement& placement, const Dataset& data,
                 const CostConfig& cost, int n_out = 0,
                 OutlierMethod method = OutlierMethod::kGreedy);

Zonotope ipm_prediction_set(const IpmModel& m, const Eigen::VectorXd& x);

nlohmann::json cp_model_to_json(const CpModel& m, const std::string& model_ref);
CpModel cp_model_from_json(const nlohmann::json& j, Mlp net);

}  // namespace zcp
