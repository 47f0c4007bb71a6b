#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "zcp/baselines.hpp"
#include "zcp/calibrate.hpp"
#include "zcp/data.hpp"
#include "zcp/zonotope.hpp"

namespace zcp {

inline constexpr double kClassTieTol = 1e-9;

using SetPredictor = std::function<Zonotope(const Eigen::VectorXd&)>;
using ClassPredictor = std::function<std::vector<int>(const Eigen::VectorXd&)>;

SetPredictor zcp_predictor(const ZcpModel& m);
SetPredictor ipm_predictor(const IpmModel& m);
SetPredictor cp_predictor(const CpModel& m);
ClassPredictor zcp_class_predictor(const ZcpModel& m, double tol = kClassTieTol);
ClassPredictor ipm_class_predictor(const IpmModel& m, double tol = kClassTieTol);
ClassPredictor cp_class_predictor(const CpModel& m);

/// Argmax class set of a score vector; exact ties all included.
std::vector<int> classes_of_vector(const Eigen::VectorXd& y);

/// Classes attainable as the maximum somewhere in the set, one margin LP per
/// class.
std::vector<int> classes_of_zonotope(const Zonotope& z, double tol = kClassTieTol);

double coverage_regression(const SetPredictor& predict, const Dataset& test,
                           double tol = kContainTol);
double coverage_classification(const ClassPredictor& predict, const Dataset& test);

/// Per-point prediction-set volumes; above five output dimensions the sum of
/// projected volumes over consecutive 3-dimensional blocks is used.
std::vector<double> prediction_volumes(const SetPredictor& predict, const Dataset& test);
double conservatism_regression(const SetPredictor& predict, const Dataset& test);
double conservatism_classification(const ClassPredictor& predict, const Dataset& test);

/// Mean of per-point volume ratios against a baseline (ratios averaged, not
/// the ratio of averages).
double normalized_conservatism(const std::vector<double>& volumes,
                               const std::vector<double>& baseline_volumes);

struct BootstrapInterval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Percentile bootstrap of the sample mean.
BootstrapInterval bootstrap_ci(const std::vector<double>& samples, double level = 0.95,
                               int reps = 1000, std::uint64_t seed = 0);

struct EvalReport {
  std::string predictor;
  int n_out = 0;
  double coverage = 0.0;
  double conservatism = 0.0;
  double runtime_seconds = 0.0;
  BootstrapInterval coverage_ci;
  BootstrapInterval conservatism_ci;
};

void write_report_csv(const std::vector<EvalReport>& reports, const std::string& path);

/// Overlay of 2-D prediction polygons and test points.
void write_sets_svg(const std::vector<Zonotope>& sets,
                    const std::vector<Eigen::Vector2d>& points, const std::string& path);

}  // namespace zcp
