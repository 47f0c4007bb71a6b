#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "zcp/data.hpp"
#include "zcp/lp.hpp"
#include "zcp/mlp.hpp"
#include "zcp/placement.hpp"
#include "zcp/zonotope.hpp"

namespace zcp {

enum class CostKind { kInterval, kRotatedInterval, kGeneratorLengths, kScore, kScoreDifference };

std::string cost_kind_name(CostKind k);
CostKind cost_kind_from_name(const std::string& name);

struct CostConfig {
  CostKind kind = CostKind::kRotatedInterval;
  int rotations = 10;  // n_r; used by the rotated-interval cost
  std::uint64_t seed = 0;
};

/// Calibrated zono-conformal predictor: base net, placement, and nonnegative
/// per-generator scaling factors.
struct ZcpModel {
  Mlp net;
  Placement placement;
  Eigen::VectorXd alpha;
  Task task = Task::kRegression;
  CostConfig cost;
  double objective = 0.0;
};

/// Prediction zonotope <f(x), D(x) G_u diag(alpha)>.
Zonotope prediction_set(const ZcpModel& m, const Eigen::VectorXd& x);

/// n_r + 1 orthogonal matrices, the first being the identity; the rest are
/// Haar-distributed via QR of a seeded Gaussian with the R-diagonal signs
/// absorbed.
std::vector<Eigen::MatrixXd> random_rotations(int n_y, int n_r, std::uint64_t seed);

/// Linear objective coefficients on alpha contributed by one calibration
/// point with uncertainty-to-output map `dg` = D(x) G_u. Score-based kinds
/// need the label vector and are classification-only; constant terms are
/// dropped.
Eigen::VectorXd cost_row(const Eigen::MatrixXd& dg, const Eigen::VectorXd& label, Task task,
                         const CostConfig& cost, const std::vector<Eigen::MatrixXd>& rotations);

/// T = vert_ny(e_cls') - I; nonpositive rows certify that class `cls` attains
/// the maximum.
Eigen::MatrixXd class_constraint_matrix(int n_y, int cls);

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FitResult {
  Eigen::VectorXd alpha;
  double objective = 0.0;
  long lp_iterations = 0;
};

/// Precomputed per-point quantities of one identification problem, so that
/// outlier-search refits on subsets stay cheap. Multi-label classification
/// rows are expanded to one point per positive class up front.
class CalibrationProblem {
 public:
  CalibrationProblem(const Mlp& net, const Placement& placement, const Dataset& data,
                     const CostConfig& cost);

  int num_points() const { return static_cast<int>(points_.size()); }
  int num_generators() const { return placement_.num_generators(); }
  Task task() const { return task_; }
  const Mlp& net() const { return net_; }
  const Placement& placement() const { return placement_; }
  const CostConfig& cost() const { return cost_; }

  const Eigen::VectorXd& input(int m) const { return points_[static_cast<std::size_t>(m)].x; }
  const Eigen::MatrixXd& dg(int m) const { return points_[static_cast<std::size_t>(m)].dg; }
  const Eigen::VectorXd& fx(int m) const { return points_[static_cast<std::size_t>(m)].fx; }
  const Eigen::VectorXd& label(int m) const { return points_[static_cast<std::size_t>(m)].y; }
  int class_of(int m) const { return points_[static_cast<std::size_t>(m)].cls; }
  const Eigen::VectorXd& objective_row(int m) const {
    return points_[static_cast<std::size_t>(m)].cost;
  }

  /// Solve the identification LP restricted to the given point indices.
  /// Throws CalibrationError (naming offending measurements when detectable)
  /// if the containment constraints cannot be met.
  FitResult fit(const std::vector<int>& subset) const;
  FitResult fit_all() const;

  /// The fit as a MILP in which up to n_out points may violate containment.
  MilpProgram outlier_milp(int n_out) const;

  ZcpModel make_model(const FitResult& fit) const;

 private:
  struct Point {
    Eigen::VectorXd x;
    Eigen::MatrixXd dg;    // D(x) G_u
    Eigen::VectorXd fx;    // f(x)
    Eigen::VectorXd y;     // observed output (one-hot row for classification)
    Eigen::VectorXd cost;  // objective coefficients on alpha
    int cls = -1;          // classification: encoded class
  };

  LinearProgram assemble(const std::vector<int>& subset) const;
  [[noreturn]] void diagnose_infeasible(const std::vector<int>& subset) const;

  Mlp net_;
  Placement placement_;
  CostConfig cost_;
  Task task_;
  std::vector<Point> points_;
};

/// One-call fits over a whole calibration set as a single LP.
ZcpModel fit_regression(const Mlp& net, const Placement& placement, const Dataset& data,
                        const CostConfig& cost);
ZcpModel fit_classification(const Mlp& net, const Placement& placement, const Dataset& data,
                            const CostConfig& cost);

void to_json(nlohmann::json& j, const CostConfig& c);
CostConfig cost_config_from_json(const nlohmann::json& j);

/// Serialized predictor envelope; the base network is stored as a reference.
nlohmann::json zcp_model_to_json(const ZcpModel& m, const std::string& model_ref);
ZcpModel zcp_model_from_json(const nlohmann::json& j, Mlp net);

}  // namespace zcp
