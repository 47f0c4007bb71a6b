#include "zcp/calibrate.hpp"

#include <nlohmann/json.hpp>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

using namespace zcp;

namespace {

// f(x) = x in one dimension: a single linear layer.
Mlp identity_net_1d() {
  return Mlp({DenseLayer{Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1)}});
}

Mlp identity_net_2d() {
  return Mlp({DenseLayer{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)}});
}

Placement output_only_placement(int n_y) {
  Placement p;
  for (int j = 0; j < n_y; ++j) p.indices.push_back({UncertaintyKind::kOutput, 0, j});
  p.template_matrix = Eigen::MatrixXd::Identity(n_y, n_y);
  return p;
}

Dataset residual_data_1d(const std::vector<double>& residuals) {
  Dataset d;
  d.task = Task::kRegression;
  d.inputs.resize(static_cast<int>(residuals.size()), 1);
  d.outputs.resize(static_cast<int>(residuals.size()), 1);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    d.inputs(static_cast<int>(i), 0) = static_cast<double>(i);
    d.outputs(static_cast<int>(i), 0) = static_cast<double>(i) + residuals[i];
  }
  return d;
}

Mlp small_random_net(std::mt19937_64& rng, const std::vector<int>& dims) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    layer.w.resize(dims[l + 1], dims[l]);
    layer.b.resize(dims[l + 1]);
    for (int r = 0; r < layer.w.rows(); ++r) {
      layer.b(r) = 0.3 * unit(rng);
      for (int c = 0; c < layer.w.cols(); ++c) layer.w(r, c) = unit(rng);
    }
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

}  // namespace

TEST_CASE("prediction_set: singleton, box, and the product oracle") {
  SUBCASE("alpha = 0 collapses to the point prediction") {
    ZcpModel m{identity_net_2d(), output_only_placement(2), Eigen::VectorXd::Zero(2),
               Task::kRegression, CostConfig{CostKind::kInterval, 0, 0}, 0.0};
    const Zonotope set = prediction_set(m, Eigen::Vector2d(0.4, -0.2));
    CHECK(set.center() == Eigen::Vector2d(0.4, -0.2));
    CHECK(interval_norm(set) == 0.0);
  }
  SUBCASE("output-only identity template gives an axis-aligned box") {
    ZcpModel m{identity_net_2d(), output_only_placement(2),
               (Eigen::VectorXd(2) << 0.7, 0.1).finished(), Task::kRegression,
               CostConfig{CostKind::kInterval, 0, 0}, 0.0};
    const Zonotope set = prediction_set(m, Eigen::Vector2d(1.0, 2.0));
    CHECK(set.generators() ==
          Eigen::MatrixXd((Eigen::Vector2d(0.7, 0.1)).asDiagonal()));
  }
  SUBCASE("generators equal jacobian * template * diag(alpha)") {
    std::mt19937_64 rng(10);
    const Mlp net = small_random_net(rng, {2, 5, 3, 2});
    Placement p;
    p.indices = {{UncertaintyKind::kHiddenBias, 0, 1},
                 {UncertaintyKind::kHiddenBias, 1, 2},
                 {UncertaintyKind::kOutput, 0, 0},
                 {UncertaintyKind::kOutput, 0, 1}};
    p.template_matrix = Eigen::MatrixXd::Random(4, 6);
    Eigen::VectorXd alpha(6);
    alpha << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
    ZcpModel m{net, p, alpha, Task::kRegression, CostConfig{CostKind::kInterval, 0, 0}, 0.0};
    const Eigen::Vector2d x(0.2, -0.5);
    const Zonotope set = prediction_set(m, x);
    const Eigen::MatrixXd expected =
        uncertainty_jacobian(net, x, p.indices) * p.template_matrix * alpha.asDiagonal();
    CHECK((set.generators() - expected).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((set.center() - net.forward(x)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("random_rotations: identity head and Haar tail") {
  const auto only_identity = random_rotations(3, 0, 7);
  REQUIRE(only_identity.size() == 1);
  CHECK(only_identity[0].isIdentity(0.0));

  const auto rots = random_rotations(4, 6, 7);
  REQUIRE(rots.size() == 7);
  for (const auto& r : rots) {
    CHECK((r.transpose() * r - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(std::abs(r.determinant()) - 1.0) < 1e-12);
  }
  const auto again = random_rotations(4, 6, 7);
  CHECK((rots[3] - again[3]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cost_row: interval, rotated, generator-length, and score kinds") {
  const Eigen::VectorXd no_label;
  SUBCASE("interval with identity map gives unit coefficients") {
    const Eigen::MatrixXd dg = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::VectorXd row = cost_row(dg, no_label, Task::kRegression,
                                         CostConfig{CostKind::kInterval, 0, 0}, {});
    CHECK(row == Eigen::Vector2d(1.0, 1.0));
  }
  SUBCASE("rotated interval with n_r = 0 reduces to the interval cost") {
    std::mt19937_64 rng(11);
    Eigen::MatrixXd dg = Eigen::MatrixXd::Random(3, 5);
    const auto rots = random_rotations(3, 0, 0);
    const Eigen::VectorXd rotated = cost_row(dg, no_label, Task::kRegression,
                                             CostConfig{CostKind::kRotatedInterval, 0, 0}, rots);
    const Eigen::VectorXd interval =
        cost_row(dg, no_label, Task::kRegression, CostConfig{CostKind::kInterval, 0, 0}, {});
    CHECK((rotated - interval).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("generator lengths are column norms") {
    Eigen::MatrixXd dg(2, 1);
    dg << 3.0, 4.0;
    const Eigen::VectorXd row = cost_row(dg, no_label, Task::kRegression,
                                         CostConfig{CostKind::kGeneratorLengths, 0, 0}, {});
    CHECK(row(0) == doctest::Approx(5.0));
  }
  SUBCASE("score cost is rejected for regression") {
    const Eigen::MatrixXd dg = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(
        cost_row(dg, no_label, Task::kRegression, CostConfig{CostKind::kScore, 0, 0}, {}),
        std::invalid_argument);
  }
  SUBCASE("score cost sums absolute rows of incorrect classes") {
    Eigen::MatrixXd dg(3, 2);
    dg << 1.0, -2.0, 0.5, 0.5, -1.0, 1.0;
    Eigen::VectorXd label = Eigen::VectorXd::Unit(3, 1);  // class 1 correct
    const Eigen::VectorXd row = cost_row(dg, label, Task::kClassification,
                                         CostConfig{CostKind::kScore, 0, 0}, {});
    CHECK(row(0) == doctest::Approx(std::abs(1.0) + std::abs(-1.0)));
    CHECK(row(1) == doctest::Approx(std::abs(-2.0) + std::abs(1.0)));
  }
  SUBCASE("score difference uses row differences against the correct class") {
    Eigen::MatrixXd dg(2, 2);
    dg << 1.0, 0.0, 0.0, 2.0;
    Eigen::VectorXd label = Eigen::VectorXd::Unit(2, 0);
    const Eigen::VectorXd row = cost_row(dg, label, Task::kClassification,
                                         CostConfig{CostKind::kScoreDifference, 0, 0}, {});
    // Only incorrect class 1 against correct class 0: |row1 - row0|.
    CHECK(row(0) == doctest::Approx(1.0));
    CHECK(row(1) == doctest::Approx(2.0));
  }
}

TEST_CASE("fit_regression: analytic one-dimensional max-abs oracle") {
  const Mlp net = identity_net_1d();
  const Placement p = output_only_placement(1);
  const CostConfig cost{CostKind::kInterval, 0, 0};

  SUBCASE("residuals {-0.5, 0.2, 0.4} calibrate to alpha = 0.5") {
    const ZcpModel m = fit_regression(net, p, residual_data_1d({-0.5, 0.2, 0.4}), cost);
    REQUIRE(m.alpha.size() == 1);
    CHECK(m.alpha(0) == doctest::Approx(0.5));
    CHECK(m.objective == doctest::Approx(3 * 0.5));  // three unit cost rows
  }
  SUBCASE("zero residuals calibrate to alpha = 0") {
    const ZcpModel m = fit_regression(net, p, residual_data_1d({0.0, 0.0, 0.0, 0.0}), cost);
    CHECK(m.alpha(0) == doctest::Approx(0.0));
  }
}

TEST_CASE("fit_regression: per-dimension max-abs residuals in 2-D") {
  const Mlp net = identity_net_2d();
  const Placement p = output_only_placement(2);
  Dataset d;
  d.task = Task::kRegression;
  d.inputs = Eigen::MatrixXd::Zero(4, 2);
  d.outputs.resize(4, 2);
  d.outputs << 0.3, -0.1,  //
      -0.7, 0.05,          //
      0.1, 0.6,            //
      0.2, -0.2;
  const ZcpModel m = fit_regression(net, p, d, CostConfig{CostKind::kInterval, 0, 0});
  CHECK(m.alpha(0) == doctest::Approx(0.7));
  CHECK(m.alpha(1) == doctest::Approx(0.6));
}

TEST_CASE("fit_regression: infeasible residuals name the offending measurement") {
  // Single parametric-style generator that cannot reach the second output
  // dimension: template column e0 only.
  const Mlp net = identity_net_2d();
  Placement p;
  p.indices = {{UncertaintyKind::kOutput, 0, 0}};
  p.template_matrix = Eigen::MatrixXd::Identity(1, 1);
  Dataset d;
  d.task = Task::kRegression;
  d.inputs = Eigen::MatrixXd::Zero(2, 2);
  d.outputs.resize(2, 2);
  d.outputs << 0.1, 0.0,  // reachable: residual only in dim 0
      0.0, 0.5;           // unreachable: residual in dim 1
  CHECK_THROWS_WITH_AS(fit_regression(net, p, d, CostConfig{CostKind::kInterval, 0, 0}),
                       doctest::Contains("1"), CalibrationError);
}

TEST_CASE("fit_classification: unreachable margin names the measurement") {
  // True class 0 trails class 1 by 0.3, but the only generator acts on class
  // 2 and cannot close that margin.
  const Mlp net = Mlp({DenseLayer{Eigen::MatrixXd::Zero(3, 1),
                                  (Eigen::VectorXd(3) << 0.0, 0.3, -1.0).finished()}});
  Dataset d;
  d.task = Task::kClassification;
  d.inputs = Eigen::MatrixXd::Zero(1, 1);
  d.outputs.resize(1, 3);
  d.outputs << 1, 0, 0;
  Placement p;
  p.indices = {{UncertaintyKind::kOutput, 0, 2}};
  p.template_matrix = Eigen::MatrixXd::Identity(1, 1);
  CHECK_THROWS_WITH_AS(fit_classification(net, p, d, CostConfig{CostKind::kInterval, 0, 0}),
                       doctest::Contains("unreachable"), CalibrationError);
}

TEST_CASE("class_constraint_matrix: direct formula") {
  const Eigen::MatrixXd t = class_constraint_matrix(3, 1);  // class 2, 1-indexed
  Eigen::MatrixXd expected(3, 3);
  expected << -1.0, 1.0, 0.0,  //
      0.0, 0.0, 0.0,           //
      0.0, 1.0, -1.0;
  CHECK((t - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fit_classification: margin oracles") {
  SUBCASE("correct classification with margin needs no uncertainty") {
    // f constant (0.6, 0.1); all labels class 0, margin 0.5 > 0.
    const Mlp net = Mlp({DenseLayer{Eigen::MatrixXd::Zero(2, 1),
                                    (Eigen::VectorXd(2) << 0.6, 0.1).finished()}});
    Dataset d;
    d.task = Task::kClassification;
    d.inputs = Eigen::MatrixXd::Zero(3, 1);
    d.outputs.resize(3, 2);
    d.outputs << 1, 0, 1, 0, 1, 0;
    const ZcpModel m = fit_classification(net, output_only_placement(2), d,
                                          CostConfig{CostKind::kInterval, 0, 0});
    CHECK(m.alpha.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("misclassified point with margin -0.3 and one true-class generator") {
    const Mlp net = Mlp({DenseLayer{Eigen::MatrixXd::Zero(2, 1),
                                    (Eigen::VectorXd(2) << 0.0, 0.3).finished()}});
    Dataset d;
    d.task = Task::kClassification;
    d.inputs = Eigen::MatrixXd::Zero(1, 1);
    d.outputs.resize(1, 2);
    d.outputs << 1, 0;  // true class 0, but f favors class 1 by 0.3
    Placement p;
    p.indices = {{UncertaintyKind::kOutput, 0, 0}};
    p.template_matrix = Eigen::MatrixXd::Identity(1, 1);
    const ZcpModel m = fit_classification(net, p, d, CostConfig{CostKind::kInterval, 0, 0});
    REQUIRE(m.alpha.size() == 1);
    CHECK(m.alpha(0) == doctest::Approx(0.3));
  }
  SUBCASE("multi-label rows are expanded per positive class") {
    const Mlp net = Mlp({DenseLayer{Eigen::MatrixXd::Zero(2, 1),
                                    (Eigen::VectorXd(2) << 0.2, -0.2).finished()}});
    Dataset d;
    d.task = Task::kClassification;
    d.inputs = Eigen::MatrixXd::Zero(1, 1);
    d.outputs.resize(1, 2);
    d.outputs << 1, 1;  // both classes possible
    CalibrationProblem problem(net, output_only_placement(2), d,
                               CostConfig{CostKind::kInterval, 0, 0});
    CHECK(problem.num_points() == 2);
    // Class 1 is behind by 0.4; covering it needs nonzero alpha.
    const FitResult fit = problem.fit_all();
    CHECK(fit.alpha.maxCoeff() > 0.19);
  }
}

TEST_CASE("fit invariants on a trained baseline") {
  std::mt19937_64 rng(20);

  SUBCASE("regression containment at tolerance 1e-6 after an n_out = 0 fit") {
    const Dataset data = gen_sdr1(40, 5);
    TrainOptions topt{300, 0.05, 0.9, 5};
    const Mlp net = train_mlp(data, {8, 8}, topt);
    const Placement p = place_orand(net, 0.1, 5);
    const ZcpModel m = fit_regression(net, p, data, CostConfig{CostKind::kRotatedInterval, 3, 5});
    for (int i = 0; i < data.size(); ++i) {
      CHECK(contains_point(prediction_set(m, data.inputs.row(i).transpose()),
                           data.outputs.row(i).transpose(), 1e-6));
    }
  }

  SUBCASE("objective never decreases when a calibration point is added") {
    const Dataset data = gen_sdr1(12, 6);
    TrainOptions topt{100, 0.05, 0.9, 6};
    const Mlp net = train_mlp(data, {6}, topt);
    const Placement p = place_orand(net, 0.2, 6);
    CalibrationProblem problem(net, p, data, CostConfig{CostKind::kInterval, 0, 0});
    std::vector<int> subset;
    double prev = 0.0;
    for (int m = 0; m < problem.num_points(); ++m) {
      subset.push_back(m);
      if (subset.size() < 2) continue;
      const FitResult fit = problem.fit(subset);
      CHECK(fit.objective >= prev - 1e-9);
      prev = fit.objective;
    }
  }

  SUBCASE("positive diagonal template scaling inverts through alpha") {
    const Dataset data = gen_sdr1(15, 7);
    TrainOptions topt{100, 0.05, 0.9, 7};
    const Mlp net = train_mlp(data, {6}, topt);
    Placement p = place_orand(net, 0.2, 7);
    const ZcpModel base = fit_regression(net, p, data, CostConfig{CostKind::kInterval, 0, 0});

    Eigen::VectorXd scale(p.num_uncertainties());
    std::uniform_real_distribution<double> pos(0.5, 2.0);
    for (int j = 0; j < scale.size(); ++j) scale(j) = pos(rng);
    Placement scaled = p;
    scaled.template_matrix = p.template_matrix * scale.asDiagonal();
    const ZcpModel rescaled = fit_regression(net, scaled, data,
                                             CostConfig{CostKind::kInterval, 0, 0});
    for (int j = 0; j < scale.size(); ++j) {
      CHECK(rescaled.alpha(j) == doctest::Approx(base.alpha(j) / scale(j)).epsilon(1e-6));
    }
    // Same prediction sets: mutual containment of sampled boundary points.
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const Eigen::VectorXd x = data.inputs.row(0).transpose();
    const Zonotope a = prediction_set(base, x);
    const Zonotope b = prediction_set(rescaled, x);
    for (int s = 0; s < 20; ++s) {
      Eigen::VectorXd lambda(a.num_generators());
      for (int k = 0; k < lambda.size(); ++k) lambda(k) = unit(rng);
      CHECK(contains_point(b, a.center() + a.generators() * lambda, 1e-6));
      CHECK(contains_point(a, b.center() + b.generators() * lambda, 1e-6));
    }
  }

  SUBCASE("rotated objective with n_r = 0 equals the interval objective") {
    const Dataset data = gen_sdr1(10, 8);
    TrainOptions topt{100, 0.05, 0.9, 8};
    const Mlp net = train_mlp(data, {6}, topt);
    const Placement p = place_orand(net, 0.2, 8);
    const ZcpModel a = fit_regression(net, p, data, CostConfig{CostKind::kInterval, 0, 0});
    const ZcpModel b =
        fit_regression(net, p, data, CostConfig{CostKind::kRotatedInterval, 0, 0});
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-10));
  }
}

TEST_CASE("zcp model JSON envelope round trip") {
  const Mlp net = identity_net_2d();
  ZcpModel m{net, output_only_placement(2), (Eigen::VectorXd(2) << 0.4, 0.9).finished(),
             Task::kRegression, CostConfig{CostKind::kRotatedInterval, 10, 3}, 1.25};
  const nlohmann::json j = zcp_model_to_json(m, "model.json");
  CHECK(j.at("kind") == "zcp");
  CHECK(j.at("model_ref") == "model.json");
  const ZcpModel back = zcp_model_from_json(j, net);
  CHECK(back.task == Task::kRegression);
  CHECK((back.alpha - m.alpha).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.cost.kind == CostKind::kRotatedInterval);
  CHECK(back.cost.rotations == 10);
  CHECK(back.objective == 1.25);
}
