#include "zcp/baselines.hpp"

#include <nlohmann/json.hpp>
#include <random>

#include "doctest.h"
#include "zcp/eval.hpp"

using namespace zcp;

namespace {

Mlp identity_net_1d() {
  return Mlp({DenseLayer{Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1)}});
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

}  // namespace

TEST_CASE("cp_fit_regression: order statistics over scores") {
  const Mlp net = identity_net_1d();
  const Dataset d = residual_data_1d({1.0, -2.0, 3.0, -4.0, 5.0});

  SUBCASE("n_out = 0 keeps the maximum score") {
    const CpModel m = cp_fit_regression(net, d, 0);
    CHECK(m.quantiles(0) == doctest::Approx(5.0));
  }
  SUBCASE("n_out = 1 drops exactly the largest") {
    const CpModel m = cp_fit_regression(net, d, 1);
    CHECK(m.quantiles(0) == doctest::Approx(4.0));
  }
  SUBCASE("n_out >= n_m is rejected") {
    CHECK_THROWS_AS(cp_fit_regression(net, d, 5), std::invalid_argument);
  }
  SUBCASE("calibration coverage is exactly (n_m - n_out)/n_m for distinct scores") {
    for (int n_out = 0; n_out <= 3; ++n_out) {
      const CpModel m = cp_fit_regression(net, d, n_out);
      const double cov = coverage_regression(cp_predictor(m), d, 1e-9);
      CHECK(cov == doctest::Approx((5.0 - n_out) / 5.0));
    }
  }
  SUBCASE("boxes shrink monotonically as n_out grows") {
    double prev = kInf;
    for (int n_out = 0; n_out <= 3; ++n_out) {
      const CpModel m = cp_fit_regression(net, d, n_out);
      CHECK(m.quantiles(0) <= prev + 1e-12);
      prev = m.quantiles(0);
    }
  }
}

TEST_CASE("cp_quantile: finite-sample level examples") {
  std::vector<double> nine(9);
  for (int i = 0; i < 9; ++i) nine[static_cast<std::size_t>(i)] = i + 1.0;
  CHECK(cp_quantile(nine, 0.1) == doctest::Approx(9.0));  // k = ceil(10*0.9) = 9

  std::vector<double> nineteen(19);
  for (int i = 0; i < 19; ++i) nineteen[static_cast<std::size_t>(i)] = i + 1.0;
  CHECK(cp_quantile(nineteen, 0.05) == doctest::Approx(19.0));  // k = 19

  std::vector<double> ninety_nine(99);
  for (int i = 0; i < 99; ++i) ninety_nine[static_cast<std::size_t>(i)] = i + 1.0;
  CHECK(cp_quantile(ninety_nine, 0.1) == doctest::Approx(90.0));  // k = ceil(100*0.9)

  CHECK_THROWS_WITH_AS(cp_quantile(nine, 0.01), doctest::Contains("exceeds n_m"),
                       std::invalid_argument);
}

TEST_CASE("cp_fit_classification: thresholds and coverage") {
  // Linearly separable 1-D toy with a confident linear net.
  Dataset d;
  d.task = Task::kClassification;
  d.inputs.resize(30, 1);
  d.outputs = Eigen::MatrixXd::Zero(30, 2);
  for (int i = 0; i < 30; ++i) {
    d.inputs(i, 0) = -1.0 + 2.0 * i / 29.0 + (i == 15 ? 1e-3 : 0.0);
    d.outputs(i, d.inputs(i, 0) > 0.0 ? 1 : 0) = 1.0;
  }
  const Mlp net = Mlp({DenseLayer{(Eigen::MatrixXd(2, 1) << -8.0, 8.0).finished(),
                                  Eigen::Vector2d::Zero()}});

  SUBCASE("confident net yields singleton sets at n_out = 0") {
    const CpModel m = cp_fit_classification(net, d, 0);
    int singletons = 0;
    for (int i = 0; i < d.size(); ++i) {
      if (cp_prediction_classes(m, d.inputs.row(i).transpose()).size() == 1) ++singletons;
    }
    CHECK(singletons >= 28);
  }
  SUBCASE("threshold q = 1 predicts every class") {
    CpModel m = cp_fit_classification(net, d, 0);
    m.q_class = 1.0;
    CHECK(cp_prediction_classes(m, d.inputs.row(0).transpose()).size() == 2);
  }
  SUBCASE("calibration coverage at least (n_m - n_out)/n_m") {
    for (int n_out = 0; n_out <= 2; ++n_out) {
      const CpModel m = cp_fit_classification(net, d, n_out);
      const double cov = coverage_classification(cp_class_predictor(m), d);
      CHECK(cov >= (30.0 - n_out) / 30.0 - 1e-12);
    }
  }
}

TEST_CASE("ipm_fit: box hulls dominate the shared zonotope fit") {
  const Dataset data = gen_sdr2(40, 11);
  TrainOptions topt{150, 0.05, 0.9, 11};
  const Mlp net = train_mlp(data, {6, 6}, topt);
  const Placement p = place_orand(net, 0.2, 11);
  const CostConfig cost{CostKind::kRotatedInterval, 3, 11};

  const ZcpModel zcp = fit_regression(net, p, data, cost);
  const IpmModel ipm = ipm_fit(net, p, data, cost, 0);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = data.inputs.row(i).transpose();
    const Zonotope zono = prediction_set(zcp, x);
    const Zonotope box = ipm_prediction_set(ipm, x);
    // Hull containment: sampled zonotope points live in the box.
    for (int s = 0; s < 20; ++s) {
      Eigen::VectorXd lambda(zono.num_generators());
      for (int k = 0; k < lambda.size(); ++k) lambda(k) = unit(rng);
      CHECK(contains_point(box, zono.center() + zono.generators() * lambda, 1e-9));
    }
    CHECK(volume(box) >= volume(zono) - 1e-12);
  }
}

TEST_CASE("ipm_fit: output-only uncertainties already give a box") {
  const Mlp net = identity_net_1d();
  const Dataset d = residual_data_1d({0.5, -0.2, 0.1});
  Placement p;
  p.indices = {{UncertaintyKind::kOutput, 0, 0}};
  p.template_matrix = Eigen::MatrixXd::Identity(1, 1);
  const CostConfig cost{CostKind::kInterval, 0, 0};
  const ZcpModel zcp = fit_regression(net, p, d, cost);
  const IpmModel ipm = ipm_fit(net, p, d, cost, 0);
  const Eigen::VectorXd x = d.inputs.row(0).transpose();
  CHECK((prediction_set(zcp, x).generators() - ipm_prediction_set(ipm, x).generators())
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("ipm_fit rejects non-identity templates") {
  const Mlp net = identity_net_1d();
  const Dataset d = residual_data_1d({0.5, -0.2});
  Placement p;
  p.indices = {{UncertaintyKind::kOutput, 0, 0}};
  p.template_matrix = Eigen::MatrixXd::Identity(1, 1) * 2.0;
  CHECK_THROWS_AS(ipm_fit(net, p, d, CostConfig{CostKind::kInterval, 0, 0}, 0),
                  std::invalid_argument);
}

TEST_CASE("cp model JSON envelope") {
  const Mlp net = identity_net_1d();
  const CpModel m = cp_fit_regression(net, residual_data_1d({1.0, 2.0, 3.0}), 1);
  const nlohmann::json j = cp_model_to_json(m, "net.json");
  CHECK(j.at("kind") == "cp");
  const CpModel back = cp_model_from_json(j, net);
  CHECK(back.task == Task::kRegression);
  CHECK(back.quantiles(0) == m.quantiles(0));
  CHECK(back.n_out == 1);
}
