// Command-line frontend: gen / train / fit / eval / bound / sweep.
// Exit codes: 0 success, 2 usage, 3 data error, 4 solver error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "zcp/baselines.hpp"
#include "zcp/calibrate.hpp"
#include "zcp/coverage.hpp"
#include "zcp/data.hpp"
#include "zcp/eval.hpp"
#include "zcp/mlp.hpp"
#include "zcp/outliers.hpp"
#include "zcp/placement.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;

using nlohmann::json;

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

zcp::Dataset load_dataset(const std::string& path, const std::string& task_name, int n_y) {
  if (!std::filesystem::exists(path)) throw zcp::DataError("no such file: " + path);
  if (task_name.empty() || n_y <= 0) return zcp::load_csv_auto(path);
  return zcp::load_csv(path, zcp::task_from_name(task_name), n_y);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw zcp::DataError("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw zcp::DataError("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::vector<int> parse_arch(const std::string& arch) {
  std::vector<int> sizes;
  std::stringstream ss(arch);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    sizes.push_back(std::stoi(tok));
  }
  return sizes;
}

// Model reference resolution: as given, then relative to the predictor file.
zcp::Mlp load_referenced_model(const std::string& model_ref, const std::string& predictor_path) {
  if (std::filesystem::exists(model_ref)) return zcp::load_mlp(model_ref);
  const auto sibling = std::filesystem::path(predictor_path).parent_path() / model_ref;
  if (std::filesystem::exists(sibling)) return zcp::load_mlp(sibling.string());
  throw zcp::DataError("model reference not found: " + model_ref);
}

struct GenArgs {
  std::string name;
  int n = 2000;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  const zcp::Dataset d = zcp::gen_synthetic(a.name, a.n, a.seed);
  zcp::save_csv(d, a.out, a.seed);
  std::cout << "wrote " << d.size() << " points to " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string data;
  std::string task;
  int n_y = 0;
  std::string arch = "64,64";
  int epochs = 2000;
  double lr = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_train(const TrainArgs& a) {
  const zcp::Dataset d = load_dataset(a.data, a.task, a.n_y);
  zcp::TrainOptions opt{a.epochs, a.lr, a.momentum, a.seed};
  const zcp::Mlp net = zcp::train_mlp(d, parse_arch(a.arch), opt);
  zcp::save_mlp(net, a.out);
  std::cout << "trained [" << a.arch << "] network on " << d.size() << " points -> " << a.out
            << "\n";
  return 0;
}

struct FitArgs {
  std::string model;
  std::string data;
  std::string task;
  int n_y = 0;
  std::string kind = "zcp";
  std::string placement = "orand";
  double p_p = 0.1;
  std::uint64_t placement_seed = 0;
  std::string cost = "rotated_interval";
  int rotations = 10;
  std::uint64_t cost_seed = 0;
  int n_out = 0;
  std::string method = "greedy";
  std::string out;
  bool audit = false;
};

zcp::Placement build_placement(const FitArgs& a, const zcp::Mlp& net, const zcp::Dataset& cal) {
  const zcp::PlacementStrategy strategy = zcp::placement_strategy_from_name(a.placement);
  switch (strategy) {
    case zcp::PlacementStrategy::kORand: return zcp::place_orand(net, a.p_p, a.placement_seed);
    case zcp::PlacementStrategy::kORandStar:
      return zcp::place_orand_star(net, a.p_p, a.placement_seed);
    case zcp::PlacementStrategy::kRand: return zcp::place_rand(net, a.p_p, a.placement_seed);
    case zcp::PlacementStrategy::kQr: {
      std::vector<Eigen::VectorXd> inputs;
      inputs.reserve(static_cast<std::size_t>(cal.size()));
      for (int i = 0; i < cal.size(); ++i) inputs.push_back(cal.inputs.row(i).transpose());
      return zcp::place_qr(net, inputs, a.p_p);
    }
  }
  throw std::invalid_argument("unknown placement strategy");
}

void audit_containment(const zcp::CalibrationProblem& problem, const zcp::ZcpModel& model,
                       const std::vector<int>& removed) {
  const std::set<int> removed_set(removed.begin(), removed.end());
  int violations = 0;
  for (int m = 0; m < problem.num_points(); ++m) {
    if (removed_set.count(m)) continue;
    const zcp::Zonotope set = zcp::prediction_set(model, problem.input(m));
    bool ok = false;
    if (model.task == zcp::Task::kRegression) {
      ok = zcp::contains_point(set, problem.label(m), 1e-6);
    } else {
      const auto classes = zcp::classes_of_zonotope(set);
      ok = std::find(classes.begin(), classes.end(), problem.class_of(m)) != classes.end();
    }
    if (!ok) ++violations;
  }
  if (violations > 0) {
    throw zcp::CalibrationError("audit: " + std::to_string(violations) +
                                " retained calibration points violate containment");
  }
  std::cout << "audit: all retained calibration points contained\n";
}

int cmd_fit(const FitArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  const zcp::Dataset cal = load_dataset(a.data, a.task, a.n_y);
  const zcp::Mlp net = zcp::load_mlp(a.model);

  if (a.kind == "cp") {
    const zcp::CpModel cp = cal.task == zcp::Task::kRegression
                                ? zcp::cp_fit_regression(net, cal, a.n_out)
                                : zcp::cp_fit_classification(net, cal, a.n_out);
    json j = zcp::cp_model_to_json(cp, a.model);
    j["runtime_seconds"] = seconds_since(start);
    write_json_file(j, a.out);
    std::cout << "fit cp predictor (n_out=" << a.n_out << ") -> " << a.out << "\n";
    return 0;
  }
  if (a.kind != "zcp" && a.kind != "ipm") {
    throw std::invalid_argument("unknown predictor kind: " + a.kind);
  }

  const zcp::Placement placement = build_placement(a, net, cal);
  if (a.kind == "ipm" && !placement.identity_template()) {
    throw std::invalid_argument("ipm requires an identity (diagonal) template");
  }
  const zcp::CostConfig cost{zcp::cost_kind_from_name(a.cost), a.rotations, a.cost_seed};
  const zcp::CalibrationProblem problem(net, placement, cal, cost);

  zcp::OutlierResult res;
  if (a.n_out == 0) {
    const zcp::FitResult fit = problem.fit_all();
    res.objective = fit.objective;
    res.alpha = fit.alpha;
    res.method = "none";
    res.lp_solves = 1;
  } else {
    res = zcp::run_outlier_method(problem, zcp::outlier_method_from_name(a.method), a.n_out);
  }

  const zcp::ZcpModel model =
      problem.make_model(zcp::FitResult{res.alpha, res.objective, 0});
  if (a.audit) audit_containment(problem, model, res.removed);

  json j = zcp::zcp_model_to_json(model, a.model);
  j["kind"] = a.kind;
  j["n_out"] = a.n_out;
  j["method"] = res.method;
  j["removed"] = res.removed;
  j["stats"] = {{"nodes_expanded", res.nodes_expanded},
                {"lp_solves", res.lp_solves},
                {"proven_optimal", res.proven_optimal}};
  j["runtime_seconds"] = seconds_since(start);
  write_json_file(j, a.out);
  std::cout << "fit " << a.kind << " predictor (n_out=" << a.n_out
            << ", objective=" << res.objective << ") -> " << a.out << "\n";
  return 0;
}

struct EvalArgs {
  std::string predictor;
  std::string data;
  std::string out;
  std::string svg;
  int svg_count = 8;
  double tol = zcp::kContainTol;
  int bootstrap_reps = 1000;
  std::uint64_t bootstrap_seed = 0;
};

int cmd_eval(const EvalArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  const zcp::Dataset test = load_dataset(a.data, "", 0);
  const json j = read_json_file(a.predictor);
  const std::string kind = j.at("kind").get<std::string>();
  zcp::Mlp net = load_referenced_model(j.at("model_ref").get<std::string>(), a.predictor);

  zcp::SetPredictor sets;
  zcp::ClassPredictor classes;
  int n_out = j.value("n_out", 0);
  if (kind == "cp") {
    const zcp::CpModel cp = zcp::cp_model_from_json(j, std::move(net));
    if (test.task == zcp::Task::kRegression) {
      sets = zcp::cp_predictor(cp);
    } else {
      classes = zcp::cp_class_predictor(cp);
    }
  } else {
    const zcp::ZcpModel zcp_model = zcp::zcp_model_from_json(j, std::move(net));
    const bool hull = kind == "ipm";
    sets = hull ? zcp::ipm_predictor(zcp::IpmModel{zcp_model}) : zcp::zcp_predictor(zcp_model);
    if (test.task == zcp::Task::kClassification) {
      classes = hull ? zcp::ipm_class_predictor(zcp::IpmModel{zcp_model})
                     : zcp::zcp_class_predictor(zcp_model);
    }
  }

  zcp::EvalReport report;
  report.predictor = kind;
  report.n_out = n_out;
  std::vector<double> per_point;
  if (test.task == zcp::Task::kRegression) {
    report.coverage = zcp::coverage_regression(sets, test, a.tol);
    per_point = zcp::prediction_volumes(sets, test);
  } else {
    report.coverage = zcp::coverage_classification(classes, test);
    per_point.resize(static_cast<std::size_t>(test.size()));
    for (int i = 0; i < test.size(); ++i) {
      per_point[static_cast<std::size_t>(i)] =
          static_cast<double>(classes(test.inputs.row(i).transpose()).size());
    }
  }
  double acc = 0.0;
  for (double v : per_point) acc += v;
  report.conservatism = acc / static_cast<double>(per_point.size());
  report.conservatism_ci =
      zcp::bootstrap_ci(per_point, 0.95, a.bootstrap_reps, a.bootstrap_seed);
  std::vector<double> hits(per_point.size());
  // Coverage CI from 0/1 containment samples.
  {
    int i = 0;
    for (auto& h : hits) {
      if (test.task == zcp::Task::kRegression) {
        h = zcp::contains_point(sets(test.inputs.row(i).transpose()),
                                test.outputs.row(i).transpose(), a.tol)
                ? 1.0
                : 0.0;
      } else {
        const auto predicted = classes(test.inputs.row(i).transpose());
        const auto truth = zcp::classes_of_vector(test.outputs.row(i).transpose());
        h = std::all_of(truth.begin(), truth.end(), [&](int cls) {
              return std::find(predicted.begin(), predicted.end(), cls) != predicted.end();
            })
                ? 1.0
                : 0.0;
      }
      ++i;
    }
  }
  report.coverage_ci = zcp::bootstrap_ci(hits, 0.95, a.bootstrap_reps, a.bootstrap_seed + 1);
  report.runtime_seconds = seconds_since(start);
  zcp::write_report_csv({report}, a.out);

  if (!a.svg.empty()) {
    if (test.output_dim() != 2 || !sets) {
      throw std::invalid_argument("--svg requires a 2-D set predictor");
    }
    std::vector<zcp::Zonotope> polys;
    std::vector<Eigen::Vector2d> points;
    const int count = std::min(a.svg_count, test.size());
    for (int i = 0; i < count; ++i) {
      polys.push_back(sets(test.inputs.row(i).transpose()));
      points.emplace_back(test.outputs(i, 0), test.outputs(i, 1));
    }
    zcp::write_sets_svg(polys, points, a.svg);
  }

  std::cout << "coverage=" << report.coverage << " conservatism=" << report.conservatism
            << " -> " << a.out << "\n";
  return 0;
}

struct BoundArgs {
  long n_m = 0;
  int n_theta = 1;
  int n_out = 0;
  double confidence = 0.9;
  bool sensitivity = false;
};

int cmd_bound(const BoundArgs& a) {
  const auto row = [&](long n_m) {
    const zcp::GuaranteeQuery q{n_m, a.n_theta, a.n_out};
    const zcp::EpsilonResult res = zcp::solve_epsilon(q, a.confidence);
    std::cout << "n_m=" << n_m << " n_theta=" << a.n_theta << " n_out=" << a.n_out
              << " confidence=" << a.confidence << " guaranteed_coverage=" << std::fixed
              << std::setprecision(4) << res.guaranteed_coverage << std::defaultfloat
              << " epsilon=" << res.epsilon << "\n";
  };
  row(a.n_m);
  if (a.sensitivity) {
    if (a.n_m > 1 + a.n_out) row(a.n_m - 1);
    row(a.n_m + 1);
  }
  return 0;
}

struct SweepArgs {
  std::string model;
  std::string cal;
  std::string test;
  std::string task;
  int n_y = 0;
  std::string placement = "orand";
  double p_p = 0.1;
  std::uint64_t placement_seed = 0;
  std::string cost = "rotated_interval";
  int rotations = 10;
  std::uint64_t cost_seed = 0;
  int n_out_max = 5;
  std::string method = "greedy";
  std::string predictors = "zcp,ipm,cp";
  std::string out;
  double tol = zcp::kContainTol;
  int bootstrap_reps = 500;
  std::uint64_t bootstrap_seed = 0;
};

int cmd_sweep(const SweepArgs& a) {
  const zcp::Dataset cal = load_dataset(a.cal, a.task, a.n_y);
  const zcp::Dataset test = load_dataset(a.test, a.task, a.n_y);
  const zcp::Mlp net = zcp::load_mlp(a.model);

  std::set<std::string> wanted;
  {
    std::stringstream ss(a.predictors);
    std::string tok;
    while (std::getline(ss, tok, ',')) wanted.insert(tok);
  }
  const bool zono_kinds = wanted.count("zcp") || wanted.count("ipm");

  FitArgs fit_args;
  fit_args.placement = a.placement;
  fit_args.p_p = a.p_p;
  fit_args.placement_seed = a.placement_seed;
  std::optional<zcp::Placement> placement;
  std::optional<zcp::CalibrationProblem> problem;
  if (zono_kinds) {
    placement = build_placement(fit_args, net, cal);
    problem.emplace(net, *placement, cal,
                    zcp::CostConfig{zcp::cost_kind_from_name(a.cost), a.rotations, a.cost_seed});
  }

  std::vector<zcp::EvalReport> reports;
  const zcp::OutlierMethod method = zcp::outlier_method_from_name(a.method);
  for (int n_out = 0; n_out <= a.n_out_max; ++n_out) {
    if (zono_kinds) {
      const auto start = std::chrono::steady_clock::now();
      zcp::OutlierResult res;
      if (n_out == 0) {
        const zcp::FitResult fit = problem->fit_all();
        res.objective = fit.objective;
        res.alpha = fit.alpha;
      } else {
        res = zcp::run_outlier_method(*problem, method, n_out);
      }
      const zcp::ZcpModel model =
          problem->make_model(zcp::FitResult{res.alpha, res.objective, 0});
      const double fit_seconds = seconds_since(start);

      const auto evaluate = [&](const std::string& kind) {
        zcp::EvalReport r;
        r.predictor = kind;
        r.n_out = n_out;
        const bool hull = kind == "ipm";
        std::vector<double> per_point;
        if (test.task == zcp::Task::kRegression) {
          const zcp::SetPredictor sets =
              hull ? zcp::ipm_predictor(zcp::IpmModel{model}) : zcp::zcp_predictor(model);
          r.coverage = zcp::coverage_regression(sets, test, a.tol);
          per_point = zcp::prediction_volumes(sets, test);
        } else {
          const zcp::ClassPredictor classes = hull
                                                  ? zcp::ipm_class_predictor(zcp::IpmModel{model})
                                                  : zcp::zcp_class_predictor(model);
          r.coverage = zcp::coverage_classification(classes, test);
          per_point.resize(static_cast<std::size_t>(test.size()));
          for (int i = 0; i < test.size(); ++i) {
            per_point[static_cast<std::size_t>(i)] =
                static_cast<double>(classes(test.inputs.row(i).transpose()).size());
          }
        }
        double acc = 0.0;
        for (double v : per_point) acc += v;
        r.conservatism = acc / static_cast<double>(per_point.size());
        r.conservatism_ci =
            zcp::bootstrap_ci(per_point, 0.95, a.bootstrap_reps, a.bootstrap_seed + n_out);
        r.runtime_seconds = fit_seconds;
        reports.push_back(r);
      };
      if (wanted.count("zcp")) evaluate("zcp");
      if (wanted.count("ipm")) evaluate("ipm");
    }
    if (wanted.count("cp")) {
      const auto start = std::chrono::steady_clock::now();
      const zcp::CpModel cp = cal.task == zcp::Task::kRegression
                                  ? zcp::cp_fit_regression(net, cal, n_out)
                                  : zcp::cp_fit_classification(net, cal, n_out);
      zcp::EvalReport r;
      r.predictor = "cp";
      r.n_out = n_out;
      if (test.task == zcp::Task::kRegression) {
        r.coverage = zcp::coverage_regression(zcp::cp_predictor(cp), test, a.tol);
        const auto volumes = zcp::prediction_volumes(zcp::cp_predictor(cp), test);
        double acc = 0.0;
        for (double v : volumes) acc += v;
        r.conservatism = acc / static_cast<double>(volumes.size());
        r.conservatism_ci =
            zcp::bootstrap_ci(volumes, 0.95, a.bootstrap_reps, a.bootstrap_seed + n_out);
      } else {
        r.coverage = zcp::coverage_classification(zcp::cp_class_predictor(cp), test);
        r.conservatism = zcp::conservatism_classification(zcp::cp_class_predictor(cp), test);
      }
      r.runtime_seconds = seconds_since(start);
      reports.push_back(r);
    }
  }
  zcp::write_report_csv(reports, a.out);
  std::cout << "wrote " << reports.size() << " sweep rows to " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zonotopic conformal prediction toolkit"};
  app.require_subcommand(1);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset (CSV + JSON sidecar)");
  gen->add_option("name", gen_args.name, "sd-r1 | sd-r2 | sd-c1 | sd-c2")->required();
  gen->add_option("--n", gen_args.n, "points (regression) or points per class (classification)");
  gen->add_option("--seed", gen_args.seed, "RNG seed");
  gen->add_option("--out", gen_args.out, "output CSV path")->required();

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train a tanh network on a dataset");
  train->add_option("--data", train_args.data, "calibration CSV")->required();
  train->add_option("--task", train_args.task, "regression|classification (default: sidecar)");
  train->add_option("--n-y", train_args.n_y, "output columns (default: sidecar)");
  train->add_option("--arch", train_args.arch, "hidden sizes, e.g. 64,64");
  train->add_option("--epochs", train_args.epochs, "training epochs");
  train->add_option("--lr", train_args.lr, "learning rate");
  train->add_option("--momentum", train_args.momentum, "momentum");
  train->add_option("--seed", train_args.seed, "init seed");
  train->add_option("--out", train_args.out, "model JSON path")->required();

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Calibrate a ZCP/IPM/CP predictor");
  fit->add_option("--model", fit_args.model, "trained model JSON")->required();
  fit->add_option("--data", fit_args.data, "calibration CSV")->required();
  fit->add_option("--task", fit_args.task, "override sidecar task");
  fit->add_option("--n-y", fit_args.n_y, "override sidecar n_y");
  fit->add_option("--kind", fit_args.kind, "zcp|ipm|cp");
  fit->add_option("--placement", fit_args.placement, "orand|orand_star|qr|rand");
  fit->add_option("--p-p", fit_args.p_p, "parametric-uncertainty fraction");
  fit->add_option("--placement-seed", fit_args.placement_seed, "placement seed");
  fit->add_option("--cost", fit_args.cost,
                  "interval|rotated_interval|generator_lengths|score|score_difference");
  fit->add_option("--rotations", fit_args.rotations, "rotation count n_r");
  fit->add_option("--cost-seed", fit_args.cost_seed, "rotation seed");
  fit->add_option("--n-out", fit_args.n_out, "permitted outliers");
  fit->add_option("--method", fit_args.method, "search|greedy|milp|rmse");
  fit->add_option("--out", fit_args.out, "predictor JSON path")->required();
  fit->add_flag("--audit", fit_args.audit, "re-verify containment of retained points");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Evaluate a predictor on a test CSV");
  eval->add_option("--predictor", eval_args.predictor, "predictor JSON")->required();
  eval->add_option("--data", eval_args.data, "test CSV")->required();
  eval->add_option("--out", eval_args.out, "report CSV path")->required();
  eval->add_option("--svg", eval_args.svg, "optional 2-D prediction-set overlay");
  eval->add_option("--svg-count", eval_args.svg_count, "sets drawn in the overlay");
  eval->add_option("--tol", eval_args.tol, "containment tolerance");
  eval->add_option("--bootstrap-reps", eval_args.bootstrap_reps, "bootstrap resamples");
  eval->add_option("--bootstrap-seed", eval_args.bootstrap_seed, "bootstrap seed");

  BoundArgs bound_args;
  auto* bound = app.add_subcommand("bound", "Guaranteed-coverage table row");
  bound->add_option("--n-m", bound_args.n_m, "calibration size")->required();
  bound->add_option("--n-theta", bound_args.n_theta, "optimization-variable count")->required();
  bound->add_option("--n-out", bound_args.n_out, "permitted outliers");
  bound->add_option("--confidence", bound_args.confidence, "confidence level (default 0.9)");
  bound->add_flag("--sensitivity", bound_args.sensitivity, "also report n_m -1/+1 rows");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Coverage-vs-conservatism sweep over n_out");
  sweep->add_option("--model", sweep_args.model, "trained model JSON")->required();
  sweep->add_option("--cal", sweep_args.cal, "calibration CSV")->required();
  sweep->add_option("--test", sweep_args.test, "test CSV")->required();
  sweep->add_option("--task", sweep_args.task, "override sidecar task");
  sweep->add_option("--n-y", sweep_args.n_y, "override sidecar n_y");
  sweep->add_option("--placement", sweep_args.placement, "placement strategy");
  sweep->add_option("--p-p", sweep_args.p_p, "parametric-uncertainty fraction");
  sweep->add_option("--placement-seed", sweep_args.placement_seed, "placement seed");
  sweep->add_option("--cost", sweep_args.cost, "cost kind");
  sweep->add_option("--rotations", sweep_args.rotations, "rotation count");
  sweep->add_option("--cost-seed", sweep_args.cost_seed, "rotation seed");
  sweep->add_option("--n-out-max", sweep_args.n_out_max, "sweep upper bound");
  sweep->add_option("--method", sweep_args.method, "outlier method for the sweep");
  sweep->add_option("--predictors", sweep_args.predictors, "comma list of zcp,ipm,cp");
  sweep->add_option("--out", sweep_args.out, "Pareto CSV path")->required();
  sweep->add_option("--tol", sweep_args.tol, "containment tolerance");
  sweep->add_option("--bootstrap-reps", sweep_args.bootstrap_reps, "bootstrap resamples");
  sweep->add_option("--bootstrap-seed", sweep_args.bootstrap_seed, "bootstrap seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args);
    if (train->parsed()) return cmd_train(train_args);
    if (fit->parsed()) return cmd_fit(fit_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (bound->parsed()) return cmd_bound(bound_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
  } catch (const zcp::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const zcp::CalibrationError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const zcp::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
