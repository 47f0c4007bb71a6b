#include "zcp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "zcp/lp.hpp"
#include "zcp/parallel.hpp"

namespace zcp {

SetPredictor zcp_predictor(const ZcpModel& m) {
  return [m](const Eigen::VectorXd& x) { return prediction_set(m, x); };
}

SetPredictor ipm_predictor(const IpmModel& m) {
  return [m](const Eigen::VectorXd& x) { return ipm_prediction_set(m, x); };
}

SetPredictor cp_predictor(const CpModel& m) {
  return [m](const Eigen::VectorXd& x) { return cp_prediction_box(m, x); };
}

ClassPredictor zcp_class_predictor(const ZcpModel& m, double tol) {
  return [m, tol](const Eigen::VectorXd& x) {
    return classes_of_zonotope(prediction_set(m, x), tol);
  };
}

ClassPredictor ipm_class_predictor(const IpmModel& m, double tol) {
  return [m, tol](const Eigen::VectorXd& x) {
    return classes_of_zonotope(ipm_prediction_set(m, x), tol);
  };
}

ClassPredictor cp_class_predictor(const CpModel& m) {
  return [m](const Eigen::VectorXd& x) { return cp_prediction_classes(m, x); };
}

std::vector<int> classes_of_vector(const Eigen::VectorXd& y) {
  if (y.size() == 0) throw std::invalid_argument("classes_of_vector: empty vector");
  const double top = y.maxCoeff();
  std::vector<int> classes;
  for (int i = 0; i < y.size(); ++i) {
    if (y(i) == top) classes.push_back(i);
  }
  return classes;
}

std::vector<int> classes_of_zonotope(const Zonotope& z, double tol) {
  const int n_y = z.dim();
  const int nu = z.num_generators();
  std::vector<int> classes;
  for (int cls = 0; cls < n_y; ++cls) {
    // max t  s.t.  T (c + G beta) >= t * 1, |beta| <= 1. Class cls is
    // attainable as a maximum iff the overall margin t* is >= -tol.
    const Eigen::MatrixXd t = class_constraint_matrix(n_y, cls);
    const Eigen::MatrixXd tg = t * z.generators();
    const Eigen::VectorXd tc = t * z.center();

    LinearProgram lp;
    const int n_vars = nu + 1;
    lp.c = Eigen::VectorXd::Zero(n_vars);
    lp.c(nu) = -1.0;
    lp.lo = Eigen::VectorXd::Constant(n_vars, -1.0);
    lp.hi = Eigen::VectorXd::Constant(n_vars, 1.0);
    lp.lo(nu) = -kInf;
    lp.hi(nu) = kInf;

    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs(n_y);
    for (int r = 0; r < n_y; ++r) {
      for (int j = 0; j < nu; ++j) {
        if (tg(r, j) != 0.0) trips.emplace_back(r, j, -tg(r, j));
      }
      trips.emplace_back(r, nu, 1.0);  // -T G beta + t <= T c
      rhs(r) = tc(r);
    }
    lp.a_ub.resize(n_y, n_vars);
    lp.a_ub.setFromTriplets(trips.begin(), trips.end());
    lp.b_ub = rhs;
    lp.a_eq.resize(0, n_vars);
    lp.b_eq.resize(0);

    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::kOptimal) {
      throw SolverError("classes_of_zonotope: margin LP failed");
    }
    if (-sol.objective >= -tol) classes.push_back(cls);
  }
  return classes;
}

double coverage_regression(const SetPredictor& predict, const Dataset& test, double tol) {
  if (test.task != Task::kRegression) {
    throw std::invalid_argument("coverage_regression: regression data required");
  }
  if (test.size() == 0) throw std::invalid_argument("coverage_regression: empty test set");
  std::vector<char> hit(static_cast<std::size_t>(test.size()), 0);
  parallel_for(test.size(), [&](int i) {
    const Zonotope set = predict(test.inputs.row(i).transpose());
    hit[static_cast<std::size_t>(i)] =
        contains_point(set, test.outputs.row(i).transpose(), tol) ? 1 : 0;
  });
  return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / test.size();
}

double coverage_classification(const ClassPredictor& predict, const Dataset& test) {
  if (test.task != Task::kClassification) {
    throw std::invalid_argument("coverage_classification: classification data required");
  }
  if (test.size() == 0) throw std::invalid_argument("coverage_classification: empty test set");
  int hits = 0;
  for (int i = 0; i < test.size(); ++i) {
    const std::vector<int> predicted = predict(test.inputs.row(i).transpose());
    const std::vector<int> truth = classes_of_vector(test.outputs.row(i).transpose());
    const bool covered = std::all_of(truth.begin(), truth.end(), [&](int cls) {
      return std::find(predicted.begin(), predicted.end(), cls) != predicted.end();
    });
    if (covered) ++hits;
  }
  return static_cast<double>(hits) / test.size();
}

namespace {

double set_volume(const Zonotope& z) {
  const int n_y = z.dim();
  if (n_y <= 5) return volume(z);
  // Projected volumes over dimension blocks {3i, 3i+1, 3i+2}; a trailing
  // partial block uses the lower-dimensional volume of the remaining dims.
  double acc = 0.0;
  for (int start = 0; start < n_y; start += 3) {
    std::vector<int> dims;
    for (int d = start; d < std::min(start + 3, n_y); ++d) dims.push_back(d);
    acc += projected_volume(z, dims);
  }
  return acc;
}

}  // namespace

std::vector<double> prediction_volumes(const SetPredictor& predict, const Dataset& test) {
  std::vector<double> volumes(static_cast<std::size_t>(test.size()));
  parallel_for(test.size(), [&](int i) {
    volumes[static_cast<std::size_t>(i)] = set_volume(predict(test.inputs.row(i).transpose()));
  });
  return volumes;
}

double conservatism_regression(const SetPredictor& predict, const Dataset& test) {
  const std::vector<double> volumes = prediction_volumes(predict, test);
  double acc = 0.0;
  for (double v : volumes) acc += v;
  return acc / static_cast<double>(volumes.size());
}

double conservatism_classification(const ClassPredictor& predict, const Dataset& test) {
  if (test.size() == 0) {
    throw std::invalid_argument("conservatism_classification: empty test set");
  }
  double acc = 0.0;
  for (int i = 0; i < test.size(); ++i) {
    acc += static_cast<double>(predict(test.inputs.row(i).transpose()).size());
  }
  return acc / test.size();
}

double normalized_conservatism(const std::vector<double>& volumes,
                               const std::vector<double>& baseline_volumes) {
  if (volumes.size() != baseline_volumes.size() || volumes.empty()) {
    throw std::invalid_argument("normalized_conservatism: mismatched point sets");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    if (baseline_volumes[i] <= 0.0) {
      throw std::invalid_argument("normalized_conservatism: zero baseline volume at point " +
                                  std::to_string(i));
    }
    acc += volumes[i] / baseline_volumes[i];
  }
  return acc / static_cast<double>(volumes.size());
}

BootstrapInterval bootstrap_ci(const std::vector<double>& samples, double level, int reps,
                               std::uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("bootstrap_ci: empty sample");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap_ci: bad level");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
  std::vector<double> means(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) acc += samples[pick(rng)];
    means[static_cast<std::size_t>(r)] = acc / static_cast<double>(samples.size());
  }
  std::sort(means.begin(), means.end());
  const auto at = [&](double p) {
    const double pos = p * static_cast<double>(reps - 1);
    return means[static_cast<std::size_t>(std::llround(pos))];
  };
  return {at((1.0 - level) / 2.0), at(1.0 - (1.0 - level) / 2.0)};
}

void write_report_csv(const std::vector<EvalReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "predictor,n_out,coverage,conservatism,coverage_ci_lo,coverage_ci_hi,"
         "conservatism_ci_lo,conservatism_ci_hi,runtime_seconds\n";
  out.precision(12);
  for (const auto& r : reports) {
    out << r.predictor << "," << r.n_out << "," << r.coverage << "," << r.conservatism << ","
        << r.coverage_ci.lower << "," << r.coverage_ci.upper << "," << r.conservatism_ci.lower
        << "," << r.conservatism_ci.upper << "," << r.runtime_seconds << "\n";
  }
}

void write_sets_svg(const std::vector<Zonotope>& sets,
                    const std::vector<Eigen::Vector2d>& points, const std::string& path) {
  double min_x = kInf, max_x = -kInf, min_y = kInf, max_y = -kInf;
  std::vector<std::vector<Eigen::Vector2d>> polygons;
  polygons.reserve(sets.size());
  for (const auto& z : sets) {
    polygons.push_back(vertices_2d(z));
    for (const auto& v : polygons.back()) {
      min_x = std::min(min_x, v.x());
      max_x = std::max(max_x, v.x());
      min_y = std::min(min_y, v.y());
      max_y = std::max(max_y, v.y());
    }
  }
  for (const auto& p : points) {
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  }
  if (!std::isfinite(min_x)) {
    min_x = min_y = 0.0;
    max_x = max_y = 1.0;
  }
  const double span_x = std::max(max_x - min_x, 1e-9);
  const double span_y = std::max(max_y - min_y, 1e-9);
  const double size = 640.0, margin = 40.0;
  const auto sx = [&](double x) { return margin + (x - min_x) / span_x * (size - 2 * margin); };
  const auto sy = [&](double y) {
    return size - margin - (y - min_y) / span_y * (size - 2 * margin);
  };

  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& poly : polygons) {
    out << "<polygon points=\"";
    for (const auto& v : poly) out << sx(v.x()) << "," << sy(v.y()) << " ";
    out << "\" fill=\"#2a7de1\" fill-opacity=\"0.12\" stroke=\"#2a7de1\" "
           "stroke-width=\"1\"/>\n";
  }
  for (const auto& p : points) {
    out << "<circle cx=\"" << sx(p.x()) << "\" cy=\"" << sy(p.y())
        << "\" r=\"2.5\" fill=\"#444\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace zcp
