#include "zcp/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace zcp {

std::string task_name(Task task) {
  return task == Task::kRegression ? "regression" : "classification";
}

Task task_from_name(const std::string& name) {
  if (name == "regression") return Task::kRegression;
  if (name == "classification") return Task::kClassification;
  throw DataError("unknown task: " + name);
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.task = task;
  out.normalization = normalization;
  out.inputs.resize(static_cast<int>(rows.size()), inputs.cols());
  out.outputs.resize(static_cast<int>(rows.size()), outputs.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.inputs.row(static_cast<int>(i)) = inputs.row(rows[i]);
    out.outputs.row(static_cast<int>(i)) = outputs.row(rows[i]);
  }
  return out;
}

Eigen::VectorXd sample_zonotope(const Zonotope& z, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::VectorXd lambda(z.num_generators());
  for (int i = 0; i < lambda.size(); ++i) lambda(i) = unit(rng);
  return z.center() + z.generators() * lambda;
}

Dataset gen_sdr1(int n, std::uint64_t seed) {
  if (n < 1) throw DataError("gen_sdr1: n must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-5.0, 5.0);

  Eigen::MatrixXd gu(2, 2);
  gu << 0.2, 0.02 * -0.209,  //
      0.2, 0.02 * 1.129;
  const Zonotope noise(Eigen::Vector2d::Zero(), gu);

  Dataset d;
  d.task = Task::kRegression;
  d.inputs.resize(n, 2);
  d.outputs.resize(n, 2);
  for (int m = 0; m < n; ++m) {
    const double x1 = ux(rng), x2 = ux(rng);
    const Eigen::VectorXd u = sample_zonotope(noise, rng);
    d.inputs(m, 0) = x1;
    d.inputs(m, 1) = x2;
    d.outputs(m, 0) = 5.0 * std::sin(x1) + x2 * x2 + x1 * u(0);
    d.outputs(m, 1) = 1.0 / (x1 * x1 + 1.0) + std::cos(x2) + x2 * u(1);
  }
  return d;
}

Dataset gen_sdr2(int n, std::uint64_t seed) {
  if (n < 1) throw DataError("gen_sdr2: n must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, 1.0);

  Eigen::MatrixXd gu(2, 2);
  gu << 0.5, 0.05 * 0.747,  //
      0.5, 0.05 * -0.247;
  const Zonotope noise(Eigen::Vector2d::Constant(0.5), gu);

  Dataset d;
  d.task = Task::kRegression;
  d.inputs.resize(n, 3);
  d.outputs.resize(n, 2);
  for (int m = 0; m < n; ++m) {
    const double x1 = ux(rng), x2 = ux(rng), x3 = ux(rng);
    const Eigen::VectorXd u = sample_zonotope(noise, rng);
    d.inputs(m, 0) = x1;
    d.inputs(m, 1) = x2;
    d.inputs(m, 2) = x3;
    const double c5x1 = std::cos(5.0 * x1), c5x2 = std::cos(5.0 * x2);
    d.outputs(m, 0) = 3.0 * x1 * x1 * x1 + std::exp(std::cos(10.0 * x2) * c5x1 * c5x1) +
                      std::exp(std::sin(7.5 * x3)) + u(0);
    d.outputs(m, 1) = 2.0 * x1 * x1 + std::exp(std::cos(10.0 * x1) * c5x2 * c5x2) +
                      std::exp(std::sin(7.5 * x3 * x3)) + 1.5 * u(1);
  }
  return d;
}

Dataset gen_sdc1(int n_per_class, std::uint64_t seed) {
  if (n_per_class < 1) throw DataError("gen_sdc1: n_per_class must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-5.0, 5.0);
  std::uniform_real_distribution<double> uu(-2.0, 2.0);

  const int n = 3 * n_per_class;
  Dataset d;
  d.task = Task::kClassification;
  d.inputs.resize(n, 2);
  d.outputs = Eigen::MatrixXd::Zero(n, 3);
  int m = 0;
  for (int cls = 0; cls < 3; ++cls) {
    for (int i = 0; i < n_per_class; ++i, ++m) {
      const double x1 = ux(rng);
      const double u1 = uu(rng);
      double x2 = 0.0;
      switch (cls) {
        case 0: x2 = 3.0 * std::sin(x1) + u1; break;
        case 1: x2 = x1 * x1 + u1; break;
        case 2: x2 = 2.0 * x1 - 10.0 + u1; break;
      }
      d.inputs(m, 0) = x1;
      d.inputs(m, 1) = x2;
      d.outputs(m, cls) = 1.0;
    }
  }
  return d;
}

Dataset gen_sdc2(int n_per_class, std::uint64_t seed) {
  if (n_per_class < 1) throw DataError("gen_sdc2: n_per_class must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-5.0, 5.0);
  std::uniform_real_distribution<double> uu(-1.0, 1.0);

  const int n = 4 * n_per_class;
  Dataset d;
  d.task = Task::kClassification;
  d.inputs.resize(n, 3);
  d.outputs = Eigen::MatrixXd::Zero(n, 4);
  int m = 0;
  for (int cls = 0; cls < 4; ++cls) {
    for (int i = 0; i < n_per_class; ++i, ++m) {
      const double x1 = ux(rng);
      const double x2 = ux(rng);
      const double u1 = uu(rng);
      double x3 = 0.0;
      switch (cls) {
        case 0: x3 = x2 * std::sin(x1) + u1; break;
        case 1: x3 = x1 * x1 + x2 + 2.0 * u1; break;
        case 2: x3 = 2.0 * x1 - 10.0 + x1 * x2 + 0.5 * u1 * u1; break;
        case 3: x3 = 2.0 * x1 - 16.0 + x2 * u1; break;
      }
      d.inputs(m, 0) = x1;
      d.inputs(m, 1) = x2;
      d.inputs(m, 2) = x3;
      d.outputs(m, cls) = 1.0;
    }
  }
  return d;
}

Dataset gen_synthetic(const std::string& name, int n, std::uint64_t seed) {
  if (name == "sd-r1") return gen_sdr1(n, seed);
  if (name == "sd-r2") return gen_sdr2(n, seed);
  if (name == "sd-c1") return gen_sdc1(n, seed);
  if (name == "sd-c2") return gen_sdc2(n, seed);
  throw DataError("unknown synthetic dataset: " + name);
}

Dataset load_csv(const std::string& path, Task task, int n_y) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV: " + path);

  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
    }
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(width) + " columns, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("no data rows in " + path);
  if (n_y <= 0 || static_cast<std::size_t>(n_y) >= width) {
    throw DataError("invalid n_y for " + std::to_string(width) + "-column CSV");
  }

  Dataset d;
  d.task = task;
  const int n_x = static_cast<int>(width) - n_y;
  d.inputs.resize(static_cast<int>(rows.size()), n_x);
  d.outputs.resize(static_cast<int>(rows.size()), n_y);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < n_x; ++j) d.inputs(static_cast<int>(i), j) = rows[i][j];
    for (int j = 0; j < n_y; ++j) {
      d.outputs(static_cast<int>(i), j) = rows[i][static_cast<std::size_t>(n_x + j)];
    }
  }
  if (task == Task::kClassification) {
    for (int i = 0; i < d.size(); ++i) {
      const double s = d.outputs.row(i).sum();
      if (std::abs(s - 1.0) > 1e-9) {
        throw DataError("row " + std::to_string(i) + ": one-hot outputs must sum to 1");
      }
    }
  }
  return d;
}

Dataset load_csv_auto(const std::string& path) {
  std::ifstream side(path + ".json");
  if (!side) {
    throw DataError("no sidecar " + path + ".json; pass the task and n_y explicitly");
  }
  nlohmann::json j;
  side >> j;
  const Task task = task_from_name(j.at("task").get<std::string>());
  const int n_y = j.at("n_y").get<int>();
  Dataset d = load_csv(path, task, n_y);
  if (j.contains("normalization") && !j.at("normalization").is_null()) {
    const auto& jn = j.at("normalization");
    const auto vec = [](const nlohmann::json& a) {
      Eigen::VectorXd v(static_cast<int>(a.size()));
      for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<int>(i)) = a[i].get<double>();
      return v;
    };
    d.normalization = Normalization{vec(jn.at("input_min")), vec(jn.at("input_max")),
                                    vec(jn.at("output_min")), vec(jn.at("output_max"))};
  }
  return d;
}

void save_csv(const Dataset& d, const std::string& path, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out.precision(17);
  for (int j = 0; j < d.input_dim(); ++j) out << "x" << j << ",";
  for (int j = 0; j < d.output_dim(); ++j) out << "y" << j << (j + 1 < d.output_dim() ? "," : "");
  out << "\n";
  for (int i = 0; i < d.size(); ++i) {
    for (int j = 0; j < d.input_dim(); ++j) out << d.inputs(i, j) << ",";
    for (int j = 0; j < d.output_dim(); ++j) {
      out << d.outputs(i, j) << (j + 1 < d.output_dim() ? "," : "");
    }
    out << "\n";
  }

  nlohmann::json side;
  side["task"] = task_name(d.task);
  side["n_y"] = d.output_dim();
  side["seed"] = seed;
  if (d.normalization) {
    const auto vec = [](const Eigen::VectorXd& v) {
      return std::vector<double>(v.begin(), v.end());
    };
    side["normalization"] = {{"input_min", vec(d.normalization->input_min)},
                             {"input_max", vec(d.normalization->input_max)},
                             {"output_min", vec(d.normalization->output_min)},
                             {"output_max", vec(d.normalization->output_max)}};
  } else {
    side["normalization"] = nullptr;
  }
  std::ofstream sout(path + ".json");
  if (!sout) throw DataError("cannot write " + path + ".json");
  sout << side.dump(2) << "\n";
}

namespace {

void minmax_columns(const Eigen::MatrixXd& m, Eigen::VectorXd& mn, Eigen::VectorXd& mx,
                    const char* what) {
  mn = m.colwise().minCoeff();
  mx = m.colwise().maxCoeff();
  for (int j = 0; j < m.cols(); ++j) {
    if (mx(j) - mn(j) <= 0.0) {
      throw DataError(std::string("normalize: constant ") + what + " column " +
                      std::to_string(j));
    }
  }
}

}  // namespace

Dataset normalize(const Dataset& d) {
  if (d.normalization) throw DataError("normalize: dataset already normalized");
  Dataset out = d;
  Normalization rec;
  minmax_columns(d.inputs, rec.input_min, rec.input_max, "input");
  for (int j = 0; j < d.input_dim(); ++j) {
    out.inputs.col(j) = (d.inputs.col(j).array() - rec.input_min(j)) /
                        (rec.input_max(j) - rec.input_min(j));
  }
  if (d.task == Task::kRegression) {
    minmax_columns(d.outputs, rec.output_min, rec.output_max, "output");
    for (int j = 0; j < d.output_dim(); ++j) {
      out.outputs.col(j) = (d.outputs.col(j).array() - rec.output_min(j)) /
                           (rec.output_max(j) - rec.output_min(j));
    }
  } else {
    rec.output_min = Eigen::VectorXd::Zero(d.output_dim());
    rec.output_max = Eigen::VectorXd::Ones(d.output_dim());
  }
  out.normalization = rec;
  return out;
}

Dataset denormalize(const Dataset& d) {
  if (!d.normalization) throw DataError("denormalize: no normalization record");
  const Normalization& rec = *d.normalization;
  Dataset out = d;
  for (int j = 0; j < d.input_dim(); ++j) {
    out.inputs.col(j) =
        d.inputs.col(j).array() * (rec.input_max(j) - rec.input_min(j)) + rec.input_min(j);
  }
  if (d.task == Task::kRegression) {
    for (int j = 0; j < d.output_dim(); ++j) {
      out.outputs.col(j) =
          d.outputs.col(j).array() * (rec.output_max(j) - rec.output_min(j)) + rec.output_min(j);
    }
  }
  out.normalization.reset();
  return out;
}

std::array<Dataset, 3> split(const Dataset& d, const SplitFractions& f, std::uint64_t seed) {
  if (std::abs(f.train + f.cal + f.test - 1.0) > 1e-9) {
    throw DataError("split: fractions must sum to 1");
  }
  const int n = d.size();
  const int n_cal = static_cast<int>(std::floor(f.cal * n));
  const int n_test = static_cast<int>(std::floor(f.test * n));
  const int n_train = n - n_cal - n_test;
  if (n_train < 0) throw DataError("split: dataset too small");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto take = [&](int from, int count) {
    return d.subset(std::vector<int>(order.begin() + from, order.begin() + from + count));
  };
  return {take(0, n_train), take(n_train, n_cal), take(n_train + n_cal, n_test)};
}

}  // namespace zcp
