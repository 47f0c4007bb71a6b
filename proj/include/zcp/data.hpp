#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "zcp/zonotope.hpp"

namespace zcp {

enum class Task { kRegression, kClassification };

std::string task_name(Task task);
Task task_from_name(const std::string& name);

/// Per-column min/max of the raw data, kept so predictions can be mapped back
/// to original units.
struct Normalization {
  Eigen::VectorXd input_min, input_max;
  Eigen::VectorXd output_min, output_max;
};

struct Dataset {
  Eigen::MatrixXd inputs;   // n_m x n_x
  Eigen::MatrixXd outputs;  // n_m x n_y; one-hot rows for classification
  Task task = Task::kRegression;
  std::optional<Normalization> normalization;

  int size() const { return static_cast<int>(inputs.rows()); }
  int input_dim() const { return static_cast<int>(inputs.cols()); }
  int output_dim() const { return static_cast<int>(outputs.cols()); }
  Dataset subset(const std::vector<int>& rows) const;
};

/// Uniform lambda in [-1,1]^nu mapped through the generators.
Eigen::VectorXd sample_zonotope(const Zonotope& z, std::mt19937_64& rng);

Dataset gen_sdr1(int n, std::uint64_t seed);
Dataset gen_sdr2(int n, std::uint64_t seed);
Dataset gen_sdc1(int n_per_class, std::uint64_t seed);
Dataset gen_sdc2(int n_per_class, std::uint64_t seed);

/// Generate a synthetic dataset by name ("sd-r1", "sd-r2", "sd-c1", "sd-c2");
/// n is the total size for regression and the per-class count for
/// classification.
Dataset gen_synthetic(const std::string& name, int n, std::uint64_t seed);

/// CSV with a one-line header; the last n_y columns are outputs.
Dataset load_csv(const std::string& path, Task task, int n_y);
/// Reads task and n_y (and any normalization record) from the JSON sidecar
/// written by save_csv.
Dataset load_csv_auto(const std::string& path);
void save_csv(const Dataset& d, const std::string& path, std::uint64_t seed = 0);

/// Min-max normalization of inputs (and outputs, for regression) to [0,1].
/// Constant columns make the scaling singular and are rejected.
Dataset normalize(const Dataset& d);
Dataset denormalize(const Dataset& d);

struct SplitFractions {
  double train = 0.75;
  double cal = 0.10;
  double test = 0.15;
};

/// Seeded shuffle followed by a contiguous split; floor-sized calibration and
/// test partitions, remainder to train.
std::array<Dataset, 3> split(const Dataset& d, const SplitFractions& f, std::uint64_t seed);

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace zcp
