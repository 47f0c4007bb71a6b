#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "zcp/data.hpp"

namespace zcp {

struct DenseLayer {
  Eigen::MatrixXd w;
  Eigen::VectorXd b;
};

/// Feed-forward network with tanh hidden layers and a linear output layer.
/// Immutable after construction; evaluation is reentrant.
class Mlp {
 public:
  explicit Mlp(std::vector<DenseLayer> layers);

  int input_dim() const { return static_cast<int>(layers_.front().w.cols()); }
  int output_dim() const { return static_cast<int>(layers_.back().w.rows()); }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  /// Total hidden-layer bias count (the parametric-uncertainty pool size).
  int hidden_bias_count() const;

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  /// Row-wise batch evaluation, one sample per row.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;

 private:
  std::vector<DenseLayer> layers_;
};

enum class UncertaintyKind { kHiddenBias, kOutput };

/// Location of one additive uncertainty: a hidden-layer bias (layer, neuron)
/// or an output dimension (neuron).
struct UncertaintyIndex {
  UncertaintyKind kind = UncertaintyKind::kOutput;
  int layer = 0;
  int neuron = 0;

  bool operator==(const UncertaintyIndex&) const = default;
};

/// Candidate pool in canonical order: hidden biases by (layer, neuron), then
/// outputs by dimension.
std::vector<UncertaintyIndex> uncertainty_pool(const Mlp& net);

/// D(x): column k is the derivative of the output with respect to additive
/// perturbation k at zero. Output perturbations give unit columns.
Eigen::MatrixXd uncertainty_jacobian(const Mlp& net, const Eigen::VectorXd& x,
                                     std::span<const UncertaintyIndex> indices);

struct TrainOptions {
  int epochs = 2000;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

/// Full-batch gradient descent with momentum on MSE (regression) or softmax
/// cross-entropy (classification). Deterministic for a fixed seed.
Mlp train_mlp(const Dataset& data, const std::vector<int>& hidden_sizes,
              const TrainOptions& options);

/// Max-subtracted softmax.
Eigen::VectorXd softmax(const Eigen::VectorXd& v);

void to_json(nlohmann::json& j, const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);
void save_mlp(const Mlp& net, const std::string& path);
Mlp load_mlp(const std::string& path);

}  // namespace zcp
