#include "zcp/mlp.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace zcp {

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("Mlp: at least one layer required");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.w.rows() != layer.b.size()) {
      throw std::invalid_argument("Mlp: bias length must equal weight rows in layer " +
                                  std::to_string(l));
    }
    if (l > 0 && layers_[l - 1].w.rows() != layer.w.cols()) {
      throw std::invalid_argument("Mlp: layer dimensions do not chain at layer " +
                                  std::to_string(l));
    }
    if (!layer.w.allFinite() || !layer.b.allFinite()) {
      throw std::invalid_argument("Mlp: non-finite parameters in layer " + std::to_string(l));
    }
  }
}

int Mlp::hidden_bias_count() const {
  int count = 0;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    count += static_cast<int>(layers_[l].b.size());
  }
  return count;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim()) throw std::invalid_argument("Mlp::forward: input size mismatch");
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    a = layers_[l].w * a + layers_[l].b;
    if (l + 1 < layers_.size()) a = a.array().tanh();
  }
  return a;
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& x) const {
  if (x.cols() != input_dim()) {
    throw std::invalid_argument("Mlp::forward_batch: input size mismatch");
  }
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    a = (a * layers_[l].w.transpose()).rowwise() + layers_[l].b.transpose();
    if (l + 1 < layers_.size()) a = a.array().tanh();
  }
  return a;
}

std::vector<UncertaintyIndex> uncertainty_pool(const Mlp& net) {
  std::vector<UncertaintyIndex> pool;
  for (int l = 0; l + 1 < net.num_layers(); ++l) {
    for (int j = 0; j < net.layers()[l].b.size(); ++j) {
      pool.push_back({UncertaintyKind::kHiddenBias, l, j});
    }
  }
  for (int j = 0; j < net.output_dim(); ++j) {
    pool.push_back({UncertaintyKind::kOutput, 0, j});
  }
  return pool;
}

Eigen::MatrixXd uncertainty_jacobian(const Mlp& net, const Eigen::VectorXd& x,
                                     std::span<const UncertaintyIndex> indices) {
  const int n_layers = net.num_layers();
  const int n_y = net.output_dim();

  // Forward pass keeping hidden activations.
  std::vector<Eigen::VectorXd> hidden(static_cast<std::size_t>(n_layers - 1));
  Eigen::VectorXd a = x;
  for (int l = 0; l + 1 < n_layers; ++l) {
    a = (net.layers()[l].w * a + net.layers()[l].b).array().tanh();
    hidden[static_cast<std::size_t>(l)] = a;
  }

  // Reverse accumulation: sens[l] = d f / d preactivation of hidden layer l.
  std::vector<Eigen::MatrixXd> sens(static_cast<std::size_t>(n_layers - 1));
  Eigen::MatrixXd j = net.layers().back().w;  // d f / d a_{L-1}
  for (int l = n_layers - 2; l >= 0; --l) {
    const Eigen::ArrayXd dtanh = 1.0 - hidden[static_cast<std::size_t>(l)].array().square();
    sens[static_cast<std::size_t>(l)] = j * dtanh.matrix().asDiagonal();
    if (l > 0) j = sens[static_cast<std::size_t>(l)] * net.layers()[static_cast<std::size_t>(l)].w;
  }

  Eigen::MatrixXd d(n_y, static_cast<int>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const UncertaintyIndex& idx = indices[k];
    if (idx.kind == UncertaintyKind::kOutput) {
      if (idx.neuron < 0 || idx.neuron >= n_y) {
        throw std::invalid_argument("uncertainty_jacobian: output index out of range");
      }
      d.col(static_cast<int>(k)) = Eigen::VectorXd::Unit(n_y, idx.neuron);
    } else {
      if (idx.layer < 0 || idx.layer >= n_layers - 1 || idx.neuron < 0 ||
          idx.neuron >= net.layers()[static_cast<std::size_t>(idx.layer)].b.size()) {
        throw std::invalid_argument("uncertainty_jacobian: hidden-bias index out of range");
      }
      d.col(static_cast<int>(k)) = sens[static_cast<std::size_t>(idx.layer)].col(idx.neuron);
    }
  }
  return d;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& v) {
  if (!v.allFinite()) throw std::invalid_argument("softmax: non-finite input");
  const Eigen::ArrayXd shifted = v.array() - v.maxCoeff();
  const Eigen::ArrayXd e = shifted.exp();
  return e / e.sum();
}

Mlp train_mlp(const Dataset& data, const std::vector<int>& hidden_sizes,
              const TrainOptions& options) {
  if (data.size() == 0) throw std::invalid_argument("train_mlp: empty dataset");

  std::vector<int> dims;
  dims.push_back(data.input_dim());
  for (int h : hidden_sizes) {
    if (h < 1) throw std::invalid_argument("train_mlp: hidden sizes must be positive");
    dims.push_back(h);
  }
  dims.push_back(data.output_dim());

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    layer.w.resize(dims[l + 1], dims[l]);
    layer.b = Eigen::VectorXd::Zero(dims[l + 1]);
    for (int r = 0; r < layer.w.rows(); ++r) {
      for (int c = 0; c < layer.w.cols(); ++c) layer.w(r, c) = scale * unit(rng);
    }
    layers.push_back(std::move(layer));
  }

  const int n = data.size();
  const int n_layers = static_cast<int>(layers.size());
  std::vector<Eigen::MatrixXd> vel_w(layers.size()), act(layers.size());
  std::vector<Eigen::VectorXd> vel_b(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    vel_w[l] = Eigen::MatrixXd::Zero(layers[l].w.rows(), layers[l].w.cols());
    vel_b[l] = Eigen::VectorXd::Zero(layers[l].b.size());
  }

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    // Forward, one sample per row.
    Eigen::MatrixXd a = data.inputs;
    for (int l = 0; l < n_layers; ++l) {
      a = (a * layers[static_cast<std::size_t>(l)].w.transpose()).rowwise() +
          layers[static_cast<std::size_t>(l)].b.transpose();
      if (l + 1 < n_layers) a = a.array().tanh();
      act[static_cast<std::size_t>(l)] = a;
    }

    // Output-layer error; for both losses the gradient w.r.t. the final
    // affine output has the same residual form.
    Eigen::MatrixXd delta(n, data.output_dim());
    double loss = 0.0;
    if (data.task == Task::kRegression) {
      delta = act.back() - data.outputs;
      loss = delta.squaredNorm() / n;
      delta *= 2.0 / n;
    } else {
      for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd p = softmax(act.back().row(i).transpose());
        delta.row(i) = (p.transpose() - data.outputs.row(i)) / n;
        for (int c = 0; c < data.output_dim(); ++c) {
          if (data.outputs(i, c) > 0.0) {
            loss -= data.outputs(i, c) * std::log(std::max(p(c), 1e-300)) / n;
          }
        }
      }
    }
    if (!std::isfinite(loss)) {
      throw std::runtime_error("train_mlp: non-finite loss at epoch " + std::to_string(epoch) +
                               "; reduce the learning rate");
    }

    for (int l = n_layers - 1; l >= 0; --l) {
      const Eigen::MatrixXd& below =
          l == 0 ? data.inputs : act[static_cast<std::size_t>(l - 1)];
      const Eigen::MatrixXd grad_w = delta.transpose() * below;
      const Eigen::VectorXd grad_b = delta.colwise().sum().transpose();
      if (l > 0) {
        delta = (delta * layers[static_cast<std::size_t>(l)].w).array() *
                (1.0 - act[static_cast<std::size_t>(l - 1)].array().square());
      }
      auto& layer = layers[static_cast<std::size_t>(l)];
      auto& vw = vel_w[static_cast<std::size_t>(l)];
      auto& vb = vel_b[static_cast<std::size_t>(l)];
      vw = options.momentum * vw - options.learning_rate * grad_w;
      vb = options.momentum * vb - options.learning_rate * grad_b;
      layer.w += vw;
      layer.b += vb;
    }
  }
  return Mlp(std::move(layers));
}

void to_json(nlohmann::json& j, const Mlp& net) {
  auto layers = nlohmann::json::array();
  for (const auto& layer : net.layers()) {
    auto w = nlohmann::json::array();
    for (int r = 0; r < layer.w.rows(); ++r) {
      auto row = nlohmann::json::array();
      for (int c = 0; c < layer.w.cols(); ++c) row.push_back(layer.w(r, c));
      w.push_back(std::move(row));
    }
    layers.push_back(
        {{"w", std::move(w)}, {"b", std::vector<double>(layer.b.begin(), layer.b.end())}});
  }
  j = {{"layers", std::move(layers)}, {"activation", "tanh"}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
  if (j.value("activation", "tanh") != std::string("tanh")) {
    throw std::invalid_argument("mlp_from_json: only tanh networks are supported");
  }
  std::vector<DenseLayer> layers;
  for (const auto& jl : j.at("layers")) {
    DenseLayer layer;
    const auto& jw = jl.at("w");
    const int rows = static_cast<int>(jw.size());
    const int cols = rows > 0 ? static_cast<int>(jw[0].size()) : 0;
    layer.w.resize(rows, cols);
    for (int r = 0; r < rows; ++r) {
      if (static_cast<int>(jw[r].size()) != cols) {
        throw std::invalid_argument("mlp_from_json: ragged weight rows");
      }
      for (int c = 0; c < cols; ++c) layer.w(r, c) = jw[r][c].get<double>();
    }
    const auto& jb = jl.at("b");
    layer.b.resize(static_cast<int>(jb.size()));
    for (std::size_t i = 0; i < jb.size(); ++i) {
      layer.b(static_cast<int>(i)) = jb[i].get<double>();
    }
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

void save_mlp(const Mlp& net, const std::string& path) {
  nlohmann::json j;
  to_json(j, net);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

Mlp load_mlp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return mlp_from_json(j);
}

}  // namespace zcp
