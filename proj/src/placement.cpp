#include "zcp/placement.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace zcp {

std::string placement_strategy_name(PlacementStrategy s) {
  switch (s) {
    case PlacementStrategy::kORand: return "orand";
    case PlacementStrategy::kORandStar: return "orand_star";
    case PlacementStrategy::kQr: return "qr";
    case PlacementStrategy::kRand: return "rand";
  }
  return "orand";
}

PlacementStrategy placement_strategy_from_name(const std::string& name) {
  if (name == "orand") return PlacementStrategy::kORand;
  if (name == "orand_star" || name == "orand*") return PlacementStrategy::kORandStar;
  if (name == "qr") return PlacementStrategy::kQr;
  if (name == "rand") return PlacementStrategy::kRand;
  throw std::invalid_argument("unknown placement strategy: " + name);
}

bool Placement::identity_template() const {
  const int n_u = num_uncertainties();
  if (template_matrix.rows() != n_u || template_matrix.cols() != n_u) return false;
  return template_matrix.isIdentity(0.0);
}

int round_half_away(double x) {
  return static_cast<int>(x >= 0.0 ? std::floor(x + 0.5) : std::ceil(x - 0.5));
}

namespace {

// Canonical ordering puts hidden biases first (by layer, then neuron), then
// outputs, matching uncertainty_pool.
void sort_canonical(std::vector<UncertaintyIndex>& indices) {
  std::sort(indices.begin(), indices.end(),
            [](const UncertaintyIndex& a, const UncertaintyIndex& b) {
              if (a.kind != b.kind) return a.kind == UncertaintyKind::kHiddenBias;
              if (a.kind == UncertaintyKind::kHiddenBias && a.layer != b.layer) {
                return a.layer < b.layer;
              }
              return a.neuron < b.neuron;
            });
}

// Seeded sample of `count` distinct positions from [0, pool_size).
std::vector<int> sample_without_replacement(int pool_size, int count, std::mt19937_64& rng) {
  std::vector<int> positions(static_cast<std::size_t>(pool_size));
  for (int i = 0; i < pool_size; ++i) positions[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, pool_size - 1);
    std::swap(positions[static_cast<std::size_t>(i)],
              positions[static_cast<std::size_t>(pick(rng))]);
  }
  positions.resize(static_cast<std::size_t>(count));
  return positions;
}

Placement orand_indices(const Mlp& net, double p_p, std::uint64_t seed,
                        PlacementStrategy strategy, std::mt19937_64& rng) {
  if (p_p < 0.0 || p_p > 1.0) throw std::invalid_argument("placement: p_p must be in [0,1]");
  const auto pool = uncertainty_pool(net);
  const int n_p = net.hidden_bias_count();
  const int n_y = net.output_dim();
  const int n_param = round_half_away(p_p * n_p);

  Placement p;
  p.strategy = strategy;
  p.seed = seed;
  for (int pos : sample_without_replacement(n_p, n_param, rng)) {
    p.indices.push_back(pool[static_cast<std::size_t>(pos)]);
  }
  for (int j = 0; j < n_y; ++j) {
    p.indices.push_back(pool[static_cast<std::size_t>(n_p + j)]);
  }
  sort_canonical(p.indices);
  return p;
}

}  // namespace

Placement place_orand(const Mlp& net, double p_p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Placement p = orand_indices(net, p_p, seed, PlacementStrategy::kORand, rng);
  const int n_u = p.num_uncertainties();
  p.template_matrix = Eigen::MatrixXd::Identity(n_u, n_u);
  return p;
}

Placement place_orand_star(const Mlp& net, double p_p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Placement p = orand_indices(net, p_p, seed, PlacementStrategy::kORandStar, rng);
  const int n_u = p.num_uncertainties();
  // Gaussian block drawn from the same generator, after the index sample.
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd q(n_u, n_u);
  for (int r = 0; r < n_u; ++r) {
    for (int c = 0; c < n_u; ++c) q(r, c) = gauss(rng);
  }
  p.template_matrix.resize(n_u, 2 * n_u);
  p.template_matrix << Eigen::MatrixXd::Identity(n_u, n_u), q;
  return p;
}

Placement place_rand(const Mlp& net, double p_p, std::uint64_t seed) {
  if (p_p < 0.0 || p_p > 1.0) throw std::invalid_argument("placement: p_p must be in [0,1]");
  const auto pool = uncertainty_pool(net);
  const int n_p = net.hidden_bias_count();
  const int n_y = net.output_dim();
  const int count = round_half_away(p_p * n_p) + n_y;
  if (count > static_cast<int>(pool.size())) {
    throw std::invalid_argument("place_rand: sample larger than candidate pool");
  }

  std::mt19937_64 rng(seed);
  Placement p;
  p.strategy = PlacementStrategy::kRand;
  p.seed = seed;
  for (int pos : sample_without_replacement(static_cast<int>(pool.size()), count, rng)) {
    p.indices.push_back(pool[static_cast<std::size_t>(pos)]);
  }
  sort_canonical(p.indices);
  p.template_matrix = Eigen::MatrixXd::Identity(count, count);
  return p;
}

Placement place_qr(const Mlp& net, const std::vector<Eigen::VectorXd>& calib_inputs, double p_p) {
  if (calib_inputs.empty()) throw std::invalid_argument("place_qr: empty input set");
  if (p_p < 0.0 || p_p > 1.0) throw std::invalid_argument("placement: p_p must be in [0,1]");

  const auto pool = uncertainty_pool(net);
  const int n_p = net.hidden_bias_count();
  const int n_y = net.output_dim();
  const int n_u = round_half_away(p_p * n_p) + n_y;

  // Column i stacks the sensitivity of every calibration output to candidate
  // uncertainty i.
  Eigen::MatrixXd v(static_cast<int>(calib_inputs.size()) * n_y, static_cast<int>(pool.size()));
  for (std::size_t m = 0; m < calib_inputs.size(); ++m) {
    v.middleRows(static_cast<int>(m) * n_y, n_y) = uncertainty_jacobian(net, calib_inputs[m], pool);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v);
  const auto& perm = qr.colsPermutation().indices();

  std::vector<bool> selected(pool.size(), false);
  Placement p;
  p.strategy = PlacementStrategy::kQr;
  p.seed = 0;
  for (int j = 0; j < n_y; ++j) {
    selected[static_cast<std::size_t>(n_p + j)] = true;
    p.indices.push_back(pool[static_cast<std::size_t>(n_p + j)]);
  }
  for (int k = 0; k < perm.size() && p.num_uncertainties() < n_u; ++k) {
    const int col = perm(k);
    if (selected[static_cast<std::size_t>(col)]) continue;
    selected[static_cast<std::size_t>(col)] = true;
    p.indices.push_back(pool[static_cast<std::size_t>(col)]);
  }
  sort_canonical(p.indices);
  p.template_matrix = Eigen::MatrixXd::Identity(p.num_uncertainties(), p.num_uncertainties());
  return p;
}

void to_json(nlohmann::json& j, const Placement& p) {
  auto indices = nlohmann::json::array();
  for (const auto& idx : p.indices) {
    nlohmann::json ji;
    ji["kind"] = idx.kind == UncertaintyKind::kHiddenBias ? "hidden_bias" : "output";
    if (idx.kind == UncertaintyKind::kHiddenBias) ji["layer"] = idx.layer;
    ji["neuron"] = idx.neuron;
    indices.push_back(std::move(ji));
  }
  auto rows = nlohmann::json::array();
  for (int r = 0; r < p.template_matrix.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (int c = 0; c < p.template_matrix.cols(); ++c) row.push_back(p.template_matrix(r, c));
    rows.push_back(std::move(row));
  }
  j = {{"strategy", placement_strategy_name(p.strategy)},
       {"seed", p.seed},
       {"indices", std::move(indices)},
       {"template", std::move(rows)}};
}

Placement placement_from_json(const nlohmann::json& j) {
  Placement p;
  p.strategy = placement_strategy_from_name(j.at("strategy").get<std::string>());
  p.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& ji : j.at("indices")) {
    UncertaintyIndex idx;
    const std::string kind = ji.at("kind").get<std::string>();
    if (kind == "hidden_bias") {
      idx.kind = UncertaintyKind::kHiddenBias;
      idx.layer = ji.at("layer").get<int>();
    } else if (kind == "output") {
      idx.kind = UncertaintyKind::kOutput;
    } else {
      throw std::invalid_argument("placement_from_json: unknown kind " + kind);
    }
    idx.neuron = ji.at("neuron").get<int>();
    p.indices.push_back(idx);
  }
  const auto& rows = j.at("template");
  const int nr = static_cast<int>(rows.size());
  const int nc = nr > 0 ? static_cast<int>(rows[0].size()) : 0;
  p.template_matrix.resize(nr, nc);
  for (int r = 0; r < nr; ++r) {
    for (int c = 0; c < nc; ++c) p.template_matrix(r, c) = rows[r][c].get<double>();
  }
  return p;
}

}  // namespace zcp
