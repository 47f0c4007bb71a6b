#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "zcp/mlp.hpp"

namespace zcp {

enum class PlacementStrategy { kORand, kORandStar, kQr, kRand };

std::string placement_strategy_name(PlacementStrategy s);
PlacementStrategy placement_strategy_from_name(const std::string& name);

/// Which uncertainties are active plus the unscaled generator template.
struct Placement {
  std::vector<UncertaintyIndex> indices;  // length n_u, canonical pool order
  Eigen::MatrixXd template_matrix;        // n_u x nu
  PlacementStrategy strategy = PlacementStrategy::kORand;
  std::uint64_t seed = 0;

  int num_uncertainties() const { return static_cast<int>(indices.size()); }
  int num_generators() const { return static_cast<int>(template_matrix.cols()); }
  bool identity_template() const;
};

/// Round half away from zero; ties at .5 matter for reproducibility.
int round_half_away(double x);

/// All output uncertainties plus a seeded sample of round(p_p * n_p) hidden
/// biases; identity template.
Placement place_orand(const Mlp& net, double p_p, std::uint64_t seed);

/// Indices as place_orand; template [I | Q] with Q a seeded standard-normal
/// n_u x n_u block, so nu = 2 n_u.
Placement place_orand_star(const Mlp& net, double p_p, std::uint64_t seed);

/// Deterministic selection via column-pivoted QR on the stacked per-input
/// uncertainty Jacobians of the full candidate pool; identity template.
Placement place_qr(const Mlp& net, const std::vector<Eigen::VectorXd>& calib_inputs, double p_p);

/// Uniform sample of round(p_p * n_p) + n_y indices from the whole pool
/// (outputs not guaranteed); identity template.
Placement place_rand(const Mlp& net, double p_p, std::uint64_t seed);

void to_json(nlohmann::json& j, const Placement& p);
Placement placement_from_json(const nlohmann::json& j);

}  // namespace zcp
