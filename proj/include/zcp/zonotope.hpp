#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace zcp {

inline constexpr double kContainTol = 1e-6;
inline constexpr std::size_t kVolumeTermCap = 1000000;

/// Centrally symmetric polytope {c + G*lambda : lambda in [-1,1]^nu}.
/// Immutable after construction; zero generators describe the singleton {c}.
class Zonotope {
 public:
  Zonotope(Eigen::VectorXd center, Eigen::MatrixXd generators);

  static Zonotope singleton(Eigen::VectorXd center);

  int dim() const { return static_cast<int>(center_.size()); }
  int num_generators() const { return static_cast<int>(generators_.cols()); }
  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::MatrixXd& generators() const { return generators_; }

 private:
  Eigen::VectorXd center_;
  Eigen::MatrixXd generators_;  // dim x nu
};

/// Sum of absolute values of all generator entries; the center is ignored.
double interval_norm(const Zonotope& z);

Zonotope linear_map(const Eigen::MatrixXd& m, const Zonotope& z);

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b);

/// Axis-aligned interval hull <c, diag(r)> with r_j the absolute sum of row j.
Zonotope box_hull(const Zonotope& z);

/// LP feasibility test for y = c + G*beta with |beta| <= 1; a point within
/// aggregate constraint violation `tol` counts as contained.
bool contains_point(const Zonotope& z, const Eigen::VectorXd& y, double tol = kContainTol);

/// Exact volume 2^n * sum over all n-column subsets of |det|. Returns 0 for
/// fewer generators than dimensions; throws when the number of subsets
/// exceeds term_cap (use projected_volume instead).
double volume(const Zonotope& z, std::size_t term_cap = kVolumeTermCap);

/// Volume of the projection onto the given distinct coordinate indices.
double projected_volume(const Zonotope& z, const std::vector<int>& dims,
                        std::size_t term_cap = kVolumeTermCap);

/// Boundary polygon of a 2-D zonotope in counter-clockwise order.
std::vector<Eigen::Vector2d> vertices_2d(const Zonotope& z);

void to_json(nlohmann::json& j, const Zonotope& z);
Zonotope zonotope_from_json(const nlohmann::json& j);

}  // namespace zcp
