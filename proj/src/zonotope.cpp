#include "zcp/zonotope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>
#include "zcp/lp.hpp"

namespace zcp {

Zonotope::Zonotope(Eigen::VectorXd center, Eigen::MatrixXd generators)
    : center_(std::move(center)), generators_(std::move(generators)) {
  if (generators_.size() == 0 && generators_.rows() != center_.size()) {
    generators_.resize(center_.size(), 0);
  }
  if (generators_.rows() != center_.size()) {
    throw std::invalid_argument("Zonotope: center length must equal generator row count");
  }
  if (!center_.allFinite() || !generators_.allFinite()) {
    throw std::invalid_argument("Zonotope: non-finite entries");
  }
}

Zonotope Zonotope::singleton(Eigen::VectorXd center) {
  const auto n = center.size();
  return Zonotope(std::move(center), Eigen::MatrixXd::Zero(n, 0));
}

double interval_norm(const Zonotope& z) { return z.generators().cwiseAbs().sum(); }

Zonotope linear_map(const Eigen::MatrixXd& m, const Zonotope& z) {
  if (m.cols() != z.dim()) {
    throw std::invalid_argument("linear_map: matrix columns must equal zonotope dimension");
  }
  return Zonotope(m * z.center(), m * z.generators());
}

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("minkowski_sum: dimension mismatch");
  }
  Eigen::MatrixXd g(a.dim(), a.num_generators() + b.num_generators());
  g << a.generators(), b.generators();
  return Zonotope(a.center() + b.center(), std::move(g));
}

Zonotope box_hull(const Zonotope& z) {
  const Eigen::VectorXd radii = z.generators().cwiseAbs().rowwise().sum();
  return Zonotope(z.center(), Eigen::MatrixXd(radii.asDiagonal()));
}

bool contains_point(const Zonotope& z, const Eigen::VectorXd& y, double tol) {
  if (y.size() != z.dim()) {
    throw std::invalid_argument("contains_point: dimension mismatch");
  }
  const int nu = z.num_generators();
  if (nu == 0) return (y - z.center()).cwiseAbs().sum() <= tol;

  LinearProgram lp;
  lp.c = Eigen::VectorXd::Zero(nu);
  lp.a_eq = z.generators().sparseView();
  lp.b_eq = y - z.center();
  lp.a_ub.resize(0, nu);
  lp.b_ub.resize(0);
  lp.lo = Eigen::VectorXd::Constant(nu, -1.0);
  lp.hi = Eigen::VectorXd::Constant(nu, 1.0);

  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kOptimal) return true;
  return sol.status == LpStatus::kInfeasible && sol.infeasibility <= tol;
}

namespace {

// Number of n-subsets of nu columns, saturating at cap+1.
std::size_t subset_count(int nu, int n, std::size_t cap) {
  double acc = 1.0;
  for (int i = 0; i < n; ++i) acc = acc * static_cast<double>(nu - i) / static_cast<double>(i + 1);
  if (acc > static_cast<double>(cap)) return cap + 1;
  return static_cast<std::size_t>(std::llround(acc));
}

double det_of_columns(const Eigen::MatrixXd& g, const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  if (n == 1) return g(0, idx[0]);
  if (n == 2) {
    return g(0, idx[0]) * g(1, idx[1]) - g(0, idx[1]) * g(1, idx[0]);
  }
  if (n == 3) {
    const auto& a = idx;
    return g(0, a[0]) * (g(1, a[1]) * g(2, a[2]) - g(1, a[2]) * g(2, a[1])) -
           g(0, a[1]) * (g(1, a[0]) * g(2, a[2]) - g(1, a[2]) * g(2, a[0])) +
           g(0, a[2]) * (g(1, a[0]) * g(2, a[1]) - g(1, a[1]) * g(2, a[0]));
  }
  Eigen::MatrixXd sub(n, n);
  for (int k = 0; k < n; ++k) sub.col(k) = g.col(idx[k]);
  return sub.determinant();
}

}  // namespace

double volume(const Zonotope& z, std::size_t term_cap) {
  const int n = z.dim();
  const int nu = z.num_generators();
  if (nu < n) return 0.0;
  if (subset_count(nu, n, term_cap) > term_cap) {
    throw std::invalid_argument(
        "volume: number of column subsets exceeds the term cap; use projected_volume over "
        "dimension blocks instead");
  }

  const Eigen::MatrixXd& g = z.generators();
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  double acc = 0.0;
  for (;;) {
    acc += std::abs(det_of_columns(g, idx));
    // Next lexicographic combination.
    int k = n - 1;
    while (k >= 0 && idx[k] == nu - n + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int i = k + 1; i < n; ++i) idx[i] = idx[i - 1] + 1;
  }
  return std::ldexp(acc, n);  // 2^n * sum
}

double projected_volume(const Zonotope& z, const std::vector<int>& dims, std::size_t term_cap) {
  if (dims.empty()) throw std::invalid_argument("projected_volume: empty index set");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 0 || dims[i] >= z.dim()) {
      throw std::invalid_argument("projected_volume: index out of range");
    }
    for (std::size_t k = i + 1; k < dims.size(); ++k) {
      if (dims[i] == dims[k]) throw std::invalid_argument("projected_volume: repeated index");
    }
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<int>(dims.size()), z.dim());
  for (std::size_t i = 0; i < dims.size(); ++i) p(static_cast<int>(i), dims[i]) = 1.0;
  return volume(linear_map(p, z), term_cap);
}

std::vector<Eigen::Vector2d> vertices_2d(const Zonotope& z) {
  if (z.dim() != 2) throw std::invalid_argument("vertices_2d: zonotope must be 2-D");

  // Flip generators into the upper half plane and sort by angle; the boundary
  // is then walked from the lowest vertex, adding 2*g_i per edge. Central
  // symmetry supplies the second half.
  std::vector<Eigen::Vector2d> gens;
  gens.reserve(static_cast<std::size_t>(z.num_generators()));
  for (int i = 0; i < z.num_generators(); ++i) {
    Eigen::Vector2d g = z.generators().col(i);
    if (g.norm() == 0.0) continue;
    if (g.y() < 0.0 || (g.y() == 0.0 && g.x() < 0.0)) g = -g;
    gens.push_back(g);
  }
  if (gens.empty()) return {z.center()};
  std::sort(gens.begin(), gens.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return std::atan2(a.y(), a.x()) < std::atan2(b.y(), b.x());
  });

  Eigen::Vector2d low = z.center();
  for (const auto& g : gens) low -= g;

  std::vector<Eigen::Vector2d> verts;
  verts.reserve(2 * gens.size());
  Eigen::Vector2d v = low;
  verts.push_back(v);
  for (std::size_t i = 0; i + 1 < gens.size(); ++i) {
    v += 2.0 * gens[i];
    verts.push_back(v);
  }
  const std::size_t half = verts.size();
  const Eigen::Vector2d twice_center = 2.0 * z.center();
  for (std::size_t i = 0; i < half; ++i) {
    verts.push_back(twice_center - verts[i]);
  }
  return verts;
}

void to_json(nlohmann::json& j, const Zonotope& z) {
  j = nlohmann::json::object();
  j["center"] = std::vector<double>(z.center().begin(), z.center().end());
  auto rows = nlohmann::json::array();
  for (int r = 0; r < z.dim(); ++r) {
    auto row = nlohmann::json::array();
    for (int c = 0; c < z.num_generators(); ++c) row.push_back(z.generators()(r, c));
    rows.push_back(std::move(row));
  }
  j["generators"] = std::move(rows);
}

Zonotope zonotope_from_json(const nlohmann::json& j) {
  const auto& jc = j.at("center");
  Eigen::VectorXd c(jc.size());
  for (std::size_t i = 0; i < jc.size(); ++i) c(static_cast<int>(i)) = jc[i].get<double>();
  const auto& jg = j.at("generators");
  const int n = static_cast<int>(jg.size());
  const int nu = n > 0 ? static_cast<int>(jg[0].size()) : 0;
  Eigen::MatrixXd g(n, nu);
  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(jg[r].size()) != nu) {
      throw std::invalid_argument("zonotope_from_json: ragged generator rows");
    }
    for (int k = 0; k < nu; ++k) g(r, k) = jg[r][k].get<double>();
  }
  if (n == 0) g.resize(c.size(), 0);
  return Zonotope(std::move(c), std::move(g));
}

}  // namespace zcp
