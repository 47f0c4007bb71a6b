#include "zcp/lp.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>
#include <sstream>
#include <utility>

namespace zcp {

namespace {

constexpr double kPivotTol = 1e-9;

bool all_finite(const Eigen::SparseMatrix<double>& m) {
  for (int k = 0; k < m.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
      if (!std::isfinite(it.value())) return false;
    }
  }
  return true;
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

enum class VarStatus : unsigned char { kAtLower, kAtUpper, kBasic, kFreeNonbasic };

// B^-1 kept either as an explicit dense inverse (small problems) or as a
// sparse LU factorization plus product-form eta updates (large problems).
class BasisBackend {
 public:
  virtual ~BasisBackend() = default;
  virtual bool factorize(const Eigen::SparseMatrix<double>& basis) = 0;
  virtual void ftran(Eigen::VectorXd& v) const = 0;  // v := B^-1 v
  virtual void btran(Eigen::VectorXd& v) const = 0;  // v := B^-T v
  // Column at position `pos` replaced; `spike` = B^-1 (new column).
  virtual bool update(int pos, const Eigen::VectorXd& spike) = 0;
  virtual bool wants_refactor() const = 0;
};

class DenseBasis final : public BasisBackend {
 public:
  bool factorize(const Eigen::SparseMatrix<double>& basis) override {
    const int m = static_cast<int>(basis.rows());
    Eigen::MatrixXd dense = Eigen::MatrixXd(basis);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(dense);
    if (!lu.isInvertible()) return false;
    inv_ = lu.inverse();
    (void)m;
    return true;
  }

  void ftran(Eigen::VectorXd& v) const override { v = inv_ * v; }
  void btran(Eigen::VectorXd& v) const override { v = inv_.transpose() * v; }

  bool update(int pos, const Eigen::VectorXd& spike) override {
    const double piv = spike(pos);
    if (std::abs(piv) < kPivotTol) return false;
    // inv := E * inv with E the elementary column built from the spike.
    const Eigen::RowVectorXd row = inv_.row(pos) / piv;
    for (int i = 0; i < inv_.rows(); ++i) {
      if (i == pos) continue;
      const double w = spike(i);
      if (w != 0.0) inv_.row(i) -= w * row;
    }
    inv_.row(pos) = row;
    return true;
  }

  bool wants_refactor() const override { return false; }

 private:
  Eigen::MatrixXd inv_;
};

class SparseLuBasis final : public BasisBackend {
 public:
  explicit SparseLuBasis(int refactor_interval) : interval_(refactor_interval) {}

  bool factorize(const Eigen::SparseMatrix<double>& basis) override {
    lu_.compute(basis);
    if (lu_.info() != Eigen::Success) return false;
    etas_.clear();
    return true;
  }

  void ftran(Eigen::VectorXd& v) const override {
    v = lu_.solve(v);
    for (const Eta& e : etas_) {
      const double vr = v(e.pos) / e.pivot;
      if (vr != 0.0) {
        for (const auto& [i, w] : e.entries) v(i) -= w * vr;
      }
      v(e.pos) = vr;
    }
  }

  void btran(Eigen::VectorXd& v) const override {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = v(it->pos);
      for (const auto& [i, w] : it->entries) acc -= w * v(i);
      v(it->pos) = acc / it->pivot;
    }
    v = lu_.adjoint().solve(v);
  }

  bool update(int pos, const Eigen::VectorXd& spike) override {
    const double piv = spike(pos);
    if (std::abs(piv) < kPivotTol) return false;
    Eta e;
    e.pos = pos;
    e.pivot = piv;
    for (int i = 0; i < spike.size(); ++i) {
      if (i != pos && spike(i) != 0.0) e.entries.emplace_back(i, spike(i));
    }
    etas_.push_back(std::move(e));
    return true;
  }

  bool wants_refactor() const override {
    return static_cast<int>(etas_.size()) >= interval_;
  }

 private:
  struct Eta {
    int pos = 0;
    double pivot = 1.0;
    std::vector<std::pair<int, double>> entries;
  };
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;  // adjoint() is non-const in Eigen
  std::vector<Eta> etas_;
  int interval_;
};

// Internal working form: min c'x  s.t.  A x + s = b  with bounds on all
// columns. Columns are [structural | logical | artificial].
class SimplexCore {
 public:
  SimplexCore(const LinearProgram& lp, const SolverOptions& opt) : opt_(opt) {
    n_ = lp.num_vars();
    m_ub_ = static_cast<int>(lp.b_ub.size());
    m_ = lp.num_rows();

    // Structural columns stacked [a_ub; a_eq], column-major.
    cols_.resize(m_, n_);
    {
      std::vector<Eigen::Triplet<double>> trips;
      trips.reserve(lp.a_ub.nonZeros() + lp.a_eq.nonZeros());
      for (int k = 0; k < lp.a_ub.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(lp.a_ub, k); it; ++it) {
          trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
      }
      for (int k = 0; k < lp.a_eq.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(lp.a_eq, k); it; ++it) {
          trips.emplace_back(m_ub_ + static_cast<int>(it.row()), static_cast<int>(it.col()),
                             it.value());
        }
      }
      cols_.setFromTriplets(trips.begin(), trips.end());
    }

    b_.resize(m_);
    b_ << lp.b_ub, lp.b_eq;

    // Bounds: structural, then logicals ([0,inf) for <= rows, [0,0] for = rows).
    const int total_fixed = n_ + m_;
    lb_.resize(total_fixed);
    ub_.resize(total_fixed);
    lb_.head(n_) = lp.lo;
    ub_.head(n_) = lp.hi;
    for (int i = 0; i < m_; ++i) {
      lb_(n_ + i) = 0.0;
      ub_(n_ + i) = (i < m_ub_) ? kInf : 0.0;
    }

    cost_.assign(static_cast<size_t>(total_fixed), 0.0);
    for (int j = 0; j < n_; ++j) cost_[j] = lp.c(j);
  }

  LpSolution run() {
    LpSolution sol;
    init_start_point();
    make_backend();
    refactorize();

    // Phase 1: drive the artificial infeasibility to zero.
    if (num_art_ > 0) {
      const bool ok = iterate(/*phase=*/1);
      if (!ok) throw SolverError("simplex: unbounded phase-1 objective (numerical failure)");
      const double infeas = phase1_objective();
      if (infeas > opt_.feas_tol * (1.0 + b_.cwiseAbs().maxCoeff())) {
        sol.status = LpStatus::kInfeasible;
        sol.infeasibility = infeas;
        sol.iterations = iterations_;
        sol.x = structural_x();
        return sol;
      }
      // Pin artificials at zero for phase 2; their values are already within
      // the feasibility tolerance of zero.
      for (int k = 0; k < num_art_; ++k) ub_(n_ + m_ + k) = 0.0;
    }

    const bool bounded = iterate(/*phase=*/2);
    sol.iterations = iterations_;
    if (!bounded) {
      sol.status = LpStatus::kUnbounded;
      sol.x = structural_x();
      return sol;
    }
    sol.status = LpStatus::kOptimal;
    sol.x = structural_x();
    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j) sol.objective += cost_[j] * sol.x(j);
    sol.duals = duals();
    return sol;
  }

 private:
  int total_cols() const { return n_ + m_ + num_art_; }

  double column_dot(int j, const Eigen::VectorXd& y) const {
    if (j < n_) {
      double acc = 0.0;
      for (Eigen::SparseMatrix<double>::InnerIterator it(cols_, j); it; ++it) {
        acc += it.value() * y(it.row());
      }
      return acc;
    }
    if (j < n_ + m_) return y(j - n_);
    const int k = j - n_ - m_;
    return art_sign_[k] * y(art_row_[k]);
  }

  void scatter_column(int j, Eigen::VectorXd& out) const {
    out.setZero();
    if (j < n_) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(cols_, j); it; ++it) {
        out(it.row()) = it.value();
      }
    } else if (j < n_ + m_) {
      out(j - n_) = 1.0;
    } else {
      const int k = j - n_ - m_;
      out(art_row_[k]) = art_sign_[k];
    }
  }

  // Nonbasic start values: finite bound nearest zero, or zero for free.
  static double start_value(double lo, double hi) {
    if (std::isfinite(lo) && std::isfinite(hi)) return std::abs(lo) <= std::abs(hi) ? lo : hi;
    if (std::isfinite(lo)) return lo;
    if (std::isfinite(hi)) return hi;
    return 0.0;
  }

  void init_start_point() {
    xval_ = Eigen::VectorXd::Zero(n_ + m_);
    status_.assign(static_cast<size_t>(n_ + m_), VarStatus::kAtLower);
    for (int j = 0; j < n_; ++j) {
      const double lo = lb_(j), hi = ub_(j);
      if (!std::isfinite(lo) && !std::isfinite(hi)) {
        status_[j] = VarStatus::kFreeNonbasic;
        xval_(j) = 0.0;
      } else {
        const double v = start_value(lo, hi);
        xval_(j) = v;
        status_[j] = (v == lo) ? VarStatus::kAtLower : VarStatus::kAtUpper;
      }
    }

    // Row activities of the nonbasic structural point.
    Eigen::VectorXd act = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < n_; ++j) {
      const double v = xval_(j);
      if (v == 0.0) continue;
      for (Eigen::SparseMatrix<double>::InnerIterator it(cols_, j); it; ++it) {
        act(it.row()) += it.value() * v;
      }
    }

    basis_.clear();
    basis_.reserve(m_);
    art_row_.clear();
    art_sign_.clear();
    std::vector<double> art_val;
    for (int i = 0; i < m_; ++i) {
      const double want = b_(i) - act(i);  // required logical value
      const double llo = lb_(n_ + i), lhi = ub_(n_ + i);
      if (want >= llo - opt_.feas_tol && want <= lhi + opt_.feas_tol) {
        basis_.push_back(n_ + i);
        xval_(n_ + i) = want;
        status_[n_ + i] = VarStatus::kBasic;
      } else {
        const double clamped = std::clamp(want, llo, lhi);
        xval_(n_ + i) = clamped;
        status_[n_ + i] = (clamped == llo) ? VarStatus::kAtLower : VarStatus::kAtUpper;
        const double resid = want - clamped;
        art_row_.push_back(i);
        art_sign_.push_back(resid >= 0.0 ? 1.0 : -1.0);
        art_val.push_back(std::abs(resid));
        basis_.push_back(n_ + m_ + static_cast<int>(art_row_.size()) - 1);
      }
    }
    num_art_ = static_cast<int>(art_row_.size());

    const int total = total_cols();
    Eigen::VectorXd full(total);
    full.head(n_ + m_) = xval_;
    for (int k = 0; k < num_art_; ++k) full(n_ + m_ + k) = art_val[k];
    xval_ = std::move(full);
    status_.resize(static_cast<size_t>(total), VarStatus::kBasic);

    lb_.conservativeResize(total);
    ub_.conservativeResize(total);
    cost_.resize(static_cast<size_t>(total), 0.0);
    for (int k = 0; k < num_art_; ++k) {
      lb_(n_ + m_ + k) = 0.0;
      ub_(n_ + m_ + k) = kInf;
    }

    xbasic_.resize(m_);
    for (int i = 0; i < m_; ++i) xbasic_(i) = xval_(basis_[i]);
    basic_pos_.assign(static_cast<size_t>(total), -1);
    for (int i = 0; i < m_; ++i) basic_pos_[basis_[i]] = i;
  }

  void make_backend() {
    if (m_ <= 256) {
      backend_ = std::make_unique<DenseBasis>();
    } else {
      backend_ = std::make_unique<SparseLuBasis>(opt_.refactor_interval);
    }
  }

  void refactorize() {
    Eigen::SparseMatrix<double> basis(m_, m_);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(m_) * 3);
    Eigen::VectorXd col(m_);
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[i];
      if (j < n_) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(cols_, j); it; ++it) {
          trips.emplace_back(static_cast<int>(it.row()), i, it.value());
        }
      } else if (j < n_ + m_) {
        trips.emplace_back(j - n_, i, 1.0);
      } else {
        const int k = j - n_ - m_;
        trips.emplace_back(art_row_[k], i, art_sign_[k]);
      }
    }
    basis.setFromTriplets(trips.begin(), trips.end());
    if (!backend_->factorize(basis)) {
      throw SolverError("simplex: singular basis during refactorization");
    }
    pivots_since_refactor_ = 0;
    recompute_basic_values();
  }

  void recompute_basic_values() {
    Eigen::VectorXd rhs = b_;
    for (int j = 0; j < total_cols(); ++j) {
      if (status_[j] == VarStatus::kBasic) continue;
      const double v = xval_(j);
      if (v == 0.0) continue;
      if (j < n_) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(cols_, j); it; ++it) {
          rhs(it.row()) -= it.value() * v;
        }
      } else if (j < n_ + m_) {
        rhs(j - n_) -= v;
      } else {
        const int k = j - n_ - m_;
        rhs(art_row_[k]) -= art_sign_[k] * v;
      }
    }
    backend_->ftran(rhs);
    xbasic_ = rhs;
    for (int i = 0; i < m_; ++i) xval_(basis_[i]) = xbasic_(i);
  }

  double phase_cost(int j, int phase) const {
    if (phase == 1) return (j >= n_ + m_) ? 1.0 : 0.0;
    return cost_[j];
  }

  double phase1_objective() const {
    double acc = 0.0;
    for (int k = 0; k < num_art_; ++k) acc += xval_(n_ + m_ + k);
    return acc;
  }

  double current_objective(int phase) const {
    double acc = 0.0;
    for (int j = 0; j < total_cols(); ++j) {
      const double cj = phase_cost(j, phase);
      if (cj != 0.0) acc += cj * xval_(j);
    }
    return acc;
  }

  Eigen::VectorXd duals_for_phase(int phase) const {
    Eigen::VectorXd y(m_);
    for (int i = 0; i < m_; ++i) y(i) = phase_cost(basis_[i], phase);
    backend_->btran(y);
    return y;
  }

  Eigen::VectorXd duals() const { return duals_for_phase(2); }

  Eigen::VectorXd structural_x() const {
    Eigen::VectorXd x(n_);
    for (int j = 0; j < n_; ++j) x(j) = xval_(j);
    return x;
  }

  // Returns false on unboundedness; true at optimality of the phase.
  bool iterate(int phase) {
    bool bland = false;
    int stall = 0;
    double last_obj = current_objective(phase);
    Eigen::VectorXd y(m_), spike(m_);

    for (;;) {
      if (++iterations_ > opt_.max_iterations) {
        throw SolverError("simplex: iteration cap exceeded after " +
                          std::to_string(iterations_ - 1) + " iterations");
      }
      if (backend_->wants_refactor() ||
          pivots_since_refactor_ >= 10 * opt_.refactor_interval) {
        refactorize();
      }

      y = duals_for_phase(phase);

      // Pricing.
      int enter = -1;
      double best = 0.0;
      int direction = +1;
      for (int j = 0; j < total_cols(); ++j) {
        const VarStatus st = status_[j];
        if (st == VarStatus::kBasic) continue;
        if (lb_(j) == ub_(j)) continue;  // fixed
        const double d = phase_cost(j, phase) - column_dot(j, y);
        double score = 0.0;
        int dir = 0;
        if (st == VarStatus::kAtLower && d < -opt_.opt_tol) {
          score = -d;
          dir = +1;
        } else if (st == VarStatus::kAtUpper && d > opt_.opt_tol) {
          score = d;
          dir = -1;
        } else if (st == VarStatus::kFreeNonbasic && std::abs(d) > opt_.opt_tol) {
          score = std::abs(d);
          dir = d < 0.0 ? +1 : -1;
        } else {
          continue;
        }
        if (bland) {
          enter = j;
          direction = dir;
          best = score;
          break;
        }
        if (score > best) {
          best = score;
          enter = j;
          direction = dir;
        }
      }
      if (enter < 0) return true;  // phase optimal

      scatter_column(enter, spike);
      backend_->ftran(spike);

      // Ratio test: entering moves by theta * direction.
      const double own_range = ub_(enter) - lb_(enter);
      double theta = std::isfinite(own_range) ? own_range : kInf;
      int leave_pos = -1;
      double leave_bound = 0.0;
      // First pass: minimum ratio.
      for (int i = 0; i < m_; ++i) {
        const double w = direction * spike(i);
        if (w > kPivotTol) {
          const double lo = lb_(basis_[i]);
          if (!std::isfinite(lo)) continue;
          const double t = std::max(0.0, (xbasic_(i) - lo) / w);
          if (t < theta - 1e-12) {
            theta = t;
            leave_pos = i;
            leave_bound = lo;
          }
        } else if (w < -kPivotTol) {
          const double hi = ub_(basis_[i]);
          if (!std::isfinite(hi)) continue;
          const double t = std::max(0.0, (xbasic_(i) - hi) / w);
          if (t < theta - 1e-12) {
            theta = t;
            leave_pos = i;
            leave_bound = hi;
          }
        }
      }
      // Second pass: among near-ties prefer the largest pivot (or the lowest
      // index under Bland's rule) for stability.
      if (leave_pos >= 0) {
        const double window = theta + 1e-9 * (1.0 + theta);
        double best_piv = std::abs(spike(leave_pos));
        int best_idx = basis_[leave_pos];
        for (int i = 0; i < m_; ++i) {
          const double w = direction * spike(i);
          double t, bound;
          if (w > kPivotTol) {
            const double lo = lb_(basis_[i]);
            if (!std::isfinite(lo)) continue;
            t = std::max(0.0, (xbasic_(i) - lo) / w);
            bound = lo;
          } else if (w < -kPivotTol) {
            const double hi = ub_(basis_[i]);
            if (!std::isfinite(hi)) continue;
            t = std::max(0.0, (xbasic_(i) - hi) / w);
            bound = hi;
          } else {
            continue;
          }
          if (t > window) continue;
          if (bland) {
            if (basis_[i] < best_idx) {
              best_idx = basis_[i];
              leave_pos = i;
              leave_bound = bound;
              theta = std::min(theta, t);
            }
          } else if (std::abs(spike(i)) > best_piv) {
            best_piv = std::abs(spike(i));
            leave_pos = i;
            leave_bound = bound;
            theta = std::min(theta, t);
          }
        }
      }

      if (!std::isfinite(theta)) {
        return false;  // unbounded direction
      }

      const double delta = direction * theta;
      if (leave_pos < 0) {
        // Bound flip: entering jumps to its opposite bound.
        xval_(enter) += delta;
        status_[enter] =
            (status_[enter] == VarStatus::kAtLower) ? VarStatus::kAtUpper : VarStatus::kAtLower;
        for (int i = 0; i < m_; ++i) {
          xbasic_(i) -= delta * spike(i);
          xval_(basis_[i]) = xbasic_(i);
        }
      } else {
        const int leave = basis_[leave_pos];
        if (!backend_->update(leave_pos, spike)) {
          refactorize();
          continue;  // re-price after a failed (too small) pivot
        }
        for (int i = 0; i < m_; ++i) {
          xbasic_(i) -= delta * spike(i);
        }
        // Leaving variable parks exactly on the bound it hit.
        xval_(leave) = leave_bound;
        status_[leave] = (leave_bound == lb_(leave)) ? VarStatus::kAtLower : VarStatus::kAtUpper;
        basic_pos_[leave] = -1;
        // Entering variable becomes basic.
        xval_(enter) += delta;
        basis_[leave_pos] = enter;
        basic_pos_[enter] = leave_pos;
        status_[enter] = VarStatus::kBasic;
        xbasic_(leave_pos) = xval_(enter);
        for (int i = 0; i < m_; ++i) xval_(basis_[i]) = xbasic_(i);
        ++pivots_since_refactor_;
      }

      // Stall detection drives the Bland's-rule fallback.
      const double now = current_objective(phase);
      if (now < last_obj - 1e-12 * (1.0 + std::abs(last_obj))) {
        stall = 0;
        bland = false;
      } else if (++stall >= opt_.stall_limit) {
        bland = true;
      }
      last_obj = now;
    }
  }

  SolverOptions opt_;
  int n_ = 0, m_ = 0, m_ub_ = 0, num_art_ = 0;
  Eigen::SparseMatrix<double> cols_;
  Eigen::VectorXd b_, lb_, ub_, xval_, xbasic_;
  std::vector<double> cost_;
  std::vector<VarStatus> status_;
  std::vector<int> basis_, basic_pos_, art_row_;
  std::vector<double> art_sign_;
  std::unique_ptr<BasisBackend> backend_;
  long iterations_ = 0;
  int pivots_since_refactor_ = 0;
};

}  // namespace

void LinearProgram::validate() const {
  const int n = num_vars();
  if (lo.size() != n || hi.size() != n) {
    throw std::invalid_argument("LinearProgram: bound vectors must match variable count");
  }
  if (a_ub.rows() != b_ub.size() || (a_ub.rows() > 0 && a_ub.cols() != n)) {
    throw std::invalid_argument("LinearProgram: inconsistent inequality block");
  }
  if (a_eq.rows() != b_eq.size() || (a_eq.rows() > 0 && a_eq.cols() != n)) {
    throw std::invalid_argument("LinearProgram: inconsistent equality block");
  }
  if (!all_finite(c) || !all_finite(b_ub) || !all_finite(b_eq) || !all_finite(a_ub) ||
      !all_finite(a_eq)) {
    throw std::invalid_argument("LinearProgram: non-finite entries");
  }
  for (int j = 0; j < n; ++j) {
    if (std::isnan(lo(j)) || std::isnan(hi(j)) || lo(j) > hi(j)) {
      throw std::invalid_argument("LinearProgram: invalid bounds on variable " +
                                  std::to_string(j));
    }
  }
}

LpSolution SimplexSolver::solve(const LinearProgram& lp) {
  lp.validate();
  SimplexCore core(lp, options_);
  return core.run();
}

LpSolution solve_lp(const LinearProgram& lp, const SolverOptions& options) {
  SimplexSolver solver(options);
  return solver.solve(lp);
}

namespace {

struct BnbNode {
  double bound = -kInf;
  long id = 0;
  std::vector<std::pair<int, int>> fixings;  // (variable, 0 or 1)
};

struct NodeOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;
  }
};

}  // namespace

LpSolution solve_milp(const MilpProgram& milp, const SolverOptions& options) {
  milp.lp.validate();
  const int n = milp.lp.num_vars();
  for (int j : milp.binary) {
    if (j < 0 || j >= n) throw std::invalid_argument("MilpProgram: binary index out of range");
  }

  LinearProgram relax = milp.lp;
  for (int j : milp.binary) {
    relax.lo(j) = std::max(relax.lo(j), 0.0);
    relax.hi(j) = std::min(relax.hi(j), 1.0);
  }

  SimplexSolver solver(options);
  std::priority_queue<BnbNode, std::vector<BnbNode>, NodeOrder> open;
  long next_id = 0;
  long nodes = 0;
  bool have_incumbent = false;
  bool capped = false;
  LpSolution incumbent;

  const auto relaxation = [&](const std::vector<std::pair<int, int>>& fixings) {
    LinearProgram node_lp = relax;
    for (const auto& [j, v] : fixings) {
      node_lp.lo(j) = node_lp.hi(j) = static_cast<double>(v);
    }
    return solver.solve(node_lp);
  };

  LpSolution root = relaxation({});
  if (root.status == LpStatus::kInfeasible) return root;
  if (root.status == LpStatus::kUnbounded) return root;
  open.push(BnbNode{root.objective, next_id++, {}});

  const auto most_fractional = [&](const Eigen::VectorXd& x) {
    int best = -1;
    double best_frac = options.int_tol;
    for (int j : milp.binary) {
      const double f = x(j) - std::floor(x(j));
      const double dist = std::min(f, 1.0 - f);
      if (dist > best_frac) {
        best_frac = dist;
        best = j;
      }
    }
    return best;
  };

  while (!open.empty()) {
    if (nodes >= options.node_cap) {
      capped = true;
      break;
    }
    BnbNode node = open.top();
    open.pop();
    if (have_incumbent && node.bound >= incumbent.objective - 1e-12) continue;
    ++nodes;

    LpSolution sol = (nodes == 1 && node.fixings.empty()) ? root : relaxation(node.fixings);
    if (sol.status != LpStatus::kOptimal) continue;
    if (have_incumbent && sol.objective >= incumbent.objective - 1e-12) continue;

    const int branch_var = most_fractional(sol.x);
    if (branch_var < 0) {
      incumbent = sol;
      have_incumbent = true;
      continue;
    }
    for (int v : {0, 1}) {
      BnbNode child;
      child.bound = sol.objective;
      child.id = next_id++;
      child.fixings = node.fixings;
      child.fixings.emplace_back(branch_var, v);
      open.push(child);
    }
  }

  if (!have_incumbent) {
    if (capped) {
      throw SolverError("solve_milp: node cap (" + std::to_string(options.node_cap) +
                        ") exhausted without an incumbent");
    }
    LpSolution sol;
    sol.status = LpStatus::kInfeasible;
    sol.nodes = nodes;
    return sol;
  }
  incumbent.nodes = nodes;
  incumbent.proven_optimal = !capped || open.empty();
  if (capped && !open.empty()) {
    // Remaining nodes could still beat the incumbent only if their bounds do.
    incumbent.proven_optimal = open.top().bound >= incumbent.objective - 1e-12;
  }
  return incumbent;
}

std::string dump_lp(const LinearProgram& lp) {
  std::ostringstream os;
  os << "minimize\n ";
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (lp.c(j) != 0.0) os << " " << (lp.c(j) >= 0 ? "+" : "") << lp.c(j) << " x" << j;
  }
  os << "\nsubject to\n";
  const auto print_rows = [&](const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                              const char* rel) {
    Eigen::SparseMatrix<double, Eigen::RowMajor> rows(a);
    for (int i = 0; i < rows.rows(); ++i) {
      os << " ";
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, i); it; ++it) {
        os << " " << (it.value() >= 0 ? "+" : "") << it.value() << " x" << it.col();
      }
      os << " " << rel << " " << b(i) << "\n";
    }
  };
  print_rows(lp.a_ub, lp.b_ub, "<=");
  print_rows(lp.a_eq, lp.b_eq, "=");
  os << "bounds\n";
  for (int j = 0; j < lp.num_vars(); ++j) {
    os << " " << lp.lo(j) << " <= x" << j << " <= " << lp.hi(j) << "\n";
  }
  return os.str();
}

}  // namespace zcp
