#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "qprelax/conic.hpp"
#include "qprelax/errors.hpp"

namespace qpr {

namespace {

// Dense two-phase tableau simplex on the standard form
//   min c'v  s.t.  A v = b, v >= 0,
// with free IR variables split v = v+ - v- and one slack per inequality.
// Dantzig pricing with a Bland fallback; the final basis is re-solved
// against the original data to remove tableau drift.
class Simplex {
 public:
  Simplex(const ConicProgram& prog, const SolveOptions& opts)
      : prog_(prog), opts_(opts) {}

  SolveResult run() {
    build_standard_form();
    SolveResult out;

    Phase1Outcome ph1 = phase1();
    if (ph1 == Phase1Outcome::Infeasible) {
      out.status = SolveStatus::Infeasible;
      out.objective = ExtReal::pos_inf();
      fill_farkas(out);
      return out;
    }
    if (ph1 == Phase1Outcome::Stalled) {
      out.status = SolveStatus::NumericalFailure;
      return out;
    }

    Phase2Outcome ph2 = phase2();
    out.iterations = iters_;
    if (ph2 == Phase2Outcome::Unbounded) {
      out.status = SolveStatus::Unbounded;
      out.objective = ExtReal::neg_inf();
      fill_ray(out);
      return out;
    }
    if (ph2 == Phase2Outcome::Stalled) {
      out.status = SolveStatus::NumericalFailure;
      return out;
    }
    finalize_optimal(out);
    return out;
  }

 private:
  enum class Phase1Outcome { Feasible, Infeasible, Stalled };
  enum class Phase2Outcome { Optimal, Unbounded, Stalled };

  void build_standard_form() {
    nv_ = prog_.num_vars();
    neq_ = static_cast<int>(prog_.eqs().size());
    nin_ = static_cast<int>(prog_.ineqs().size());
    rows_ = neq_ + nin_;
    nstruct_ = 2 * nv_ + nin_;
    ncols_ = nstruct_ + rows_;  // artificials appended

    A_ = Eigen::MatrixXd::Zero(rows_, nstruct_);
    b_ = Eigen::VectorXd::Zero(rows_);
    flip_ = Eigen::VectorXd::Ones(rows_);
    cost_ = Eigen::VectorXd::Zero(nstruct_);

    for (const auto& [j, a] : prog_.objective.terms) {
      cost_[2 * j] += a;
      cost_[2 * j + 1] -= a;
    }
    int r = 0;
    for (const auto& con : prog_.eqs()) {
      for (const auto& [j, a] : con.expr.terms) {
        A_(r, 2 * j) += a;
        A_(r, 2 * j + 1) -= a;
      }
      b_[r] = con.rhs;
      ++r;
    }
    int slack = 2 * nv_;
    for (const auto& con : prog_.ineqs()) {
      for (const auto& [j, a] : con.expr.terms) {
        A_(r, 2 * j) += a;
        A_(r, 2 * j + 1) -= a;
      }
      A_(r, slack++) = 1.0;
      b_[r] = con.rhs;
      ++r;
    }
    for (int i = 0; i < rows_; ++i) {
      if (b_[i] < 0) {
        A_.row(i) = -A_.row(i);
        b_[i] = -b_[i];
        flip_[i] = -1.0;
      }
    }

    // Tableau: [B^{-1}A | B^{-1}b] plus a maintained reduced-cost row.
    T_ = Eigen::MatrixXd::Zero(rows_ + 1, ncols_ + 1);
    T_.block(0, 0, rows_, nstruct_) = A_;
    T_.block(0, nstruct_, rows_, rows_) = Eigen::MatrixXd::Identity(rows_, rows_);
    T_.block(0, ncols_, rows_, 1) = b_;
    basis_.resize(rows_);
    for (int i = 0; i < rows_; ++i) basis_[i] = nstruct_ + i;
    row_alive_.assign(rows_, true);
  }

  // Reduced-cost row for the current phase and basis: d = c - c_B' B^{-1}A.
  void rebuild_costrow(bool phase1) {
    T_.row(rows_).setZero();
    if (phase1) {
      for (int j = nstruct_; j < ncols_; ++j) T_(rows_, j) = 1.0;
    } else {
      for (int j = 0; j < nstruct_; ++j) T_(rows_, j) = cost_[j];
    }
    for (int i = 0; i < rows_; ++i) {
      if (!row_alive_[i]) continue;
      const int bj = basis_[i];
      const double cb = phase1 ? (bj >= nstruct_ ? 1.0 : 0.0)
                               : (bj < nstruct_ ? cost_[bj] : 0.0);
      if (cb != 0.0) T_.row(rows_).head(ncols_ + 1) -= cb * T_.row(i).head(ncols_ + 1);
    }
  }

  // Recomputes the tableau from the original data and the current basis
  // (full-tableau drift control). Returns false on a singular basis or a
  // basic solution that lost feasibility.
  bool reinvert(bool phase1) {
    std::vector<int> alive;
    for (int i = 0; i < rows_; ++i)
      if (row_alive_[i]) alive.push_back(i);
    const int k = static_cast<int>(alive.size());
    if (k > 0) {
      Eigen::MatrixXd B(k, k);
      for (int c = 0; c < k; ++c) {
        const int bj = basis_[alive[c]];
        for (int r = 0; r < k; ++r)
          B(r, c) = bj < nstruct_ ? A_(alive[r], bj)
                                  : (alive[r] == bj - nstruct_ ? 1.0 : 0.0);
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
      Eigen::MatrixXd rhs(k, ncols_ + 1);
      for (int r = 0; r < k; ++r) {
        rhs.block(r, 0, 1, nstruct_) = A_.row(alive[r]);
        for (int j = 0; j < rows_; ++j) rhs(r, nstruct_ + j) = alive[r] == j ? 1.0 : 0.0;
        rhs(r, ncols_) = b_[alive[r]];
      }
      Eigen::MatrixXd fresh = lu.solve(rhs);
      if (!fresh.allFinite()) return false;
      if ((B * fresh - rhs).cwiseAbs().maxCoeff() >
          1e-6 * (1.0 + rhs.cwiseAbs().maxCoeff()))
        return false;
      double minbasic = 0.0;
      for (int r = 0; r < k; ++r) minbasic = std::min(minbasic, fresh(r, ncols_));
      if (minbasic < -1e-7 * (1.0 + b_.lpNorm<Eigen::Infinity>())) return false;
      for (int r = 0; r < k; ++r) {
        T_.row(alive[r]).head(ncols_ + 1) = fresh.row(r);
        if (T_(alive[r], ncols_) < 0.0) T_(alive[r], ncols_) = 0.0;
      }
    }
    rebuild_costrow(phase1);
    return true;
  }

  void pivot(int row, int col) {
    T_.row(row).head(ncols_ + 1) /= T_(row, col);
    for (int i = 0; i <= rows_; ++i) {
      if (i == row) continue;
      const double f = T_(i, col);
      if (f != 0.0) T_.row(i).head(ncols_ + 1) -= f * T_.row(row).head(ncols_ + 1);
    }
    basis_[row] = col;
    ++iters_;
  }

  // Entering column with negative reduced cost; -1 when none. Artificial
  // columns never enter; in phase 2 bland_ switches selection rules.
  int choose_entering(bool allow_artificials) {
    const int limit = allow_artificials ? ncols_ : nstruct_;
    const double tol = entering_tol_;
    if (bland_) {
      for (int j = 0; j < limit; ++j)
        if (T_(rows_, j) < -tol) return j;
      return -1;
    }
    int best = -1;
    double bestval = -tol;
    for (int j = 0; j < limit; ++j) {
      if (T_(rows_, j) < bestval) {
        bestval = T_(rows_, j);
        best = j;
      }
    }
    return best;
  }

  // Two-pass ratio test: find the minimum ratio, then take the largest
  // pivot among the near-minimal rows (smallest basis index under Bland).
  int ratio_test(int col) const {
    double theta = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rows_; ++i) {
      if (!row_alive_[i]) continue;
      const double a = T_(i, col);
      if (a <= pivot_tol_) continue;
      theta = std::min(theta, std::max(T_(i, ncols_), 0.0) / a);
    }
    if (!std::isfinite(theta)) return -1;
    const double slack = 1e-9 * (1.0 + theta);
    int row = -1;
    double bestpiv = 0.0;
    for (int i = 0; i < rows_; ++i) {
      if (!row_alive_[i]) continue;
      const double a = T_(i, col);
      if (a <= pivot_tol_) continue;
      if (std::max(T_(i, ncols_), 0.0) / a > theta + slack) continue;
      if (bland_) {
        if (row < 0 || basis_[i] < basis_[row]) row = i;
      } else if (a > bestpiv) {
        bestpiv = a;
        row = i;
      }
    }
    return row;
  }

  bool iterate(bool phase1, bool* unbounded) {
    *unbounded = false;
    const int bland_after = iters_ + 2000 + 4 * (ncols_ + rows_);
    int since_reinvert = 0;
    while (true) {
      if (iters_ > max_iters_) return false;
      if (iters_ > bland_after) bland_ = true;
      if (since_reinvert >= 200) {
        if (!reinvert(phase1)) return false;
        since_reinvert = 0;
      }
      const int col = choose_entering(false);
      if (col < 0) return true;
      const int row = ratio_test(col);
      if (row < 0) {
        *unbounded = true;
        enter_col_ = col;
        return true;
      }
      pivot(row, col);
      ++since_reinvert;
    }
  }

  Phase1Outcome phase1() {
    if (rows_ == 0) return Phase1Outcome::Feasible;
    rebuild_costrow(true);
    bool unbounded = false;
    if (!iterate(true, &unbounded) || unbounded) return Phase1Outcome::Stalled;
    if (!reinvert(true)) return Phase1Outcome::Stalled;
    const double p1obj = -T_(rows_, ncols_);
    const double scale = 1.0 + b_.lpNorm<Eigen::Infinity>();
    if (p1obj > 1e-7 * scale) return Phase1Outcome::Infeasible;

    // Drive basic artificials out; a row with no real pivot is redundant.
    for (int i = 0; i < rows_; ++i) {
      if (!row_alive_[i] || basis_[i] < nstruct_) continue;
      int piv = -1;
      double best = 0.0;
      for (int j = 0; j < nstruct_; ++j) {
        if (std::abs(T_(i, j)) > std::max(1e-7, best)) {
          piv = j;
          best = std::abs(T_(i, j));
        }
      }
      if (piv >= 0)
        pivot(i, piv);
      else
        row_alive_[i] = false;
    }
    return Phase1Outcome::Feasible;
  }

  Phase2Outcome phase2() {
    rebuild_costrow(false);
    bland_ = false;
    // Each round ends with a reinversion; termination and certificates are
    // only accepted against a freshly rebuilt tableau.
    for (int round = 0; round < 50; ++round) {
      bool unbounded = false;
      if (!iterate(false, &unbounded)) return Phase2Outcome::Stalled;
      if (!reinvert(false)) return Phase2Outcome::Stalled;
      const int col = choose_entering(false);
      if (col < 0) return Phase2Outcome::Optimal;
      if (unbounded) {
        enter_col_ = col;
        if (ratio_test(col) < 0) return Phase2Outcome::Unbounded;
      }
    }
    return Phase2Outcome::Stalled;
  }

  Eigen::VectorXd standard_point() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(ncols_);
    for (int i = 0; i < rows_; ++i)
      if (row_alive_[i]) v[basis_[i]] = T_(i, ncols_);
    return v;
  }

  Eigen::VectorXd to_ir_space(const Eigen::VectorXd& std_v) const {
    Eigen::VectorXd v(nv_);
    for (int j = 0; j < nv_; ++j) v[j] = std_v[2 * j] - std_v[2 * j + 1];
    return v;
  }

  // Re-solve the final basis against the original data: basic values,
  // duals and objective free of accumulated pivot error.
  void finalize_optimal(SolveResult& out) {
    std::vector<int> alive;
    for (int i = 0; i < rows_; ++i)
      if (row_alive_[i]) alive.push_back(i);
    const int k = static_cast<int>(alive.size());

    Eigen::VectorXd xstd = standard_point();
    Eigen::VectorXd y_rows = Eigen::VectorXd::Zero(rows_);
    if (k > 0) {
      Eigen::MatrixXd B(k, k);
      Eigen::VectorXd cb(k), bb(k);
      for (int r = 0; r < k; ++r) {
        const int bj = basis_[alive[r]];
        for (int q = 0; q < k; ++q)
          B(q, r) = bj < nstruct_ ? A_(alive[q], bj) : (alive[q] == alive[r] ? 1.0 : 0.0);
        cb[r] = bj < nstruct_ ? cost_[bj] : 0.0;
        bb[r] = b_[alive[r]];
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
      Eigen::VectorXd xb = lu.solve(bb);
      Eigen::VectorXd y = lu.transpose().solve(cb);
      if ((B * xb - bb).cwiseAbs().maxCoeff() < 1e-6) {
        xstd.setZero();
        for (int r = 0; r < k; ++r) xstd[basis_[alive[r]]] = xb[r];
        for (int r = 0; r < k; ++r) y_rows[alive[r]] = y[r];
      } else {
        // Keep tableau values; recover duals from the cost row instead.
        for (int i = 0; i < rows_; ++i) y_rows[i] = -T_(rows_, nstruct_ + i);
      }
    }

    out.status = SolveStatus::Optimal;
    out.primal = to_ir_space(xstd);
    const double obj = prog_.objective.eval(out.primal) + prog_.objective_constant;
    out.objective = ExtReal::finite(obj);

    // Exposed multipliers: grad + A_eq'y + A_in'z = 0 with z >= 0.
    out.eq_duals.resize(neq_);
    out.ineq_duals.resize(nin_);
    for (int i = 0; i < neq_; ++i) out.eq_duals[i] = -y_rows[i] * flip_[i];
    for (int i = 0; i < nin_; ++i) {
      double z = -y_rows[neq_ + i] * flip_[neq_ + i];
      out.ineq_duals[i] = std::max(0.0, z);
    }

    out.residuals.primal_feas = prog_.max_violation(out.primal);
    double dual_obj = 0.0;
    for (int i = 0; i < neq_; ++i) dual_obj -= out.eq_duals[i] * prog_.eqs()[i].rhs;
    for (int i = 0; i < nin_; ++i) dual_obj -= out.ineq_duals[i] * prog_.ineqs()[i].rhs;
    dual_obj += prog_.objective_constant;
    out.residuals.gap = std::abs(obj - dual_obj) / (1.0 + std::abs(obj));
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(nv_);
    for (const auto& [j, a] : prog_.objective.terms) grad[j] += a;
    for (int i = 0; i < neq_; ++i)
      for (const auto& [j, a] : prog_.eqs()[i].expr.terms) grad[j] += a * out.eq_duals[i];
    for (int i = 0; i < nin_; ++i)
      for (const auto& [j, a] : prog_.ineqs()[i].expr.terms)
        grad[j] += a * out.ineq_duals[i];
    out.residuals.dual_feas = nv_ > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
    out.iterations = iters_;
  }

  void fill_ray(SolveResult& out) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(ncols_);
    d[enter_col_] = 1.0;
    for (int i = 0; i < rows_; ++i)
      if (row_alive_[i]) d[basis_[i]] = -T_(i, enter_col_);
    out.ray = to_ir_space(d);
    const double nrm = out.ray.lpNorm<Eigen::Infinity>();
    if (nrm > 0) out.ray /= nrm;
    out.primal = to_ir_space(standard_point());
  }

  void fill_farkas(SolveResult& out) {
    // Phase-1 duals (artificial cost is 1, so y_i = 1 - d_art_i):
    // y'A <= 0 on real columns with y'b > 0.
    Eigen::VectorXd y_rows(rows_);
    for (int i = 0; i < rows_; ++i)
      y_rows[i] = row_alive_[i] ? 1.0 - T_(rows_, nstruct_ + i) : 0.0;
    out.farkas_eq.resize(neq_);
    out.farkas_ineq.resize(nin_);
    for (int i = 0; i < neq_; ++i) out.farkas_eq[i] = y_rows[i] * flip_[i];
    for (int i = 0; i < nin_; ++i) out.farkas_ineq[i] = y_rows[neq_ + i] * flip_[neq_ + i];
  }

  const ConicProgram& prog_;
  SolveOptions opts_;

  int nv_ = 0, neq_ = 0, nin_ = 0, rows_ = 0, nstruct_ = 0, ncols_ = 0;
  Eigen::MatrixXd A_, T_;
  Eigen::VectorXd b_, cost_, flip_;
  std::vector<int> basis_;
  std::vector<bool> row_alive_;
  bool bland_ = false;
  int iters_ = 0;
  int enter_col_ = -1;
  const int max_iters_ = 200000;
  const double entering_tol_ = 1e-9;
  const double pivot_tol_ = 1e-9;
};

}  // namespace

SolveResult solve_lp_simplex(const ConicProgram& prog, const SolveOptions& opts) {
  if (prog.num_psd_blocks() != 0)
    throw Error("solve_lp_simplex: program has psd blocks");
  return Simplex(prog, opts).run();
}

}  // namespace qpr
