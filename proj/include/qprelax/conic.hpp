#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "qprelax/extreal.hpp"

namespace qpr {

/// Sparse linear functional over the program's variable index space.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;

  LinExpr& add(int var, double coef) {
    if (coef != 0.0) terms.emplace_back(var, coef);
    return *this;
  }
  double eval(const Eigen::VectorXd& v) const {
    double s = 0.0;
    for (const auto& [j, a] : terms) s += a * v[j];
    return s;
  }
};

/// Solver-agnostic conic program, always a minimization:
///
///   min  objective . v + objective_constant
///   s.t. eq:    a.v  = rhs
///        ineq:  a.v <= rhs
///        each declared psd block is a symmetric matrix variable >= 0.
///
/// Variables are scalars; a psd block of side k contributes k(k+1)/2
/// scalar entries (upper triangle, row-major) that linear functionals
/// address through psd_entry(). Dual problems are stored negated at this
/// boundary (see builders).
class ConicProgram {
 public:
  struct Constraint {
    LinExpr expr;
    double rhs = 0.0;
    std::string name;
  };

  int add_scalar_var(std::string name) {
    var_names_.push_back(std::move(name));
    return num_vars_++;
  }
  /// Declares a psd matrix variable of side k >= 1; returns the block id.
  int add_psd_block(int side, const std::string& name);

  /// Global variable index of entry (i, j), i <= j, of a psd block.
  int psd_entry(int block, int i, int j) const;

  int num_vars() const { return num_vars_; }
  int num_scalar_vars() const { return num_scalars_; }
  int num_psd_blocks() const { return static_cast<int>(psd_sides_.size()); }
  int psd_side(int block) const { return psd_sides_[block]; }
  int psd_offset(int block) const { return psd_offsets_[block]; }

  void add_eq(LinExpr e, double rhs, std::string name = "") {
    eqs_.push_back({std::move(e), rhs, std::move(name)});
  }
  void add_ineq(LinExpr e, double rhs, std::string name = "") {
    ineqs_.push_back({std::move(e), rhs, std::move(name)});
  }

  const std::vector<Constraint>& eqs() const { return eqs_; }
  const std::vector<Constraint>& ineqs() const { return ineqs_; }
  const std::string& var_name(int j) const { return var_names_[j]; }

  LinExpr objective;
  double objective_constant = 0.0;

  /// Human-readable listing for debugging; not a stable format.
  void dump(std::ostream& os) const;

  /// Max violation of all constraints at v (psd blocks included via their
  /// smallest eigenvalue).
  double max_violation(const Eigen::VectorXd& v) const;

  /// Symmetric matrix value of a psd block at v.
  Eigen::MatrixXd psd_block_value(int block, const Eigen::VectorXd& v) const;

 private:
  int num_vars_ = 0;
  int num_scalars_ = 0;
  std::vector<int> psd_sides_;
  std::vector<int> psd_offsets_;
  std::vector<std::string> var_names_;
  std::vector<Constraint> eqs_;
  std::vector<Constraint> ineqs_;
};

enum class SolveStatus { Optimal, Unbounded, Infeasible, NumericalFailure };

const char* to_string(SolveStatus s);

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 200;
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  /// Optimal value under the minimization convention; -inf when unbounded,
  /// +inf when infeasible.
  ExtReal objective = ExtReal::finite(0.0);
  Eigen::VectorXd primal;  // num_vars entries when Optimal

  /// Multipliers: eq row duals y and ineq row duals z >= 0 satisfying
  /// grad + A_eq'y + A_in'z (+ psd terms) = 0; populated when Optimal.
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd ineq_duals;
  std::vector<Eigen::MatrixXd> psd_duals;

  /// Certificates: improving ray (Unbounded) in the variable space;
  /// Farkas multipliers (Infeasible) over (eqs, ineqs).
  Eigen::VectorXd ray;
  Eigen::VectorXd farkas_eq;
  Eigen::VectorXd farkas_ineq;

  struct Residuals {
    double primal_feas = 0.0;
    double dual_feas = 0.0;
    double gap = 0.0;
  } residuals;

  int iterations = 0;
};

/// Solves the program. Programs without psd blocks take the LP path
/// (two-phase dense simplex, exact basis statuses, rays and Farkas
/// certificates); programs with psd blocks take the PSD path (homogeneous
/// self-dual interior-point method with Nesterov-Todd scaling, which
/// certifies infeasibility and unboundedness through the embedding).
/// Unboundedness is never inferred from a large objective.
SolveResult solve(const ConicProgram& prog, const SolveOptions& opts = {});

/// Independent LP oracle: exact optimal value by enumerating basic
/// solutions of the constraint system intersected with a large box, plus
/// recession-direction enumeration for unboundedness. Returns +inf for
/// infeasible and -inf for unbounded programs.
///
/// Requires: no psd blocks, at most 8 variables and 14 constraints
/// (throws TooLarge otherwise).
ExtReal brute_force_lp_value(const ConicProgram& prog);

// Backend entry points (exposed for tests; solve() dispatches).
SolveResult solve_lp_simplex(const ConicProgram& prog, const SolveOptions& opts);
SolveResult solve_conic_ipm(const ConicProgram& prog, const SolveOptions& opts);

}  // namespace qpr
