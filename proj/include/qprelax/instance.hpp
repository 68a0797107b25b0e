#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "qprelax/extreal.hpp"

namespace qpr {

/// Data of a quadratic program
///
///   minimize   (1/2) x'Qx + c'x
///   subject to G'x <= g,  H'x = h,
///
/// with Q symmetric n-by-n, G n-by-m and H n-by-p (constraints are the
/// *columns* of G and H). m = 0 or p = 0 yields empty matrices; all
/// formulas downstream follow the usual empty-matrix product rules, which
/// Eigen implements (a product with a zero-size factor is a zero matrix of
/// conforming shape).
struct QpInstance {
  int n = 0;
  int m = 0;
  int p = 0;
  Eigen::MatrixXd Q;  // n x n, symmetric
  Eigen::VectorXd c;  // n
  Eigen::MatrixXd G;  // n x m
  Eigen::VectorXd g;  // m
  Eigen::MatrixXd H;  // n x p
  Eigen::VectorXd h;  // p

  /// Objective q(x) = (1/2) x'Qx + c'x.
  double objective(const Eigen::VectorXd& x) const {
    return 0.5 * x.dot(Q * x) + c.dot(x);
  }

  /// Throws qpr::Error unless dimensions are consistent, Q is exactly
  /// symmetric and all entries are finite.
  void check_well_formed() const;
};

/// Result of the Assumption-1 check: F nonempty, rank(H) = p < n, and a
/// point with H'x = h and G'x < g strictly.
struct SlaterReport {
  bool feasible = false;
  int rank_h = 0;
  std::optional<Eigen::VectorXd> slater_point;
  /// min_i g_i - (G'x)_i at the reported point; +inf when m = 0.
  double margin = 0.0;

  bool assumption1_ok(int n, int p) const {
    return feasible && slater_point.has_value() && rank_h == p && p < n;
  }
};

/// Validates Assumption 1 by solving the auxiliary LP
///   max t  s.t.  G'x + t*1 <= g,  H'x = h,  t <= 1.
/// F is nonempty iff the optimal t is >= 0; a Slater point is reported iff
/// the optimal t exceeds tol. rank(H) is computed by singular value
/// thresholding at 1e-9 * max(sigma_max, 1).
///
/// Throws SolverFailure if the auxiliary LP cannot be solved.
SlaterReport validate_assumption1(const QpInstance& inst, double tol = 1e-9);

/// The four example families, parametrized by alpha:
///
///   EX1: Q = [1 1; 1 1],  c = (-a, -a),   G = [1 -1; 1 -1], g = (2, 2)
///   EX2: Q = I,           c = (-a, -a),   same G, g
///   EX3: Q = -I,          c = (a, a),     same G, g
///   EX4: Q = -I,          c = (-a, a-1),  G = -I,           g = (0, 0)
///
/// All have n = 2, m = 2, p = 0.
enum class ExampleFamilyId { Ex1 = 1, Ex2 = 2, Ex3 = 3, Ex4 = 4 };

QpInstance example_family(ExampleFamilyId id, double alpha);

/// Known optimal values of (QP), (R) and (R+) for the example families as
/// piecewise functions of alpha. The (R+) values for EX2 are reference
/// data from computations, not a proved formula.
struct ClosedFormValues {
  ExtReal nu_star;
  ExtReal nu_r;
  ExtReal nu_rplus;
};

ClosedFormValues closed_form_values(ExampleFamilyId id, double alpha);

/// Reference values for the semidefinite relaxations, derived from the
/// closed forms: for EX1/EX2 the objective is convex so nu_sr = nu_srplus
/// = nu_star; for EX3 nu_sr = -inf and nu_srplus = nu_rplus; for EX4
/// nu_sr = -inf and nu_srplus = +inf.
struct SdpReferenceValues {
  ExtReal nu_sr;
  ExtReal nu_srplus;
};

SdpReferenceValues sdp_reference_values(ExampleFamilyId id, double alpha);

/// Deterministic random instance with a bounded feasible region. The
/// inequality block always contains the full box -1 <= x <= 1 (2n faces),
/// followed by m_extra random cuts a'x <= b with b > 0, so x = 0 stays
/// strictly feasible. Equalities pass through the origin (h = 0) with H
/// orthonormal of rank p. Same arguments always produce the same instance.
///
/// Requires n >= 1 and p < n.
QpInstance random_bounded_instance(int n, int m_extra, int p, std::uint64_t seed);

}  // namespace qpr
