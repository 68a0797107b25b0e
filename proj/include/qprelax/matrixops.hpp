#pragma once

#include <Eigen/Dense>

#include "qprelax/instance.hpp"

namespace qpr {

/// Facial-reduction data for an instance with equality constraints
/// H'x = h and an interior point x0 of the inequality system:
///
///   P:  n x (n-p), orthonormal columns spanning the null space of H'
///       (P = I when p = 0),
///   U:  (n+1) x (n-p+1), blockwise [1 0; x0 P],
///   V:  (n+1) x p, stacked [h'; -H].
///
/// U'V = 0 and [U V] is invertible whenever p > 0.
struct FaceData {
  int n = 0;
  int p = 0;
  Eigen::VectorXd x0;
  Eigen::MatrixXd P;
  Eigen::MatrixXd U;
  Eigen::MatrixXd V;
};

/// Orthonormal basis of the null space of H' (H is n x p, full column
/// rank). Returns the n x n identity when p = 0.
///
/// Throws RankMismatch if the numerical null-space dimension is not n - p.
Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& H, double tol = 1e-9);

/// Builds FaceData from raw (H, h, x0). Checks H'x0 = h and, for p > 0,
/// that [U V] is numerically nonsingular (throws DegenerateFace).
FaceData build_face_data(const Eigen::MatrixXd& H, const Eigen::VectorXd& h,
                         const Eigen::VectorXd& x0);

/// Convenience overload; x0 must satisfy H'x0 = h and G'x0 < g.
FaceData build_face_data(const QpInstance& inst, const Eigen::VectorXd& x0);

/// (H'H)^{-1} H' for H with full column rank; the 0 x n empty matrix when
/// p = 0, so products with it follow the empty-matrix conventions.
///
/// Throws RankMismatch if H'H is numerically singular.
Eigen::MatrixXd h_pinv_factor(const Eigen::MatrixXd& H);

/// Smallest eigenvalue of a symmetric matrix (0 for the 0 x 0 matrix).
/// Throws ConvergenceFailure if the eigensolver fails.
double min_eig(const Eigen::MatrixXd& M);

/// Membership of M in the face cone K = { U T U' : T psd }. Tested via the
/// characterization U'MU >= 0, U'MV = 0, V'MV = 0 (plain psd test when
/// p = 0). Agreement with the definition is a tested invariant.
bool in_cone_K(const Eigen::MatrixXd& M, const FaceData& face, double tol = 1e-8);

/// Membership of L in the dual cone K* = { L : U'LU >= 0 }.
bool in_dual_cone_Kstar(const Eigen::MatrixXd& L, const FaceData& face,
                        double tol = 1e-8);

}  // namespace qpr
