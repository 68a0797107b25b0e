#include "qprelax/matrixops.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qprelax/errors.hpp"

namespace qpr {

Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& H, double tol) {
  const int n = static_cast<int>(H.rows());
  const int p = static_cast<int>(H.cols());
  if (p == 0) return Eigen::MatrixXd::Identity(n, n);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(H.transpose(), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double thresh = 1e-9 * std::max(sv.size() > 0 ? sv(0) : 0.0, 1.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++rank;
  if (rank != p)
    throw RankMismatch("null_space_basis: rank(H) = " + std::to_string(rank) +
                       ", expected " + std::to_string(p));

  Eigen::MatrixXd P = svd.matrixV().rightCols(n - p);
  const double resid = (H.transpose() * P).cwiseAbs().maxCoeff();
  if (resid > tol)
    throw RankMismatch("null_space_basis: residual " + std::to_string(resid));
  return P;
}

FaceData build_face_data(const Eigen::MatrixXd& H, const Eigen::VectorXd& h,
                         const Eigen::VectorXd& x0) {
  const int n = static_cast<int>(H.rows());
  const int p = static_cast<int>(H.cols());

  FaceData face;
  face.n = n;
  face.p = p;
  face.x0 = x0;
  face.P = null_space_basis(H);

  face.U = Eigen::MatrixXd::Zero(n + 1, n - p + 1);
  face.U(0, 0) = 1.0;
  face.U.block(1, 0, n, 1) = x0;
  face.U.block(1, 1, n, n - p) = face.P;

  face.V = Eigen::MatrixXd(n + 1, p);
  if (p > 0) {
    face.V.row(0) = h.transpose();
    face.V.block(1, 0, n, p) = -H;

    const double eq_resid = (H.transpose() * x0 - h).cwiseAbs().maxCoeff();
    if (eq_resid > 1e-7)
      throw Error("build_face_data: x0 violates H'x = h by " + std::to_string(eq_resid));

    Eigen::MatrixXd UV(n + 1, n + 1);
    UV << face.U, face.V;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(UV);
    const double smin = svd.singularValues().minCoeff();
    if (smin < 1e-9)
      throw DegenerateFace("build_face_data: [U V] numerically singular, sigma_min = " +
                           std::to_string(smin));
  }
  return face;
}

FaceData build_face_data(const QpInstance& inst, const Eigen::VectorXd& x0) {
  return build_face_data(inst.H, inst.h, x0);
}

Eigen::MatrixXd h_pinv_factor(const Eigen::MatrixXd& H) {
  const int n = static_cast<int>(H.rows());
  const int p = static_cast<int>(H.cols());
  if (p == 0) return Eigen::MatrixXd(0, n);

  Eigen::MatrixXd HtH = H.transpose() * H;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(HtH);
  if (lu.rank() != p)
    throw RankMismatch("h_pinv_factor: H does not have full column rank");
  return lu.solve(H.transpose());
}

double min_eig(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("min_eig: eigensolver did not converge");
  return es.eigenvalues().minCoeff();
}

bool in_cone_K(const Eigen::MatrixXd& M, const FaceData& face, double tol) {
  if (face.p == 0) return min_eig(M) >= -tol;
  const Eigen::MatrixXd UMU = face.U.transpose() * M * face.U;
  const Eigen::MatrixXd UMV = face.U.transpose() * M * face.V;
  const Eigen::MatrixXd VMV = face.V.transpose() * M * face.V;
  return min_eig(UMU) >= -tol && UMV.cwiseAbs().maxCoeff() <= tol &&
         VMV.cwiseAbs().maxCoeff() <= tol;
}

bool in_dual_cone_Kstar(const Eigen::MatrixXd& L, const FaceData& face, double tol) {
  return min_eig(face.U.transpose() * L * face.U) >= -tol;
}

}  // namespace qpr
