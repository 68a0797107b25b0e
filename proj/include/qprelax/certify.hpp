#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qprelax/builders.hpp"
#include "qprelax/instance.hpp"
#include "qprelax/matrixops.hpp"

namespace qpr {

/// Candidate KKT point: primal x with multipliers (y, z) for the
/// inequality and equality blocks.
struct KktPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd z;
};

/// Dual certificate (u, w, R, S) of optimality for (R).
struct RltDualCert {
  Eigen::VectorXd u;  // m
  Eigen::VectorXd w;  // p
  Eigen::MatrixXd R;  // p x n
  Eigen::MatrixXd S;  // m x m symmetric
};

/// Dual certificate (u, S, beta, b, B) of optimality for (SR)/(SRR).
struct SdpDualCert {
  Eigen::VectorXd u;  // m
  Eigen::MatrixXd S;  // m x m symmetric
  double beta = 0.0;
  Eigen::VectorXd b;  // n
  Eigen::MatrixXd B;  // n x n symmetric
};

/// Candidate feasible point of (R+)/(SR+).
struct LiftedPoint {
  Eigen::VectorXd x, y, z;
  Eigen::MatrixXd X, Y, Z;
  Eigen::MatrixXd Mxy, Mxz, Myz;
};

/// Per-group residual report. pass <=> overall <= tolerance used.
struct ViolationReport {
  struct Entry {
    std::string group;
    double max_violation = 0.0;
    bool pass = true;
  };
  std::vector<Entry> entries;
  double overall = 0.0;
  bool pass = true;
  double tol = 0.0;

  void add(const std::string& group, double violation);
  void finish();
  /// Structured text: one "group <tab> violation <tab> pass" line each.
  std::string to_text() const;
};

/// Residuals of the five KKT relations plus the implied identity
/// x'Qx + c'x + g'y + h'z = 0.
ViolationReport check_kkt(const QpInstance& inst, const KktPoint& pt, double tol);

/// Optimality of an (R)-feasible (x, X): stationarity equations of the
/// dual, sign constraints and the two complementarity relations.
ViolationReport check_rlt_opt(const QpInstance& inst, const Eigen::VectorXd& x,
                              const Eigen::MatrixXd& X, const RltDualCert& cert,
                              double tol);

/// Optimality of an (SR)-feasible (x, X): the eight relations, with the
/// dual-cone membership tested through in_dual_cone_Kstar.
ViolationReport check_sdp_opt(const QpInstance& inst, const FaceData& face,
                              const Eigen::VectorXd& x, const Eigen::MatrixXd& X,
                              const SdpDualCert& cert, double tol);

/// Multipliers (z, W) recovered from an SDP certificate:
///   z = -(H'H)^{-1} H' (Bx + b),  W from  BX + bx' = HW,
/// with residuals of the four recovery relations including
/// <B, X - xx'> = 0.
struct ZwRecovery {
  Eigen::VectorXd z;  // p
  Eigen::MatrixXd W;  // p x n
  ViolationReport residuals;
};

/// Throws ResidualTooLarge if any relation residual exceeds tol.
ZwRecovery recover_zW(const QpInstance& inst, const FaceData& face,
                      const Eigen::VectorXd& x, const Eigen::MatrixXd& X,
                      const SdpDualCert& cert, double tol);

/// Constructive lifting of an (R)-optimal (x, X) with certificate into an
/// (R+)-feasible point with the same objective value.
LiftedPoint lift_rlt(const QpInstance& inst, const Eigen::VectorXd& x,
                     const Eigen::MatrixXd& X, const RltDualCert& cert);

/// Constructive lifting of an (SR)-optimal (x, X) with certificate into an
/// (SR+)-feasible point with the same objective value.
LiftedPoint lift_sdprlt(const QpInstance& inst, const FaceData& face,
                        const Eigen::VectorXd& x, const Eigen::MatrixXd& X,
                        const SdpDualCert& cert);

/// Residuals of all fifteen constraint groups of (R+).
ViolationReport check_feasible_Rplus(const QpInstance& inst, const LiftedPoint& pt,
                                     double tol);

/// Fifteen group residuals plus the semidefinite residual of the bordered
/// moment matrix of (x, y, z).
ViolationReport check_feasible_SRplus(const QpInstance& inst, const LiftedPoint& pt,
                                      double tol);

/// Feasibility of (x, X) for (R) (groups 1-4) and for (SR) (adds the
/// Schur-complement psd residual). Used as pipeline guards.
ViolationReport check_feasible_R(const QpInstance& inst, const Eigen::VectorXd& x,
                                 const Eigen::MatrixXd& X, double tol);
ViolationReport check_feasible_SR(const QpInstance& inst, const Eigen::VectorXd& x,
                                  const Eigen::MatrixXd& X, double tol);

/// Active-set enumeration oracle for KKT points of small instances
/// (n <= 3, m <= 6, p <= 2; throws TooLarge otherwise). For patterns with
/// solution manifolds one representative (the min-norm solution) is
/// returned per pattern.
std::vector<KktPoint> find_kkt_points_smallscale(const QpInstance& inst, double tol);

/// Certificate extraction. The RLT certificate is the primal solution of
/// a solved (RD); the SDP certificate comes from the multipliers of a
/// solved (SRR) (same-solve complementarity makes the recovery relations
/// hold pointwise), or alternatively from the primal of a solved (SRRD).
RltDualCert extract_rlt_cert(const QpInstance& inst, const BuiltProblem& rd,
                             const SolveResult& res);
SdpDualCert extract_sdp_cert(const QpInstance& inst, const BuiltProblem& srrd,
                             const SolveResult& res);
SdpDualCert extract_sdp_cert_from_srr(const QpInstance& inst, const BuiltProblem& srr,
                                      const SolveResult& res);

/// Crossover refinement of a solved (SRR) pair. Interior-point iterates
/// carry O(sqrt(mu)) error in the pointwise complementarity products; this
/// identifies the active structure (tight rows, the face of the moment
/// block), re-solves the complementary system as linear equations around
/// the iterate and verifies the result. ok is false when the structure
/// guess does not verify, in which case callers should fall back to the
/// raw extraction.
struct SdpOptPair {
  Eigen::VectorXd x;
  Eigen::MatrixXd X;
  SdpDualCert cert;
  bool ok = false;
};

SdpOptPair purify_sdp_pair(const QpInstance& inst, const FaceData& face,
                           const BuiltProblem& srr, const SolveResult& res);

/// Convenience: purified pair when it verifies, raw iterates otherwise.
SdpOptPair sdp_pair_from_srr(const QpInstance& inst, const FaceData& face,
                             const BuiltProblem& srr, const SolveResult& res);

}  // namespace qpr
