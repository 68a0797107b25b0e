#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "qprelax/conic.hpp"
#include "qprelax/instance.hpp"
#include "qprelax/matrixops.hpp"

namespace qpr {

/// The seven problems built from an instance: the RLT relaxation (R), its
/// dual (RD), the RLT relaxation (R+) of the complementarity formulation,
/// the SDP-RLT relaxation (SR), its facially reduced form (SRR), the dual
/// (SRRD) of the reduced form, and the SDP-RLT relaxation (SR+) of the
/// complementarity formulation.
enum class ProblemKind { R, RD, Rplus, SR, SRR, SRRD, SRplus };

const char* to_string(ProblemKind k);
std::optional<ProblemKind> problem_kind_from_string(const std::string& s);

/// Index block mapping a semantic matrix/vector variable into the
/// program's variable index space. Symmetric blocks share entries across
/// the diagonal.
struct IndexBlock {
  int rows = 0;
  int cols = 0;
  bool symmetric = false;
  std::vector<int> idx;  // row-major; upper triangle only when symmetric

  int operator()(int i, int j) const {
    if (symmetric) {
      if (i > j) std::swap(i, j);
      return idx[i * cols - i * (i - 1) / 2 + (j - i)];
    }
    return idx[i * cols + j];
  }
  int operator()(int i) const { return idx[i]; }

  Eigen::VectorXd read_vector(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd read_matrix(const Eigen::VectorXd& v) const;
};

/// Locations of every semantic variable of a built problem. Unused
/// symbols are disengaged. For (SRR) the pair (x, X) is not a variable:
/// it is an affine function of the psd block T, read off through
/// srr_read_xX().
struct VariableMap {
  std::optional<IndexBlock> x, y, z;       // vectors
  std::optional<IndexBlock> X, Y, Z;       // symmetric matrices
  std::optional<IndexBlock> Mxy, Mxz, Myz; // general matrices
  std::optional<IndexBlock> u, w;          // dual vectors
  std::optional<IndexBlock> R, S;          // dual matrices (S symmetric)
  std::optional<IndexBlock> b, B;          // sdp dual vector/matrix
  std::optional<int> beta;
  std::optional<int> psd_block;            // id of the problem's psd block

  // Constraint layout of (SRR), for reading the multipliers that make up
  // the (u, S, beta, b, B) certificate: inequality rows [gx_row, gx_row+m)
  // are G'x <= g, rows [prod_row, ...) the linearized products in
  // row-major upper-triangle order, and equality corner_eq pins M11 = 1.
  std::optional<int> gx_row, prod_row, corner_eq;
};

struct BuiltProblem {
  ProblemKind kind = ProblemKind::R;
  ConicProgram prog;
  VariableMap map;
  /// +1 for primal problems; -1 for (RD)/(SRRD), which are maximizations
  /// stored negated in the IR.
  double value_sign = 1.0;
};

BuiltProblem build_R(const QpInstance& inst);
BuiltProblem build_RD(const QpInstance& inst);
BuiltProblem build_Rplus(const QpInstance& inst);
BuiltProblem build_SR(const QpInstance& inst);
BuiltProblem build_SRR(const QpInstance& inst, const FaceData& face);
BuiltProblem build_SRRD(const QpInstance& inst, const FaceData& face);
BuiltProblem build_SRplus(const QpInstance& inst);

BuiltProblem build_problem(const QpInstance& inst, ProblemKind kind,
                           const FaceData* face = nullptr);

/// Value of the *stated* problem (sign-corrected for the max problems):
/// Optimal -> sign * objective; for sign = -1, Unbounded means the max
/// problem is +inf and Infeasible means -inf.
ExtReal problem_value(const BuiltProblem& bp, const SolveResult& res);

/// Reads (x, X) out of a solved problem; for (SRR) reconstructs
/// M = U T U' and extracts x = M[1:,0], X = M[1:,1:].
std::pair<Eigen::VectorXd, Eigen::MatrixXd> read_xX(const BuiltProblem& bp,
                                                    const SolveResult& res,
                                                    const FaceData* face = nullptr);

}  // namespace qpr
