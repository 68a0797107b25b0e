#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "qprelax/conic.hpp"
#include "qprelax/errors.hpp"

namespace qpr {

namespace {

// All basic solutions of { C x <= d, E x = f } intersected with the box
// |x_i| <= box: every subset of box/inequality rows of size n - #eq is
// activated together with all equalities; nonsingular systems whose
// solutions satisfy every constraint are the vertices.
std::vector<Eigen::VectorXd> enumerate_vertices(const Eigen::MatrixXd& C,
                                                const Eigen::VectorXd& d,
                                                const Eigen::MatrixXd& E,
                                                const Eigen::VectorXd& f,
                                                double box) {
  const int n = static_cast<int>(C.cols());
  const int nin = static_cast<int>(C.rows());
  const int neq = static_cast<int>(E.rows());

  Eigen::MatrixXd rows(nin + 2 * n, n);
  Eigen::VectorXd rhs(nin + 2 * n);
  rows.topRows(nin) = C;
  rhs.head(nin) = d;
  for (int i = 0; i < n; ++i) {
    rows.row(nin + 2 * i).setZero();
    rows(nin + 2 * i, i) = 1.0;
    rhs[nin + 2 * i] = box;
    rows.row(nin + 2 * i + 1).setZero();
    rows(nin + 2 * i + 1, i) = -1.0;
    rhs[nin + 2 * i + 1] = box;
  }
  const int total = nin + 2 * n;
  const int k = n - neq;

  std::vector<Eigen::VectorXd> vertices;
  auto try_active = [&](const std::vector<int>& subset) {
    Eigen::MatrixXd Act(neq + static_cast<int>(subset.size()), n);
    Eigen::VectorXd act_rhs(Act.rows());
    Act.topRows(neq) = E;
    act_rhs.head(neq) = f;
    for (std::size_t t = 0; t < subset.size(); ++t) {
      Act.row(neq + t) = rows.row(subset[t]);
      act_rhs[neq + t] = rhs[subset[t]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Act);
    lu.setThreshold(1e-10);
    if (lu.rank() != n) return;
    Eigen::VectorXd x = lu.solve(act_rhs);
    if (!x.allFinite()) return;
    if ((Act * x - act_rhs).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + x.lpNorm<Eigen::Infinity>()))
      return;
    const double tol = 1e-7 * (1.0 + x.lpNorm<Eigen::Infinity>());
    if (neq > 0 && (E * x - f).cwiseAbs().maxCoeff() > tol) return;
    for (int i = 0; i < total; ++i)
      if (rows.row(i).dot(x) > rhs[i] + tol) return;
    vertices.push_back(std::move(x));
  };

  if (k < 0) {
    try_active({});
    return vertices;
  }
  std::vector<int> subset(k);
  for (int i = 0; i < k; ++i) subset[i] = i;
  if (k == 0) {
    try_active(subset);
    return vertices;
  }
  while (true) {
    try_active(subset);
    int pos = k - 1;
    while (pos >= 0 && subset[pos] == total - k + pos) --pos;
    if (pos < 0) break;
    ++subset[pos];
    for (int q = pos + 1; q < k; ++q) subset[q] = subset[q - 1] + 1;
  }
  return vertices;
}

}  // namespace

ExtReal brute_force_lp_value(const ConicProgram& prog) {
  if (prog.num_psd_blocks() != 0)
    throw TooLarge("brute_force_lp_value: psd blocks not supported");
  const int n = prog.num_vars();
  const int neq = static_cast<int>(prog.eqs().size());
  const int nin = static_cast<int>(prog.ineqs().size());
  if (n > 8) throw TooLarge("brute_force_lp_value: more than 8 variables");
  if (neq + nin > 14) throw TooLarge("brute_force_lp_value: more than 14 constraints");

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nin, n);
  Eigen::VectorXd d(nin);
  for (int i = 0; i < nin; ++i) {
    for (const auto& [j, a] : prog.ineqs()[i].expr.terms) C(i, j) += a;
    d[i] = prog.ineqs()[i].rhs;
  }
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(neq, n);
  Eigen::VectorXd f(neq);
  for (int i = 0; i < neq; ++i) {
    for (const auto& [j, a] : prog.eqs()[i].expr.terms) E(i, j) += a;
    f[i] = prog.eqs()[i].rhs;
  }
  Eigen::VectorXd obj = Eigen::VectorXd::Zero(n);
  for (const auto& [j, a] : prog.objective.terms) obj[j] += a;

  const double big_box = 1e5;
  std::vector<Eigen::VectorXd> vertices = enumerate_vertices(C, d, E, f, big_box);
  if (vertices.empty()) return ExtReal::pos_inf();  // infeasible

  // Recession cone within the unit box; any extreme direction of descent
  // certifies unboundedness.
  std::vector<Eigen::VectorXd> rec = enumerate_vertices(
      C, Eigen::VectorXd::Zero(nin), E, Eigen::VectorXd::Zero(neq), 1.0);
  for (const auto& dir : rec)
    if (obj.dot(dir) < -1e-9) return ExtReal::neg_inf();

  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : vertices) best = std::min(best, obj.dot(v));
  return ExtReal::finite(best + prog.objective_constant);
}

}  // namespace qpr
