#include "qprelax/conic.hpp"

#include <iomanip>

#include "qprelax/errors.hpp"

namespace qpr {

int ConicProgram::add_psd_block(int side, const std::string& name) {
  if (side < 1) throw Error("add_psd_block: side must be >= 1");
  const int block = static_cast<int>(psd_sides_.size());
  psd_sides_.push_back(side);
  psd_offsets_.push_back(num_vars_);
  for (int i = 0; i < side; ++i)
    for (int j = i; j < side; ++j)
      var_names_.push_back(name + "[" + std::to_string(i) + "," + std::to_string(j) + "]");
  num_vars_ += side * (side + 1) / 2;
  return block;
}

int ConicProgram::psd_entry(int block, int i, int j) const {
  const int k = psd_sides_[block];
  if (i > j) std::swap(i, j);
  return psd_offsets_[block] + i * k - i * (i - 1) / 2 + (j - i);
}

void ConicProgram::dump(std::ostream& os) const {
  os << "vars " << num_vars_ << " (scalars " << num_scalars_ << ", psd blocks "
     << psd_sides_.size() << ")\n";
  auto put_expr = [&](const LinExpr& e) {
    bool first = true;
    for (const auto& [j, a] : e.terms) {
      if (!first) os << " + ";
      os << a << "*" << var_names_[j];
      first = false;
    }
    if (first) os << "0";
  };
  os << "min ";
  put_expr(objective);
  if (objective_constant != 0.0) os << " + " << objective_constant;
  os << "\n";
  for (const auto& con : eqs_) {
    os << (con.name.empty() ? "eq" : con.name) << ": ";
    put_expr(con.expr);
    os << " = " << con.rhs << "\n";
  }
  for (const auto& con : ineqs_) {
    os << (con.name.empty() ? "ineq" : con.name) << ": ";
    put_expr(con.expr);
    os << " <= " << con.rhs << "\n";
  }
  for (std::size_t b = 0; b < psd_sides_.size(); ++b)
    os << "psd block " << b << ": side " << psd_sides_[b] << " (vars from "
       << psd_offsets_[b] << ")\n";
}

Eigen::MatrixXd ConicProgram::psd_block_value(int block, const Eigen::VectorXd& v) const {
  const int k = psd_sides_[block];
  Eigen::MatrixXd M(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) M(i, j) = M(j, i) = v[psd_entry(block, i, j)];
  return M;
}

double ConicProgram::max_violation(const Eigen::VectorXd& v) const {
  double worst = 0.0;
  for (const auto& con : eqs_) worst = std::max(worst, std::abs(con.expr.eval(v) - con.rhs));
  for (const auto& con : ineqs_)
    worst = std::max(worst, std::max(0.0, con.expr.eval(v) - con.rhs));
  for (int b = 0; b < num_psd_blocks(); ++b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(psd_block_value(b, v),
                                                      Eigen::EigenvaluesOnly);
    worst = std::max(worst, std::max(0.0, -es.eigenvalues().minCoeff()));
  }
  return worst;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::Unbounded:
      return "Unbounded";
    case SolveStatus::Infeasible:
      return "Infeasible";
    default:
      return "NumericalFailure";
  }
}

SolveResult solve(const ConicProgram& prog, const SolveOptions& opts) {
  for (const auto* cons : {&prog.eqs(), &prog.ineqs()})
    for (const auto& con : *cons)
      for (const auto& [j, a] : con.expr.terms)
        if (j < 0 || j >= prog.num_vars())
          throw Error("solve: constraint references undeclared variable");
  if (prog.num_psd_blocks() == 0) return solve_lp_simplex(prog, opts);
  return solve_conic_ipm(prog, opts);
}

}  // namespace qpr
