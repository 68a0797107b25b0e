#include "qprelax/builders.hpp"

#include "qprelax/errors.hpp"

namespace qpr {

const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::R:
      return "R";
    case ProblemKind::RD:
      return "RD";
    case ProblemKind::Rplus:
      return "R+";
    case ProblemKind::SR:
      return "SR";
    case ProblemKind::SRR:
      return "SRR";
    case ProblemKind::SRRD:
      return "SRRD";
    default:
      return "SR+";
  }
}

std::optional<ProblemKind> problem_kind_from_string(const std::string& s) {
  if (s == "r" || s == "R") return ProblemKind::R;
  if (s == "rd" || s == "RD") return ProblemKind::RD;
  if (s == "rplus" || s == "r+" || s == "R+") return ProblemKind::Rplus;
  if (s == "sr" || s == "SR") return ProblemKind::SR;
  if (s == "srr" || s == "SRR") return ProblemKind::SRR;
  if (s == "srrd" || s == "SRRD") return ProblemKind::SRRD;
  if (s == "srplus" || s == "sr+" || s == "SR+") return ProblemKind::SRplus;
  return std::nullopt;
}

Eigen::VectorXd IndexBlock::read_vector(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(rows);
  for (int i = 0; i < rows; ++i) out[i] = v[idx[i]];
  return out;
}

Eigen::MatrixXd IndexBlock::read_matrix(const Eigen::VectorXd& v) const {
  Eigen::MatrixXd out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = v[(*this)(i, j)];
  return out;
}

namespace {

IndexBlock add_vector(ConicProgram& prog, const std::string& name, int len) {
  IndexBlock blk;
  blk.rows = len;
  blk.cols = 1;
  blk.idx.resize(len);
  for (int i = 0; i < len; ++i)
    blk.idx[i] = prog.add_scalar_var(name + "[" + std::to_string(i) + "]");
  return blk;
}

IndexBlock add_matrix(ConicProgram& prog, const std::string& name, int rows, int cols,
                      bool symmetric) {
  IndexBlock blk;
  blk.rows = rows;
  blk.cols = cols;
  blk.symmetric = symmetric;
  if (symmetric) {
    blk.idx.reserve(rows * (rows + 1) / 2);
    for (int i = 0; i < rows; ++i)
      for (int j = i; j < cols; ++j)
        blk.idx.push_back(
            prog.add_scalar_var(name + "[" + std::to_string(i) + "," + std::to_string(j) + "]"));
  } else {
    blk.idx.reserve(rows * cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        blk.idx.push_back(
            prog.add_scalar_var(name + "[" + std::to_string(i) + "," + std::to_string(j) + "]"));
  }
  return blk;
}

// Adds sum_ij C(i,j) * X(i,j) for a symmetric matrix variable X (shared
// upper-triangle storage: the (i,j) and (j,i) coefficients merge).
void add_sym_coefs(LinExpr& e, const Eigen::MatrixXd& C, const IndexBlock& X) {
  const int n = X.rows;
  for (int i = 0; i < n; ++i) {
    e.add(X(i, i), C(i, i));
    for (int j = i + 1; j < n; ++j) e.add(X(i, j), C(i, j) + C(j, i));
  }
}

// The m(m+1)/2 linearized inequality rows
//   G'XG - G'x g' - g x'G + gg' >= 0   (upper triangle),
// stored as <= rows: -(...) <= g_a g_b.
void add_product_rows(ConicProgram& prog, const QpInstance& inst, const IndexBlock& x,
                      const IndexBlock& X) {
  for (int a = 0; a < inst.m; ++a)
    for (int b = a; b < inst.m; ++b) {
      LinExpr e;
      add_sym_coefs(e, (-inst.G.col(a) * inst.G.col(b).transpose()).eval(), X);
      for (int i = 0; i < inst.n; ++i)
        e.add(x(i), inst.g[b] * inst.G(i, a) + inst.g[a] * inst.G(i, b));
      prog.add_ineq(std::move(e), inst.g[a] * inst.g[b],
                    "prod[" + std::to_string(a) + "," + std::to_string(b) + "]");
    }
}

void add_objective(ConicProgram& prog, const QpInstance& inst, const IndexBlock& x,
                   const IndexBlock& X) {
  add_sym_coefs(prog.objective, (0.5 * inst.Q).eval(), X);
  for (int i = 0; i < inst.n; ++i) prog.objective.add(x(i), inst.c[i]);
}

void add_Gx_rows(ConicProgram& prog, const QpInstance& inst, const IndexBlock& x) {
  for (int j = 0; j < inst.m; ++j) {
    LinExpr e;
    for (int i = 0; i < inst.n; ++i) e.add(x(i), inst.G(i, j));
    prog.add_ineq(std::move(e), inst.g[j], "Gx[" + std::to_string(j) + "]");
  }
}

void add_Hx_rows(ConicProgram& prog, const QpInstance& inst, const IndexBlock& x) {
  for (int k = 0; k < inst.p; ++k) {
    LinExpr e;
    for (int i = 0; i < inst.n; ++i) e.add(x(i), inst.H(i, k));
    prog.add_eq(std::move(e), inst.h[k], "Hx[" + std::to_string(k) + "]");
  }
}

void add_HX_rows(ConicProgram& prog, const QpInstance& inst, const IndexBlock& x,
                 const IndexBlock& X) {
  for (int k = 0; k < inst.p; ++k)
    for (int j = 0; j < inst.n; ++j) {
      LinExpr e;
      for (int i = 0; i < inst.n; ++i) e.add(X(i, j), inst.H(i, k));
      e.add(x(j), -inst.h[k]);
      prog.add_eq(std::move(e), 0.0, "HX[" + std::to_string(k) + "," + std::to_string(j) + "]");
    }
}

}  // namespace

BuiltProblem build_R(const QpInstance& inst) {
  inst.check_well_formed();
  BuiltProblem bp;
  bp.kind = ProblemKind::R;
  ConicProgram& prog = bp.prog;
  bp.map.x = add_vector(prog, "x", inst.n);
  bp.map.X = add_matrix(prog, "X", inst.n, inst.n, true);
  add_objective(prog, inst, *bp.map.x, *bp.map.X);
  add_Gx_rows(prog, inst, *bp.map.x);
  add_Hx_rows(prog, inst, *bp.map.x);
  add_HX_rows(prog, inst, *bp.map.x, *bp.map.X);
  add_product_rows(prog, inst, *bp.map.x, *bp.map.X);
  return bp;
}

BuiltProblem build_RD(const QpInstance& inst) {
  inst.check_well_formed();
  BuiltProblem bp;
  bp.kind = ProblemKind::RD;
  bp.value_sign = -1.0;
  ConicProgram& prog = bp.prog;
  const int n = inst.n, m = inst.m, p = inst.p;
  bp.map.u = add_vector(prog, "u", m);
  bp.map.w = add_vector(prog, "w", p);
  bp.map.R = add_matrix(prog, "R", p, n, false);
  bp.map.S = add_matrix(prog, "S", m, m, true);
  const IndexBlock &u = *bp.map.u, &w = *bp.map.w, &R = *bp.map.R, &S = *bp.map.S;

  // max -u'g + w'h - (1/2) g'Sg, stored as min of the negation.
  for (int a = 0; a < m; ++a) prog.objective.add(u(a), inst.g[a]);
  for (int k = 0; k < p; ++k) prog.objective.add(w(k), -inst.h[k]);
  add_sym_coefs(prog.objective, (0.5 * inst.g * inst.g.transpose()).eval(), S);

  // -Gu + Hw - R'h - GSg = c
  for (int i = 0; i < n; ++i) {
    LinExpr e;
    for (int a = 0; a < m; ++a) e.add(u(a), -inst.G(i, a));
    for (int k = 0; k < p; ++k) e.add(w(k), inst.H(i, k));
    for (int k = 0; k < p; ++k) e.add(R(k, i), -inst.h[k]);
    add_sym_coefs(e, (-inst.G.row(i).transpose() * inst.g.transpose()).eval(), S);
    prog.add_eq(std::move(e), inst.c[i], "dual_c[" + std::to_string(i) + "]");
  }
  // R'H' + HR + GSG' = Q (symmetric part, upper triangle)
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      LinExpr e;
      for (int k = 0; k < p; ++k) {
        e.add(R(k, i), inst.H(j, k));
        e.add(R(k, j), inst.H(i, k));
      }
      add_sym_coefs(e, (inst.G.row(i).transpose() * inst.G.row(j)).eval(), S);
      prog.add_eq(std::move(e), inst.Q(i, j),
                  "dual_Q[" + std::to_string(i) + "," + std::to_string(j) + "]");
    }
  for (int a = 0; a < m; ++a) {
    LinExpr e;
    e.add(u(a), -1.0);
    prog.add_ineq(std::move(e), 0.0, "u_sign[" + std::to_string(a) + "]");
  }
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      LinExpr e;
      e.add(S(a, b), -1.0);
      prog.add_ineq(std::move(e), 0.0, "S_sign[" + std::to_string(a) + "," + std::to_string(b) + "]");
    }
  return bp;
}

namespace {

// The fifteen constraint groups of (R+)/(SR+) in paper order; (R) rows
// are groups 1-4.
void add_fifteen_groups(ConicProgram& prog, const QpInstance& inst, const VariableMap& vm) {
  const int n = inst.n, m = inst.m, p = inst.p;
  const IndexBlock &x = *vm.x, &y = *vm.y, &z = *vm.z;
  const IndexBlock &X = *vm.X, &Y = *vm.Y, &Z = *vm.Z;
  const IndexBlock &Mxy = *vm.Mxy, &Mxz = *vm.Mxz, &Myz = *vm.Myz;

  add_Gx_rows(prog, inst, x);                    // (1)
  add_Hx_rows(prog, inst, x);                    // (2)
  add_HX_rows(prog, inst, x, X);                 // (3)
  add_product_rows(prog, inst, x, X);            // (4)
  for (int i = 0; i < n; ++i) {                  // (5) Qx + c + Gy + Hz = 0
    LinExpr e;
    for (int j = 0; j < n; ++j) e.add(x(j), inst.Q(i, j));
    for (int a = 0; a < m; ++a) e.add(y(a), inst.G(i, a));
    for (int k = 0; k < p; ++k) e.add(z(k), inst.H(i, k));
    prog.add_eq(std::move(e), -inst.c[i], "stat[" + std::to_string(i) + "]");
  }
  for (int k = 0; k < p; ++k)                    // (6) H'Mxy = h y'
    for (int a = 0; a < m; ++a) {
      LinExpr e;
      for (int i = 0; i < n; ++i) e.add(Mxy(i, a), inst.H(i, k));
      e.add(y(a), -inst.h[k]);
      prog.add_eq(std::move(e), 0.0, "HMxy[" + std::to_string(k) + "," + std::to_string(a) + "]");
    }
  for (int k = 0; k < p; ++k)                    // (7) H'Mxz = h z'
    for (int l = 0; l < p; ++l) {
      LinExpr e;
      for (int i = 0; i < n; ++i) e.add(Mxz(i, l), inst.H(i, k));
      e.add(z(l), -inst.h[k]);
      prog.add_eq(std::move(e), 0.0, "HMxz[" + std::to_string(k) + "," + std::to_string(l) + "]");
    }
  for (int i = 0; i < n; ++i)                    // (8) QX + cx' + G Mxy' + H Mxz' = 0
    for (int j = 0; j < n; ++j) {
      LinExpr e;
      for (int t = 0; t < n; ++t) e.add(X(t, j), inst.Q(i, t));
      e.add(x(j), inst.c[i]);
      for (int a = 0; a < m; ++a) e.add(Mxy(j, a), inst.G(i, a));
      for (int k = 0; k < p; ++k) e.add(Mxz(j, k), inst.H(i, k));
      prog.add_eq(std::move(e), 0.0, "QX[" + std::to_string(i) + "," + std::to_string(j) + "]");
    }
  for (int i = 0; i < n; ++i)                    // (9) Q Mxy + cy' + GY + H Myz' = 0
    for (int a = 0; a < m; ++a) {
      LinExpr e;
      for (int t = 0; t < n; ++t) e.add(Mxy(t, a), inst.Q(i, t));
      e.add(y(a), inst.c[i]);
      for (int b = 0; b < m; ++b) e.add(Y(b, a), inst.G(i, b));
      for (int k = 0; k < p; ++k) e.add(Myz(a, k), inst.H(i, k));
      prog.add_eq(std::move(e), 0.0, "QMxy[" + std::to_string(i) + "," + std::to_string(a) + "]");
    }
  for (int i = 0; i < n; ++i)                    // (10) Q Mxz + cz' + G Myz + HZ = 0
    for (int l = 0; l < p; ++l) {
      LinExpr e;
      for (int t = 0; t < n; ++t) e.add(Mxz(t, l), inst.Q(i, t));
      e.add(z(l), inst.c[i]);
      for (int a = 0; a < m; ++a) e.add(Myz(a, l), inst.G(i, a));
      for (int k = 0; k < p; ++k) e.add(Z(k, l), inst.H(i, k));
      prog.add_eq(std::move(e), 0.0, "QMxz[" + std::to_string(i) + "," + std::to_string(l) + "]");
    }
  for (int a = 0; a < m; ++a) {                  // (11) diag(y g' - Mxy' G) = 0
    LinExpr e;
    e.add(y(a), inst.g[a]);
    for (int i = 0; i < n; ++i) e.add(Mxy(i, a), -inst.G(i, a));
    prog.add_eq(std::move(e), 0.0, "compl_diag[" + std::to_string(a) + "]");
  }
  for (int a = 0; a < m; ++a)                    // (12) y g' - Mxy' G >= 0, all m^2 entries
    for (int b = 0; b < m; ++b) {
      LinExpr e;
      e.add(y(a), -inst.g[b]);
      for (int i = 0; i < n; ++i) e.add(Mxy(i, a), inst.G(i, b));
      prog.add_ineq(std::move(e), 0.0,
                    "compl[" + std::to_string(a) + "," + std::to_string(b) + "]");
    }
  for (int a = 0; a < m; ++a) {                  // (13) y >= 0
    LinExpr e;
    e.add(y(a), -1.0);
    prog.add_ineq(std::move(e), 0.0, "y_sign[" + std::to_string(a) + "]");
  }
  for (int a = 0; a < m; ++a)                    // (14) Y >= 0 entrywise
    for (int b = a; b < m; ++b) {
      LinExpr e;
      e.add(Y(a, b), -1.0);
      prog.add_ineq(std::move(e), 0.0, "Y_sign[" + std::to_string(a) + "," + std::to_string(b) + "]");
    }
  {                                              // (15) <Q,X> + c'x + g'y + h'z = 0
    LinExpr e;
    add_sym_coefs(e, inst.Q, X);
    for (int i = 0; i < n; ++i) e.add(x(i), inst.c[i]);
    for (int a = 0; a < m; ++a) e.add(y(a), inst.g[a]);
    for (int k = 0; k < p; ++k) e.add(z(k), inst.h[k]);
    prog.add_eq(std::move(e), 0.0, "obj_identity");
  }
}

VariableMap add_lifted_vars(ConicProgram& prog, const QpInstance& inst) {
  VariableMap vm;
  const int n = inst.n, m = inst.m, p = inst.p;
  vm.x = add_vector(prog, "x", n);
  vm.y = add_vector(prog, "y", m);
  vm.z = add_vector(prog, "z", p);
  vm.X = add_matrix(prog, "X", n, n, true);
  vm.Y = add_matrix(prog, "Y", m, m, true);
  vm.Z = add_matrix(prog, "Z", p, p, true);
  vm.Mxy = add_matrix(prog, "Mxy", n, m, false);
  vm.Mxz = add_matrix(prog, "Mxz", n, p, false);
  vm.Myz = add_matrix(prog, "Myz", m, p, false);
  return vm;
}

}  // namespace

BuiltProblem build_Rplus(const QpInstance& inst) {
  inst.check_well_formed();
  BuiltProblem bp;
  bp.kind = ProblemKind::Rplus;
  bp.map = add_lifted_vars(bp.prog, inst);
  add_objective(bp.prog, inst, *bp.map.x, *bp.map.X);
  add_fifteen_groups(bp.prog, inst, bp.map);
  return bp;
}

BuiltProblem build_SR(const QpInstance& inst) {
  inst.check_well_formed();
  BuiltProblem bp = build_R(inst);
  bp.kind = ProblemKind::SR;
  ConicProgram& prog = bp.prog;
  const int n = inst.n;
  const int blk = prog.add_psd_block(n + 1, "M");
  bp.map.psd_block = blk;
  // M11 = 1, M[2..,1] = x, M[2..,2..] = X.
  {
    LinExpr e;
    e.add(prog.psd_entry(blk, 0, 0), 1.0);
    prog.add_eq(std::move(e), 1.0, "M_corner");
  }
  for (int i = 0; i < n; ++i) {
    LinExpr e;
    e.add(prog.psd_entry(blk, 0, 1 + i), 1.0);
    e.add((*bp.map.x)(i), -1.0);
    prog.add_eq(std::move(e), 0.0, "M_x[" + std::to_string(i) + "]");
  }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      LinExpr e;
      e.add(prog.psd_entry(blk, 1 + i, 1 + j), 1.0);
      e.add((*bp.map.X)(i, j), -1.0);
      prog.add_eq(std::move(e), 0.0, "M_X[" + std::to_string(i) + "," + std::to_string(j) + "]");
    }
  return bp;
}

namespace {

// Affine expression of M(T)_ab where M = U T U' and T is a psd block.
LinExpr utu_entry(const ConicProgram& prog, int blk, const Eigen::MatrixXd& U, int a, int b) {
  const int r = static_cast<int>(U.cols());
  LinExpr e;
  for (int s = 0; s < r; ++s) {
    e.add(prog.psd_entry(blk, s, s), U(a, s) * U(b, s));
    for (int t = s + 1; t < r; ++t)
      e.add(prog.psd_entry(blk, s, t), U(a, s) * U(b, t) + U(a, t) * U(b, s));
  }
  return e;
}

}  // namespace

BuiltProblem build_SRR(const QpInstance& inst, const FaceData& face) {
  inst.check_well_formed();
  BuiltProblem bp;
  bp.kind = ProblemKind::SRR;
  ConicProgram& prog = bp.prog;
  const int n = inst.n, m = inst.m;
  const int r = n - inst.p + 1;
  const int blk = prog.add_psd_block(r, "T");
  bp.map.psd_block = blk;
  const Eigen::MatrixXd& U = face.U;

  // x and X are eliminated: entries of M = U T U'.
  auto x_expr = [&](int i) { return utu_entry(prog, blk, U, 1 + i, 0); };
  auto X_expr = [&](int i, int j) { return utu_entry(prog, blk, U, 1 + i, 1 + j); };

  {
    // M11 = T11 = 1 (the first row of U is (1, 0)).
    LinExpr e = utu_entry(prog, blk, U, 0, 0);
    bp.map.corner_eq = static_cast<int>(prog.eqs().size());
    prog.add_eq(std::move(e), 1.0, "M_corner");
  }
  bp.map.gx_row = static_cast<int>(prog.ineqs().size());
  for (int j = 0; j < m; ++j) {
    LinExpr e;
    for (int i = 0; i < n; ++i) {
      LinExpr xi = x_expr(i);
      for (auto& [var, coef] : xi.terms) e.add(var, inst.G(i, j) * coef);
    }
    prog.add_ineq(std::move(e), inst.g[j], "Gx[" + std::to_string(j) + "]");
  }
  bp.map.prod_row = static_cast<int>(prog.ineqs().size());
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      LinExpr e;
      Eigen::MatrixXd C = -inst.G.col(a) * inst.G.col(b).transpose();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (C(i, j) == 0.0) continue;
          LinExpr xij = X_expr(i, j);
          for (auto& [var, coef] : xij.terms) e.add(var, C(i, j) * coef);
        }
      for (int i = 0; i < n; ++i) {
        const double cx = inst.g[b] * inst.G(i, a) + inst.g[a] * inst.G(i, b);
        if (cx == 0.0) continue;
        LinExpr xi = x_expr(i);
        for (auto& [var, coef] : xi.terms) e.add(var, cx * coef);
      }
      prog.add_ineq(std::move(e), inst.g[a] * inst.g[b],
                    "prod[" + std::to_string(a) + "," + std::to_string(b) + "]");
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double q = 0.5 * inst.Q(i, j);
      if (q == 0.0) continue;
      LinExpr xij = X_expr(i, j);
      for (auto& [var, coef] : xij.terms) prog.objective.add(var, q * coef);
    }
  for (int i = 0; i < n; ++i) {
    if (inst.c[i] == 0.0) continue;
    LinExpr xi = x_expr(i);
    for (auto& [var, coef] : xi.terms) prog.objective.add(var, inst.c[i] * coef);
  }
  return bp;
}

BuiltProblem build_SRRD(const QpInstance& inst, const FaceData& face) {
  inst.check_well_formed();
  BuiltProblem bp;
  bp.kind = ProblemKind::SRRD;
  bp.value_sign = -1.0;
  ConicProgram& prog = bp.prog;
  const int n = inst.n, m = inst.m;
  const int r = n - inst.p + 1;

  bp.map.u = add_vector(prog, "u", m);
  bp.map.S = add_matrix(prog, "S", m, m, true);
  bp.map.beta = prog.add_scalar_var("beta");
  bp.map.b = add_vector(prog, "b", n);
  bp.map.B = add_matrix(prog, "B", n, n, true);
  const int blk = prog.add_psd_block(r, "E");
  bp.map.psd_block = blk;
  const IndexBlock &u = *bp.map.u, &S = *bp.map.S, &b = *bp.map.b, &B = *bp.map.B;
  const int beta = *bp.map.beta;

  // max -u'g - (1/2) g'Sg - (1/2) beta, stored negated.
  for (int a = 0; a < m; ++a) prog.objective.add(u(a), inst.g[a]);
  add_sym_coefs(prog.objective, (0.5 * inst.g * inst.g.transpose()).eval(), S);
  prog.objective.add(beta, 0.5);

  // -Gu - GSg + b = c
  for (int i = 0; i < n; ++i) {
    LinExpr e;
    for (int a = 0; a < m; ++a) e.add(u(a), -inst.G(i, a));
    add_sym_coefs(e, (-inst.G.row(i).transpose() * inst.g.transpose()).eval(), S);
    e.add(b(i), 1.0);
    prog.add_eq(std::move(e), inst.c[i], "dual_c[" + std::to_string(i) + "]");
  }
  // GSG' + B = Q
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      LinExpr e;
      add_sym_coefs(e, (inst.G.row(i).transpose() * inst.G.row(j)).eval(), S);
      e.add(B(i, j), 1.0);
      prog.add_eq(std::move(e), inst.Q(i, j),
                  "dual_Q[" + std::to_string(i) + "," + std::to_string(j) + "]");
    }
  for (int a = 0; a < m; ++a) {
    LinExpr e;
    e.add(u(a), -1.0);
    prog.add_ineq(std::move(e), 0.0, "u_sign[" + std::to_string(a) + "]");
  }
  for (int a = 0; a < m; ++a)
    for (int c2 = a; c2 < m; ++c2) {
      LinExpr e;
      e.add(S(a, c2), -1.0);
      prog.add_ineq(std::move(e), 0.0,
                    "S_sign[" + std::to_string(a) + "," + std::to_string(c2) + "]");
    }
  // Dual-cone membership through the face: E = U' [beta b'; b B] U >= 0.
  const Eigen::MatrixXd& U = face.U;
  for (int s = 0; s < r; ++s)
    for (int t = s; t < r; ++t) {
      LinExpr e;
      e.add(prog.psd_entry(blk, s, t), 1.0);
      e.add(beta, -U(0, s) * U(0, t));
      for (int i = 0; i < n; ++i)
        e.add(b(i), -(U(0, s) * U(1 + i, t) + U(1 + i, s) * U(0, t)));
      for (int i = 0; i < n; ++i) {
        e.add(B(i, i), -U(1 + i, s) * U(1 + i, t));
        for (int j = i + 1; j < n; ++j)
          e.add(B(i, j), -(U(1 + i, s) * U(1 + j, t) + U(1 + j, s) * U(1 + i, t)));
      }
      prog.add_eq(std::move(e), 0.0, "Kstar[" + std::to_string(s) + "," + std::to_string(t) + "]");
    }
  return bp;
}

BuiltProblem build_SRplus(const QpInstance& inst) {
  inst.check_well_formed();
  BuiltProblem bp = build_Rplus(inst);
  bp.kind = ProblemKind::SRplus;
  ConicProgram& prog = bp.prog;
  const int n = inst.n, m = inst.m, p = inst.p;
  const int side = 1 + n + m + p;
  const int blk = prog.add_psd_block(side, "N");
  bp.map.psd_block = blk;

  // Bordered moment matrix: corner 1, first column (x, y, z), interior
  // blocks the lifted matrices (Schur form of the big psd constraint).
  auto var_of = [&](int t) -> int {
    if (t < n) return (*bp.map.x)(t);
    if (t < n + m) return (*bp.map.y)(t - n);
    return (*bp.map.z)(t - n - m);
  };
  auto mat_entry = [&](int s, int t) -> int {
    if (s > t) std::swap(s, t);
    if (s < n) {
      if (t < n) return (*bp.map.X)(s, t);
      if (t < n + m) return (*bp.map.Mxy)(s, t - n);
      return (*bp.map.Mxz)(s, t - n - m);
    }
    if (s < n + m) {
      if (t < n + m) return (*bp.map.Y)(s - n, t - n);
      return (*bp.map.Myz)(s - n, t - n - m);
    }
    return (*bp.map.Z)(s - n - m, t - n - m);
  };

  {
    LinExpr e;
    e.add(prog.psd_entry(blk, 0, 0), 1.0);
    prog.add_eq(std::move(e), 1.0, "N_corner");
  }
  for (int t = 0; t < side - 1; ++t) {
    LinExpr e;
    e.add(prog.psd_entry(blk, 0, 1 + t), 1.0);
    e.add(var_of(t), -1.0);
    prog.add_eq(std::move(e), 0.0, "N_lin[" + std::to_string(t) + "]");
  }
  for (int s = 0; s < side - 1; ++s)
    for (int t = s; t < side - 1; ++t) {
      LinExpr e;
      e.add(prog.psd_entry(blk, 1 + s, 1 + t), 1.0);
      e.add(mat_entry(s, t), -1.0);
      prog.add_eq(std::move(e), 0.0,
                  "N_mat[" + std::to_string(s) + "," + std::to_string(t) + "]");
    }
  return bp;
}

BuiltProblem build_problem(const QpInstance& inst, ProblemKind kind, const FaceData* face) {
  switch (kind) {
    case ProblemKind::R:
      return build_R(inst);
    case ProblemKind::RD:
      return build_RD(inst);
    case ProblemKind::Rplus:
      return build_Rplus(inst);
    case ProblemKind::SR:
      return build_SR(inst);
    case ProblemKind::SRR:
      if (!face) throw Error("build_problem: SRR requires face data");
      return build_SRR(inst, *face);
    case ProblemKind::SRRD:
      if (!face) throw Error("build_problem: SRRD requires face data");
      return build_SRRD(inst, *face);
    default:
      return build_SRplus(inst);
  }
}

ExtReal problem_value(const BuiltProblem& bp, const SolveResult& res) {
  switch (res.status) {
    case SolveStatus::Optimal:
      return bp.value_sign > 0 ? res.objective : -res.objective;
    case SolveStatus::Unbounded:
      return bp.value_sign > 0 ? ExtReal::neg_inf() : ExtReal::pos_inf();
    case SolveStatus::Infeasible:
      return bp.value_sign > 0 ? ExtReal::pos_inf() : ExtReal::neg_inf();
    default:
      return ExtReal::finite(std::numeric_limits<double>::quiet_NaN());
  }
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> read_xX(const BuiltProblem& bp,
                                                    const SolveResult& res,
                                                    const FaceData* face) {
  if (bp.kind == ProblemKind::SRR) {
    if (!face) throw Error("read_xX: SRR requires face data");
    const int r = face->n - face->p + 1;
    Eigen::MatrixXd T(r, r);
    for (int s = 0; s < r; ++s)
      for (int t = s; t < r; ++t)
        T(s, t) = T(t, s) = res.primal[bp.prog.psd_entry(*bp.map.psd_block, s, t)];
    Eigen::MatrixXd M = face->U * T * face->U.transpose();
    return {M.block(1, 0, face->n, 1), M.block(1, 1, face->n, face->n)};
  }
  if (!bp.map.x || !bp.map.X) throw Error("read_xX: problem has no (x, X)");
  return {bp.map.x->read_vector(res.primal), bp.map.X->read_matrix(res.primal)};
}

}  // namespace qpr
