#include "qprelax/certify.hpp"

#include <Eigen/Dense>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "qprelax/errors.hpp"

namespace qpr {

void ViolationReport::add(const std::string& group, double violation) {
  entries.push_back({group, violation, violation <= tol});
}

void ViolationReport::finish() {
  overall = 0.0;
  for (const auto& e : entries) overall = std::max(overall, e.max_violation);
  pass = overall <= tol;
}

std::string ViolationReport::to_text() const {
  std::ostringstream os;
  for (const auto& e : entries)
    os << e.group << "\t" << e.max_violation << "\t" << (e.pass ? "pass" : "FAIL") << "\n";
  os << "overall\t" << overall << "\t" << (pass ? "pass" : "FAIL") << "\n";
  return os.str();
}

namespace {

double inf_norm(const Eigen::MatrixXd& A) {
  return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff();
}

double neg_part(const Eigen::MatrixXd& A) {
  return A.size() == 0 ? 0.0 : std::max(0.0, -A.minCoeff());
}

Eigen::MatrixXd product_matrix(const QpInstance& inst, const Eigen::VectorXd& x,
                               const Eigen::MatrixXd& X) {
  return inst.G.transpose() * X * inst.G - inst.G.transpose() * x * inst.g.transpose() -
         inst.g * x.transpose() * inst.G + inst.g * inst.g.transpose();
}

}  // namespace

ViolationReport check_kkt(const QpInstance& inst, const KktPoint& pt, double tol) {
  ViolationReport rep;
  rep.tol = tol;
  rep.add("kkt1_stationarity",
          inf_norm(inst.Q * pt.x + inst.c + inst.G * pt.y + inst.H * pt.z));
  rep.add("kkt2_ineq", neg_part(inst.g - inst.G.transpose() * pt.x));
  rep.add("kkt3_eq", inf_norm(inst.H.transpose() * pt.x - inst.h));
  rep.add("kkt4_compl", std::abs(pt.y.dot(inst.g - inst.G.transpose() * pt.x)));
  rep.add("kkt5_sign", neg_part(pt.y));
  rep.add("kktobj_identity",
          std::abs(pt.x.dot(inst.Q * pt.x) + inst.c.dot(pt.x) + inst.g.dot(pt.y) +
                   inst.h.dot(pt.z)));
  rep.finish();
  return rep;
}

ViolationReport check_rlt_opt(const QpInstance& inst, const Eigen::VectorXd& x,
                              const Eigen::MatrixXd& X, const RltDualCert& cert,
                              double tol) {
  ViolationReport rep;
  rep.tol = tol;
  rep.add("opt_c", inf_norm(-inst.G * cert.u + inst.H * cert.w -
                            cert.R.transpose() * inst.h - inst.G * cert.S * inst.g -
                            inst.c));
  rep.add("opt_Q", inf_norm(cert.R.transpose() * inst.H.transpose() + inst.H * cert.R +
                            inst.G * cert.S * inst.G.transpose() - inst.Q));
  rep.add("opt_u", neg_part(cert.u));
  rep.add("opt_S", neg_part(cert.S));
  rep.add("opt_cs1", std::abs(cert.u.dot(inst.g - inst.G.transpose() * x)));
  rep.add("opt_cs2", std::abs((cert.S.array() * product_matrix(inst, x, X).array()).sum()));
  rep.finish();
  return rep;
}

ViolationReport check_sdp_opt(const QpInstance& inst, const FaceData& face,
                              const Eigen::VectorXd& x, const Eigen::MatrixXd& X,
                              const SdpDualCert& cert, double tol) {
  const int n = inst.n;
  ViolationReport rep;
  rep.tol = tol;
  rep.add("opt_c_srr",
          inf_norm(-inst.G * cert.u - inst.G * cert.S * inst.g + cert.b - inst.c));
  rep.add("opt_Q_srr",
          inf_norm(inst.G * cert.S * inst.G.transpose() + cert.B - inst.Q));
  rep.add("opt_u_srr", neg_part(cert.u));
  rep.add("opt_S_srr", neg_part(cert.S));

  Eigen::MatrixXd L(n + 1, n + 1);
  L(0, 0) = cert.beta;
  L.block(0, 1, 1, n) = cert.b.transpose();
  L.block(1, 0, n, 1) = cert.b;
  L.block(1, 1, n, n) = cert.B;
  rep.add("opt_Bb_Kstar",
          std::max(0.0, -min_eig(face.U.transpose() * L * face.U)));

  rep.add("opt_cs1_srr", std::abs(cert.u.dot(inst.g - inst.G.transpose() * x)));
  rep.add("opt_cs2_srr",
          std::abs((cert.S.array() * product_matrix(inst, x, X).array()).sum()));

  Eigen::MatrixXd Mhat(n + 1, n + 1);
  Mhat(0, 0) = 1.0;
  Mhat.block(0, 1, 1, n) = x.transpose();
  Mhat.block(1, 0, n, 1) = x;
  Mhat.block(1, 1, n, n) = X;
  rep.add("opt_sc3_srr", std::abs((L.array() * Mhat.array()).sum()));
  rep.finish();
  return rep;
}

ZwRecovery recover_zW(const QpInstance& inst, const FaceData& face,
                      const Eigen::VectorXd& x, const Eigen::MatrixXd& X,
                      const SdpDualCert& cert, double tol) {
  (void)face;
  ZwRecovery out;
  const Eigen::MatrixXd pinv = h_pinv_factor(inst.H);  // p x n, empty when p = 0
  out.z = -(pinv * (cert.B * x + cert.b));
  out.W = pinv * (cert.B * X + cert.b * x.transpose());

  out.residuals.tol = tol;
  out.residuals.add("rel_betar",
                    std::abs(-cert.b.dot(x) + inst.h.dot(out.z) - cert.beta));
  out.residuals.add("rel_zr", inf_norm(cert.B * x + cert.b + inst.H * out.z));
  out.residuals.add("rel_Wr",
                    inf_norm(cert.B * X + cert.b * x.transpose() - inst.H * out.W));
  out.residuals.add("rel_csr",
                    std::abs((cert.B.array() * (X - x * x.transpose()).array()).sum()));
  out.residuals.finish();
  if (!out.residuals.pass)
    throw ResidualTooLarge("recover_zW: max residual " + std::to_string(out.residuals.overall));
  return out;
}

LiftedPoint lift_rlt(const QpInstance& inst, const Eigen::VectorXd& x,
                     const Eigen::MatrixXd& X, const RltDualCert& cert) {
  LiftedPoint pt;
  pt.x = x;
  pt.X = X;
  const Eigen::VectorXd slack = inst.g - inst.G.transpose() * x;
  const Eigen::MatrixXd prod = product_matrix(inst, x, X);

  pt.y = cert.S * slack + cert.u;
  pt.z = -cert.R * x - cert.w;
  pt.Y = cert.S * prod * cert.S + cert.S * slack * cert.u.transpose() +
         cert.u * slack.transpose() * cert.S + cert.u * cert.u.transpose();
  pt.Z = cert.R * X * cert.R.transpose() + cert.R * x * cert.w.transpose() +
         cert.w * x.transpose() * cert.R.transpose() + cert.w * cert.w.transpose();
  pt.Mxy = x * inst.g.transpose() * cert.S - X * inst.G * cert.S + x * cert.u.transpose();
  pt.Mxz = -X * cert.R.transpose() - x * cert.w.transpose();
  pt.Myz = -cert.S * inst.g * x.transpose() * cert.R.transpose() -
           cert.S * inst.g * cert.w.transpose() +
           cert.S * inst.G.transpose() * X * cert.R.transpose() +
           cert.S * inst.G.transpose() * x * cert.w.transpose() -
           cert.u * x.transpose() * cert.R.transpose() - cert.u * cert.w.transpose();
  return pt;
}

LiftedPoint lift_sdprlt(const QpInstance& inst, const FaceData& face,
                        const Eigen::VectorXd& x, const Eigen::MatrixXd& X,
                        const SdpDualCert& cert) {
  (void)face;
  LiftedPoint pt;
  pt.x = x;
  pt.X = X;
  const Eigen::VectorXd slack = inst.g - inst.G.transpose() * x;
  const Eigen::MatrixXd prod = product_matrix(inst, x, X);
  const Eigen::MatrixXd pinv = h_pinv_factor(inst.H);       // (H'H)^{-1} H', p x n
  const Eigen::MatrixXd pinvT = pinv.transpose();           // H (H'H)^{-1}, n x p

  pt.y = cert.S * slack + cert.u;
  pt.z = -(pinv * (cert.B * x + cert.b));
  pt.Y = cert.S * prod * cert.S + cert.S * slack * cert.u.transpose() +
         cert.u * slack.transpose() * cert.S + cert.u * cert.u.transpose();
  pt.Z = pinv *
         (cert.B * X * cert.B.transpose() + cert.B * x * cert.b.transpose() +
          cert.b * x.transpose() * cert.B.transpose() + cert.b * cert.b.transpose()) *
         pinvT;
  pt.Mxy = x * inst.g.transpose() * cert.S - X * inst.G * cert.S + x * cert.u.transpose();
  pt.Mxz = -X * cert.B.transpose() * pinvT - x * cert.b.transpose() * pinvT;
  pt.Myz = -cert.S * inst.g * x.transpose() * cert.B.transpose() * pinvT -
           cert.S * inst.g * cert.b.transpose() * pinvT +
           cert.S * inst.G.transpose() * X * cert.B.transpose() * pinvT +
           cert.S * inst.G.transpose() * x * cert.b.transpose() * pinvT -
           cert.u * x.transpose() * cert.B.transpose() * pinvT -
           cert.u * cert.b.transpose() * pinvT;
  return pt;
}

namespace {

void add_fifteen_group_residuals(ViolationReport& rep, const QpInstance& inst,
                                 const LiftedPoint& pt) {
  rep.add("g1_Gx", neg_part(inst.g - inst.G.transpose() * pt.x));
  rep.add("g2_Hx", inf_norm(inst.H.transpose() * pt.x - inst.h));
  rep.add("g3_HX",
          inf_norm(inst.H.transpose() * pt.X - inst.h * pt.x.transpose()));
  rep.add("g4_products", neg_part(product_matrix(inst, pt.x, pt.X)));
  rep.add("g5_stationarity",
          inf_norm(inst.Q * pt.x + inst.c + inst.G * pt.y + inst.H * pt.z));
  rep.add("g6_HMxy",
          inf_norm(inst.H.transpose() * pt.Mxy - inst.h * pt.y.transpose()));
  rep.add("g7_HMxz",
          inf_norm(inst.H.transpose() * pt.Mxz - inst.h * pt.z.transpose()));
  rep.add("g8_QX", inf_norm(inst.Q * pt.X + inst.c * pt.x.transpose() +
                            inst.G * pt.Mxy.transpose() + inst.H * pt.Mxz.transpose()));
  rep.add("g9_QMxy", inf_norm(inst.Q * pt.Mxy + inst.c * pt.y.transpose() +
                              inst.G * pt.Y + inst.H * pt.Myz.transpose()));
  rep.add("g10_QMxz", inf_norm(inst.Q * pt.Mxz + inst.c * pt.z.transpose() +
                               inst.G * pt.Myz + inst.H * pt.Z));
  const Eigen::MatrixXd compl_mat =
      pt.y * inst.g.transpose() - pt.Mxy.transpose() * inst.G;
  rep.add("g11_compl_diag", inf_norm(compl_mat.diagonal()));
  rep.add("g12_compl_mat", neg_part(compl_mat));
  rep.add("g13_y_sign", neg_part(pt.y));
  rep.add("g14_Y_sign", neg_part(pt.Y));
  rep.add("g15_obj_identity",
          std::abs((inst.Q.array() * pt.X.array()).sum() + inst.c.dot(pt.x) +
                   inst.g.dot(pt.y) + inst.h.dot(pt.z)));
}

Eigen::MatrixXd bordered_moment_matrix(const QpInstance& inst, const LiftedPoint& pt) {
  const int n = inst.n, m = inst.m, p = inst.p;
  const int d = n + m + p;
  Eigen::MatrixXd N(d + 1, d + 1);
  N(0, 0) = 1.0;
  Eigen::VectorXd v(d);
  v << pt.x, pt.y, pt.z;
  N.block(0, 1, 1, d) = v.transpose();
  N.block(1, 0, d, 1) = v;
  N.block(1, 1, n, n) = pt.X;
  N.block(1, 1 + n, n, m) = pt.Mxy;
  N.block(1, 1 + n + m, n, p) = pt.Mxz;
  N.block(1 + n, 1, m, n) = pt.Mxy.transpose();
  N.block(1 + n, 1 + n, m, m) = pt.Y;
  N.block(1 + n, 1 + n + m, m, p) = pt.Myz;
  N.block(1 + n + m, 1, p, n) = pt.Mxz.transpose();
  N.block(1 + n + m, 1 + n, p, m) = pt.Myz.transpose();
  N.block(1 + n + m, 1 + n + m, p, p) = pt.Z;
  return N;
}

}  // namespace

ViolationReport check_feasible_Rplus(const QpInstance& inst, const LiftedPoint& pt,
                                     double tol) {
  ViolationReport rep;
  rep.tol = tol;
  add_fifteen_group_residuals(rep, inst, pt);
  rep.finish();
  return rep;
}

ViolationReport check_feasible_SRplus(const QpInstance& inst, const LiftedPoint& pt,
                                      double tol) {
  ViolationReport rep;
  rep.tol = tol;
  add_fifteen_group_residuals(rep, inst, pt);
  rep.add("g16_psd", std::max(0.0, -min_eig(bordered_moment_matrix(inst, pt))));
  rep.finish();
  return rep;
}

ViolationReport check_feasible_R(const QpInstance& inst, const Eigen::VectorXd& x,
                                 const Eigen::MatrixXd& X, double tol) {
  ViolationReport rep;
  rep.tol = tol;
  rep.add("g1_Gx", neg_part(inst.g - inst.G.transpose() * x));
  rep.add("g2_Hx", inf_norm(inst.H.transpose() * x - inst.h));
  rep.add("g3_HX", inf_norm(inst.H.transpose() * X - inst.h * x.transpose()));
  rep.add("g4_products", neg_part(product_matrix(inst, x, X)));
  rep.finish();
  return rep;
}

ViolationReport check_feasible_SR(const QpInstance& inst, const Eigen::VectorXd& x,
                                  const Eigen::MatrixXd& X, double tol) {
  ViolationReport rep = check_feasible_R(inst, x, X, tol);
  Eigen::MatrixXd M(inst.n + 1, inst.n + 1);
  M(0, 0) = 1.0;
  M.block(0, 1, 1, inst.n) = x.transpose();
  M.block(1, 0, inst.n, 1) = x;
  M.block(1, 1, inst.n, inst.n) = X;
  rep.add("g5_psd", std::max(0.0, -min_eig(M)));
  rep.finish();
  return rep;
}

std::vector<KktPoint> find_kkt_points_smallscale(const QpInstance& inst, double tol) {
  inst.check_well_formed();
  const int n = inst.n, m = inst.m, p = inst.p;
  if (n > 3 || m > 6 || p > 2)
    throw TooLarge("find_kkt_points_smallscale: limits are n <= 3, m <= 6, p <= 2");

  std::vector<KktPoint> points;
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> active;
    for (int a = 0; a < m; ++a)
      if (mask & (1 << a)) active.push_back(a);
    const int na = static_cast<int>(active.size());
    const int dim = n + na + p;

    // Stationarity with off-pattern multipliers fixed to zero, active
    // inequalities tight, equalities held.
    Eigen::MatrixXd Asys = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    Asys.block(0, 0, n, n) = inst.Q;
    for (int t = 0; t < na; ++t) Asys.block(0, n + t, n, 1) = inst.G.col(active[t]);
    Asys.block(0, n + na, n, p) = inst.H;
    rhs.head(n) = -inst.c;
    for (int t = 0; t < na; ++t) {
      Asys.block(n + t, 0, 1, n) = inst.G.col(active[t]).transpose();
      rhs[n + t] = inst.g[active[t]];
    }
    Asys.block(n + na, 0, p, n) = inst.H.transpose();
    rhs.tail(p) = inst.h;

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Asys);
    Eigen::VectorXd sol = cod.solve(rhs);  // min-norm representative
    if ((Asys * sol - rhs).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + rhs.cwiseAbs().maxCoeff()))
      continue;  // inconsistent pattern

    KktPoint pt;
    pt.x = sol.head(n);
    pt.y = Eigen::VectorXd::Zero(m);
    for (int t = 0; t < na; ++t) pt.y[active[t]] = sol[n + t];
    pt.z = sol.tail(p);
    if (!check_kkt(inst, pt, tol).pass) continue;

    bool dup = false;
    for (const auto& q : points)
      if ((q.x - pt.x).cwiseAbs().maxCoeff() <= 1e-6) {
        dup = true;
        break;
      }
    if (!dup) points.push_back(std::move(pt));
  }
  return points;
}

RltDualCert extract_rlt_cert(const QpInstance& inst, const BuiltProblem& rd,
                             const SolveResult& res) {
  if (rd.kind != ProblemKind::RD) throw Error("extract_rlt_cert: expected an RD problem");
  RltDualCert cert;
  cert.u = rd.map.u->read_vector(res.primal);
  cert.w = rd.map.w->read_vector(res.primal);
  cert.R = rd.map.R->read_matrix(res.primal);
  cert.S = rd.map.S->read_matrix(res.primal);
  (void)inst;
  return cert;
}

SdpDualCert extract_sdp_cert(const QpInstance& inst, const BuiltProblem& srrd,
                             const SolveResult& res) {
  if (srrd.kind != ProblemKind::SRRD)
    throw Error("extract_sdp_cert: expected an SRRD problem");
  SdpDualCert cert;
  cert.u = srrd.map.u->read_vector(res.primal);
  cert.S = srrd.map.S->read_matrix(res.primal);
  cert.beta = res.primal[*srrd.map.beta];
  cert.b = srrd.map.b->read_vector(res.primal);
  cert.B = srrd.map.B->read_matrix(res.primal);
  (void)inst;
  return cert;
}

namespace {

// Unknown layout for the crossover system: a symmetric block of side k
// packs k(k+1)/2 entries (upper triangle, row-major).
int sym_size(int k) { return k * (k + 1) / 2; }

Eigen::MatrixXd unpack_sym(const Eigen::VectorXd& v, int off, int k) {
  Eigen::MatrixXd M(k, k);
  int r = off;
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) M(i, j) = M(j, i) = v[r++];
  return M;
}

void pack_sym(const Eigen::MatrixXd& M, int off, Eigen::VectorXd* v) {
  int r = off;
  for (int i = 0; i < M.rows(); ++i)
    for (int j = i; j < M.cols(); ++j) (*v)[r++] = M(i, j);
}

}  // namespace

SdpOptPair purify_sdp_pair(const QpInstance& inst, const FaceData& face,
                           const BuiltProblem& srr, const SolveResult& res) {
  SdpOptPair out;
  out.ok = false;
  const bool trace = std::getenv("QPRELAX_PURIFY_TRACE") != nullptr;
  if (res.status != SolveStatus::Optimal || res.psd_duals.empty()) return out;
  const int n = inst.n, m = inst.m;
  const int r = n - inst.p + 1;
  const Eigen::MatrixXd& U = face.U;

  // Raw iterates.
  Eigen::MatrixXd That(r, r);
  for (int s = 0; s < r; ++s)
    for (int t = s; t < r; ++t)
      That(s, t) = That(t, s) = res.primal[srr.prog.psd_entry(*srr.map.psd_block, s, t)];
  Eigen::MatrixXd Mhat = U * That * U.transpose();
  Eigen::VectorXd xhat = Mhat.block(1, 0, n, 1);
  Eigen::MatrixXd Xhat = Mhat.block(1, 1, n, n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(That);
  if (es.info() != Eigen::Success) return out;
  const Eigen::VectorXd evals = es.eigenvalues();
  const double lam_max = std::max(evals.maxCoeff(), 1e-12);
  int r1_default = 0;
  for (int i = 0; i < r; ++i)
    if (evals[i] > 1e-5 * std::max(1.0, lam_max)) ++r1_default;
  if (r1_default == 0) r1_default = 1;

  // Rows the optimal face keeps tight, read from the iterate's slacks.
  const Eigen::VectorXd slack = inst.g - inst.G.transpose() * xhat;
  std::vector<int> tight_g;
  for (int a = 0; a < m; ++a)
    if (slack[a] < 1e-4) tight_g.push_back(a);
  const Eigen::MatrixXd prodhat = product_matrix(inst, xhat, Xhat);
  std::vector<std::pair<int, int>> tight_p;
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b)
      if (prodhat(a, b) < 1e-4) tight_p.emplace_back(a, b);
  const int ng = static_cast<int>(tight_g.size());
  const int np = static_cast<int>(tight_p.size());

  Eigen::MatrixXd L0 = Eigen::MatrixXd::Zero(n + 1, n + 1);
  L0.block(0, 1, 1, n) = inst.c.transpose();
  L0.block(1, 0, n, 1) = inst.c;
  L0.block(1, 1, n, n) = inst.Q;
  auto bordered = [&](const Eigen::VectorXd& bvec, const Eigen::MatrixXd& Bmat) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n + 1, n + 1);
    L.block(0, 1, 1, n) = bvec.transpose();
    L.block(1, 0, n, 1) = bvec;
    L.block(1, 1, n, n) = Bmat;
    return L;
  };
  Eigen::MatrixXd Lbeta = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Lbeta(0, 0) = 1.0;

  // Candidate ranks of the moment-block face, most plausible first; every
  // candidate is fully verified before being accepted.
  std::vector<int> candidates;
  for (int d : {0, -1, 1, -2}) {
    const int cand = r1_default + d;
    if (cand >= 1 && cand <= r) candidates.push_back(cand);
  }

  for (const int r1 : candidates) {
    // ---- primal: min-norm correction within the rank-r1 face nailing
    //      the tight rows. The face basis itself carries O(sqrt(mu))
    //      rotation error, so alternate between correcting within the
    //      span and re-extracting the span from the corrected point.
    const int nfull = sym_size(r);
    const double nu_hat = res.objective.value();
    auto affine_residual = [&](const Eigen::MatrixXd& T) {
      Eigen::MatrixXd M = U * T * U.transpose();
      Eigen::VectorXd xv = M.block(1, 0, n, 1);
      Eigen::MatrixXd Xv = M.block(1, 1, n, n);
      Eigen::VectorXd rv(2 + ng + np);
      int rr = 0;
      rv[rr++] = M(0, 0) - 1.0;
      // Pinning the objective keeps the projection on the optimal face.
      rv[rr++] =
          0.5 * (inst.Q.array() * Xv.array()).sum() + inst.c.dot(xv) - nu_hat * M(0, 0);
      for (int i = 0; i < ng; ++i)
        rv[rr++] = inst.G.col(tight_g[i]).dot(xv) - inst.g[tight_g[i]];
      const Eigen::MatrixXd pm = product_matrix(inst, xv, Xv);
      for (int i = 0; i < np; ++i) rv[rr++] = pm(tight_p[i].first, tight_p[i].second);
      return rv;
    };
    Eigen::MatrixXd Jfull(2 + ng + np, nfull);
    {
      const Eigen::VectorXd rzero = affine_residual(Eigen::MatrixXd::Zero(r, r));
      for (int c = 0; c < nfull; ++c) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(nfull);
        e[c] = 1.0;
        Jfull.col(c) = affine_residual(unpack_sym(e, 0, r)) - rzero;
      }
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> codfull(Jfull);

    Eigen::MatrixXd Tfull = That;
    double presid = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 15; ++round) {
      // Projection onto the affine set (tight rows, corner, objective).
      Eigen::VectorXd corr = codfull.solve(-affine_residual(Tfull));
      Eigen::VectorXd tv(nfull);
      pack_sym(Tfull, 0, &tv);
      tv += corr;
      Tfull = unpack_sym(tv, 0, r);
      // Projection onto the rank-r1 psd matrices.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esr(Tfull);
      Tfull = esr.eigenvectors().rightCols(r1) *
              esr.eigenvalues().tail(r1).cwiseMax(0.0).asDiagonal() *
              esr.eigenvectors().rightCols(r1).transpose();
      presid = affine_residual(Tfull).cwiseAbs().maxCoeff();
      if (!Tfull.allFinite() || presid < 1e-12) break;
    }
    if (!Tfull.allFinite()) continue;
    // Gauss-Newton on the factorized form T = W W' finishes the linear
    // alternation quadratically and keeps T psd of rank <= r1.
    {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esr(Tfull);
      Eigen::MatrixXd W = esr.eigenvectors().rightCols(r1) *
                          esr.eigenvalues().tail(r1).cwiseMax(0.0).cwiseSqrt().asDiagonal();
      const int nw = r * r1;
      for (int gn = 0; gn < 10 && presid > 1e-12; ++gn) {
        Eigen::VectorXd rv = affine_residual(W * W.transpose());
        Eigen::MatrixXd Jw(rv.size(), nw);
        const Eigen::VectorXd rzero = affine_residual(Eigen::MatrixXd::Zero(r, r));
        for (int c = 0; c < nw; ++c) {
          Eigen::MatrixXd E = Eigen::MatrixXd::Zero(r, r1);
          E(c % r, c / r) = 1.0;
          const Eigen::MatrixXd dT = W * E.transpose() + E * W.transpose();
          Jw.col(c) = affine_residual(dT) - rzero;
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> codw(Jw);
        Eigen::VectorXd dw = codw.solve(-rv);
        for (int c = 0; c < nw; ++c) W(c % r, c / r) += dw[c];
        presid = affine_residual(W * W.transpose()).cwiseAbs().maxCoeff();
      }
      Tfull = W * W.transpose();
    }
    if (!Tfull.allFinite() || presid > 1e-9) {
      if (trace) std::fprintf(stderr, "purify: r1=%d primal residual %g\n", r1, presid);
      continue;
    }
    Eigen::MatrixXd M = U * Tfull * U.transpose();
    Eigen::VectorXd x = M.block(1, 0, n, 1);
    Eigen::MatrixXd X = M.block(1, 1, n, n);
    if (check_feasible_SR(inst, x, X, 1e-7).overall > 1e-7) {
      if (trace)
        std::fprintf(stderr, "purify: r1=%d SR feasibility %g\n", r1,
                     check_feasible_SR(inst, x, X, 1e-7).overall);
      continue;
    }

    // Exact structure of the purified point: its tight rows and the exact
    // range of its moment block drive the dual system.
    const Eigen::VectorXd pslack = inst.g - inst.G.transpose() * x;
    const Eigen::MatrixXd pprod = product_matrix(inst, x, X);
    std::vector<int> sup_g;
    for (int a = 0; a < m; ++a)
      if (pslack[a] <= 1e-8) sup_g.push_back(a);
    std::vector<std::pair<int, int>> sup_p;
    for (int a = 0; a < m; ++a)
      for (int b = a; b < m; ++b)
        if (pprod(a, b) <= 1e-8) sup_p.emplace_back(a, b);
    const int nu = static_cast<int>(sup_g.size());
    const int nS = static_cast<int>(sup_p.size());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es1(Tfull);
    int rank1 = 0;
    for (int i = 0; i < r; ++i)
      if (es1.eigenvalues()[i] > 1e-9 * std::max(1.0, es1.eigenvalues().maxCoeff()))
        ++rank1;
    // The kernel eigenvectors of the purified block span V0.
    Eigen::MatrixXd V0 = es1.eigenvectors().leftCols(r - rank1);
    const int r0 = r - rank1;

    std::vector<Eigen::MatrixXd> Lu(nu), Ls(nS);
    for (int i = 0; i < nu; ++i)
      Lu[i] = bordered(inst.G.col(sup_g[i]), Eigen::MatrixXd::Zero(n, n));
    for (int i = 0; i < nS; ++i) {
      const auto [a, b] = sup_p[i];
      Eigen::MatrixXd Sab = Eigen::MatrixXd::Zero(m, m);
      Sab(a, b) = Sab(b, a) = a == b ? 2.0 : 1.0;  // unit support matrix
      Ls[i] = bordered(inst.G * Sab * inst.g, -inst.G * Sab * inst.G.transpose());
    }

    // ---- dual: u, S >= 0 on the tight support, beta free, N psd with
    //      U' L(u, S, beta) U = V0 N V0'; complementarity with the
    //      purified primal then holds structurally. Solved in phase-I form
    //      (minimize the max stationarity violation), which keeps an
    //      interior even when some supported multiplier is forced to zero.
    ConicProgram dual;
    std::vector<int> uv(nu), sv(nS);
    for (int i = 0; i < nu; ++i) uv[i] = dual.add_scalar_var("u");
    for (int i = 0; i < nS; ++i) sv[i] = dual.add_scalar_var("S");
    const int bv = dual.add_scalar_var("beta");
    const int tv = dual.add_scalar_var("t");
    int nblk = -1;
    if (r0 > 0) nblk = dual.add_psd_block(r0, "N");
    for (int i = 0; i < nu; ++i) {
      LinExpr lo, hi;
      lo.add(uv[i], -1.0);
      dual.add_ineq(std::move(lo), 0.0);
      hi.add(uv[i], 1.0);
      dual.add_ineq(std::move(hi), 1e4);
    }
    for (int i = 0; i < nS; ++i) {
      LinExpr lo, hi;
      lo.add(sv[i], -1.0);
      dual.add_ineq(std::move(lo), 0.0);
      hi.add(sv[i], 1.0);
      dual.add_ineq(std::move(hi), 1e4);
    }
    {
      LinExpr lo;
      lo.add(tv, -1.0);
      dual.add_ineq(std::move(lo), 0.0);
    }
    dual.objective.add(tv, 1.0);
    for (int s = 0; s < r; ++s)
      for (int t = s; t < r; ++t) {
        LinExpr e;
        auto coef_of = [&](const Eigen::MatrixXd& L) {
          return (U.col(s).transpose() * L * U.col(t))(0, 0);
        };
        for (int i = 0; i < nu; ++i) e.add(uv[i], coef_of(Lu[i]));
        for (int i = 0; i < nS; ++i) e.add(sv[i], coef_of(Ls[i]));
        e.add(bv, coef_of(Lbeta));
        if (r0 > 0) {
          for (int i2 = 0; i2 < r0; ++i2) {
            e.add(dual.psd_entry(nblk, i2, i2), -V0(s, i2) * V0(t, i2));
            for (int j2 = i2 + 1; j2 < r0; ++j2)
              e.add(dual.psd_entry(nblk, i2, j2),
                    -(V0(s, i2) * V0(t, j2) + V0(s, j2) * V0(t, i2)));
          }
        }
        const double rhs = -coef_of(L0);
        LinExpr above = e;
        above.add(tv, -1.0);
        dual.add_ineq(std::move(above), rhs);
        LinExpr below;
        for (const auto& [var, coef] : e.terms) below.add(var, -coef);
        below.add(tv, -1.0);
        dual.add_ineq(std::move(below), -rhs);
      }

    SolveOptions dopts;
    dopts.tol = 1e-9;
    SolveResult dres = solve(dual, dopts);
    if (dres.status != SolveStatus::Optimal || !dres.objective.is_finite() ||
        dres.objective.value() > 1e-8) {
      if (trace) {
        std::fprintf(stderr, "purify: r1=%d dual solve %s t*=%s (nu=%d nS=%d r0=%d)\n",
                     r1, to_string(dres.status), dres.objective.str().c_str(), nu, nS,
                     r0);
        if (std::getenv("QPRELAX_PURIFY_DUMP")) dual.dump(std::cerr);
      }
      continue;
    }
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < nu; ++i) u[sup_g[i]] = std::max(0.0, dres.primal[uv[i]]);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < nS; ++i) {
      const auto [a, b] = sup_p[i];
      const double val = std::max(0.0, dres.primal[sv[i]]);
      S(a, b) = S(b, a) = a == b ? 2.0 * val : val;
    }
    SdpDualCert cert;
    cert.u = u;
    cert.S = S;
    cert.b = inst.c + inst.G * u + inst.G * S * inst.g;
    cert.B = inst.Q - inst.G * S * inst.G.transpose();
    cert.beta = dres.primal[bv];

    // ---- verification; any miss tries the next candidate.
    ViolationReport opt = check_sdp_opt(inst, face, x, X, cert, 1e-7);
    if (!opt.pass) {
      if (trace) std::fprintf(stderr, "purify: r1=%d opt check %g\n", r1, opt.overall);
      continue;
    }
    const Eigen::MatrixXd pinv = h_pinv_factor(inst.H);
    const Eigen::VectorXd zrec = -(pinv * (cert.B * x + cert.b));
    const double zr = (cert.B * x + cert.b + inst.H * zrec).cwiseAbs().maxCoeff();
    const double wr = (cert.B * X + cert.b * x.transpose() -
                       inst.H * (pinv * (cert.B * X + cert.b * x.transpose())))
                          .cwiseAbs()
                          .maxCoeff();
    if (zr > 1e-7 || wr > 1e-7) {
      if (trace) std::fprintf(stderr, "purify: r1=%d zr %g wr %g\n", r1, zr, wr);
      continue;
    }
    out.x = x;
    out.X = X;
    out.cert = cert;
    out.ok = true;
    return out;
  }
  return out;
}

SdpOptPair sdp_pair_from_srr(const QpInstance& inst, const FaceData& face,
                             const BuiltProblem& srr, const SolveResult& res) {
  SdpOptPair pair = purify_sdp_pair(inst, face, srr, res);
  if (pair.ok) return pair;
  auto [x, X] = read_xX(srr, res, &face);
  pair.x = x;
  pair.X = X;
  pair.cert = extract_sdp_cert_from_srr(inst, srr, res);
  pair.ok = false;
  return pair;
}

SdpDualCert extract_sdp_cert_from_srr(const QpInstance& inst, const BuiltProblem& srr,
                                      const SolveResult& res) {
  if (srr.kind != ProblemKind::SRR)
    throw Error("extract_sdp_cert_from_srr: expected an SRR problem");
  if (!srr.map.gx_row || !srr.map.prod_row || !srr.map.corner_eq)
    throw Error("extract_sdp_cert_from_srr: constraint layout missing");
  const int m = inst.m;

  SdpDualCert cert;
  cert.u = res.ineq_duals.segment(*srr.map.gx_row, m);
  // Multipliers of the upper-triangle product rows spread into the
  // symmetric S with the diagonal doubled (the off-diagonal rows stand
  // for both (a,b) and (b,a)).
  cert.S = Eigen::MatrixXd::Zero(m, m);
  int r = *srr.map.prod_row;
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      const double mult = res.ineq_duals[r++];
      if (a == b)
        cert.S(a, a) = 2.0 * mult;
      else
        cert.S(a, b) = cert.S(b, a) = mult;
    }
  cert.b = inst.c + inst.G * cert.u + inst.G * cert.S * inst.g;
  cert.B = inst.Q - inst.G * cert.S * inst.G.transpose();
  cert.beta = 2.0 * res.eq_duals[*srr.map.corner_eq];
  return cert;
}

}  // namespace qpr
