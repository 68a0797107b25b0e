#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <vector>

#include "qprelax/conic.hpp"
#include "qprelax/errors.hpp"

namespace qpr {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// The reduced KKT systems are solved in extended precision: near the
// central path's endgame their conditioning grows like 1/mu, and the
// extra mantissa bits buy the final Newton steps that double precision
// cannot deliver at desk scale.
using ld = long double;
using MatrixXld = Eigen::Matrix<ld, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXld = Eigen::Matrix<ld, Eigen::Dynamic, 1>;

// Homogeneous self-dual interior-point method with Nesterov-Todd scaling
// over R^l_+ x PSD blocks, Mehrotra predictor-corrector steps and a
// reduced (normal-equations) KKT solve with iterative refinement.
//
// The program is translated to
//   min c'x  s.t.  A x = b,  G x + s = h,  s in K,
// where x collects all IR variables (psd entries included) and each psd
// block contributes svec rows s_block = svec(M_block) with h = 0.
class HsdIpm {
 public:
  HsdIpm(const ConicProgram& prog, const SolveOptions& opts) : prog_(prog), opts_(opts) {}

  SolveResult run() {
    translate();
    return iterate();
  }

 private:
  struct Scaling {
    // Orthant: w, lambda. Psd block: R, Rinv, sigma (lambda is diag(sigma)).
    Eigen::VectorXd w_l;
    Eigen::VectorXd lambda_l;
    std::vector<Eigen::MatrixXd> R, Rinv;
    std::vector<Eigen::VectorXd> sigma;
  };

  // ----- translation -------------------------------------------------

  int svec_size(int k) const { return k * (k + 1) / 2; }

  void translate() {
    nx_ = prog_.num_vars();
    ne_ = static_cast<int>(prog_.eqs().size());
    nl_ = static_cast<int>(prog_.ineqs().size());
    nblocks_ = prog_.num_psd_blocks();
    block_row_off_.resize(nblocks_);
    nc_ = nl_;
    nu_ = nl_;  // cone degree
    for (int b = 0; b < nblocks_; ++b) {
      block_row_off_[b] = nc_;
      nc_ += svec_size(prog_.psd_side(b));
      nu_ += prog_.psd_side(b);
    }

    A_ = Eigen::MatrixXd::Zero(ne_, nx_);
    b_ = Eigen::VectorXd::Zero(ne_);
    for (int i = 0; i < ne_; ++i) {
      for (const auto& [j, a] : prog_.eqs()[i].expr.terms) A_(i, j) += a;
      b_[i] = prog_.eqs()[i].rhs;
    }
    Gl_ = Eigen::MatrixXd::Zero(nl_, nx_);
    hl_ = Eigen::VectorXd::Zero(nl_);
    for (int i = 0; i < nl_; ++i) {
      for (const auto& [j, a] : prog_.ineqs()[i].expr.terms) Gl_(i, j) += a;
      hl_[i] = prog_.ineqs()[i].rhs;
    }
    c_ = Eigen::VectorXd::Zero(nx_);
    for (const auto& [j, a] : prog_.objective.terms) c_[j] += a;
    A_ld_ = A_.cast<ld>();
    Gl_ld_ = Gl_.cast<ld>();
  }

  // G x (cone rows). Psd rows are -scale * (block entry variable).
  Eigen::VectorXd apply_G(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(nc_);
    out.head(nl_) = Gl_ * x;
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      int r = block_row_off_[b];
      for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j)
          out[r++] = -(i == j ? 1.0 : kSqrt2) * x[prog_.psd_entry(b, i, j)];
    }
    return out;
  }

  Eigen::VectorXd apply_GT(const Eigen::VectorXd& z) const {
    Eigen::VectorXd out = Gl_.transpose() * z.head(nl_);
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      int r = block_row_off_[b];
      for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) {
          out[prog_.psd_entry(b, i, j)] -= (i == j ? 1.0 : kSqrt2) * z[r];
          ++r;
        }
    }
    return out;
  }

  Eigen::VectorXd cone_h() const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(nc_);
    out.head(nl_) = hl_;
    return out;
  }

  // ----- svec/smat ----------------------------------------------------

  static Eigen::MatrixXd smat(const Eigen::VectorXd& v, int k) {
    Eigen::MatrixXd M(k, k);
    int r = 0;
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) {
        const double val = i == j ? v[r] : v[r] / kSqrt2;
        M(i, j) = M(j, i) = val;
        ++r;
      }
    return M;
  }

  static Eigen::VectorXd svec(const Eigen::MatrixXd& M) {
    const int k = static_cast<int>(M.rows());
    Eigen::VectorXd v(k * (k + 1) / 2);
    int r = 0;
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) v[r++] = i == j ? M(i, i) : kSqrt2 * M(i, j);
    return v;
  }

  Eigen::VectorXd cone_identity() const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(nc_);
    e.head(nl_).setOnes();
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      int r = block_row_off_[b];
      for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) e[r++] = (i == j) ? 1.0 : 0.0;
    }
    return e;
  }

  // ----- scaling ------------------------------------------------------

  static Eigen::LLT<Eigen::MatrixXd> chol_with_jitter(Eigen::MatrixXd M, bool* ok) {
    double jitter = 0.0;
    const double base = std::max(M.trace() / M.rows(), 1e-30);
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::LLT<Eigen::MatrixXd> llt(M + jitter * Eigen::MatrixXd::Identity(M.rows(), M.cols()));
      if (llt.info() == Eigen::Success) {
        *ok = true;
        return llt;
      }
      jitter = jitter == 0.0 ? 1e-14 * base : jitter * 100.0;
    }
    *ok = false;
    return Eigen::LLT<Eigen::MatrixXd>(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
  }

  bool compute_scaling(const Eigen::VectorXd& s, const Eigen::VectorXd& z, Scaling* W) const {
    W->w_l.resize(nl_);
    W->lambda_l.resize(nl_);
    for (int i = 0; i < nl_; ++i) {
      if (s[i] <= 0 || z[i] <= 0) return false;
      W->w_l[i] = std::sqrt(s[i] / z[i]);
      W->lambda_l[i] = std::sqrt(s[i] * z[i]);
    }
    W->R.resize(nblocks_);
    W->Rinv.resize(nblocks_);
    W->sigma.resize(nblocks_);
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      const auto seg_s = s.segment(block_row_off_[b], svec_size(k));
      const auto seg_z = z.segment(block_row_off_[b], svec_size(k));
      bool ok_s = false, ok_z = false;
      auto llt_s = chol_with_jitter(smat(seg_s, k), &ok_s);
      auto llt_z = chol_with_jitter(smat(seg_z, k), &ok_z);
      if (!ok_s || !ok_z) return false;
      Eigen::MatrixXd Ls = llt_s.matrixL();
      Eigen::MatrixXd Lz = llt_z.matrixL();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(Lz.transpose() * Ls,
                                            Eigen::ComputeFullU | Eigen::ComputeFullV);
      Eigen::VectorXd sig = svd.singularValues();
      for (int i = 0; i < k; ++i)
        if (sig[i] <= 0) return false;
      Eigen::VectorXd isq = sig.cwiseSqrt().cwiseInverse();
      W->R[b] = Ls * svd.matrixV() * isq.asDiagonal();
      // Rinv = sqrt(Sigma) V' Ls^{-1}
      Eigen::MatrixXd LsInv =
          Ls.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(k, k));
      W->Rinv[b] = sig.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() * LsInv;
      W->sigma[b] = sig;
    }
    return true;
  }

  // W z (scaled z), W^{-T} s, W^T u and W'W u as operators.
  Eigen::VectorXd apply_W(const Scaling& W, const Eigen::VectorXd& z) const {
    Eigen::VectorXd out(nc_);
    out.head(nl_) = W.w_l.cwiseProduct(z.head(nl_));
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      const auto seg = z.segment(block_row_off_[b], svec_size(k));
      out.segment(block_row_off_[b], svec_size(k)) =
          svec(W.R[b].transpose() * smat(seg, k) * W.R[b]);
    }
    return out;
  }

  Eigen::VectorXd apply_WinvT(const Scaling& W, const Eigen::VectorXd& s) const {
    Eigen::VectorXd out(nc_);
    out.head(nl_) = s.head(nl_).cwiseQuotient(W.w_l);
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      const auto seg = s.segment(block_row_off_[b], svec_size(k));
      out.segment(block_row_off_[b], svec_size(k)) =
          svec(W.Rinv[b] * smat(seg, k) * W.Rinv[b].transpose());
    }
    return out;
  }

  // Jordan algebra helpers in the scaled space (lambda is diagonal there).
  Eigen::VectorXd lambda_vec(const Scaling& W) const {
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(nc_);
    lam.head(nl_) = W.lambda_l;
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      int r = block_row_off_[b];
      for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) lam[r++] = (i == j) ? W.sigma[b][i] : 0.0;
    }
    return lam;
  }

  Eigen::VectorXd jordan_sq_lambda(const Scaling& W) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(nc_);
    out.head(nl_) = W.lambda_l.array().square();
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      int r = block_row_off_[b];
      for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) out[r++] = (i == j) ? W.sigma[b][i] * W.sigma[b][i] : 0.0;
    }
    return out;
  }

  Eigen::VectorXd jordan_div_lambda(const Scaling& W, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(nc_);
    out.head(nl_) = v.head(nl_).cwiseQuotient(W.lambda_l);
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      const Eigen::MatrixXd V = smat(v.segment(block_row_off_[b], svec_size(k)), k);
      Eigen::MatrixXd U(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) U(i, j) = 2.0 * V(i, j) / (W.sigma[b][i] + W.sigma[b][j]);
      out.segment(block_row_off_[b], svec_size(k)) = svec(U);
    }
    return out;
  }

  Eigen::VectorXd jordan_prod(const Eigen::VectorXd& a, const Eigen::VectorXd& bvec) const {
    Eigen::VectorXd out(nc_);
    out.head(nl_) = a.head(nl_).cwiseProduct(bvec.head(nl_));
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      const Eigen::MatrixXd Am = smat(a.segment(block_row_off_[b], svec_size(k)), k);
      const Eigen::MatrixXd Bm = smat(bvec.segment(block_row_off_[b], svec_size(k)), k);
      out.segment(block_row_off_[b], svec_size(k)) =
          svec(0.5 * (Am * Bm + Bm * Am));
    }
    return out;
  }

  // Max alpha with lambda + alpha * d staying in the cone (scaled space).
  double max_step_scaled(const Scaling& W, const Eigen::VectorXd& d) const {
    double bound = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nl_; ++i)
      if (d[i] < 0) bound = std::min(bound, -W.lambda_l[i] / d[i]);
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      const Eigen::MatrixXd D = smat(d.segment(block_row_off_[b], svec_size(k)), k);
      Eigen::VectorXd inv_sqrt = W.sigma[b].cwiseSqrt().cwiseInverse();
      Eigen::MatrixXd Dn = inv_sqrt.asDiagonal() * D * inv_sqrt.asDiagonal();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Dn, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      if (lo < 0) bound = std::min(bound, -1.0 / lo);
    }
    return bound;
  }

  // ----- reduced KKT solve (extended precision) --------------------------

  static MatrixXld smat_ld(const VectorXld& v, int k) {
    MatrixXld M(k, k);
    const ld s2 = std::sqrt((ld)2.0);
    int r = 0;
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) {
        const ld val = i == j ? v[r] : v[r] / s2;
        M(i, j) = M(j, i) = val;
        ++r;
      }
    return M;
  }

  static VectorXld svec_ld(const MatrixXld& M) {
    const int k = static_cast<int>(M.rows());
    const ld s2 = std::sqrt((ld)2.0);
    VectorXld v(k * (k + 1) / 2);
    int r = 0;
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) v[r++] = i == j ? M(i, i) : s2 * M(i, j);
    return v;
  }

  VectorXld apply_G_ld(const VectorXld& x) const {
    VectorXld out(nc_);
    const ld s2 = std::sqrt((ld)2.0);
    out.head(nl_) = Gl_ld_ * x;
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      int r = block_row_off_[b];
      for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j)
          out[r++] = -(i == j ? (ld)1.0 : s2) * x[prog_.psd_entry(b, i, j)];
    }
    return out;
  }

  VectorXld apply_GT_ld(const VectorXld& z) const {
    VectorXld out = Gl_ld_.transpose() * z.head(nl_);
    const ld s2 = std::sqrt((ld)2.0);
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      int r = block_row_off_[b];
      for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) {
          out[prog_.psd_entry(b, i, j)] -= (i == j ? (ld)1.0 : s2) * z[r];
          ++r;
        }
    }
    return out;
  }

  struct Kkt {
    Eigen::LLT<MatrixXld> F1;   // Hm + delta I
    Eigen::LDLT<MatrixXld> F2;  // A F1^{-1} A' + delta I
    VectorXld wsq_inv_l;        // orthant (W'W)^{-1} diagonal
    VectorXld w_l;              // orthant scaling
    std::vector<MatrixXld> lam_inv;  // per psd block (R R')^{-1}
    std::vector<MatrixXld> lam;      // per psd block R R'
    std::vector<MatrixXld> R;        // per psd block NT factor
    bool has_eq = false;
  };

  // (W'W)^{-1} u with the cached extended-precision blocks.
  VectorXld apply_WtW_inv_ld(const Kkt& kkt, const VectorXld& u) const {
    VectorXld out(nc_);
    out.head(nl_) = u.head(nl_).cwiseProduct(kkt.wsq_inv_l);
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      const auto seg = u.segment(block_row_off_[b], svec_size(k));
      out.segment(block_row_off_[b], svec_size(k)) =
          svec_ld(kkt.lam_inv[b] * smat_ld(seg, k) * kkt.lam_inv[b]);
    }
    return out;
  }

  VectorXld apply_WtW_ld(const Kkt& kkt, const VectorXld& u) const {
    VectorXld out(nc_);
    out.head(nl_) = u.head(nl_).cwiseQuotient(kkt.wsq_inv_l);
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      const auto seg = u.segment(block_row_off_[b], svec_size(k));
      out.segment(block_row_off_[b], svec_size(k)) =
          svec_ld(kkt.lam[b] * smat_ld(seg, k) * kkt.lam[b]);
    }
    return out;
  }

  // W^T u over the cached blocks.
  VectorXld apply_WT_ld(const Kkt& kkt, const VectorXld& u) const {
    VectorXld out(nc_);
    out.head(nl_) = kkt.w_l.cwiseProduct(u.head(nl_));
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      const auto seg = u.segment(block_row_off_[b], svec_size(k));
      out.segment(block_row_off_[b], svec_size(k)) =
          svec_ld(kkt.R[b] * smat_ld(seg, k) * kkt.R[b].transpose());
    }
    return out;
  }

  bool factor_kkt(const Scaling& W, Kkt* kkt) const {
    kkt->wsq_inv_l = W.w_l.array().square().inverse().matrix().cast<ld>();
    kkt->w_l = W.w_l.cast<ld>();
    kkt->lam_inv.clear();
    kkt->lam.clear();
    kkt->R.clear();
    for (int b = 0; b < nblocks_; ++b) {
      MatrixXld Rinv = W.Rinv[b].cast<ld>();
      MatrixXld R = W.R[b].cast<ld>();
      kkt->lam_inv.push_back(Rinv.transpose() * Rinv);
      kkt->lam.push_back(R * R.transpose());
      kkt->R.push_back(R);
    }

    // Hm = G' (W'W)^{-1} G; orthant rows contribute Gl' diag(z/s) Gl and
    // each psd block a scaled symmetric Kronecker square of Lambda^{-1}.
    MatrixXld Hm = MatrixXld::Zero(nx_, nx_);
    if (nl_ > 0) Hm.noalias() = Gl_ld_.transpose() * kkt->wsq_inv_l.asDiagonal() * Gl_ld_;
    const ld s2 = std::sqrt((ld)2.0);
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      const int t = svec_size(k);
      const MatrixXld& LamInv = kkt->lam_inv[b];
      MatrixXld Kb(t, t);
      int col = 0;
      for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) {
          MatrixXld M;
          if (i == j)
            M = LamInv.col(i) * LamInv.row(i);
          else
            M = (LamInv.col(i) * LamInv.row(j) + LamInv.col(j) * LamInv.row(i)) / s2;
          Kb.col(col++) = svec_ld(M);
        }
      // Conjugate by the svec scales of the psd variable entries.
      std::vector<int> vars(t);
      VectorXld scale(t);
      int r = 0;
      for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) {
          vars[r] = prog_.psd_entry(b, i, j);
          scale[r] = (i == j) ? (ld)1.0 : s2;
          ++r;
        }
      for (int a = 0; a < t; ++a)
        for (int q = 0; q < t; ++q) Hm(vars[a], vars[q]) += scale[a] * scale[q] * Kb(a, q);
    }
    ld maxdiag = 0;
    for (int i = 0; i < nx_; ++i) maxdiag = std::max(maxdiag, std::abs(Hm(i, i)));
    const ld delta = (ld)1e-14 * ((ld)1.0 + maxdiag);
    Hm.diagonal().array() += delta;
    kkt->F1.compute(Hm);
    if (kkt->F1.info() != Eigen::Success) return false;
    kkt->has_eq = ne_ > 0;
    if (ne_ > 0) {
      MatrixXld AF = kkt->F1.solve(A_ld_.transpose());
      MatrixXld S = A_ld_ * AF;
      ld smax = 0;
      for (int i = 0; i < ne_; ++i) smax = std::max(smax, std::abs(S(i, i)));
      S.diagonal().array() += (ld)1e-14 * ((ld)1.0 + smax);
      kkt->F2.compute(S);
      if (kkt->F2.info() != Eigen::Success) return false;
    }
    return true;
  }

  // Solves  A'dy + G'dz = bx,  A dx = by,  G dx - W'W dz = bz
  // with adaptive iterative refinement, all in extended precision.
  void solve3_ld(const Kkt& kkt, const VectorXld& bx, const VectorXld& by,
                 const VectorXld& bz, VectorXld* dx, VectorXld* dy, VectorXld* dz) const {
    auto solve_once = [&](const VectorXld& rx, const VectorXld& ry, const VectorXld& rz,
                          VectorXld* ox, VectorXld* oy, VectorXld* oz) {
      VectorXld rhs1 = rx + apply_GT_ld(apply_WtW_inv_ld(kkt, rz));
      if (kkt.has_eq) {
        VectorXld t = kkt.F1.solve(rhs1);
        VectorXld rhs2 = A_ld_ * t - ry;
        *oy = kkt.F2.solve(rhs2);
        *ox = kkt.F1.solve(rhs1 - A_ld_.transpose() * (*oy));
      } else {
        *oy = VectorXld(0);
        *ox = kkt.F1.solve(rhs1);
      }
      *oz = apply_WtW_inv_ld(kkt, apply_G_ld(*ox) - rz);
    };

    solve_once(bx, by, bz, dx, dy, dz);
    const ld bnorm = std::max({bx.cwiseAbs().maxCoeff(),
                               by.size() ? by.cwiseAbs().maxCoeff() : (ld)0,
                               bz.cwiseAbs().maxCoeff(), (ld)1.0});
    ld prev = std::numeric_limits<ld>::max();
    for (int it = 0; it < 6; ++it) {
      VectorXld r1 = bx - apply_GT_ld(*dz);
      if (ne_ > 0) r1 -= A_ld_.transpose() * (*dy);
      VectorXld r2 = ne_ > 0 ? (by - A_ld_ * (*dx)).eval() : VectorXld(0);
      VectorXld r3 = bz - apply_G_ld(*dx) + apply_WtW_ld(kkt, *dz);
      const ld rnorm = std::max({r1.cwiseAbs().maxCoeff(),
                                 r2.size() ? r2.cwiseAbs().maxCoeff() : (ld)0,
                                 r3.cwiseAbs().maxCoeff()});
      if (rnorm < (ld)1e-25 * bnorm || rnorm >= prev * (ld)0.5) break;
      prev = rnorm;
      VectorXld cx, cy, cz;
      solve_once(r1, r2, r3, &cx, &cy, &cz);
      *dx += cx;
      if (ne_ > 0) *dy += cy;
      *dz += cz;
    }
  }

  void solve3(const Kkt& kkt, const Eigen::VectorXd& bx, const Eigen::VectorXd& by,
              const Eigen::VectorXd& bz, Eigen::VectorXd* dx_out,
              Eigen::VectorXd* dy_out, Eigen::VectorXd* dz_out) const {
    VectorXld dx, dy, dz;
    solve3_ld(kkt, bx.cast<ld>(), by.cast<ld>(), bz.cast<ld>(), &dx, &dy, &dz);
    *dx_out = dx.cast<double>();
    *dy_out = ne_ > 0 ? dy.cast<double>().eval() : Eigen::VectorXd(0);
    *dz_out = dz.cast<double>();
  }

  // ----- main loop ------------------------------------------------------

  SolveResult iterate() {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(nx_);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(ne_);
    Eigen::VectorXd s = cone_identity();
    Eigen::VectorXd z = cone_identity();
    double tau = 1.0, kappa = 1.0;

    const Eigen::VectorXd h = cone_h();
    const Eigen::VectorXd e = cone_identity();
    const double resx0 = std::max(1.0, c_.norm());
    const double resy0 = std::max(1.0, b_.norm());
    const double resz0 = std::max(1.0, h.norm());
    const double tol = opts_.tol;

    SolveResult out;
    double best_metric = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x, best_y, best_z, best_s;
    double best_tau = 1.0;
    SolveResult::Residuals best_res;

    int stall_count = 0;
    for (int iter = 0; iter < opts_.max_iter; ++iter) {
      out.iterations = iter;
      // Residuals of the embedding.
      Eigen::VectorXd rx = (ne_ > 0 ? (A_.transpose() * y).eval()
                                    : Eigen::VectorXd::Zero(nx_).eval()) +
                           apply_GT(z) + c_ * tau;
      Eigen::VectorXd ry = (ne_ > 0 ? (A_ * x - b_ * tau).eval() : Eigen::VectorXd(0));
      Eigen::VectorXd rz = apply_G(x) + s - h * tau;
      const double rt = c_.dot(x) + (ne_ > 0 ? b_.dot(y) : 0.0) + h.dot(z) + kappa;

      const double gap = s.dot(z);
      const double mu = (gap + tau * kappa) / (nu_ + 1);

      const double pobj = c_.dot(x) / tau;
      const double dobj = -((ne_ > 0 ? b_.dot(y) : 0.0) + h.dot(z)) / tau;
      const double pres =
          std::max(ne_ > 0 ? ry.norm() / resy0 : 0.0, rz.norm() / resz0) / tau;
      const double dres = rx.norm() / resx0 / tau;
      const double gap_abs = gap / tau / tau;
      const double relgap = gap_abs / (1.0 + std::abs(pobj) + std::abs(dobj));

      if (std::getenv("QPRELAX_IPM_TRACE"))
        std::fprintf(stderr,
                     "it %3d mu %9.2e pres %9.2e dres %9.2e relgap %9.2e tau %9.2e "
                     "kappa %9.2e\n",
                     iter, mu, pres, dres, relgap, tau, kappa);

      const double metric = std::max({pres, dres, std::min(relgap, gap_abs)});
      if (metric < best_metric) {
        best_metric = metric;
        best_x = x;
        best_y = y;
        best_z = z;
        best_s = s;
        best_tau = tau;
        best_res = {pres, dres, relgap};
      }

      if (pres <= tol && dres <= tol && (relgap <= tol || gap_abs <= 10.0 * tol)) {
        fill_optimal(out, x, y, z, s, tau, {pres, dres, relgap});
        return out;
      }
      // Infeasibility certificates.
      const double hz_by = (ne_ > 0 ? b_.dot(y) : 0.0) + h.dot(z);
      if (hz_by < 0) {
        const double pinfres =
            ((ne_ > 0 ? (A_.transpose() * y).eval() : Eigen::VectorXd::Zero(nx_).eval()) +
             apply_GT(z))
                .norm() /
            resx0 / (-hz_by);
        if (pinfres <= tol) {
          out.status = SolveStatus::Infeasible;
          out.objective = ExtReal::pos_inf();
          out.farkas_eq = ne_ > 0 ? (y / -hz_by).eval() : Eigen::VectorXd(0);
          out.farkas_ineq = (z.head(nl_) / -hz_by).eval();
          return out;
        }
      }
      if (c_.dot(x) < 0) {
        const double nrm = -c_.dot(x);
        const double dinfres =
            std::max(ne_ > 0 ? (A_ * x).norm() / resy0 : 0.0,
                     (apply_G(x) + s).norm() / resz0) /
            nrm;
        if (dinfres <= tol) {
          out.status = SolveStatus::Unbounded;
          out.objective = ExtReal::neg_inf();
          out.ray = x / nrm;
          out.primal = x / nrm;
          return out;
        }
      }

      Scaling W;
      Kkt kkt;
      if (!compute_scaling(s, z, &W) || !factor_kkt(W, &kkt)) {
        if (std::getenv("QPRELAX_IPM_TRACE"))
          std::fprintf(stderr, "  scaling/factorization failure\n");
        break;
      }
      const Eigen::VectorXd lam = lambda_vec(W);
      const Eigen::VectorXd lamsq = jordan_sq_lambda(W);

      const VectorXld c_ld = c_.cast<ld>();
      const VectorXld b_ld = b_.cast<ld>();
      const VectorXld h_ld = h.cast<ld>();
      VectorXld x1, y1, z1;
      solve3_ld(kkt, -c_ld, b_ld, h_ld, &x1, &y1, &z1);
      const ld den =
          c_ld.dot(x1) + (ne_ > 0 ? b_ld.dot(y1) : (ld)0) + h_ld.dot(z1) - (ld)kappa / (ld)tau;
      if (!std::isfinite((double)den) || std::abs((double)den) < 1e-300) {
        if (std::getenv("QPRELAX_IPM_TRACE"))
          std::fprintf(stderr, "  denominator breakdown %g\n", (double)den);
        break;
      }

      auto direction = [&](const Eigen::VectorXd& d1, const Eigen::VectorXd& d2,
                           const Eigen::VectorXd& d3, double d4,
                           const Eigen::VectorXd& dcomp, double dtk, Eigen::VectorXd* dx,
                           Eigen::VectorXd* dy, Eigen::VectorXd* dz, Eigen::VectorXd* ds,
                           double* dtau, double* dkappa) {
        const Eigen::VectorXd dcomp_div = jordan_div_lambda(W, dcomp);
        const VectorXld dcd = dcomp_div.cast<ld>();
        const VectorXld wt_dcd = apply_WT_ld(kkt, dcd);
        const VectorXld bz = d3.cast<ld>() - wt_dcd;
        VectorXld x2, y2, z2;
        solve3_ld(kkt, d1.cast<ld>(), d2.cast<ld>(), bz, &x2, &y2, &z2);
        const ld dtau_ld =
            ((ld)d4 - (ld)dtk / (ld)tau -
             (c_ld.dot(x2) + (ne_ > 0 ? b_ld.dot(y2) : (ld)0) + h_ld.dot(z2))) /
            den;
        *dtau = (double)dtau_ld;
        *dx = (x2 + dtau_ld * x1).cast<double>();
        *dy = ne_ > 0 ? (y2 + dtau_ld * y1).cast<double>().eval() : Eigen::VectorXd(0);
        const VectorXld dz_ld = z2 + dtau_ld * z1;
        *dz = dz_ld.cast<double>();
        *ds = (wt_dcd - apply_WtW_ld(kkt, dz_ld)).cast<double>();
        *dkappa = (dtk - kappa * *dtau) / tau;
      };

      // Affine direction.
      Eigen::VectorXd dxa, dya, dza, dsa;
      double dtaua, dkappaa;
      direction(-rx, -ry, -rz, -rt, -lamsq, -tau * kappa, &dxa, &dya, &dza, &dsa, &dtaua,
                &dkappaa);

      Eigen::VectorXd dsa_scaled = apply_WinvT(W, dsa);
      Eigen::VectorXd dza_scaled = apply_W(W, dza);
      double alpha_aff = std::min(max_step_scaled(W, dsa_scaled), max_step_scaled(W, dza_scaled));
      if (dtaua < 0) alpha_aff = std::min(alpha_aff, -tau / dtaua);
      if (dkappaa < 0) alpha_aff = std::min(alpha_aff, -kappa / dkappaa);
      alpha_aff = std::min(alpha_aff, 1.0);

      const double mu_aff = ((s + alpha_aff * dsa).dot(z + alpha_aff * dza) +
                             (tau + alpha_aff * dtaua) * (kappa + alpha_aff * dkappaa)) /
                            (nu_ + 1);
      double sigma = std::pow(std::max(0.0, std::min(1.0, mu_aff / mu)), 3.0);

      // Combined direction with Mehrotra correction.
      Eigen::VectorXd corr = jordan_prod(dsa_scaled, dza_scaled);
      Eigen::VectorXd dcomp = -lamsq - corr + sigma * mu * e;
      const double dtk = -tau * kappa - dtaua * dkappaa + sigma * mu;
      Eigen::VectorXd dx, dy, dz, ds;
      double dtau, dkappa;
      const double f = 1.0 - sigma;
      direction(-f * rx, -f * ry, -f * rz, -f * rt, dcomp, dtk, &dx, &dy, &dz, &ds, &dtau,
                &dkappa);

      Eigen::VectorXd ds_scaled = apply_WinvT(W, ds);
      Eigen::VectorXd dz_scaled = apply_W(W, dz);
      double alpha = std::min(max_step_scaled(W, ds_scaled), max_step_scaled(W, dz_scaled));
      if (dtau < 0) alpha = std::min(alpha, -tau / dtau);
      if (dkappa < 0) alpha = std::min(alpha, -kappa / dkappa);
      alpha = std::min(0.99 * alpha, 1.0);
      if (std::getenv("QPRELAX_IPM_TRACE"))
        std::fprintf(stderr, "  alpha_aff %9.2e sigma %9.2e alpha %9.2e\n", alpha_aff,
                     sigma, alpha);

      if (alpha < 1e-8) {
        if (++stall_count >= 3) break;
      } else {
        stall_count = 0;
      }

      x += alpha * dx;
      if (ne_ > 0) y += alpha * dy;
      z += alpha * dz;
      s += alpha * ds;
      tau += alpha * dtau;
      kappa += alpha * dkappa;
    }

    // No certificate within the iteration budget: accept the best iterate
    // if it meets the documented 1e-6 bound, otherwise report failure.
    const double accept = std::max(tol, 1e-6);
    if (best_metric <= accept) {
      fill_optimal(out, best_x, best_y, best_z, best_s, best_tau, best_res);
      return out;
    }
    out.status = SolveStatus::NumericalFailure;
    out.residuals = best_res;
    return out;
  }

  void fill_optimal(SolveResult& out, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& z, const Eigen::VectorXd& s, double tau,
                    const SolveResult::Residuals& res) const {
    (void)s;
    out.status = SolveStatus::Optimal;
    out.primal = x / tau;
    out.objective = ExtReal::finite(c_.dot(out.primal) + prog_.objective_constant);
    out.eq_duals = ne_ > 0 ? (y / tau).eval() : Eigen::VectorXd(0);
    out.ineq_duals = (z.head(nl_) / tau).cwiseMax(0.0);
    out.psd_duals.clear();
    for (int b = 0; b < nblocks_; ++b) {
      const int k = prog_.psd_side(b);
      out.psd_duals.push_back(smat(z.segment(block_row_off_[b], svec_size(k)), k) / tau);
    }
    out.residuals.primal_feas = prog_.max_violation(out.primal);
    out.residuals.dual_feas = res.dual_feas;
    out.residuals.gap = res.gap;
  }

  const ConicProgram& prog_;
  SolveOptions opts_;

  int nx_ = 0, ne_ = 0, nl_ = 0, nc_ = 0, nblocks_ = 0;
  double nu_ = 0.0;
  std::vector<int> block_row_off_;
  Eigen::MatrixXd A_, Gl_;
  MatrixXld A_ld_, Gl_ld_;
  Eigen::VectorXd b_, hl_, c_;
};

}  // namespace

SolveResult solve_conic_ipm(const ConicProgram& prog, const SolveOptions& opts) {
  return HsdIpm(prog, opts).run();
}

}  // namespace qpr
