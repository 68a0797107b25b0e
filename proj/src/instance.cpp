#include "qprelax/instance.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <random>

#include "qprelax/conic.hpp"
#include "qprelax/errors.hpp"

namespace qpr {

void QpInstance::check_well_formed() const {
  if (n < 1) throw Error("instance: n must be >= 1");
  if (m < 0 || p < 0) throw Error("instance: m, p must be >= 0");
  auto shape = [](const Eigen::MatrixXd& A, int r, int c) {
    return A.rows() == r && A.cols() == c;
  };
  if (!shape(Q, n, n)) throw Error("instance: Q must be n x n");
  if (c.size() != n) throw Error("instance: c must have length n");
  if (!shape(G, n, m)) throw Error("instance: G must be n x m");
  if (g.size() != m) throw Error("instance: g must have length m");
  if (!shape(H, n, p)) throw Error("instance: H must be n x p");
  if (h.size() != p) throw Error("instance: h must have length p");
  if (Q != Q.transpose().eval()) throw Error("instance: Q must be symmetric");
  auto finite = [](const Eigen::MatrixXd& A) { return A.allFinite(); };
  if (!finite(Q) || !finite(c) || !finite(G) || !finite(g) || !finite(H) || !finite(h))
    throw Error("instance: entries must be finite");
}

namespace {

int numerical_rank(const Eigen::MatrixXd& A) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  const double thresh = 1e-9 * std::max(sv.size() > 0 ? sv(0) : 0.0, 1.0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++r;
  return r;
}

}  // namespace

SlaterReport validate_assumption1(const QpInstance& inst, double tol) {
  inst.check_well_formed();

  // max t  s.t.  G'x + t*1 <= g,  H'x = h,  t <= 1.
  ConicProgram lp;
  std::vector<int> xv(inst.n);
  for (int i = 0; i < inst.n; ++i) xv[i] = lp.add_scalar_var("x" + std::to_string(i));
  const int tv = lp.add_scalar_var("t");
  lp.objective.add(tv, -1.0);  // min -t
  for (int j = 0; j < inst.m; ++j) {
    LinExpr e;
    for (int i = 0; i < inst.n; ++i) e.add(xv[i], inst.G(i, j));
    e.add(tv, 1.0);
    lp.add_ineq(std::move(e), inst.g(j));
  }
  for (int k = 0; k < inst.p; ++k) {
    LinExpr e;
    for (int i = 0; i < inst.n; ++i) e.add(xv[i], inst.H(i, k));
    lp.add_eq(std::move(e), inst.h(k));
  }
  {
    LinExpr e;
    e.add(tv, 1.0);
    lp.add_ineq(std::move(e), 1.0);
  }

  SolveResult res = solve(lp);

  SlaterReport report;
  report.rank_h = numerical_rank(inst.H);
  if (res.status == SolveStatus::Infeasible) {
    report.feasible = false;  // H'x = h inconsistent, so F is empty
    return report;
  }
  if (res.status != SolveStatus::Optimal)
    throw SolverFailure("validate_assumption1: auxiliary LP did not solve");

  const double tstar = res.primal[tv];
  report.feasible = tstar >= 0.0;
  if (tstar > tol) {
    Eigen::VectorXd x0(inst.n);
    for (int i = 0; i < inst.n; ++i) x0[i] = res.primal[xv[i]];
    // The cap t <= 1 keeps the first LP bounded. Re-solve without it for
    // the max-margin point; keep the capped point if the margin is
    // unbounded.
    ConicProgram uncapped;
    std::vector<int> xv2(inst.n);
    for (int i = 0; i < inst.n; ++i) xv2[i] = uncapped.add_scalar_var("x");
    const int tv2 = uncapped.add_scalar_var("t");
    uncapped.objective.add(tv2, -1.0);
    for (int j = 0; j < inst.m; ++j) {
      LinExpr e;
      for (int i = 0; i < inst.n; ++i) e.add(xv2[i], inst.G(i, j));
      e.add(tv2, 1.0);
      uncapped.add_ineq(std::move(e), inst.g(j));
    }
    for (int k = 0; k < inst.p; ++k) {
      LinExpr e;
      for (int i = 0; i < inst.n; ++i) e.add(xv2[i], inst.H(i, k));
      uncapped.add_eq(std::move(e), inst.h(k));
    }
    SolveResult best = solve(uncapped);
    if (best.status == SolveStatus::Optimal)
      for (int i = 0; i < inst.n; ++i) x0[i] = best.primal[xv2[i]];
    report.slater_point = x0;
    report.margin = inst.m == 0 ? std::numeric_limits<double>::infinity()
                                : (inst.g - inst.G.transpose() * x0).minCoeff();
  }
  return report;
}

QpInstance example_family(ExampleFamilyId id, double alpha) {
  QpInstance inst;
  inst.n = 2;
  inst.m = 2;
  inst.p = 0;
  inst.H = Eigen::MatrixXd(2, 0);
  inst.h = Eigen::VectorXd(0);
  inst.G = Eigen::MatrixXd(2, 2);
  inst.g = Eigen::VectorXd(2);
  inst.Q = Eigen::MatrixXd(2, 2);
  inst.c = Eigen::VectorXd(2);

  switch (id) {
    case ExampleFamilyId::Ex1:
      inst.Q << 1, 1, 1, 1;
      inst.c << -alpha, -alpha;
      inst.G << 1, -1, 1, -1;
      inst.g << 2, 2;
      break;
    case ExampleFamilyId::Ex2:
      inst.Q << 1, 0, 0, 1;
      inst.c << -alpha, -alpha;
      inst.G << 1, -1, 1, -1;
      inst.g << 2, 2;
      break;
    case ExampleFamilyId::Ex3:
      inst.Q << -1, 0, 0, -1;
      inst.c << alpha, alpha;
      inst.G << 1, -1, 1, -1;
      inst.g << 2, 2;
      break;
    case ExampleFamilyId::Ex4:
      inst.Q << -1, 0, 0, -1;
      inst.c << -alpha, -1 + alpha;
      inst.G << -1, 0, 0, -1;
      inst.g << 0, 0;
      break;
  }
  return inst;
}

ClosedFormValues closed_form_values(ExampleFamilyId id, double alpha) {
  ClosedFormValues v{ExtReal::finite(0), ExtReal::finite(0), ExtReal::finite(0)};
  switch (id) {
    case ExampleFamilyId::Ex1: {
      double star = alpha <= -2 ? 2 * alpha + 2
                    : alpha < 2 ? -0.5 * alpha * alpha
                                : -2 * alpha + 2;
      double r = alpha <= -2 ? 2 * alpha + 2 : alpha < 2 ? -2.0 : -2 * alpha + 2;
      v.nu_star = ExtReal::finite(star);
      v.nu_r = ExtReal::finite(r);
      v.nu_rplus = v.nu_r;  // finite RLT bound, so (R) and (R+) agree
      break;
    }
    case ExampleFamilyId::Ex2: {
      double star = alpha <= -1 ? 2 * alpha + 1
                    : alpha < 1 ? -alpha * alpha
                                : -2 * alpha + 1;
      double rplus = alpha <= -1 ? 2 * alpha + 1 : alpha < 1 ? -1.0 : -2 * alpha + 1;
      v.nu_star = ExtReal::finite(star);
      v.nu_r = ExtReal::neg_inf();
      v.nu_rplus = ExtReal::finite(rplus);  // reference data, not a theorem
      break;
    }
    case ExampleFamilyId::Ex3: {
      double rplus = alpha < 0 ? 2 * alpha - 1 : alpha == 0 ? -1.0 : -2 * alpha - 1;
      v.nu_star = ExtReal::neg_inf();
      v.nu_r = ExtReal::neg_inf();
      v.nu_rplus = ExtReal::finite(rplus);
      break;
    }
    case ExampleFamilyId::Ex4:
      v.nu_star = ExtReal::neg_inf();
      v.nu_r = ExtReal::neg_inf();
      v.nu_rplus = ExtReal::pos_inf();  // no KKT points, (R+) infeasible
      break;
  }
  return v;
}

SdpReferenceValues sdp_reference_values(ExampleFamilyId id, double alpha) {
  ClosedFormValues cf = closed_form_values(id, alpha);
  switch (id) {
    case ExampleFamilyId::Ex1:
    case ExampleFamilyId::Ex2:
      // Convex objective: the Shor relaxation is exact.
      return {cf.nu_star, cf.nu_star};
    case ExampleFamilyId::Ex3:
      return {ExtReal::neg_inf(), cf.nu_rplus};
    case ExampleFamilyId::Ex4:
    default:
      return {ExtReal::neg_inf(), ExtReal::pos_inf()};
  }
}

namespace {

// Deterministic uniform/normal draws; distribution code is pinned here
// instead of <random> distributions so that output never depends on the
// standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace

QpInstance random_bounded_instance(int n, int m_extra, int p, std::uint64_t seed) {
  if (n < 1) throw Error("random_bounded_instance: n must be >= 1");
  if (p < 0 || p >= n) throw Error("random_bounded_instance: requires 0 <= p < n");
  if (m_extra < 0) throw Error("random_bounded_instance: m_extra must be >= 0");

  Rng rng(seed);
  QpInstance inst;
  inst.n = n;
  inst.p = p;

  inst.Q = Eigen::MatrixXd(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) inst.Q(i, j) = inst.Q(j, i) = rng.normal();
  inst.c = Eigen::VectorXd(n);
  for (int i = 0; i < n; ++i) inst.c[i] = rng.normal();

  // Box faces first (boundedness by construction), then cuts through
  // strictly feasible x = 0.
  inst.m = 2 * n + m_extra;
  inst.G = Eigen::MatrixXd::Zero(n, inst.m);
  inst.g = Eigen::VectorXd(inst.m);
  for (int i = 0; i < n; ++i) {
    inst.G(i, 2 * i) = 1.0;
    inst.g[2 * i] = 1.0;
    inst.G(i, 2 * i + 1) = -1.0;
    inst.g[2 * i + 1] = 1.0;
  }
  for (int k = 0; k < m_extra; ++k) {
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a[i] = rng.normal();
    const double nrm = a.norm();
    if (nrm > 0) a /= nrm;
    inst.G.col(2 * n + k) = a;
    inst.g[2 * n + k] = 0.2 + 0.8 * rng.uniform();
  }

  inst.H = Eigen::MatrixXd(n, p);
  inst.h = Eigen::VectorXd::Zero(p);
  if (p > 0) {
    Eigen::MatrixXd raw(n, p);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < n; ++i) raw(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    inst.H = Eigen::MatrixXd(qr.householderQ()).leftCols(p);
  }
  return inst;
}

}  // namespace qpr
