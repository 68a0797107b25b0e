#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qprelax/builders.hpp"
#include "qprelax/certify.hpp"
#include "qprelax/errors.hpp"
#include "qprelax/instance.hpp"
#include "qprelax/pipeline.hpp"

using namespace qpr;

namespace {

QpInstance interval_instance() {
  QpInstance inst;
  inst.n = 1;
  inst.m = 2;
  inst.p = 0;
  inst.Q = -Eigen::MatrixXd::Identity(1, 1);
  inst.c = Eigen::VectorXd::Zero(1);
  inst.G = Eigen::MatrixXd(1, 2);
  inst.G << 1, -1;
  inst.g = Eigen::VectorXd(2);
  inst.g << 1, 0;
  inst.H = Eigen::MatrixXd(1, 0);
  inst.h = Eigen::VectorXd(0);
  return inst;
}

FaceData face_of(const QpInstance& inst) {
  SlaterReport rep = validate_assumption1(inst);
  REQUIRE(rep.assumption1_ok(inst.n, inst.p));
  return build_face_data(inst, *rep.slater_point);
}

KktPoint make_point(std::initializer_list<double> x, std::initializer_list<double> y,
                    std::initializer_list<double> z) {
  KktPoint pt;
  pt.x = Eigen::VectorXd(static_cast<int>(x.size()));
  int i = 0;
  for (double v : x) pt.x[i++] = v;
  pt.y = Eigen::VectorXd(static_cast<int>(y.size()));
  i = 0;
  for (double v : y) pt.y[i++] = v;
  pt.z = Eigen::VectorXd(static_cast<int>(z.size()));
  i = 0;
  for (double v : z) pt.z[i++] = v;
  return pt;
}

}  // namespace

TEST_CASE("check_kkt") {
  SUBCASE("EX2 alpha = 0: the origin with zero multipliers passes") {
    QpInstance inst = example_family(ExampleFamilyId::Ex2, 0.0);
    ViolationReport rep = check_kkt(inst, make_point({0, 0}, {0, 0}, {}), 1e-9);
    CHECK(rep.pass);
  }
  SUBCASE("EX1 alpha = 3: boundary point on x1 + x2 = 2") {
    QpInstance inst = example_family(ExampleFamilyId::Ex1, 3.0);
    // Qx + c + Gy = (1+1-3+1, 1+1-3+1) = 0 with y = (1, 0), active row 1.
    ViolationReport rep = check_kkt(inst, make_point({1, 1}, {1, 0}, {}), 1e-9);
    CHECK(rep.pass);
  }
  SUBCASE("violations are reported by relation") {
    QpInstance inst = example_family(ExampleFamilyId::Ex2, 0.0);
    ViolationReport rep = check_kkt(inst, make_point({1, 1}, {0, 0}, {}), 1e-9);
    CHECK_FALSE(rep.pass);
    // Interior point with zero multipliers breaks only stationarity.
    CHECK(rep.entries[0].group == "kkt1_stationarity");
    CHECK_FALSE(rep.entries[0].pass);
    CHECK(rep.entries[1].pass);  // still feasible
    // The implied identity is violated as well.
    CHECK_FALSE(rep.entries[5].pass);
  }
}

TEST_CASE("find_kkt_points_smallscale") {
  SUBCASE("EX4 has no KKT points") {
    for (double alpha : {-1.0, 0.0, 1.0})
      CHECK(find_kkt_points_smallscale(example_family(ExampleFamilyId::Ex4, alpha), 1e-7)
                .empty());
  }
  SUBCASE("EX2 alpha = 0 has the unique KKT point (0, 0)") {
    auto pts = find_kkt_points_smallscale(example_family(ExampleFamilyId::Ex2, 0.0), 1e-7);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].x.cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("EX3 alpha = 0 has the three branch points") {
    auto pts = find_kkt_points_smallscale(example_family(ExampleFamilyId::Ex3, 0.0), 1e-7);
    REQUIRE(pts.size() == 3);
    bool seen_mid = false, seen_lo = false, seen_hi = false;
    for (const auto& pt : pts) {
      if (pt.x.cwiseAbs().maxCoeff() < 1e-8) seen_mid = true;
      if ((pt.x - Eigen::Vector2d(1, 1)).cwiseAbs().maxCoeff() < 1e-8) seen_hi = true;
      if ((pt.x - Eigen::Vector2d(-1, -1)).cwiseAbs().maxCoeff() < 1e-8) seen_lo = true;
    }
    CHECK(seen_mid);
    CHECK(seen_lo);
    CHECK(seen_hi);
  }
  SUBCASE("EX1 alpha = 3 has a representative on x1 + x2 = 2") {
    auto pts = find_kkt_points_smallscale(example_family(ExampleFamilyId::Ex1, 3.0), 1e-7);
    REQUIRE_FALSE(pts.empty());
    bool on_line = false;
    for (const auto& pt : pts)
      if (std::abs(pt.x.sum() - 2.0) < 1e-7) on_line = true;
    CHECK(on_line);
  }
  SUBCASE("limits enforced") {
    QpInstance inst = random_bounded_instance(4, 0, 0, 1);
    CHECK_THROWS_AS(find_kkt_points_smallscale(inst, 1e-7), TooLarge);
  }
  SUBCASE("minimum KKT objective matches a dense grid scan (n = 2)") {
    QpInstance inst = random_bounded_instance(2, 1, 0, 77);
    auto pts = find_kkt_points_smallscale(inst, 1e-7);
    REQUIRE_FALSE(pts.empty());
    double best_kkt = std::numeric_limits<double>::infinity();
    for (const auto& pt : pts) best_kkt = std::min(best_kkt, inst.objective(pt.x));
    double best_grid = std::numeric_limits<double>::infinity();
    const int grid = 200;
    for (int i = 0; i <= grid; ++i)
      for (int j = 0; j <= grid; ++j) {
        Eigen::Vector2d x(-1.0 + 2.0 * i / grid, -1.0 + 2.0 * j / grid);
        if ((inst.G.transpose() * x - inst.g).maxCoeff() > 1e-12) continue;
        best_grid = std::min(best_grid, inst.objective(x));
      }
    // Grid resolution: the objective is Lipschitz on the box.
    CHECK(best_kkt <= best_grid + 1e-3);
    CHECK(best_grid <= best_kkt + 1e-3);
  }
}

TEST_CASE("check_rlt_opt on the interval instance") {
  QpInstance inst = interval_instance();
  Eigen::VectorXd x(1);
  x << 1.0;
  Eigen::MatrixXd X(1, 1);
  X << 1.0;
  // Hand-derived optimal dual: u = (1/2, 0), S = [0 1/2; 1/2 0],
  // obtained from the dual LP by enumeration.
  RltDualCert cert;
  cert.u = Eigen::VectorXd(2);
  cert.u << 0.5, 0.0;
  cert.w = Eigen::VectorXd(0);
  cert.R = Eigen::MatrixXd(0, 1);
  cert.S = Eigen::MatrixXd(2, 2);
  cert.S << 0, 0.5, 0.5, 0;

  SUBCASE("certificate passes at the optimum") {
    ViolationReport rep = check_rlt_opt(inst, x, X, cert, 1e-9);
    CHECK(rep.pass);
  }
  SUBCASE("perturbed X breaks complementarity (opt_cs2)") {
    Eigen::MatrixXd Xp(1, 1);
    Xp << 0.9;
    ViolationReport rep = check_rlt_opt(inst, x, Xp, cert, 1e-9);
    CHECK_FALSE(rep.pass);
    CHECK(rep.entries[5].group == "opt_cs2");
    CHECK(rep.entries[5].max_violation == doctest::Approx(0.1).epsilon(1e-9));
  }
  SUBCASE("negative u fails the sign relation") {
    RltDualCert bad = cert;
    bad.u[0] = -1.0;
    ViolationReport rep = check_rlt_opt(inst, x, X, bad, 1e-9);
    CHECK_FALSE(rep.entries[2].pass);  // opt_u
  }
  SUBCASE("the enumerated dual optimum matches the hand-derived one") {
    BuiltProblem rd = build_RD(inst);
    ExtReal dual_value = brute_force_lp_value(rd.prog);
    REQUIRE(dual_value.is_finite());
    // min form: value = -max = 1/2
    CHECK(dual_value.value() == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("lift_rlt") {
  SUBCASE("EX1 alpha = 0 optimum lifts to an (R+)-feasible point") {
    QpInstance inst = example_family(ExampleFamilyId::Ex1, 0.0);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    Eigen::MatrixXd X(2, 2);
    X << 0, -2, -2, 0;
    BuiltProblem rd = build_RD(inst);
    SolveResult rdres = solve(rd.prog);
    REQUIRE(rdres.status == SolveStatus::Optimal);
    RltDualCert cert = extract_rlt_cert(inst, rd, rdres);
    REQUIRE(check_rlt_opt(inst, x, X, cert, 1e-6).pass);
    LiftedPoint pt = lift_rlt(inst, x, X, cert);
    ViolationReport rep = check_feasible_Rplus(inst, pt, 1e-7);
    CHECK(rep.pass);
    // Same (x, X): identical objective value.
    CHECK(pt.x == x);
    CHECK(pt.X == X);
  }
  SUBCASE("p = 0 collapses the z-side blocks to empty") {
    QpInstance inst = interval_instance();
    RltDualCert cert;
    cert.u = Eigen::VectorXd(2);
    cert.u << 0.5, 0.0;
    cert.w = Eigen::VectorXd(0);
    cert.R = Eigen::MatrixXd(0, 1);
    cert.S = Eigen::MatrixXd(2, 2);
    cert.S << 0, 0.5, 0.5, 0;
    Eigen::VectorXd x(1);
    x << 1.0;
    Eigen::MatrixXd X(1, 1);
    X << 1.0;
    LiftedPoint pt = lift_rlt(inst, x, X, cert);
    CHECK(pt.z.size() == 0);
    CHECK(pt.Z.size() == 0);
    CHECK(pt.Mxz.cols() == 0);
    CHECK(pt.Myz.cols() == 0);
    CHECK(check_feasible_Rplus(inst, pt, 1e-7).pass);
  }
  SUBCASE("rank-one optimum produces outer-product lifts") {
    QpInstance inst = interval_instance();
    RltDualCert cert;
    cert.u = Eigen::VectorXd(2);
    cert.u << 0.5, 0.0;
    cert.w = Eigen::VectorXd(0);
    cert.R = Eigen::MatrixXd(0, 1);
    cert.S = Eigen::MatrixXd(2, 2);
    cert.S << 0, 0.5, 0.5, 0;
    Eigen::VectorXd x(1);
    x << 1.0;
    Eigen::MatrixXd X = x * x.transpose();
    LiftedPoint pt = lift_rlt(inst, x, X, cert);
    CHECK((pt.Y - pt.y * pt.y.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((pt.Mxy - pt.x * pt.y.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sdp certificates end to end") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5, 6}) {
    const int n = 2 + static_cast<int>(seed % 3);
    const int p = static_cast<int>(seed % 2);
    QpInstance inst = random_bounded_instance(n, 1, p, seed);
    FaceData face = face_of(inst);
    BuiltProblem srr = build_SRR(inst, face);
    BuiltProblem srrd = build_SRRD(inst, face);
    SolveResult pres = solve(srr.prog);
    SolveResult dres = solve(srrd.prog);
    REQUIRE(pres.status == SolveStatus::Optimal);
    REQUIRE(dres.status == SolveStatus::Optimal);
    auto [x, X] = read_xX(srr, pres, &face);
    REQUIRE(check_feasible_SR(inst, x, X, 1e-6).pass);
    SdpDualCert cert = extract_sdp_cert(inst, srrd, dres);

    ViolationReport opt = check_sdp_opt(inst, face, x, X, cert, 1e-6);
    CHECK(opt.pass);

    ZwRecovery zw = recover_zW(inst, face, x, X, cert, 1e-6);
    CHECK(zw.residuals.pass);
    if (p == 0) {
      CHECK(zw.z.size() == 0);
      // rel_zr reads Bx + b = 0 directly.
      CHECK((cert.B * x + cert.b).cwiseAbs().maxCoeff() < 1e-6);
    }
    // Complementarity identity <B, X - xx'> = 0.
    CHECK(std::abs((cert.B.array() * (X - x * x.transpose()).array()).sum()) < 1e-6);

    LiftedPoint pt = lift_sdprlt(inst, face, x, X, cert);
    ViolationReport lifted = check_feasible_SRplus(inst, pt, 1e-6);
    CHECK(lifted.pass);

    // The deviation from the rank-one embedding is A (X - xx') A'.
    const Eigen::MatrixXd D = X - x * x.transpose();
    Eigen::MatrixXd A(n + inst.m + p, n);
    A.topRows(n) = Eigen::MatrixXd::Identity(n, n);
    A.middleRows(n, inst.m) = -cert.S * inst.G.transpose();
    A.bottomRows(p) = -h_pinv_factor(inst.H) * cert.B;
    Eigen::VectorXd v(n + inst.m + p);
    v << pt.x, pt.y, pt.z;
    Eigen::MatrixXd big(n + inst.m + p, n + inst.m + p);
    big.block(0, 0, n, n) = pt.X;
    big.block(0, n, n, inst.m) = pt.Mxy;
    big.block(0, n + inst.m, n, p) = pt.Mxz;
    big.block(n, 0, inst.m, n) = pt.Mxy.transpose();
    big.block(n, n, inst.m, inst.m) = pt.Y;
    big.block(n, n + inst.m, inst.m, p) = pt.Myz;
    big.block(n + inst.m, 0, p, n) = pt.Mxz.transpose();
    big.block(n + inst.m, n, p, inst.m) = pt.Myz.transpose();
    big.block(n + inst.m, n + inst.m, p, p) = pt.Z;
    CHECK((big - v * v.transpose() - A * D * A.transpose()).cwiseAbs().maxCoeff() < 1e-7);

    // Objective identity <Q, X> + c'x + g'y + h'z = 0 at the lifted point.
    CHECK(std::abs((inst.Q.array() * X.array()).sum() + inst.c.dot(x) +
                   inst.g.dot(pt.y) + inst.h.dot(pt.z)) < 1e-6);

    // Scaling (beta, b, B) by 2 breaks the linear relations.
    SdpDualCert bad = cert;
    bad.beta *= 2;
    bad.b *= 2;
    bad.B *= 2;
    ViolationReport badrep = check_sdp_opt(inst, face, x, X, bad, 1e-6);
    CHECK_FALSE(badrep.pass);
  }
}

TEST_CASE("rank-one KKT embedding is feasible for (R+) and (SR+)") {
  QpInstance inst = example_family(ExampleFamilyId::Ex3, 0.0);
  auto pts = find_kkt_points_smallscale(inst, 1e-8);
  REQUIRE_FALSE(pts.empty());
  for (const auto& kkt : pts) {
    LiftedPoint pt;
    pt.x = kkt.x;
    pt.y = kkt.y;
    pt.z = kkt.z;
    pt.X = kkt.x * kkt.x.transpose();
    pt.Y = kkt.y * kkt.y.transpose();
    pt.Z = kkt.z * kkt.z.transpose();
    pt.Mxy = kkt.x * kkt.y.transpose();
    pt.Mxz = kkt.x * kkt.z.transpose();
    pt.Myz = kkt.y * kkt.z.transpose();
    CHECK(check_feasible_Rplus(inst, pt, 1e-8).pass);
    CHECK(check_feasible_SRplus(inst, pt, 1e-8).pass);
  }
}

TEST_CASE("kkt implies the objective identity at matching scale") {
  // Any point passing kkt1-kkt5 at tol passes the identity at O(tol).
  for (std::uint64_t seed : {5, 6, 7}) {
    QpInstance inst = random_bounded_instance(2, 2, 0, seed);
    auto pts = find_kkt_points_smallscale(inst, 1e-7);
    for (const auto& pt : pts) {
      ViolationReport rep = check_kkt(inst, pt, 1e-7);
      REQUIRE(rep.pass);
      const double scale = 1.0 + inst.Q.cwiseAbs().maxCoeff() + inst.g.cwiseAbs().maxCoeff();
      CHECK(rep.entries[5].max_violation <= 100 * 1e-7 * scale);
    }
  }
}

TEST_CASE("certify pipeline") {
  SUBCASE("random bounded instance passes every stage") {
    QpInstance inst = random_bounded_instance(3, 1, 1, 7);
    CertifyReport rep = run_certify(inst, Tolerances{});
    CHECK(rep.math_pass);
    CHECK(rep.numeric_ok);
    CHECK(rep.text.find("check_rlt_opt: pass") != std::string::npos);
    CHECK(rep.text.find("check_sdp_opt: pass") != std::string::npos);
    CHECK(rep.text.find("recover_zW: pass") != std::string::npos);
  }
  SUBCASE("EX2: RLT branch stops at the unbounded relaxation, SDP continues") {
    QpInstance inst = example_family(ExampleFamilyId::Ex2, 0.0);
    CertifyReport rep = run_certify(inst, Tolerances{});
    CHECK(rep.numeric_ok);
    CHECK(rep.text.find("solve_R: Unbounded") != std::string::npos);
    CHECK(rep.text.find("RD status Infeasible") != std::string::npos);
    CHECK(rep.text.find("solve_SRR: Optimal") != std::string::npos);
  }
  SUBCASE("instance violating the precondition fails validation") {
    QpInstance inst;
    inst.n = 1;
    inst.m = 0;
    inst.p = 1;
    inst.Q = Eigen::MatrixXd::Identity(1, 1);
    inst.c = Eigen::VectorXd::Zero(1);
    inst.G = Eigen::MatrixXd(1, 0);
    inst.g = Eigen::VectorXd(0);
    inst.H = Eigen::MatrixXd::Identity(1, 1);
    inst.h = Eigen::VectorXd::Zero(1);
    CertifyReport rep = run_certify(inst, Tolerances{});
    CHECK_FALSE(rep.math_pass);
    CHECK(rep.text.find("validate: FAIL") != std::string::npos);
  }
}
