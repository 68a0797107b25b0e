#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qprelax/builders.hpp"
#include "qprelax/certify.hpp"
#include "qprelax/conic.hpp"
#include "qprelax/instance.hpp"
#include "qprelax/pipeline.hpp"

using namespace qpr;

namespace {

QpInstance interval_instance() {
  // min -x^2/2 over [0, 1]: n = 1, G = [1 -1], g = (1, 0).
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

Eigen::VectorXd rank_one_point(const BuiltProblem& bp, const QpInstance& inst,
                               const Eigen::VectorXd& x) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(bp.prog.num_vars());
  for (int i = 0; i < inst.n; ++i) v[(*bp.map.x)(i)] = x[i];
  for (int i = 0; i < inst.n; ++i)
    for (int j = i; j < inst.n; ++j) v[(*bp.map.X)(i, j)] = x[i] * x[j];
  if (bp.map.psd_block) {
    const int blk = *bp.map.psd_block;
    Eigen::VectorXd lift(inst.n + 1);
    lift << 1.0, x;
    for (int i = 0; i <= inst.n; ++i)
      for (int j = i; j <= inst.n; ++j)
        v[bp.prog.psd_entry(blk, i, j)] = lift[i] * lift[j];
  }
  return v;
}

}  // namespace

TEST_CASE("build_R dimensions and feasibility") {
  SUBCASE("EX1 has 5 scalar vars, 2 + 3 inequalities, 0 equalities") {
    QpInstance inst = example_family(ExampleFamilyId::Ex1, 0.0);
    BuiltProblem bp = build_R(inst);
    CHECK(bp.prog.num_vars() == 5);
    CHECK(bp.prog.ineqs().size() == 5);
    CHECK(bp.prog.eqs().size() == 0);
    CHECK(bp.prog.num_psd_blocks() == 0);
  }
  SUBCASE("interval instance linearizes the three products") {
    // Products expand to X >= 0, x - X >= 0, X - 2x + 1 >= 0; check the
    // builder rows symbolically by evaluating on a grid.
    QpInstance inst = interval_instance();
    BuiltProblem bp = build_R(inst);
    REQUIRE(bp.prog.ineqs().size() == 2 + 3);
    auto violates = [&](double x, double X) {
      Eigen::VectorXd v(2);
      v << x, X;
      Eigen::VectorXd pt = Eigen::VectorXd::Zero(bp.prog.num_vars());
      pt[(*bp.map.x)(0)] = x;
      pt[(*bp.map.X)(0, 0)] = X;
      return bp.prog.max_violation(pt);
    };
    // The rows carve out max(0, 2x - 1) <= X <= x on 0 <= x <= 1.
    CHECK(violates(0.5, 0.25) < 1e-12);       // on the parabola: feasible
    CHECK(violates(0.5, 0.6) > 1e-6);         // X > x violates x - X >= 0
    CHECK(violates(0.1, -0.05) > 1e-6);       // X < 0 violates X >= 0
    CHECK(violates(0.9, 0.85) < 1e-12);       // inside the RLT envelope
    CHECK(violates(0.9, 0.7) > 1e-6);         // violates X - 2x + 1 >= 0
  }
  SUBCASE("rank-one lifts of feasible points are feasible") {
    std::mt19937_64 gen(3);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      QpInstance inst = random_bounded_instance(2 + seed % 3, seed % 3, seed % 2, seed);
      BuiltProblem bp = build_R(inst);
      // Sample feasible x by rejection inside the box.
      for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd x(inst.n);
        for (int i = 0; i < inst.n; ++i)
          x[i] = std::uniform_real_distribution<double>(-1.0, 1.0)(gen);
        if (inst.p > 0) {
          // Project onto H'x = h = 0.
          x -= inst.H * (inst.H.transpose() * inst.H).ldlt().solve(inst.H.transpose() * x);
        }
        if ((inst.G.transpose() * x - inst.g).maxCoeff() > 0) continue;
        CHECK(bp.prog.max_violation(rank_one_point(bp, inst, x)) < 1e-9);
      }
    }
  }
}

TEST_CASE("build_RD") {
  SUBCASE("EX2: the Q-equation is inconsistent, so (RD) is infeasible") {
    QpInstance inst = example_family(ExampleFamilyId::Ex2, 0.0);
    BuiltProblem bp = build_RD(inst);
    SolveResult res = solve(bp.prog);
    CHECK(res.status == SolveStatus::Infeasible);
    CHECK(problem_value(bp, res).is_neg_inf());  // max problem: -inf
  }
  SUBCASE("m = 0, p = 0: feasible iff c = 0") {
    QpInstance inst;
    inst.n = 1;
    inst.m = 0;
    inst.p = 0;
    inst.Q = Eigen::MatrixXd::Zero(1, 1);
    inst.c = Eigen::VectorXd::Zero(1);
    inst.G = Eigen::MatrixXd(1, 0);
    inst.g = Eigen::VectorXd(0);
    inst.H = Eigen::MatrixXd(1, 0);
    inst.h = Eigen::VectorXd(0);
    BuiltProblem bp = build_RD(inst);
    CHECK(solve(bp.prog).status == SolveStatus::Optimal);
    inst.c[0] = 1.0;
    BuiltProblem bad = build_RD(inst);
    CHECK(solve(bad.prog).status == SolveStatus::Infeasible);
  }
  SUBCASE("weak duality against the oracle on the interval instance") {
    QpInstance inst = interval_instance();
    BuiltProblem r = build_R(inst);
    ExtReal primal = brute_force_lp_value(r.prog);
    REQUIRE(primal.is_finite());
    BuiltProblem rd = build_RD(inst);
    SolveResult dres = solve(rd.prog);
    REQUIRE(dres.status == SolveStatus::Optimal);
    ExtReal dual = problem_value(rd, dres);
    CHECK(dual.value() <= primal.value() + 1e-7);
    // Strong duality holds for LPs.
    CHECK(dual.value() == doctest::Approx(primal.value()).epsilon(1e-6));
  }
}

TEST_CASE("build_Rplus") {
  SUBCASE("group counts for (n, m, p) = (2, 2, 0)") {
    QpInstance inst = example_family(ExampleFamilyId::Ex1, 0.0);
    BuiltProblem bp = build_Rplus(inst);
    const int n = 2, m = 2;
    // Variables: x, y, X, Y, Mxy (z, Z, Mxz, Myz empty).
    CHECK(bp.prog.num_vars() == n + m + 3 + 3 + n * m);
    // Equalities: groups 5, 8, 9, 11, 15.
    CHECK(bp.prog.eqs().size() == static_cast<std::size_t>(n + n * n + n * m + m + 1));
    // Inequalities: groups 1, 4, 12, 13, 14.
    CHECK(bp.prog.ineqs().size() ==
          static_cast<std::size_t>(m + m * (m + 1) / 2 + m * m + m + m * (m + 1) / 2));
  }
  SUBCASE("EX4 is infeasible for every alpha tested") {
    for (double alpha : {-1.0, 0.0, 1.0}) {
      QpInstance inst = example_family(ExampleFamilyId::Ex4, alpha);
      BuiltProblem bp = build_Rplus(inst);
      SolveResult res = solve(bp.prog);
      CHECK(res.status == SolveStatus::Infeasible);
    }
  }
  SUBCASE("EX1 at alpha = 0 attains -2") {
    QpInstance inst = example_family(ExampleFamilyId::Ex1, 0.0);
    BuiltProblem bp = build_Rplus(inst);
    SolveResult res = solve(bp.prog);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.objective.value() == doctest::Approx(-2.0).epsilon(1e-7));
  }
}

TEST_CASE("build_SR") {
  SUBCASE("interval instance: nu_SR = -1/2") {
    QpInstance inst = interval_instance();
    BuiltProblem bp = build_SR(inst);
    SolveResult res = solve(bp.prog);
    REQUIRE(res.status == SolveStatus::Optimal);
    // nu_R = -1/2 (oracle) and nu_R <= nu_SR <= nu* = -1/2 forces equality.
    CHECK(res.objective.value() == doctest::Approx(-0.5).epsilon(1e-6));
  }
  SUBCASE("rank-one lifts are feasible") {
    QpInstance inst = random_bounded_instance(3, 1, 1, 11);
    BuiltProblem bp = build_SR(inst);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);  // origin is feasible
    CHECK(bp.prog.max_violation(rank_one_point(bp, inst, x)) < 1e-12);
  }
  SUBCASE("p > 0: feasible moment matrices annihilate [h; -H]") {
    QpInstance inst = random_bounded_instance(3, 0, 1, 21);
    BuiltProblem bp = build_SR(inst);
    SolveResult res = solve(bp.prog);
    REQUIRE(res.status == SolveStatus::Optimal);
    auto [x, X] = read_xX(bp, res);
    Eigen::MatrixXd M(4, 4);
    M(0, 0) = 1.0;
    M.block(0, 1, 1, 3) = x.transpose();
    M.block(1, 0, 3, 1) = x;
    M.block(1, 1, 3, 3) = X;
    Eigen::MatrixXd V(4, 1);
    V(0, 0) = inst.h[0];
    V.block(1, 0, 3, 1) = -inst.H;
    CHECK((M * V).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("build_SRR") {
  SUBCASE("p = 0: equivalent to SR up to a change of variables") {
    QpInstance inst = example_family(ExampleFamilyId::Ex1, 1.0);
    FaceData face = face_of(inst);
    BuiltProblem srr = build_SRR(inst, face);
    CHECK(srr.prog.num_psd_blocks() == 1);
    CHECK(srr.prog.psd_side(0) == inst.n + 1);
    SolveResult a = solve(srr.prog);
    BuiltProblem sr = build_SR(inst);
    SolveResult b = solve(sr.prog);
    REQUIRE(a.status == SolveStatus::Optimal);
    REQUIRE(b.status == SolveStatus::Optimal);
    CHECK(a.objective.value() == doctest::Approx(b.objective.value()).epsilon(1e-6));
  }
  SUBCASE("p = 1: the implied moment matrix lies in the face cone") {
    QpInstance inst = random_bounded_instance(3, 1, 1, 31);
    FaceData face = face_of(inst);
    BuiltProblem srr = build_SRR(inst, face);
    CHECK(srr.prog.psd_side(0) == inst.n - inst.p + 1);
    SolveResult res = solve(srr.prog);
    REQUIRE(res.status == SolveStatus::Optimal);
    auto [x, X] = read_xX(srr, res, &face);
    Eigen::MatrixXd M(inst.n + 1, inst.n + 1);
    M(0, 0) = 1.0;
    M.block(0, 1, 1, inst.n) = x.transpose();
    M.block(1, 0, inst.n, 1) = x;
    M.block(1, 1, inst.n, inst.n) = X;
    CHECK(in_cone_K(M, face, 1e-6));
    // The face restriction makes H'x = h and H'X = hx' implicit.
    CHECK((inst.H.transpose() * x - inst.h).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((inst.H.transpose() * X - inst.h * x.transpose()).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("diag(1, eps I) in T-space is strictly feasible") {
    QpInstance inst = random_bounded_instance(3, 1, 1, 41);
    FaceData face = face_of(inst);
    BuiltProblem srr = build_SRR(inst, face);
    const int r = inst.n - inst.p + 1;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(srr.prog.num_vars());
    const double eps = 1e-3;
    for (int s = 0; s < r; ++s)
      v[srr.prog.psd_entry(0, s, s)] = s == 0 ? 1.0 : eps;
    // All inequality rows strictly slack.
    for (const auto& con : srr.prog.ineqs())
      CHECK(con.expr.eval(v) < con.rhs - 1e-6);
    for (const auto& con : srr.prog.eqs())
      CHECK(std::abs(con.expr.eval(v) - con.rhs) < 1e-12);
  }
}

TEST_CASE("build_SRRD") {
  SUBCASE("m = 0: equalities force b = c, B = Q") {
    QpInstance inst;
    inst.n = 2;
    inst.m = 0;
    inst.p = 1;
    inst.Q = Eigen::MatrixXd::Identity(2, 2);
    inst.c = Eigen::VectorXd::Ones(2);
    inst.G = Eigen::MatrixXd(2, 0);
    inst.g = Eigen::VectorXd(0);
    inst.H = Eigen::MatrixXd(2, 1);
    inst.H << 1, 0;
    inst.h = Eigen::VectorXd::Zero(1);
    FaceData face = face_of(inst);
    BuiltProblem bp = build_SRRD(inst, face);
    SolveResult res = solve(bp.prog);
    REQUIRE(res.status == SolveStatus::Optimal);
    Eigen::VectorXd b = bp.map.b->read_vector(res.primal);
    Eigen::MatrixXd B = bp.map.B->read_matrix(res.primal);
    CHECK((b - inst.c).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((B - inst.Q).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("strong duality with SRR on random bounded instances") {
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
      QpInstance inst = random_bounded_instance(2 + seed % 3, seed % 2, seed % 2, seed);
      FaceData face = face_of(inst);
      BuiltProblem srr = build_SRR(inst, face);
      BuiltProblem srrd = build_SRRD(inst, face);
      SolveResult a = solve(srr.prog);
      SolveResult b = solve(srrd.prog);
      REQUIRE(a.status == SolveStatus::Optimal);
      REQUIRE(b.status == SolveStatus::Optimal);
      ExtReal dual = problem_value(srrd, b);
      CHECK(std::abs(a.objective.value() - dual.value()) < 1e-5);
    }
  }
}

TEST_CASE("build_SRplus") {
  SUBCASE("EX1 alpha = 0: optimal value 0 (exact for convex objectives)") {
    QpInstance inst = example_family(ExampleFamilyId::Ex1, 0.0);
    BuiltProblem bp = build_SRplus(inst);
    SolveResult res = solve(bp.prog);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(std::abs(res.objective.value()) < 1e-6);
  }
  SUBCASE("EX2 alpha = 0: optimal value 0") {
    QpInstance inst = example_family(ExampleFamilyId::Ex2, 0.0);
    SolveResult res = solve(build_SRplus(inst).prog);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(std::abs(res.objective.value()) < 1e-6);
  }
  SUBCASE("EX3 alpha = 0: optimal value -1 equals the (R+) bound") {
    QpInstance inst = example_family(ExampleFamilyId::Ex3, 0.0);
    SolveResult res = solve(build_SRplus(inst).prog);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.objective.value() == doctest::Approx(-1.0).epsilon(1e-6));
  }
}

TEST_CASE("bound ordering and monotone constraint addition") {
  for (std::uint64_t seed : {11, 12, 13}) {
    QpInstance inst = random_bounded_instance(2 + seed % 2, 1, 0, seed);
    SolveResult r = solve(build_R(inst).prog);
    SolveResult sr = solve(build_SR(inst).prog);
    SolveResult rplus = solve(build_Rplus(inst).prog);
    SolveResult srplus = solve(build_SRplus(inst).prog);
    REQUIRE(r.status == SolveStatus::Optimal);
    REQUIRE(sr.status == SolveStatus::Optimal);
    REQUIRE(rplus.status == SolveStatus::Optimal);
    REQUIRE(srplus.status == SolveStatus::Optimal);
    CHECK(r.objective.value() <= sr.objective.value() + 1e-6);
    CHECK(r.objective.value() <= rplus.objective.value() + 1e-6);
    CHECK(sr.objective.value() <= srplus.objective.value() + 1e-6);
    // Best sampled upper bound on nu*: objective at the origin.
    CHECK(sr.objective.value() <= inst.objective(Eigen::VectorXd::Zero(inst.n)) + 1e-6);
  }
}
