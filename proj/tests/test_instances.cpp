#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "qprelax/errors.hpp"
#include "qprelax/instance.hpp"
#include "qprelax/instance_io.hpp"

using namespace qpr;

TEST_CASE("example family matrices match the published data exactly") {
  SUBCASE("EX1 alpha=1") {
    QpInstance e1 = example_family(ExampleFamilyId::Ex1, 1.0);
    CHECK(e1.n == 2);
    CHECK(e1.m == 2);
    CHECK(e1.p == 0);
    Eigen::MatrixXd Q(2, 2), G(2, 2);
    Q << 1, 1, 1, 1;
    G << 1, -1, 1, -1;
    CHECK(e1.Q == Q);
    CHECK(e1.G == G);
    CHECK(e1.c[0] == -1.0);
    CHECK(e1.c[1] == -1.0);
    CHECK(e1.g[0] == 2.0);
    CHECK(e1.g[1] == 2.0);
  }
  SUBCASE("EX2 alpha=0") {
    QpInstance e2 = example_family(ExampleFamilyId::Ex2, 0.0);
    CHECK(e2.Q == Eigen::MatrixXd::Identity(2, 2));
    CHECK(e2.c[0] == 0.0);
    CHECK(e2.c[1] == 0.0);
  }
  SUBCASE("EX4 alpha=0") {
    QpInstance e4 = example_family(ExampleFamilyId::Ex4, 0.0);
    CHECK(e4.Q == (-Eigen::MatrixXd::Identity(2, 2)).eval());
    CHECK(e4.c[0] == 0.0);
    CHECK(e4.c[1] == -1.0);
    CHECK(e4.G == (-Eigen::MatrixXd::Identity(2, 2)).eval());
    CHECK(e4.g[0] == 0.0);
  }
  SUBCASE("alpha enters exactly as a formula") {
    const double alpha = 0.3;
    QpInstance e1 = example_family(ExampleFamilyId::Ex1, alpha);
    CHECK(e1.c[0] == -alpha);
    QpInstance e4 = example_family(ExampleFamilyId::Ex4, alpha);
    CHECK(e4.c[0] == -alpha);
    CHECK(e4.c[1] == -1 + alpha);
  }
}

TEST_CASE("closed-form values") {
  SUBCASE("EX1 alpha=0") {
    ClosedFormValues v = closed_form_values(ExampleFamilyId::Ex1, 0.0);
    CHECK(v.nu_star == ExtReal::finite(0.0));
    CHECK(v.nu_r == ExtReal::finite(-2.0));
    CHECK(v.nu_rplus == ExtReal::finite(-2.0));
  }
  SUBCASE("EX2 alpha=3") {
    ClosedFormValues v = closed_form_values(ExampleFamilyId::Ex2, 3.0);
    CHECK(v.nu_star == ExtReal::finite(-5.0));
    CHECK(v.nu_r.is_neg_inf());
    CHECK(v.nu_rplus == ExtReal::finite(-5.0));
  }
  SUBCASE("EX3 alpha=0") {
    ClosedFormValues v = closed_form_values(ExampleFamilyId::Ex3, 0.0);
    CHECK(v.nu_star.is_neg_inf());
    CHECK(v.nu_r.is_neg_inf());
    CHECK(v.nu_rplus == ExtReal::finite(-1.0));
  }
  SUBCASE("EX4 any alpha") {
    for (double a : {-1.0, 0.0, 1.0, 2.5}) {
      ClosedFormValues v = closed_form_values(ExampleFamilyId::Ex4, a);
      CHECK(v.nu_star.is_neg_inf());
      CHECK(v.nu_r.is_neg_inf());
      CHECK(v.nu_rplus.is_pos_inf());
    }
  }
  SUBCASE("continuity at finite breakpoints") {
    struct Case {
      ExampleFamilyId id;
      double breakpoint;
    };
    const Case cases[] = {{ExampleFamilyId::Ex1, -2.0}, {ExampleFamilyId::Ex1, 2.0},
                          {ExampleFamilyId::Ex2, -1.0}, {ExampleFamilyId::Ex2, 1.0},
                          {ExampleFamilyId::Ex3, 0.0}};
    const double eps = 1e-9;
    for (const auto& c : cases) {
      for (auto pick : {&ClosedFormValues::nu_star, &ClosedFormValues::nu_r,
                        &ClosedFormValues::nu_rplus}) {
        ExtReal lo = closed_form_values(c.id, c.breakpoint - eps).*pick;
        ExtReal mid = closed_form_values(c.id, c.breakpoint).*pick;
        ExtReal hi = closed_form_values(c.id, c.breakpoint + eps).*pick;
        if (lo.is_finite() && mid.is_finite()) CHECK(std::abs(lo.value() - mid.value()) < 1e-8);
        if (hi.is_finite() && mid.is_finite()) CHECK(std::abs(hi.value() - mid.value()) < 1e-8);
      }
    }
  }
  SUBCASE("sdp references follow the closed forms") {
    SdpReferenceValues s1 = sdp_reference_values(ExampleFamilyId::Ex1, 0.5);
    CHECK(s1.nu_sr == closed_form_values(ExampleFamilyId::Ex1, 0.5).nu_star);
    SdpReferenceValues s3 = sdp_reference_values(ExampleFamilyId::Ex3, 0.5);
    CHECK(s3.nu_sr.is_neg_inf());
    CHECK(s3.nu_srplus == ExtReal::finite(-2.0));
    SdpReferenceValues s4 = sdp_reference_values(ExampleFamilyId::Ex4, 0.0);
    CHECK(s4.nu_srplus.is_pos_inf());
  }
}

TEST_CASE("validate_assumption1") {
  SUBCASE("EX1 is strictly feasible with margin 2 at the origin") {
    QpInstance inst = example_family(ExampleFamilyId::Ex1, 0.7);
    SlaterReport rep = validate_assumption1(inst);
    CHECK(rep.feasible);
    REQUIRE(rep.slater_point.has_value());
    // The auxiliary LP maximizes the margin; the best point is the origin.
    CHECK(rep.slater_point->cwiseAbs().maxCoeff() < 1e-6);
    CHECK(rep.margin == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(rep.assumption1_ok(inst.n, inst.p));
  }
  SUBCASE("p = n pins the feasible set and violates the precondition") {
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
    SlaterReport rep = validate_assumption1(inst);
    CHECK(rep.rank_h == 1);
    CHECK(rep.feasible);
    CHECK_FALSE(rep.assumption1_ok(inst.n, inst.p));
  }
  SUBCASE("interval [0,1]") {
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
    SlaterReport rep = validate_assumption1(inst);
    CHECK(rep.feasible);
    REQUIRE(rep.slater_point.has_value());
    CHECK((*rep.slater_point)[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(rep.margin == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("inconsistent equalities are infeasible") {
    QpInstance inst;
    inst.n = 2;
    inst.m = 0;
    inst.p = 2;
    inst.Q = Eigen::MatrixXd::Identity(2, 2);
    inst.c = Eigen::VectorXd::Zero(2);
    inst.G = Eigen::MatrixXd(2, 0);
    inst.g = Eigen::VectorXd(0);
    inst.H = Eigen::MatrixXd(2, 2);
    inst.H << 1, 1, 1, 1;  // H' rows both equal (1, 1)
    inst.h = Eigen::VectorXd(2);
    inst.h << 0, 1;
    SlaterReport rep = validate_assumption1(inst);
    CHECK_FALSE(rep.feasible);
  }
}

TEST_CASE("random bounded instances") {
  SUBCASE("box construction") {
    QpInstance inst = random_bounded_instance(2, 0, 0, 7);
    CHECK(inst.m == 4);
    CHECK(inst.p == 0);
    SlaterReport rep = validate_assumption1(inst);
    CHECK(rep.assumption1_ok(inst.n, inst.p));
    // x = 0 is strictly feasible; the LP margin is at least as good.
    CHECK(rep.margin >= inst.g.minCoeff() - 1e-9);
  }
  SUBCASE("cuts and equalities") {
    QpInstance inst = random_bounded_instance(3, 2, 1, 1);
    CHECK(inst.m == 8);
    CHECK(inst.p == 1);
    CHECK(inst.h.cwiseAbs().maxCoeff() == 0.0);  // through the origin
    SlaterReport rep = validate_assumption1(inst);
    CHECK(rep.assumption1_ok(inst.n, inst.p));
    CHECK(rep.rank_h == 1);
  }
  SUBCASE("determinism") {
    QpInstance a = random_bounded_instance(4, 2, 1, 42);
    QpInstance b = random_bounded_instance(4, 2, 1, 42);
    CHECK(a.Q == b.Q);
    CHECK(a.c == b.c);
    CHECK(a.G == b.G);
    CHECK(a.g == b.g);
    CHECK(a.H == b.H);
    QpInstance c = random_bounded_instance(4, 2, 1, 43);
    CHECK(a.Q != c.Q);
  }
  SUBCASE("every generated instance keeps 0 strictly feasible") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      QpInstance inst = random_bounded_instance(1 + seed % 4, seed % 3, 0, seed);
      CHECK(inst.g.minCoeff() > 0.0);
    }
  }
}

TEST_CASE("instance file round-trip") {
  SUBCASE("write -> read -> write is bit-exact") {
    QpInstance inst = random_bounded_instance(3, 2, 1, 5);
    std::ostringstream first;
    write_instance(inst, first);
    std::istringstream in(first.str());
    QpInstance reread = read_instance(in);
    std::ostringstream second;
    write_instance(reread, second);
    CHECK(first.str() == second.str());
    CHECK(inst.Q == reread.Q);
    CHECK(inst.H == reread.H);
  }
  SUBCASE("family shorthand expands") {
    std::istringstream in("qprelax-instance v1\nfamily EX2 0.5\n");
    QpInstance inst = read_instance(in);
    CHECK(inst.Q == Eigen::MatrixXd::Identity(2, 2));
    CHECK(inst.c[0] == -0.5);
  }
  SUBCASE("upper triangle and full Q both load") {
    std::istringstream tri(
        "qprelax-instance v1\nn 2\nm 0\np 0\nQ 1 2 3\nc 0 0\nG\ng\nH\nh\n");
    QpInstance a = read_instance(tri);
    CHECK(a.Q(0, 1) == 2.0);
    CHECK(a.Q(1, 0) == 2.0);
    std::istringstream full(
        "qprelax-instance v1\nn 2\nm 0\np 0\nQ 1 2 2 3\nc 0 0\nG\ng\nH\nh\n");
    QpInstance b = read_instance(full);
    CHECK(a.Q == b.Q);
  }
  SUBCASE("rejects malformed input") {
    std::istringstream bad1("not-a-header\n");
    CHECK_THROWS_AS(read_instance(bad1), ParseError);
    std::istringstream bad2("qprelax-instance v1\nn 2\nm 0\np 0\nQ 1 2 9 3\nc 0 0\n");
    CHECK_THROWS_AS(read_instance(bad2), ParseError);  // asymmetric full Q
    std::istringstream bad3("qprelax-instance v1\nfamily EX9 0\n");
    CHECK_THROWS_AS(read_instance(bad3), ParseError);
  }
  SUBCASE("comments and layout are free-form") {
    std::istringstream in(
        "qprelax-instance v1  # header\nn 1\nm 1\np 0\n"
        "Q -0.5\nc 0\nG 1\ng 1  # x <= 1\nH\nh\n");
    QpInstance inst = read_instance(in);
    CHECK(inst.Q(0, 0) == -0.5);
    CHECK(inst.g[0] == 1.0);
  }
}
