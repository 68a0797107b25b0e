// Exercises the shared-library C API surface end to end.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "qprelax/qprelax.h"

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/qprelax_capi_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("instance construction, io and dims") {
  qpr_instance* inst = nullptr;
  REQUIRE(qpr_instance_from_family(1, 0.5, &inst) == QPR_OK);
  int n = 0, m = 0, p = 0;
  CHECK(qpr_instance_dims(inst, &n, &m, &p) == QPR_OK);
  CHECK(n == 2);
  CHECK(m == 2);
  CHECK(p == 0);

  TempFile f("roundtrip.qpr");
  REQUIRE(qpr_instance_to_file(inst, f.path.c_str()) == QPR_OK);
  qpr_instance* reread = nullptr;
  REQUIRE(qpr_instance_from_file(f.path.c_str(), &reread) == QPR_OK);
  qpr_solve_summary a, b;
  qpr_options opts;
  qpr_options_default(&opts);
  REQUIRE(qpr_solve_problem(inst, QPR_PROBLEM_R, &opts, &a) == QPR_OK);
  REQUIRE(qpr_solve_problem(reread, QPR_PROBLEM_R, &opts, &b) == QPR_OK);
  CHECK(a.status == QPR_STATUS_OPTIMAL);
  CHECK(b.value.value == doctest::Approx(a.value.value));
  qpr_instance_free(reread);
  qpr_instance_free(inst);
}

TEST_CASE("error paths set messages and codes") {
  qpr_instance* inst = nullptr;
  CHECK(qpr_instance_from_file("/nonexistent/definitely-missing.qpr", &inst) ==
        QPR_ERROR_PARSE);
  CHECK(std::strlen(qpr_last_error_message()) > 0);
  CHECK(qpr_instance_from_family(9, 0.0, &inst) == QPR_ERROR_INVALID_ARGUMENT);
  CHECK(qpr_instance_from_file(nullptr, &inst) == QPR_ERROR_INVALID_ARGUMENT);
  qpr_solve_summary sum;
  CHECK(qpr_solve_problem(nullptr, QPR_PROBLEM_R, nullptr, &sum) ==
        QPR_ERROR_INVALID_ARGUMENT);
}

TEST_CASE("validate reports the precondition") {
  qpr_instance* inst = nullptr;
  REQUIRE(qpr_instance_from_family(1, 0.0, &inst) == QPR_OK);
  qpr_validation rep;
  double point[2] = {42.0, 42.0};
  REQUIRE(qpr_validate(inst, 1e-9, &rep, point) == QPR_OK);
  CHECK(rep.feasible == 1);
  CHECK(rep.has_slater_point == 1);
  CHECK(rep.assumption_ok == 1);
  CHECK(rep.rank_h == 0);
  CHECK(std::abs(point[0]) < 1e-6);
  qpr_instance_free(inst);
}

TEST_CASE("solve statuses map through") {
  qpr_options opts;
  qpr_options_default(&opts);
  qpr_instance* ex2 = nullptr;
  REQUIRE(qpr_instance_from_family(2, 0.0, &ex2) == QPR_OK);
  qpr_solve_summary sum;
  REQUIRE(qpr_solve_problem(ex2, QPR_PROBLEM_R, &opts, &sum) == QPR_OK);
  CHECK(sum.status == QPR_STATUS_UNBOUNDED);
  CHECK(sum.value.kind == QPR_VALUE_NEG_INF);
  REQUIRE(qpr_solve_problem(ex2, QPR_PROBLEM_SR, &opts, &sum) == QPR_OK);
  CHECK(sum.status == QPR_STATUS_OPTIMAL);
  CHECK(sum.value.value == doctest::Approx(0.0).epsilon(1e-5));
  qpr_instance_free(ex2);

  qpr_instance* ex4 = nullptr;
  REQUIRE(qpr_instance_from_family(4, 0.0, &ex4) == QPR_OK);
  REQUIRE(qpr_solve_problem(ex4, QPR_PROBLEM_RPLUS, &opts, &sum) == QPR_OK);
  CHECK(sum.status == QPR_STATUS_INFEASIBLE);
  CHECK(sum.value.kind == QPR_VALUE_POS_INF);
  qpr_instance_free(ex4);
}

TEST_CASE("reference values") {
  qpr_extreal refs[5];
  REQUIRE(qpr_reference_values(2, 3.0, refs) == QPR_OK);
  CHECK(refs[0].kind == QPR_VALUE_FINITE);  // nu_star = -5
  CHECK(refs[0].value == doctest::Approx(-5.0));
  CHECK(refs[1].kind == QPR_VALUE_NEG_INF);  // nu_R
  CHECK(refs[2].value == doctest::Approx(-5.0));
  CHECK(refs[3].value == doctest::Approx(-5.0));  // nu_SR
  CHECK(refs[4].value == doctest::Approx(-5.0));  // nu_SR+
}

TEST_CASE("compare and certify return text reports") {
  qpr_instance* inst = nullptr;
  REQUIRE(qpr_instance_random_bounded(2, 1, 0, 7, &inst) == QPR_OK);
  qpr_options opts;
  qpr_options_default(&opts);

  const int kinds[] = {QPR_PROBLEM_R, QPR_PROBLEM_RPLUS, QPR_PROBLEM_SR, QPR_PROBLEM_SRR,
                       QPR_PROBLEM_SRPLUS};
  char* report = nullptr;
  int verdicts = 0, numeric = 0;
  REQUIRE(qpr_compare(inst, kinds, 5, &opts, nullptr, &report, &verdicts, &numeric) ==
          QPR_OK);
  CHECK(verdicts == 1);
  CHECK(numeric == 1);
  CHECK(std::string(report).find("verdict") != std::string::npos);
  qpr_string_free(report);

  report = nullptr;
  int math_pass = 0, numeric_ok = 0;
  REQUIRE(qpr_certify(inst, &opts, &report, &math_pass, &numeric_ok) == QPR_OK);
  CHECK(math_pass == 1);
  CHECK(numeric_ok == 1);
  CHECK(std::string(report).find("stage validate: pass") != std::string::npos);
  qpr_string_free(report);
  qpr_instance_free(inst);
}

TEST_CASE("program dump") {
  qpr_instance* inst = nullptr;
  REQUIRE(qpr_instance_from_family(1, 0.0, &inst) == QPR_OK);
  TempFile f("dump.txt");
  REQUIRE(qpr_dump_program(inst, QPR_PROBLEM_R, f.path.c_str()) == QPR_OK);
  std::ifstream in(f.path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("min") != std::string::npos);
  CHECK(text.find("prod") != std::string::npos);
  qpr_instance_free(inst);
}
