#pragma once

#include <string>
#include <vector>

#include "qprelax/builders.hpp"
#include "qprelax/certify.hpp"
#include "qprelax/instance.hpp"

namespace qpr {

/// Default tolerances, all overridable from the CLI: solver stopping
/// tolerance, feasibility of solver output, certificate residuals, and
/// value-equality comparisons.
struct Tolerances {
  double solver = 1e-8;
  int max_iter = 200;
  double feas = 1e-7;
  double cert = 1e-6;
  double value = 1e-5;
};

struct ProblemRun {
  ProblemKind kind = ProblemKind::R;
  SolveStatus status = SolveStatus::NumericalFailure;
  ExtReal value;  // value of the stated problem (sign-corrected)
  double seconds = 0.0;
};

/// Builds and solves one problem. Kinds SRR/SRRD validate the rank/Slater
/// precondition and construct the facial-reduction data first.
ProblemRun run_problem(const QpInstance& inst, ProblemKind kind, const Tolerances& tols);

struct CompareReport {
  struct Verdict {
    enum class State { Pass, Fail, NotApplicable };
    std::string name;
    std::string detail;
    State state = State::Pass;
  };
  std::vector<ProblemRun> runs;
  std::vector<Verdict> verdicts;

  bool any_numerical_failure() const;
  bool all_verdicts_pass() const;
  std::string to_text() const;
};

/// Solves the requested problems and appends the derived equivalence
/// verdicts (R vs R+, SR vs SR+, SR vs SRR) where both sides were run.
/// When dump_dir is nonempty every built program is written there as a
/// text listing.
CompareReport run_compare(const QpInstance& inst, const std::vector<ProblemKind>& kinds,
                          const Tolerances& tols, const std::string& dump_dir = "");

struct SweepPointResult {
  double alpha = 0.0;
  ExtReal nu_star;
  struct Item {
    ProblemKind kind = ProblemKind::R;
    SolveStatus status = SolveStatus::NumericalFailure;
    ExtReal value;
    ExtReal reference;
    bool pass = false;
  };
  std::vector<Item> items;
  bool pass = false;
  bool solver_failure = false;
};

/// One alpha of a family sweep: solve the requested problems and compare
/// each against its closed-form reference value.
SweepPointResult run_sweep_point(ExampleFamilyId family, double alpha,
                                 const std::vector<ProblemKind>& kinds,
                                 const Tolerances& tols);

/// Reference value of a problem kind on a family instance (finite value,
/// or the infinity encoding unbounded/infeasible).
ExtReal reference_value(ExampleFamilyId family, double alpha, ProblemKind kind);

struct CertifyReport {
  std::string text;      // staged report, every residual printed
  bool math_pass = true;     // all applicable checks passed
  bool numeric_ok = true;    // no solver/numerical failures
};

/// End-to-end certificate pipeline: validate, solve (R)/(RD), check the
/// RLT optimality certificate, lift into (R+) and verify; then solve
/// (SRR)/(SRRD), check the SDP certificate, recover (z, W), lift into
/// (SR+) and verify. Branches stop at unbounded relaxations, which is
/// reported but is not a failure.
CertifyReport run_certify(const QpInstance& inst, const Tolerances& tols);

}  // namespace qpr
