#include "qprelax/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "qprelax/errors.hpp"

namespace qpr {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

FaceData face_for(const QpInstance& inst, const Tolerances& tols) {
  SlaterReport rep = validate_assumption1(inst, tols.solver);
  if (!rep.assumption1_ok(inst.n, inst.p))
    throw SolverFailure(
        "facial reduction requires rank(H) = p < n and a point with H'x = h, "
        "G'x < g");
  return build_face_data(inst, *rep.slater_point);
}

bool needs_face(ProblemKind k) {
  return k == ProblemKind::SRR || k == ProblemKind::SRRD;
}

}  // namespace

ProblemRun run_problem(const QpInstance& inst, ProblemKind kind, const Tolerances& tols) {
  ProblemRun run;
  run.kind = kind;
  const double t0 = now_seconds();
  FaceData face;
  if (needs_face(kind)) face = face_for(inst, tols);
  BuiltProblem bp = build_problem(inst, kind, needs_face(kind) ? &face : nullptr);
  SolveOptions opts;
  opts.tol = tols.solver;
  opts.max_iter = tols.max_iter;
  SolveResult res = solve(bp.prog, opts);
  run.status = res.status;
  run.value = problem_value(bp, res);
  run.seconds = now_seconds() - t0;
  return run;
}

bool CompareReport::any_numerical_failure() const {
  for (const auto& r : runs)
    if (r.status == SolveStatus::NumericalFailure) return true;
  return false;
}

bool CompareReport::all_verdicts_pass() const {
  for (const auto& v : verdicts)
    if (v.state == Verdict::State::Fail) return false;
  return true;
}

std::string CompareReport::to_text() const {
  std::ostringstream os;
  os << "problem\tstatus\tvalue\tseconds\n";
  for (const auto& r : runs) {
    os << to_string(r.kind) << "\t" << to_string(r.status) << "\t" << r.value << "\t"
       << r.seconds << "\n";
  }
  for (const auto& v : verdicts) {
    const char* st = v.state == Verdict::State::Pass ? "PASS"
                     : v.state == Verdict::State::Fail ? "FAIL"
                                                       : "n/a";
    os << "verdict: " << v.name << ": " << st;
    if (!v.detail.empty()) os << " (" << v.detail << ")";
    os << "\n";
  }
  return os.str();
}

namespace {

const ProblemRun* find_run(const std::vector<ProblemRun>& runs, ProblemKind k) {
  for (const auto& r : runs)
    if (r.kind == k) return &r;
  return nullptr;
}

CompareReport::Verdict equivalence_verdict(const std::string& name, const ProblemRun& base,
                                           const ProblemRun& aug, double tol,
                                           bool unconditional) {
  using State = CompareReport::Verdict::State;
  CompareReport::Verdict v;
  v.name = name;
  std::ostringstream detail;
  if (base.status == SolveStatus::NumericalFailure ||
      aug.status == SolveStatus::NumericalFailure) {
    v.state = State::Fail;
    v.detail = "solver failure";
    return v;
  }
  if (base.status == SolveStatus::Optimal) {
    if (aug.status == SolveStatus::Optimal &&
        std::abs(base.value.value() - aug.value.value()) <= tol) {
      v.state = State::Pass;
      detail << "|" << base.value << " - " << aug.value << "| <= " << tol;
    } else {
      v.state = State::Fail;
      detail << to_string(base.kind) << " = " << base.value << ", " << to_string(aug.kind)
             << " = " << aug.value;
    }
    v.detail = detail.str();
    return v;
  }
  if (unconditional) {
    // The two problems are equivalent regardless of boundedness; statuses
    // must agree.
    v.state = base.status == aug.status ? State::Pass : State::Fail;
    detail << to_string(base.kind) << " " << to_string(base.status) << ", "
           << to_string(aug.kind) << " " << to_string(aug.status);
    v.detail = detail.str();
    return v;
  }
  // Base relaxation unbounded: the equivalence hypothesis fails. Report
  // which regime the augmented problem landed in.
  v.state = State::NotApplicable;
  if (base.status == SolveStatus::Unbounded) {
    if (aug.status == SolveStatus::Infeasible)
      detail << to_string(base.kind)
             << " unbounded; no KKT points: complementarity formulation (QP+) "
                "infeasible, not equivalent to (QP)";
    else if (aug.status == SolveStatus::Optimal)
      detail << to_string(base.kind) << " unbounded but " << to_string(aug.kind) << " = "
             << aug.value
             << " finite: bound from optimality conditions is not a valid bound for (QP)";
    else
      detail << "both unbounded";
  } else {
    detail << to_string(base.kind) << " " << to_string(base.status);
  }
  v.detail = detail.str();
  return v;
}

}  // namespace

CompareReport run_compare(const QpInstance& inst, const std::vector<ProblemKind>& kinds,
                          const Tolerances& tols, const std::string& dump_dir) {
  CompareReport rep;
  for (ProblemKind k : kinds) {
    if (!dump_dir.empty()) {
      FaceData face;
      if (needs_face(k)) face = face_for(inst, tols);
      BuiltProblem bp = build_problem(inst, k, needs_face(k) ? &face : nullptr);
      std::ofstream f(dump_dir + "/" + std::string(to_string(k)) + ".txt");
      bp.prog.dump(f);
    }
    rep.runs.push_back(run_problem(inst, k, tols));
  }
  const ProblemRun* r = find_run(rep.runs, ProblemKind::R);
  const ProblemRun* rplus = find_run(rep.runs, ProblemKind::Rplus);
  const ProblemRun* sr = find_run(rep.runs, ProblemKind::SR);
  const ProblemRun* srr = find_run(rep.runs, ProblemKind::SRR);
  const ProblemRun* srplus = find_run(rep.runs, ProblemKind::SRplus);
  if (r && rplus)
    rep.verdicts.push_back(
        equivalence_verdict("R == R+ (finite RLT bound)", *r, *rplus, tols.value, false));
  if (sr && srplus)
    rep.verdicts.push_back(equivalence_verdict("SR == SR+ (attained SDP-RLT bound)", *sr,
                                               *srplus, tols.value, false));
  if (sr && srr)
    rep.verdicts.push_back(
        equivalence_verdict("SR == SRR (facial reduction)", *sr, *srr, tols.value, true));
  return rep;
}

ExtReal reference_value(ExampleFamilyId family, double alpha, ProblemKind kind) {
  const ClosedFormValues cf = closed_form_values(family, alpha);
  const SdpReferenceValues sdp = sdp_reference_values(family, alpha);
  switch (kind) {
    case ProblemKind::R:
    case ProblemKind::RD:
      return cf.nu_r;
    case ProblemKind::Rplus:
      return cf.nu_rplus;
    case ProblemKind::SR:
    case ProblemKind::SRR:
    case ProblemKind::SRRD:
      return sdp.nu_sr;
    default:
      return sdp.nu_srplus;
  }
}

SweepPointResult run_sweep_point(ExampleFamilyId family, double alpha,
                                 const std::vector<ProblemKind>& kinds,
                                 const Tolerances& tols) {
  SweepPointResult out;
  out.alpha = alpha;
  out.nu_star = closed_form_values(family, alpha).nu_star;
  const QpInstance inst = example_family(family, alpha);
  out.pass = true;
  for (ProblemKind k : kinds) {
    ProblemRun run = run_problem(inst, k, tols);
    SweepPointResult::Item item;
    item.kind = k;
    item.status = run.status;
    item.value = run.value;
    item.reference = reference_value(family, alpha, k);
    item.pass = run.status != SolveStatus::NumericalFailure &&
                close(item.value, item.reference, tols.value);
    if (run.status == SolveStatus::NumericalFailure) out.solver_failure = true;
    if (!item.pass) out.pass = false;
    out.items.push_back(item);
  }
  return out;
}

namespace {

void report_stage(std::ostringstream& os, const std::string& stage, const std::string& msg) {
  os << "stage " << stage << ": " << msg << "\n";
}

}  // namespace

CertifyReport run_certify(const QpInstance& inst, const Tolerances& tols) {
  CertifyReport rep;
  std::ostringstream os;

  SlaterReport slater;
  try {
    slater = validate_assumption1(inst, tols.solver);
  } catch (const Error& e) {
    report_stage(os, "validate", std::string("FAIL: ") + e.what());
    rep.text = os.str();
    rep.numeric_ok = false;
    return rep;
  }
  if (!slater.assumption1_ok(inst.n, inst.p)) {
    std::ostringstream msg;
    msg << "FAIL: precondition needs a nonempty interior and rank(H) = p < n "
        << "(feasible=" << (slater.feasible ? "yes" : "no") << ", rank(H)=" << slater.rank_h
        << ", p=" << inst.p << ", n=" << inst.n
        << ", strict point=" << (slater.slater_point ? "yes" : "no") << ")";
    report_stage(os, "validate", msg.str());
    rep.text = os.str();
    rep.math_pass = false;
    return rep;
  }
  {
    std::ostringstream msg;
    msg << "pass (rank(H)=" << slater.rank_h << ", margin=" << slater.margin << ")";
    report_stage(os, "validate", msg.str());
  }
  const FaceData face = build_face_data(inst, *slater.slater_point);
  SolveOptions opts;
  opts.tol = tols.solver;
  opts.max_iter = tols.max_iter;

  // ---- RLT branch -----------------------------------------------------
  bool rlt_done = false;
  {
    BuiltProblem r = build_R(inst);
    SolveResult rres = solve(r.prog, opts);
    if (rres.status == SolveStatus::Optimal) {
      report_stage(os, "solve_R", std::string("Optimal, value = ") + rres.objective.str());
      BuiltProblem rd = build_RD(inst);
      SolveResult rdres = solve(rd.prog, opts);
      if (rdres.status != SolveStatus::Optimal) {
        report_stage(os, "solve_RD", std::string("FAIL: ") + to_string(rdres.status));
        rep.numeric_ok = false;
      } else {
        report_stage(os, "solve_RD",
                     std::string("Optimal, value = ") + problem_value(rd, rdres).str());
        auto [xhat, Xhat] = read_xX(r, rres);
        ViolationReport feas = check_feasible_R(inst, xhat, Xhat, tols.feas);
        report_stage(os, "R_solution_feasibility",
                     (feas.pass ? "pass\n" : "FAIL\n") + feas.to_text());
        RltDualCert cert = extract_rlt_cert(inst, rd, rdres);
        ViolationReport opt = check_rlt_opt(inst, xhat, Xhat, cert, tols.cert);
        report_stage(os, "check_rlt_opt", (opt.pass ? "pass\n" : "FAIL\n") + opt.to_text());
        LiftedPoint lp = lift_rlt(inst, xhat, Xhat, cert);
        ViolationReport lifted = check_feasible_Rplus(inst, lp, tols.cert);
        report_stage(os, "lift_rlt -> check_feasible_Rplus",
                     (lifted.pass ? "pass\n" : "FAIL\n") + lifted.to_text());
        if (!feas.pass || !opt.pass || !lifted.pass) rep.math_pass = false;
        rlt_done = true;
      }
    } else if (rres.status == SolveStatus::Unbounded) {
      // Cross-check: an unbounded (R) with nonempty F means (RD) is
      // infeasible; state both certificates.
      BuiltProblem rd = build_RD(inst);
      SolveResult rdres = solve(rd.prog, opts);
      std::ostringstream msg;
      msg << "Unbounded (improving ray found; RD status " << to_string(rdres.status)
          << "); RLT branch stops";
      report_stage(os, "solve_R", msg.str());
    } else {
      report_stage(os, "solve_R", std::string("FAIL: ") + to_string(rres.status));
      rep.numeric_ok = false;
    }
  }
  (void)rlt_done;

  // ---- SDP branch ------------------------------------------------------
  {
    BuiltProblem srr = build_SRR(inst, face);
    SolveResult srrres = solve(srr.prog, opts);
    if (srrres.status == SolveStatus::Unbounded) {
      report_stage(os, "solve_SRR", "Unbounded (improving ray found); SDP branch stops");
      rep.text = os.str();
      return rep;
    }
    if (srrres.status != SolveStatus::Optimal) {
      report_stage(os, "solve_SRR", std::string("FAIL: ") + to_string(srrres.status));
      rep.numeric_ok = false;
      rep.text = os.str();
      return rep;
    }
    report_stage(os, "solve_SRR",
                 std::string("Optimal, value = ") + srrres.objective.str());
    BuiltProblem srrd = build_SRRD(inst, face);
    SolveResult srrdres = solve(srrd.prog, opts);
    if (srrdres.status != SolveStatus::Optimal) {
      report_stage(os, "solve_SRRD", std::string("FAIL: ") + to_string(srrdres.status));
      rep.numeric_ok = false;
      rep.text = os.str();
      return rep;
    }
    report_stage(os, "solve_SRRD",
                 std::string("Optimal, value = ") + problem_value(srrd, srrdres).str());

    auto [xhat, Xhat] = read_xX(srr, srrres, &face);
    ViolationReport feas = check_feasible_SR(inst, xhat, Xhat, tols.feas);
    report_stage(os, "SR_solution_feasibility",
                 (feas.pass ? "pass\n" : "FAIL\n") + feas.to_text());
    SdpDualCert cert = extract_sdp_cert(inst, srrd, srrdres);
    ViolationReport opt = check_sdp_opt(inst, face, xhat, Xhat, cert, tols.cert);
    report_stage(os, "check_sdp_opt", (opt.pass ? "pass\n" : "FAIL\n") + opt.to_text());
    bool zw_ok = true;
    try {
      ZwRecovery zw = recover_zW(inst, face, xhat, Xhat, cert, tols.cert);
      report_stage(os, "recover_zW", "pass\n" + zw.residuals.to_text());
    } catch (const ResidualTooLarge& e) {
      report_stage(os, "recover_zW", std::string("FAIL: ") + e.what());
      zw_ok = false;
    }
    LiftedPoint lp = lift_sdprlt(inst, face, xhat, Xhat, cert);
    ViolationReport lifted = check_feasible_SRplus(inst, lp, tols.cert);
    report_stage(os, "lift_sdprlt -> check_feasible_SRplus",
                 (lifted.pass ? "pass\n" : "FAIL\n") + lifted.to_text());
    if (!feas.pass || !opt.pass || !zw_ok || !lifted.pass) rep.math_pass = false;
  }

  rep.text = os.str();
  return rep;
}

}  // namespace qpr
