#include "qprelax/qprelax.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>
#include <vector>

#include "qprelax/errors.hpp"
#include "qprelax/instance.hpp"
#include "qprelax/instance_io.hpp"
#include "qprelax/pipeline.hpp"

struct qpr_instance {
  qpr::QpInstance inst;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

int classify(const std::exception& e) {
  if (dynamic_cast<const qpr::ParseError*>(&e)) return QPR_ERROR_PARSE;
  if (dynamic_cast<const qpr::SolverFailure*>(&e)) return QPR_ERROR_SOLVER;
  if (dynamic_cast<const qpr::ConvergenceFailure*>(&e)) return QPR_ERROR_SOLVER;
  if (dynamic_cast<const qpr::Error*>(&e)) return QPR_ERROR_INVALID_ARGUMENT;
  return QPR_ERROR_INTERNAL;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    set_error(e.what());
    return classify(e);
  } catch (...) {
    set_error("unknown error");
    return QPR_ERROR_INTERNAL;
  }
}

qpr::ExampleFamilyId family_from_int(int family) {
  switch (family) {
    case 1:
      return qpr::ExampleFamilyId::Ex1;
    case 2:
      return qpr::ExampleFamilyId::Ex2;
    case 3:
      return qpr::ExampleFamilyId::Ex3;
    case 4:
      return qpr::ExampleFamilyId::Ex4;
    default:
      throw qpr::Error("family must be 1..4");
  }
}

qpr::ProblemKind kind_from_int(int kind) {
  switch (kind) {
    case QPR_PROBLEM_R:
      return qpr::ProblemKind::R;
    case QPR_PROBLEM_RD:
      return qpr::ProblemKind::RD;
    case QPR_PROBLEM_RPLUS:
      return qpr::ProblemKind::Rplus;
    case QPR_PROBLEM_SR:
      return qpr::ProblemKind::SR;
    case QPR_PROBLEM_SRR:
      return qpr::ProblemKind::SRR;
    case QPR_PROBLEM_SRRD:
      return qpr::ProblemKind::SRRD;
    case QPR_PROBLEM_SRPLUS:
      return qpr::ProblemKind::SRplus;
    default:
      throw qpr::Error("unknown problem kind");
  }
}

qpr::Tolerances tols_from(const qpr_options* opts) {
  qpr::Tolerances t;
  if (!opts) return t;
  if (opts->solver_tol > 0) t.solver = opts->solver_tol;
  if (opts->max_iter > 0) t.max_iter = opts->max_iter;
  if (opts->feas_tol > 0) t.feas = opts->feas_tol;
  if (opts->cert_tol > 0) t.cert = opts->cert_tol;
  if (opts->value_tol > 0) t.value = opts->value_tol;
  return t;
}

qpr_extreal to_c(const qpr::ExtReal& v) {
  qpr_extreal out;
  out.kind = v.is_neg_inf() ? QPR_VALUE_NEG_INF : v.is_pos_inf() ? QPR_VALUE_POS_INF : QPR_VALUE_FINITE;
  out.value = v.is_finite() ? v.value() : 0.0;
  return out;
}

int status_to_c(qpr::SolveStatus s) {
  switch (s) {
    case qpr::SolveStatus::Optimal:
      return QPR_STATUS_OPTIMAL;
    case qpr::SolveStatus::Unbounded:
      return QPR_STATUS_UNBOUNDED;
    case qpr::SolveStatus::Infeasible:
      return QPR_STATUS_INFEASIBLE;
    default:
      return QPR_STATUS_NUMERICAL_FAILURE;
  }
}

}  // namespace

extern "C" {

const char* qpr_last_error_message(void) { return g_last_error.c_str(); }

int qpr_instance_from_file(const char* path, qpr_instance** out) {
  if (!path || !out) {
    set_error("null argument");
    return QPR_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    auto* handle = new qpr_instance{qpr::read_instance_file(path)};
    *out = handle;
    return QPR_OK;
  });
}

int qpr_instance_to_file(const qpr_instance* inst, const char* path) {
  if (!inst || !path) {
    set_error("null argument");
    return QPR_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    qpr::write_instance_file(inst->inst, path);
    return QPR_OK;
  });
}

int qpr_instance_from_family(int family, double alpha, qpr_instance** out) {
  if (!out) {
    set_error("null argument");
    return QPR_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = new qpr_instance{qpr::example_family(family_from_int(family), alpha)};
    return QPR_OK;
  });
}

int qpr_instance_random_bounded(int n, int m_extra, int p, unsigned long long seed,
                                qpr_instance** out) {
  if (!out) {
    set_error("null argument");
    return QPR_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = new qpr_instance{qpr::random_bounded_instance(n, m_extra, p, seed)};
    return QPR_OK;
  });
}

void qpr_instance_free(qpr_instance* inst) { delete inst; }

int qpr_instance_dims(const qpr_instance* inst, int* n, int* m, int* p) {
  if (!inst) {
    set_error("null instance");
    return QPR_ERROR_INVALID_ARGUMENT;
  }
  if (n) *n = inst->inst.n;
  if (m) *m = inst->inst.m;
  if (p) *p = inst->inst.p;
  return QPR_OK;
}

int qpr_validate(const qpr_instance* inst, double tol, qpr_validation* out,
                 double* slater_point) {
  if (!inst || !out) {
    set_error("null argument");
    return QPR_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    qpr::SlaterReport rep = qpr::validate_assumption1(inst->inst, tol > 0 ? tol : 1e-9);
    out->feasible = rep.feasible ? 1 : 0;
    out->has_slater_point = rep.slater_point.has_value() ? 1 : 0;
    out->rank_h = rep.rank_h;
    out->assumption_ok = rep.assumption1_ok(inst->inst.n, inst->inst.p) ? 1 : 0;
    out->margin = rep.margin;
    if (slater_point && rep.slater_point)
      std::memcpy(slater_point, rep.slater_point->data(), sizeof(double) * inst->inst.n);
    return QPR_OK;
  });
}

void qpr_options_default(qpr_options* opts) {
  if (!opts) return;
  qpr::Tolerances t;
  opts->solver_tol = t.solver;
  opts->max_iter = t.max_iter;
  opts->feas_tol = t.feas;
  opts->cert_tol = t.cert;
  opts->value_tol = t.value;
}

int qpr_solve_problem(const qpr_instance* inst, int problem_kind, const qpr_options* opts,
                      qpr_solve_summary* out) {
  if (!inst || !out) {
    set_error("null argument");
    return QPR_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    qpr::ProblemRun run =
        qpr::run_problem(inst->inst, kind_from_int(problem_kind), tols_from(opts));
    out->status = status_to_c(run.status);
    out->value = to_c(run.value);
    out->seconds = run.seconds;
    return QPR_OK;
  });
}

int qpr_reference_values(int family, double alpha, qpr_extreal out[5]) {
  if (!out) {
    set_error("null argument");
    return QPR_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const auto fam = family_from_int(family);
    const qpr::ClosedFormValues cf = qpr::closed_form_values(fam, alpha);
    const qpr::SdpReferenceValues sdp = qpr::sdp_reference_values(fam, alpha);
    out[0] = to_c(cf.nu_star);
    out[1] = to_c(cf.nu_r);
    out[2] = to_c(cf.nu_rplus);
    out[3] = to_c(sdp.nu_sr);
    out[4] = to_c(sdp.nu_srplus);
    return QPR_OK;
  });
}

int qpr_dump_program(const qpr_instance* inst, int problem_kind, const char* path) {
  if (!inst || !path) {
    set_error("null argument");
    return QPR_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const qpr::ProblemKind kind = kind_from_int(problem_kind);
    qpr::FaceData face;
    const bool needs_face =
        kind == qpr::ProblemKind::SRR || kind == qpr::ProblemKind::SRRD;
    if (needs_face) {
      qpr::SlaterReport rep = qpr::validate_assumption1(inst->inst);
      if (!rep.assumption1_ok(inst->inst.n, inst->inst.p))
        throw qpr::SolverFailure("instance fails the rank/Slater precondition");
      face = qpr::build_face_data(inst->inst, *rep.slater_point);
    }
    qpr::BuiltProblem bp =
        qpr::build_problem(inst->inst, kind, needs_face ? &face : nullptr);
    std::ofstream f(path);
    if (!f) throw qpr::Error(std::string("cannot open ") + path);
    bp.prog.dump(f);
    return QPR_OK;
  });
}

int qpr_compare(const qpr_instance* inst, const int* problem_kinds, int n_kinds,
                const qpr_options* opts, const char* dump_dir, char** report,
                int* verdicts_pass, int* numeric_ok) {
  if (!inst || !problem_kinds || n_kinds <= 0 || !report) {
    set_error("null argument");
    return QPR_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    std::vector<qpr::ProblemKind> kinds;
    for (int i = 0; i < n_kinds; ++i) kinds.push_back(kind_from_int(problem_kinds[i]));
    qpr::CompareReport rep = qpr::run_compare(inst->inst, kinds, tols_from(opts),
                                              dump_dir ? dump_dir : "");
    const std::string text = rep.to_text();
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *report = buf;
    if (verdicts_pass) *verdicts_pass = rep.all_verdicts_pass() ? 1 : 0;
    if (numeric_ok) *numeric_ok = rep.any_numerical_failure() ? 0 : 1;
    return QPR_OK;
  });
}

int qpr_certify(const qpr_instance* inst, const qpr_options* opts, char** report,
                int* math_pass, int* numeric_ok) {
  if (!inst || !report) {
    set_error("null argument");
    return QPR_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    qpr::CertifyReport rep = qpr::run_certify(inst->inst, tols_from(opts));
    char* buf = new char[rep.text.size() + 1];
    std::memcpy(buf, rep.text.c_str(), rep.text.size() + 1);
    *report = buf;
    if (math_pass) *math_pass = rep.math_pass ? 1 : 0;
    if (numeric_ok) *numeric_ok = rep.numeric_ok ? 1 : 0;
    return QPR_OK;
  });
}

void qpr_string_free(char* s) { delete[] s; }

}  // extern "C"
