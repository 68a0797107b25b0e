/* qprelax C API: opaque handles and integer error codes over the C++ core.
 *
 * Every function returns QPR_OK (0) on success or a nonzero error code;
 * qpr_last_error_message() describes the most recent failure in the
 * calling thread. Handles are created by qpr_instance_* constructors and
 * released with qpr_instance_free. All functions are thread-safe for
 * distinct handles; instances are immutable after construction.
 */
#ifndef QPRELAX_H
#define QPRELAX_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct qpr_instance qpr_instance;

/* Error codes. */
enum {
  QPR_OK = 0,
  QPR_ERROR_INVALID_ARGUMENT = 1,
  QPR_ERROR_PARSE = 2,
  QPR_ERROR_SOLVER = 3,
  QPR_ERROR_IO = 4,
  QPR_ERROR_INTERNAL = 5
};

/* Problem kinds. */
enum {
  QPR_PROBLEM_R = 0,
  QPR_PROBLEM_RD = 1,
  QPR_PROBLEM_RPLUS = 2,
  QPR_PROBLEM_SR = 3,
  QPR_PROBLEM_SRR = 4,
  QPR_PROBLEM_SRRD = 5,
  QPR_PROBLEM_SRPLUS = 6
};

/* Solve statuses. */
enum {
  QPR_STATUS_OPTIMAL = 0,
  QPR_STATUS_UNBOUNDED = 1,
  QPR_STATUS_INFEASIBLE = 2,
  QPR_STATUS_NUMERICAL_FAILURE = 3
};

/* Extended-real kind markers. */
enum { QPR_VALUE_NEG_INF = -1, QPR_VALUE_FINITE = 0, QPR_VALUE_POS_INF = 1 };

typedef struct {
  int kind;     /* QPR_VALUE_* */
  double value; /* meaningful when kind == QPR_VALUE_FINITE */
} qpr_extreal;

/* Thread-local message for the most recent error in this thread. */
const char* qpr_last_error_message(void);

/* ----- instances ----- */

int qpr_instance_from_file(const char* path, qpr_instance** out);
int qpr_instance_to_file(const qpr_instance* inst, const char* path);
/* family: 1..4, matching the EX1..EX4 identifiers of the instance format. */
int qpr_instance_from_family(int family, double alpha, qpr_instance** out);
int qpr_instance_random_bounded(int n, int m_extra, int p, unsigned long long seed,
                                qpr_instance** out);
void qpr_instance_free(qpr_instance* inst);
int qpr_instance_dims(const qpr_instance* inst, int* n, int* m, int* p);

typedef struct {
  int feasible;          /* F nonempty */
  int has_slater_point;  /* a strictly feasible point was found */
  int rank_h;
  int assumption_ok;     /* feasible, strict point, rank(H) = p < n */
  double margin;         /* min slack at the reported point */
} qpr_validation;

/* slater_point may be NULL; otherwise it must have room for n doubles and
 * is filled when has_slater_point is set. */
int qpr_validate(const qpr_instance* inst, double tol, qpr_validation* out,
                 double* slater_point);

/* ----- solving ----- */

typedef struct {
  double solver_tol;   /* <= 0 for default 1e-8 */
  int max_iter;        /* <= 0 for default 200 */
  double feas_tol;     /* <= 0 for default 1e-7 */
  double cert_tol;     /* <= 0 for default 1e-6 */
  double value_tol;    /* <= 0 for default 1e-5 */
} qpr_options;

void qpr_options_default(qpr_options* opts);

typedef struct {
  int status;       /* QPR_STATUS_* */
  qpr_extreal value;
  double seconds;
} qpr_solve_summary;

int qpr_solve_problem(const qpr_instance* inst, int problem_kind,
                      const qpr_options* opts, qpr_solve_summary* out);

/* Closed-form reference values for a family instance, in the order
 * nu_star, nu_R, nu_Rplus, nu_SR, nu_SRplus. */
int qpr_reference_values(int family, double alpha, qpr_extreal out[5]);

/* Writes a text listing of the built problem to path. */
int qpr_dump_program(const qpr_instance* inst, int problem_kind, const char* path);

/* Solves the listed problems, appends the derived equivalence verdicts
 * (R vs R+, SR vs SR+, SR vs SRR for the pairs present) and returns the
 * table as text (release with qpr_string_free). dump_dir may be NULL;
 * when set, each built program is written there as <kind>.txt.
 * *verdicts_pass is 1 when no verdict failed; *numeric_ok is 1 when no
 * solve ended in numerical failure. */
int qpr_compare(const qpr_instance* inst, const int* problem_kinds, int n_kinds,
                const qpr_options* opts, const char* dump_dir, char** report,
                int* verdicts_pass, int* numeric_ok);

/* ----- certificate pipeline ----- */

/* Runs validate -> solve -> certificate checks -> lifting -> feasibility
 * checks for both the RLT and SDP-RLT branches. *report is a
 * NUL-terminated staged report (release with qpr_string_free);
 * *math_pass / *numeric_ok receive the overall outcomes. */
int qpr_certify(const qpr_instance* inst, const qpr_options* opts, char** report,
                int* math_pass, int* numeric_ok);

void qpr_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* QPRELAX_H */
