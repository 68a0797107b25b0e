// Command-line front end for the qprelax shared library. Links only the
// C API (qprelax/qprelax.h).
//
// Exit codes: 0 all verdicts pass, 2 mathematical verdict failure,
// 3 solver/numerical failure, 4 invalid input.

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qprelax/qprelax.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerdictFail = 2;
constexpr int kExitSolverFail = 3;
constexpr int kExitBadInput = 4;

struct InstanceDeleter {
  void operator()(qpr_instance* p) const { qpr_instance_free(p); }
};
using InstancePtr = std::unique_ptr<qpr_instance, InstanceDeleter>;

int fail_input(const std::string& what) {
  std::cerr << "error: " << what << ": " << qpr_last_error_message() << "\n";
  return kExitBadInput;
}

InstancePtr load_instance(const std::string& path, int* exit_code) {
  qpr_instance* raw = nullptr;
  if (qpr_instance_from_file(path.c_str(), &raw) != QPR_OK) {
    *exit_code = fail_input("cannot load '" + path + "'");
    return nullptr;
  }
  return InstancePtr(raw);
}

const std::map<std::string, int>& kind_names() {
  static const std::map<std::string, int> names = {
      {"r", QPR_PROBLEM_R},     {"rd", QPR_PROBLEM_RD},     {"rplus", QPR_PROBLEM_RPLUS},
      {"sr", QPR_PROBLEM_SR},   {"srr", QPR_PROBLEM_SRR},   {"srrd", QPR_PROBLEM_SRRD},
      {"srplus", QPR_PROBLEM_SRPLUS}};
  return names;
}

const char* kind_label(int kind) {
  switch (kind) {
    case QPR_PROBLEM_R: return "R";
    case QPR_PROBLEM_RD: return "RD";
    case QPR_PROBLEM_RPLUS: return "R+";
    case QPR_PROBLEM_SR: return "SR";
    case QPR_PROBLEM_SRR: return "SRR";
    case QPR_PROBLEM_SRRD: return "SRRD";
    default: return "SR+";
  }
}

bool parse_kinds(const std::string& list, std::vector<int>* out) {
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    auto it = kind_names().find(tok);
    if (it == kind_names().end()) return false;
    out->push_back(it->second);
  }
  return !out->empty();
}

int family_from_name(const std::string& name) {
  if (name == "EX1" || name == "ex1") return 1;
  if (name == "EX2" || name == "ex2") return 2;
  if (name == "EX3" || name == "ex3") return 3;
  if (name == "EX4" || name == "ex4") return 4;
  return 0;
}

std::string extreal_str(const qpr_extreal& v) {
  if (v.kind == QPR_VALUE_NEG_INF) return "-inf";
  if (v.kind == QPR_VALUE_POS_INF) return "+inf";
  std::ostringstream os;
  os << v.value;
  return os.str();
}

const char* status_str(int status) {
  switch (status) {
    case QPR_STATUS_OPTIMAL: return "Optimal";
    case QPR_STATUS_UNBOUNDED: return "Unbounded";
    case QPR_STATUS_INFEASIBLE: return "Infeasible";
    default: return "NumericalFailure";
  }
}

struct TolFlags {
  double solver_tol = 0, feas_tol = 0, cert_tol = 0, value_tol = 0;
  int max_iter = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--solver-tol", solver_tol, "solver stopping tolerance (default 1e-8)");
    cmd->add_option("--feas-tol", feas_tol, "solution feasibility tolerance (default 1e-7)");
    cmd->add_option("--cert-tol", cert_tol, "certificate residual tolerance (default 1e-6)");
    cmd->add_option("--tol", value_tol, "value comparison tolerance (default 1e-5)");
    cmd->add_option("--max-iter", max_iter, "solver iteration limit (default 200)");
  }
  qpr_options to_options() const {
    qpr_options o;
    qpr_options_default(&o);
    if (solver_tol > 0) o.solver_tol = solver_tol;
    if (feas_tol > 0) o.feas_tol = feas_tol;
    if (cert_tol > 0) o.cert_tol = cert_tol;
    if (value_tol > 0) o.value_tol = value_tol;
    if (max_iter > 0) o.max_iter = max_iter;
    return o;
  }
};

int cmd_validate(const std::string& file, double tol) {
  int code = kExitOk;
  InstancePtr inst = load_instance(file, &code);
  if (!inst) return code;
  int n = 0, m = 0, p = 0;
  qpr_instance_dims(inst.get(), &n, &m, &p);
  qpr_validation rep;
  std::vector<double> point(n, 0.0);
  if (qpr_validate(inst.get(), tol, &rep, point.data()) != QPR_OK) {
    std::cerr << "error: validation failed: " << qpr_last_error_message() << "\n";
    return kExitSolverFail;
  }
  std::cout << "n " << n << "  m " << m << "  p " << p << "\n";
  std::cout << "feasible: " << (rep.feasible ? "yes" : "no") << "\n";
  std::cout << "rank(H): " << rep.rank_h << "\n";
  std::cout << "strictly feasible point: " << (rep.has_slater_point ? "yes" : "no") << "\n";
  if (rep.has_slater_point) {
    std::cout << "point:";
    for (int i = 0; i < n; ++i) std::cout << " " << point[i];
    std::cout << "\nmargin: " << rep.margin << "\n";
  }
  std::cout << "precondition (rank(H) = p < n, strict point): "
            << (rep.assumption_ok ? "ok" : "VIOLATED") << "\n";
  return rep.assumption_ok ? kExitOk : kExitVerdictFail;
}

int cmd_compare(const std::string& file, const std::string& problems, const TolFlags& tols,
                const std::string& dump_dir) {
  int code = kExitOk;
  InstancePtr inst = load_instance(file, &code);
  if (!inst) return code;
  std::vector<int> kinds;
  if (!parse_kinds(problems, &kinds)) {
    std::cerr << "error: bad --problems list '" << problems << "'\n";
    return kExitBadInput;
  }
  qpr_options opts = tols.to_options();
  char* report = nullptr;
  int verdicts_pass = 0, numeric_ok = 0;
  if (qpr_compare(inst.get(), kinds.data(), static_cast<int>(kinds.size()), &opts,
                  dump_dir.empty() ? nullptr : dump_dir.c_str(), &report, &verdicts_pass,
                  &numeric_ok) != QPR_OK) {
    std::cerr << "error: compare failed: " << qpr_last_error_message() << "\n";
    return kExitSolverFail;
  }
  std::cout << report;
  qpr_string_free(report);
  if (!numeric_ok) return kExitSolverFail;
  return verdicts_pass ? kExitOk : kExitVerdictFail;
}

int cmd_sweep(const std::string& family_name, double from, double to, double step,
              const std::string& problems, const TolFlags& tols, const std::string& out_path,
              int workers) {
  const int family = family_from_name(family_name);
  if (family == 0) {
    std::cerr << "error: unknown family '" << family_name << "' (use EX1..EX4)\n";
    return kExitBadInput;
  }
  if (step <= 0 || to < from) {
    std::cerr << "error: need step > 0 and to >= from\n";
    return kExitBadInput;
  }
  std::vector<int> kinds;
  if (!parse_kinds(problems, &kinds)) {
    std::cerr << "error: bad --problems list '" << problems << "'\n";
    return kExitBadInput;
  }
  std::vector<double> alphas;
  for (double a = from; a <= to + 1e-12; a += step) alphas.push_back(a);

  struct Row {
    double alpha = 0;
    qpr_extreal refs[5];
    std::vector<qpr_solve_summary> runs;
    std::vector<bool> pass;
    bool solver_failure = false;
    bool row_pass = true;
  };
  std::vector<Row> rows(alphas.size());
  const qpr_options opts = tols.to_options();
  const double vtol = opts.value_tol;

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= alphas.size()) return;
      Row& row = rows[i];
      row.alpha = alphas[i];
      qpr_reference_values(family, row.alpha, row.refs);
      qpr_instance* inst = nullptr;
      if (qpr_instance_from_family(family, row.alpha, &inst) != QPR_OK) {
        row.solver_failure = true;
        row.row_pass = false;
        continue;
      }
      for (int kind : kinds) {
        qpr_solve_summary sum;
        if (qpr_solve_problem(inst, kind, &opts, &sum) != QPR_OK) {
          sum.status = QPR_STATUS_NUMERICAL_FAILURE;
          sum.value = {QPR_VALUE_FINITE, 0.0};
          sum.seconds = 0.0;
        }
        // Reference for this kind: R/RD -> nu_R, R+ -> nu_R+, SR/SRR/SRRD
        // -> nu_SR, SR+ -> nu_SR+.
        qpr_extreal ref;
        switch (kind) {
          case QPR_PROBLEM_R:
          case QPR_PROBLEM_RD: ref = row.refs[1]; break;
          case QPR_PROBLEM_RPLUS: ref = row.refs[2]; break;
          case QPR_PROBLEM_SRPLUS: ref = row.refs[4]; break;
          default: ref = row.refs[3]; break;
        }
        bool pass = false;
        if (sum.status != QPR_STATUS_NUMERICAL_FAILURE) {
          if (ref.kind == QPR_VALUE_FINITE)
            pass = sum.value.kind == QPR_VALUE_FINITE &&
                   std::abs(sum.value.value - ref.value) <= vtol;
          else
            pass = sum.value.kind == ref.kind;
        } else {
          row.solver_failure = true;
        }
        row.runs.push_back(sum);
        row.pass.push_back(pass);
        if (!pass) row.row_pass = false;
      }
      qpr_instance_free(inst);
    }
  };
  if (workers < 1) workers = 1;
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  // Report, ordered by alpha regardless of completion order.
  bool all_pass = true;
  bool any_solver_failure = false;
  std::cout << "alpha\tnu_star";
  for (int kind : kinds) std::cout << "\t" << kind_label(kind) << "\tref\tok";
  std::cout << "\n";
  for (const Row& row : rows) {
    std::cout << row.alpha << "\t" << extreal_str(row.refs[0]);
    for (std::size_t k = 0; k < row.runs.size(); ++k) {
      const auto& sum = row.runs[k];
      std::string shown = sum.status == QPR_STATUS_OPTIMAL ? extreal_str(sum.value)
                                                           : status_str(sum.status);
      qpr_extreal ref;
      switch (kinds[k]) {
        case QPR_PROBLEM_R:
        case QPR_PROBLEM_RD: ref = row.refs[1]; break;
        case QPR_PROBLEM_RPLUS: ref = row.refs[2]; break;
        case QPR_PROBLEM_SRPLUS: ref = row.refs[4]; break;
        default: ref = row.refs[3]; break;
      }
      std::cout << "\t" << shown << "\t" << extreal_str(ref) << "\t"
                << (row.pass[k] ? "yes" : "NO");
    }
    std::cout << "\n";
    if (!row.row_pass) all_pass = false;
    if (row.solver_failure) any_solver_failure = true;
  }
  if (family == 2)
    std::cout << "# note: the R+ reference for EX2 is reported computational data, "
                 "not a proved formula\n";

  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) {
      std::cerr << "error: cannot open '" << out_path << "' for writing\n";
      return kExitBadInput;
    }
    // Plot data: status columns carry the infinities; value columns hold
    // finite numbers only ('.' otherwise).
    f << "alpha";
    f << "\tnu_star_status\tnu_star";
    for (int kind : kinds) {
      std::string l = kind_label(kind);
      f << "\t" << l << "_status\t" << l;
    }
    f << "\n";
    auto put = [&f](const qpr_extreal& v) {
      if (v.kind == QPR_VALUE_FINITE)
        f << "\tfinite\t" << v.value;
      else
        f << "\t" << (v.kind == QPR_VALUE_NEG_INF ? "-inf" : "+inf") << "\t.";
    };
    for (const Row& row : rows) {
      f << row.alpha;
      put(row.refs[0]);
      for (std::size_t k = 0; k < row.runs.size(); ++k) {
        const auto& sum = row.runs[k];
        if (sum.status == QPR_STATUS_OPTIMAL)
          put(sum.value);
        else if (sum.status == QPR_STATUS_UNBOUNDED)
          f << "\t-inf\t.";
        else if (sum.status == QPR_STATUS_INFEASIBLE)
          f << "\t+inf\t.";
        else
          f << "\tfailed\t.";
      }
      f << "\n";
    }
  }
  if (any_solver_failure) return kExitSolverFail;
  return all_pass ? kExitOk : kExitVerdictFail;
}

int cmd_certify(const std::string& file, const TolFlags& tols) {
  int code = kExitOk;
  InstancePtr inst = load_instance(file, &code);
  if (!inst) return code;
  qpr_options opts = tols.to_options();
  char* report = nullptr;
  int math_pass = 0, numeric_ok = 0;
  if (qpr_certify(inst.get(), &opts, &report, &math_pass, &numeric_ok) != QPR_OK) {
    std::cerr << "error: certify failed: " << qpr_last_error_message() << "\n";
    return kExitSolverFail;
  }
  std::cout << report;
  qpr_string_free(report);
  if (!numeric_ok) return kExitSolverFail;
  return math_pass ? kExitOk : kExitVerdictFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qprelax: RLT and SDP-RLT relaxations of quadratic programs, their "
               "complementarity-augmented forms, and certificate pipelines"};
  app.require_subcommand(1);

  // validate
  std::string v_file;
  double v_tol = 1e-9;
  CLI::App* validate = app.add_subcommand("validate", "check instance preconditions");
  validate->add_option("file", v_file, "instance file")->required();
  validate->add_option("--tol", v_tol, "Slater threshold (default 1e-9)");

  // compare
  std::string c_file, c_problems = "r,rd,rplus,sr,srr,srrd,srplus", c_dump;
  TolFlags c_tols;
  CLI::App* compare = app.add_subcommand("compare", "solve problems and check equivalences");
  compare->add_option("file", c_file, "instance file")->required();
  compare->add_option("--problems", c_problems,
                      "comma list from r,rd,rplus,sr,srr,srrd,srplus");
  compare->add_option("--dump-program", c_dump, "write program listings to this directory");
  c_tols.attach(compare);

  // sweep
  std::string s_family, s_problems = "r,rplus,sr,srplus", s_out;
  double s_from = 0, s_to = 0, s_step = 1;
  int s_workers = 4;
  TolFlags s_tols;
  CLI::App* sweep = app.add_subcommand("sweep", "alpha sweep over an example family");
  sweep->add_option("family", s_family, "EX1, EX2, EX3 or EX4")->required();
  sweep->add_option("--from", s_from, "first alpha")->required();
  sweep->add_option("--to", s_to, "last alpha")->required();
  sweep->add_option("--step", s_step, "alpha increment")->required();
  sweep->add_option("--problems", s_problems, "comma list of problems to solve");
  sweep->add_option("--out", s_out, "write tab-separated plot data here");
  sweep->add_option("--workers", s_workers, "concurrent solves (default 4)");
  s_tols.attach(sweep);

  // certify
  std::string y_file;
  TolFlags y_tols;
  CLI::App* certify = app.add_subcommand("certify", "run the certificate pipeline");
  certify->add_option("file", y_file, "instance file")->required();
  y_tols.attach(certify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitBadInput;
  }

  if (validate->parsed()) return cmd_validate(v_file, v_tol);
  if (compare->parsed()) return cmd_compare(c_file, c_problems, c_tols, c_dump);
  if (sweep->parsed())
    return cmd_sweep(s_family, s_from, s_to, s_step, s_problems, s_tols, s_out, s_workers);
  if (certify->parsed()) return cmd_certify(y_file, y_tols);
  return kExitBadInput;
}
