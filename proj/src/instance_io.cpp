#include "qprelax/instance_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qprelax/errors.hpp"

namespace qpr {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc())
    throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

namespace {

constexpr const char* kHeader = "qprelax-instance";
constexpr const char* kVersion = "v1";

// Whitespace-delimited tokens; '#' starts a comment to end of line.
std::vector<std::string> tokenize(std::istream& is) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  return tokens;
}

double parse_number(const std::string& tok) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ParseError("instance: bad number '" + tok + "'");
  if (!std::isfinite(v)) throw ParseError("instance: non-finite number '" + tok + "'");
  return v;
}

int parse_int(const std::string& tok) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("instance: bad integer '" + tok + "'");
  return v;
}

class TokenReader {
 public:
  explicit TokenReader(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {}

  bool done() const { return pos_ >= tokens_.size(); }
  const std::string& peek() const {
    if (done()) throw ParseError("instance: unexpected end of file");
    return tokens_[pos_];
  }
  std::string next() {
    std::string t = peek();
    ++pos_;
    return t;
  }
  double number() { return parse_number(next()); }
  int integer() { return parse_int(next()); }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

QpInstance read_instance(std::istream& is) {
  TokenReader in(tokenize(is));
  if (in.next() != kHeader || in.next() != kVersion)
    throw ParseError("instance: missing 'qprelax-instance v1' header");

  if (!in.done() && in.peek() == "family") {
    in.next();
    const std::string id = in.next();
    const double alpha = in.number();
    ExampleFamilyId fam;
    if (id == "EX1")
      fam = ExampleFamilyId::Ex1;
    else if (id == "EX2")
      fam = ExampleFamilyId::Ex2;
    else if (id == "EX3")
      fam = ExampleFamilyId::Ex3;
    else if (id == "EX4")
      fam = ExampleFamilyId::Ex4;
    else
      throw ParseError("instance: unknown family '" + id + "'");
    if (!in.done()) throw ParseError("instance: trailing tokens after family line");
    return example_family(fam, alpha);
  }

  QpInstance inst;
  if (in.next() != "n") throw ParseError("instance: expected 'n'");
  inst.n = in.integer();
  if (in.next() != "m") throw ParseError("instance: expected 'm'");
  inst.m = in.integer();
  if (in.next() != "p") throw ParseError("instance: expected 'p'");
  inst.p = in.integer();
  if (inst.n < 1 || inst.m < 0 || inst.p < 0)
    throw ParseError("instance: invalid dimensions");

  const int n = inst.n, m = inst.m, p = inst.p;
  inst.Q = Eigen::MatrixXd::Zero(n, n);
  inst.c = Eigen::VectorXd::Zero(n);
  inst.G = Eigen::MatrixXd::Zero(n, m);
  inst.g = Eigen::VectorXd::Zero(m);
  inst.H = Eigen::MatrixXd::Zero(n, p);
  inst.h = Eigen::VectorXd::Zero(p);

  bool sq = false, sc = false, sG = false, sg = false, sH = false, sh = false;
  auto read_vec = [&](Eigen::VectorXd& v) {
    for (int i = 0; i < v.size(); ++i) v[i] = in.number();
  };
  auto read_mat = [&](Eigen::MatrixXd& A) {  // row-major
    for (int i = 0; i < A.rows(); ++i)
      for (int j = 0; j < A.cols(); ++j) A(i, j) = in.number();
  };

  while (!in.done()) {
    const std::string key = in.next();
    if (key == "Q") {
      // Upper triangle (row-major) or the full matrix; detected by
      // looking at what follows the n(n+1)/2-th number.
      std::vector<double> vals;
      while (!in.done()) {
        const std::string& t = in.peek();
        if (t == "c" || t == "G" || t == "g" || t == "H" || t == "h") break;
        vals.push_back(in.number());
      }
      const int tri = n * (n + 1) / 2;
      if (static_cast<int>(vals.size()) == tri) {
        int k = 0;
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) inst.Q(i, j) = inst.Q(j, i) = vals[k++];
      } else if (static_cast<int>(vals.size()) == n * n) {
        int k = 0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) inst.Q(i, j) = vals[k++];
        if (inst.Q != inst.Q.transpose().eval())
          throw ParseError("instance: Q is not symmetric");
      } else {
        throw ParseError("instance: Q needs n(n+1)/2 or n*n numbers");
      }
      sq = true;
    } else if (key == "c") {
      read_vec(inst.c);
      sc = true;
    } else if (key == "G") {
      read_mat(inst.G);
      sG = true;
    } else if (key == "g") {
      read_vec(inst.g);
      sg = true;
    } else if (key == "H") {
      read_mat(inst.H);
      sH = true;
    } else if (key == "h") {
      read_vec(inst.h);
      sh = true;
    } else {
      throw ParseError("instance: unknown section '" + key + "'");
    }
  }
  if (!sq || !sc) throw ParseError("instance: Q and c are required");
  if (m > 0 && (!sG || !sg)) throw ParseError("instance: G and g are required when m > 0");
  if (p > 0 && (!sH || !sh)) throw ParseError("instance: H and h are required when p > 0");
  inst.check_well_formed();
  return inst;
}

QpInstance read_instance_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open instance file: " + path);
  return read_instance(f);
}

void write_instance(const QpInstance& inst, std::ostream& os) {
  os << kHeader << " " << kVersion << "\n";
  os << "n " << inst.n << "\n";
  os << "m " << inst.m << "\n";
  os << "p " << inst.p << "\n";
  os << "Q";
  for (int i = 0; i < inst.n; ++i)
    for (int j = i; j < inst.n; ++j) os << " " << format_double(inst.Q(i, j));
  os << "\nc";
  for (int i = 0; i < inst.n; ++i) os << " " << format_double(inst.c[i]);
  os << "\nG";
  for (int i = 0; i < inst.n; ++i)
    for (int j = 0; j < inst.m; ++j) os << " " << format_double(inst.G(i, j));
  os << "\ng";
  for (int j = 0; j < inst.m; ++j) os << " " << format_double(inst.g[j]);
  os << "\nH";
  for (int i = 0; i < inst.n; ++i)
    for (int j = 0; j < inst.p; ++j) os << " " << format_double(inst.H(i, j));
  os << "\nh";
  for (int j = 0; j < inst.p; ++j) os << " " << format_double(inst.h[j]);
  os << "\n";
}

void write_instance_file(const QpInstance& inst, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open file for writing: " + path);
  write_instance(inst, f);
  if (!f.good()) throw Error("write failed: " + path);
}

}  // namespace qpr
