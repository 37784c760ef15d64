#include "sparse_ukf/library.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "sparse_ukf/errors.hpp"

namespace sparse_ukf {

FunctionLibrary::FunctionLibrary(std::vector<LibraryTerm> terms, std::size_t state_dim)
    : terms_(std::move(terms)), state_dim_(state_dim) {
  if (state_dim_ == 0) throw InvalidParams("FunctionLibrary: state dimension must be positive");
  if (terms_.size() < state_dim_ + 2) {
    throw InvalidParams("FunctionLibrary: needs at least " + std::to_string(state_dim_ + 2) +
                        " terms, got " + std::to_string(terms_.size()));
  }
  std::set<std::string> seen;
  for (const auto& t : terms_) {
    if (!t.evaluate) throw InvalidParams("FunctionLibrary: term '" + t.name + "' has no evaluator");
    if (!seen.insert(t.name).second) {
      throw InvalidParams("FunctionLibrary: duplicate term name '" + t.name + "'");
    }
  }
}

std::vector<std::string> FunctionLibrary::names() const {
  std::vector<std::string> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back(t.name);
  return out;
}

std::size_t FunctionLibrary::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i].name == name) return i;
  }
  throw InvalidParams("FunctionLibrary: no term named '" + name + "'");
}

Vector eval_library(const FunctionLibrary& lib, const Vector& x, double u) {
  if (static_cast<std::size_t>(x.size()) != lib.state_dim()) {
    throw DimensionMismatch("eval_library: state has dimension " + std::to_string(x.size()) +
                            ", library expects " + std::to_string(lib.state_dim()));
  }
  Vector psi(static_cast<Eigen::Index>(lib.size()));
  for (std::size_t i = 0; i < lib.size(); ++i) {
    const double v = lib.term(i).evaluate(x, u);
    if (!std::isfinite(v)) {
      throw NonFiniteResult("eval_library: term '" + lib.term(i).name + "' is not finite");
    }
    psi(static_cast<Eigen::Index>(i)) = v;
  }
  return psi;
}

double approx_g(const FunctionLibrary& lib, const Vector& theta, const Vector& x, double u) {
  if (static_cast<std::size_t>(theta.size()) != lib.size()) {
    throw DimensionMismatch("approx_g: theta has " + std::to_string(theta.size()) +
                            " entries, library has " + std::to_string(lib.size()));
  }
  return theta.dot(eval_library(lib, x, u));
}

const CoefficientEntry& CoefficientReport::dominant() const {
  if (entries.empty()) throw InvalidParams("CoefficientReport: no entries");
  return *std::max_element(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::abs(a.value) < std::abs(b.value);
  });
}

std::vector<std::string> CoefficientReport::active_names() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (e.active) out.push_back(e.name);
  }
  return out;
}

CoefficientReport dominant_terms(const FunctionLibrary& lib, const Vector& theta, double barrier,
                                 std::size_t step) {
  if (!(barrier > 0.0)) throw InvalidParams("dominant_terms: barrier must be positive");
  if (static_cast<std::size_t>(theta.size()) != lib.size()) {
    throw DimensionMismatch("dominant_terms: theta length does not match library size");
  }
  CoefficientReport report;
  report.step = step;
  report.entries.reserve(lib.size());
  for (std::size_t i = 0; i < lib.size(); ++i) {
    const double v = theta(static_cast<Eigen::Index>(i));
    const bool active = std::abs(v) > barrier;
    report.entries.push_back({i + 1, lib.term(i).name, v, active});
    if (active) ++report.active_count;
  }
  return report;
}

LibraryTerm parse_term(const std::string& expr, std::size_t state_dim) {
  static const std::regex kState(R"(x(\d+))");
  static const std::regex kPower(R"(x(\d+)\^(\d+))");
  static const std::regex kSin(R"(sin\(x(\d+)\))");
  static const std::regex kCos(R"(cos\(x(\d+)\))");
  static const std::regex kProduct(R"(x(\d+)\*x(\d+))");

  auto index = [&](const std::string& digits) {
    const auto i = static_cast<std::size_t>(std::stoul(digits));
    if (i < 1 || i > state_dim) {
      throw InvalidParams("parse_term: state index " + digits + " out of range in '" + expr + "'");
    }
    return static_cast<Eigen::Index>(i - 1);
  };

  std::smatch m;
  if (expr == "1") return {expr, [](const Vector&, double) { return 1.0; }};
  if (expr == "u") return {expr, [](const Vector&, double u) { return u; }};
  if (std::regex_match(expr, m, kState)) {
    const auto i = index(m[1]);
    return {expr, [i](const Vector& x, double) { return x(i); }};
  }
  if (std::regex_match(expr, m, kPower)) {
    const auto i = index(m[1]);
    const int p = std::stoi(m[2]);
    if (p < 1) throw InvalidParams("parse_term: exponent must be positive in '" + expr + "'");
    return {expr, [i, p](const Vector& x, double) {
              double v = 1.0;
              for (int k = 0; k < p; ++k) v *= x(i);
              return v;
            }};
  }
  if (std::regex_match(expr, m, kSin)) {
    const auto i = index(m[1]);
    return {expr, [i](const Vector& x, double) { return std::sin(x(i)); }};
  }
  if (std::regex_match(expr, m, kCos)) {
    const auto i = index(m[1]);
    return {expr, [i](const Vector& x, double) { return std::cos(x(i)); }};
  }
  if (std::regex_match(expr, m, kProduct)) {
    const auto i = index(m[1]);
    const auto j = index(m[2]);
    return {expr, [i, j](const Vector& x, double) { return x(i) * x(j); }};
  }
  throw InvalidParams("parse_term: unsupported expression '" + expr + "'");
}

namespace {

FunctionLibrary from_names(const std::vector<std::string>& names, std::size_t state_dim) {
  std::vector<LibraryTerm> terms;
  terms.reserve(names.size());
  for (const auto& n : names) terms.push_back(parse_term(n, state_dim));
  return FunctionLibrary(std::move(terms), state_dim);
}

}  // namespace

DuffingLibraries make_duffing_libraries() {
  return {
      from_names({"1", "x1", "x2", "x2^2", "sin(x2)", "x1^3", "x1*x2", "cos(x1)", "u"}, 2),
      from_names({"1", "x1", "x2", "x2^2", "sin(x2)", "x1*x2", "cos(x1)", "u"}, 2),
      from_names({"1", "x1", "x2", "x2^2", "sin(x2)", "x1^2", "x1*x2", "cos(x1)", "u"}, 2),
  };
}

FunctionLibrary make_golf_library() {
  return from_names({"1", "x1", "x2", "x2^2", "x1^3", "sin(x2)", "cos(x1)", "u"}, 2);
}

FunctionLibrary library_by_key(const std::string& key) {
  if (key == "duffing_psi1") return make_duffing_libraries().psi1;
  if (key == "duffing_psi2") return make_duffing_libraries().psi2;
  if (key == "duffing_psi3") return make_duffing_libraries().psi3;
  if (key == "golf_psi") return make_golf_library();
  throw InvalidParams("unknown library key '" + key + "'");
}

}  // namespace sparse_ukf
