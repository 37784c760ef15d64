#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sparse_ukf/errors.hpp"
#include "sparse_ukf/library.hpp"

using namespace sparse_ukf;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out(i++) = d;
  return out;
}

FunctionLibrary four_terms() {
  std::vector<LibraryTerm> t;
  for (const char* e : {"1", "x1", "x2", "u"}) t.push_back(parse_term(e, 2));
  return FunctionLibrary(std::move(t), 2);
}

}  // namespace

TEST_CASE("duffing libraries have the expected term lists") {
  const auto libs = make_duffing_libraries();
  const std::vector<std::string> psi1{"1",   "x1",    "x2",      "x2^2", "sin(x2)",
                                      "x1^3", "x1*x2", "cos(x1)", "u"};
  CHECK(libs.psi1.names() == psi1);
  CHECK(libs.psi1.term(5).name == "x1^3");
  CHECK(libs.psi2.size() == 8);
  for (const auto& n : libs.psi2.names()) CHECK(n != "x1^3");
  CHECK(libs.psi3.size() == 9);
  CHECK(libs.psi3.term(5).name == "x1^2");

  const std::vector<std::string> golf{"1", "x1", "x2", "x2^2", "x1^3", "sin(x2)", "cos(x1)", "u"};
  CHECK(make_golf_library().names() == golf);
}

TEST_CASE("eval_library examples") {
  const auto psi1 = make_duffing_libraries().psi1;
  const Vector v = eval_library(psi1, vec({1, 2}), 0.5);
  const Vector expect = vec({1, 1, 2, 4, std::sin(2.0), 1, 2, std::cos(1.0), 0.5});
  CHECK(oracle::max_abs(v - expect) < 1e-15);

  const Vector origin = eval_library(psi1, Vector::Zero(2), 0.0);
  CHECK(origin(0) == 1.0);
  CHECK(origin(1) == 0.0);
  CHECK(origin(2) == 0.0);
  CHECK(origin(7) == 1.0);

  const Vector g = eval_library(make_golf_library(), Vector::Zero(2), 1.0);
  CHECK(oracle::max_abs(g - vec({1, 0, 0, 0, 0, 0, 1, 1})) == 0.0);

  CHECK_THROWS_AS(eval_library(psi1, Vector::Zero(3), 0.0), DimensionMismatch);
}

TEST_CASE("eval_library flags non-finite terms") {
  std::vector<LibraryTerm> t;
  for (const char* e : {"1", "x1", "x2"}) t.push_back(parse_term(e, 2));
  t.push_back({"1/x1", [](const Vector& x, double) { return 1.0 / x(0); }});
  const FunctionLibrary lib(std::move(t), 2);
  CHECK_THROWS_AS(eval_library(lib, Vector::Zero(2), 0.0), NonFiniteResult);
}

TEST_CASE("approx_g examples") {
  const auto psi1 = make_duffing_libraries().psi1;
  CHECK(approx_g(psi1, Vector::Zero(9), vec({0.3, -2}), 1.2) == 0.0);

  Vector unit = Vector::Zero(9);
  unit(psi1.index_of("x1^3")) = 1.0;
  CHECK(approx_g(psi1, unit, vec({2, 17}), 0.0) == doctest::Approx(8.0));

  CHECK(approx_g(psi1, Vector::Ones(9), Vector::Zero(2), 0.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(approx_g(psi1, Vector::Ones(4), Vector::Zero(2), 0.0), DimensionMismatch);
}

TEST_CASE("approx_g is linear in theta") {
  const auto psi1 = make_duffing_libraries().psi1;
  oracle::Gen g(31);
  for (int t = 0; t < 200; ++t) {
    const Vector a = g.gaussian(9);
    const Vector b = g.gaussian(9);
    const Vector x = g.gaussian(2);
    const double u = g.normal();
    const double lhs = approx_g(psi1, a + b, x, u);
    const double rhs = approx_g(psi1, a, x, u) + approx_g(psi1, b, x, u);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("dominant_terms examples") {
  const auto lib = four_terms();
  const auto rep = dominant_terms(lib, vec({0.05, 0.2, -0.15, 0.01}), 0.1, 4);
  CHECK(rep.step == 4);
  CHECK(rep.active_count == 2);
  CHECK(rep.active_names() == std::vector<std::string>{"x1", "x2"});
  CHECK(rep.entries[1].index == 2);
  CHECK(rep.dominant().name == "x1");

  CHECK(dominant_terms(lib, Vector::Zero(4), 0.1).active_count == 0);
  CHECK(dominant_terms(lib, Vector::Constant(4, 0.1), 0.1).active_count == 0);

  const auto psi1 = make_duffing_libraries().psi1;
  Vector theta = Vector::Zero(9);
  theta(5) = 3.0;
  const auto r1 = dominant_terms(psi1, theta, 0.1);
  CHECK(r1.active_names() == std::vector<std::string>{"x1^3"});
  CHECK(r1.dominant().index == 6);

  CHECK_THROWS_AS(dominant_terms(lib, Vector::Zero(4), 0.0), InvalidParams);
}

TEST_CASE("active count is unchanged by permuting sub-barrier values") {
  const auto lib = make_duffing_libraries().psi1;
  oracle::Gen g(32);
  for (int t = 0; t < 100; ++t) {
    Vector theta(9);
    for (Eigen::Index i = 0; i < 9; ++i) theta(i) = g.uniform(-0.3, 0.3);
    const auto base = dominant_terms(lib, theta, 0.1).active_count;
    Vector shuffled = theta;
    std::vector<Eigen::Index> small;
    for (Eigen::Index i = 0; i < 9; ++i) {
      if (std::abs(theta(i)) <= 0.1) small.push_back(i);
    }
    for (std::size_t i = 0; i + 1 < small.size(); ++i) {
      std::swap(shuffled(small[i]), shuffled(small[small.size() - 1 - i]));
    }
    CHECK(dominant_terms(lib, shuffled, 0.1).active_count == base);
  }
}

TEST_CASE("library construction invariants") {
  std::vector<LibraryTerm> three{parse_term("1", 2), parse_term("x1", 2), parse_term("u", 2)};
  CHECK_THROWS_AS(FunctionLibrary(three, 2), InvalidParams);

  std::vector<LibraryTerm> dup{parse_term("1", 2), parse_term("x1", 2), parse_term("x2", 2),
                               parse_term("x1", 2)};
  CHECK_THROWS_AS(FunctionLibrary(dup, 2), InvalidParams);

  CHECK_THROWS_AS(library_by_key("duffing_psi4"), InvalidParams);
  CHECK(library_by_key("golf_psi").size() == 8);
  CHECK(make_duffing_libraries().psi1.index_of("u") == 8);
  CHECK_THROWS_AS((void)make_duffing_libraries().psi1.index_of("x3"), InvalidParams);
}

TEST_CASE("parse_term vocabulary") {
  const Vector x = vec({0.5, -2.0});
  CHECK(parse_term("1", 2).evaluate(x, 3.0) == 1.0);
  CHECK(parse_term("u", 2).evaluate(x, 3.0) == 3.0);
  CHECK(parse_term("x2", 2).evaluate(x, 3.0) == -2.0);
  CHECK(parse_term("x2^3", 2).evaluate(x, 3.0) == doctest::Approx(-8.0));
  CHECK(parse_term("sin(x1)", 2).evaluate(x, 0.0) == doctest::Approx(std::sin(0.5)));
  CHECK(parse_term("cos(x2)", 2).evaluate(x, 0.0) == doctest::Approx(std::cos(-2.0)));
  CHECK(parse_term("x1*x2", 2).evaluate(x, 0.0) == doctest::Approx(-1.0));
  CHECK(parse_term("x1*x2", 2).name == "x1*x2");

  CHECK_THROWS_AS(parse_term("x3", 2), InvalidParams);
  CHECK_THROWS_AS(parse_term("x1^0", 2), InvalidParams);
  CHECK_THROWS_AS(parse_term("exp(x1)", 2), InvalidParams);
  CHECK_THROWS_AS(parse_term("", 2), InvalidParams);
}
