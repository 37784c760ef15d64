#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "sparse_ukf/linalg.hpp"

namespace sparse_ukf {

/// One candidate basis function Psi_i(x, u).
struct LibraryTerm {
  std::string name;
  std::function<double(const Vector& x, double u)> evaluate;
};

/// Immutable, ordered set of candidate terms whose weighted sum approximates
/// the unmodelled scalar dynamics g(x, u).
class FunctionLibrary {
 public:
  /// Throws InvalidParams on duplicate names, an empty evaluator, or fewer
  /// than state_dim + 2 terms (constant, states and input at minimum).
  FunctionLibrary(std::vector<LibraryTerm> terms, std::size_t state_dim);

  [[nodiscard]] std::size_t size() const { return terms_.size(); }
  [[nodiscard]] std::size_t state_dim() const { return state_dim_; }
  [[nodiscard]] const LibraryTerm& term(std::size_t i) const { return terms_.at(i); }
  [[nodiscard]] std::vector<std::string> names() const;

  /// Index of the term called `name`; throws InvalidParams if absent.
  [[nodiscard]] std::size_t index_of(const std::string& name) const;

 private:
  std::vector<LibraryTerm> terms_;
  std::size_t state_dim_;
};

/// Psi(x, u), one entry per term. Throws NonFiniteResult if any entry is NaN/Inf.
Vector eval_library(const FunctionLibrary& lib, const Vector& x, double u);

/// theta . Psi(x, u)
double approx_g(const FunctionLibrary& lib, const Vector& theta, const Vector& x, double u);

struct CoefficientEntry {
  std::size_t index;  // 1-based, as in theta_1 .. theta_n
  std::string name;
  double value;
  bool active;
};

struct CoefficientReport {
  std::size_t step = 0;
  std::vector<CoefficientEntry> entries;
  std::size_t active_count = 0;

  /// Entry with the largest |theta|; entries must be non-empty.
  [[nodiscard]] const CoefficientEntry& dominant() const;
  [[nodiscard]] std::vector<std::string> active_names() const;
};

/// Flags terms with |theta_i| > barrier (strict). Throws InvalidParams if barrier <= 0.
CoefficientReport dominant_terms(const FunctionLibrary& lib, const Vector& theta, double barrier,
                                 std::size_t step = 0);

struct DuffingLibraries {
  FunctionLibrary psi1;
  FunctionLibrary psi2;
  FunctionLibrary psi3;
};

/// The three Duffing candidate sets: with x1^3, without it, and with x1^2 in its place.
DuffingLibraries make_duffing_libraries();

/// (1, x1, x2, x2^2, x1^3, sin x2, cos x1, u)
FunctionLibrary make_golf_library();

/// Looks up "duffing_psi1" | "duffing_psi2" | "duffing_psi3" | "golf_psi".
FunctionLibrary library_by_key(const std::string& key);

/// Builds a term from a small expression vocabulary: "1", "u", "x<i>",
/// "x<i>^<p>", "sin(x<i>)", "cos(x<i>)", "x<i>*x<j>". Throws InvalidParams
/// on anything else or on a state index outside [1, state_dim].
LibraryTerm parse_term(const std::string& expr, std::size_t state_dim);

}  // namespace sparse_ukf
