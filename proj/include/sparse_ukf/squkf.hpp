#pragma once

#include <cstddef>

#include "sparse_ukf/linalg.hpp"
#include "sparse_ukf/models.hpp"

namespace sparse_ukf {

/// Denominator used for the non-central sigma-point weights.
///   kStandard: 1 / (2 (n + lambda)), weights sum to one.
///   kPrinted:  1 / (2 (n + kappa)), sums to one only when lambda == kappa.
enum class WeightMode { kStandard, kPrinted };

struct UnscentedParams {
  double alpha = 1e-3;
  double beta = 2.0;
  double kappa = 0.0;
  Eigen::Index n = 0;
  WeightMode mode = WeightMode::kStandard;
  double lambda = 0.0;
  double eta = 0.0;
  Vector wm;  // mean weights, 2n + 1
  Vector wc;  // covariance weights, 2n + 1
  double wm_sum = 1.0;  // exact sum of wm; differs from one only for printed weights
  // Redraw sigma points from the predicted mean and root before the
  // correction, so process noise reaches the cross covariance. Without it the
  // propagated points are reused and the filter is not exact for linear models.
  bool redraw = true;
};

/// lambda = alpha^2 (n + kappa) - n, eta = sqrt(n + lambda) and the weight
/// vectors. Throws InvalidParams if alpha is outside (0, 1], n < 1 or
/// n + lambda <= 0.
UnscentedParams compute_weights(double alpha, double beta, double kappa, Eigen::Index n,
                                WeightMode mode = WeightMode::kStandard);

/// sum_i wm_i * points.col(i)
Vector weighted_mean(const Matrix& points, const UnscentedParams& params);

/// Columns [x, x + eta S, x - eta S], 2n + 1 in total.
Matrix sigma_points(const Vector& mean, const TriangularFactor& s, double eta);

struct FilterState {
  Vector mean;
  TriangularFactor sqrt_cov;
  std::size_t step = 0;
};

/// Constant process and measurement covariances. Q and R must be symmetric
/// positive definite, or exactly zero.
struct NoiseSpec {
  Matrix q;
  Matrix r;
};

/// blkdiag(a, b)
Matrix block_diagonal(const Matrix& a, const Matrix& b);

struct Prediction {
  Vector mean;
  TriangularFactor sqrt_cov;
  Matrix points;  // sigma points fed to the correction
};

/// Counts of covariance repairs performed after failed downdates.
struct RecoveryCounter {
  std::size_t prediction = 0;
  std::size_t innovation = 0;
  std::size_t correction = 0;

  [[nodiscard]] std::size_t total() const { return prediction + innovation + correction; }
};

/// Square-root unscented Kalman filter over a fixed model and fixed noise.
///
/// The noise square roots are factored once at construction. A failed
/// downdate is repaired by projecting the target covariance onto the PSD
/// cone (eigenvalues clamped at 1e-12) and refactoring; repairs are counted
/// in recoveries().
class SquareRootUkf {
 public:
  SquareRootUkf(DiscreteModel model, const NoiseSpec& noise, UnscentedParams params);

  /// P0 = S0 S0^T from an initial mean and covariance.
  [[nodiscard]] FilterState initialize(const Vector& mean, const Matrix& cov) const;

  [[nodiscard]] Prediction predict(const FilterState& state, double u) const;

  [[nodiscard]] FilterState correct(const Prediction& pred, const Vector& y, double u) const;

  /// Correction against an arbitrary observation function and noise root.
  [[nodiscard]] FilterState correct(const Prediction& pred, const Vector& y, double u,
                                    const ObservationFn& observation,
                                    const TriangularFactor& sqrt_r) const;

  [[nodiscard]] FilterState step(const FilterState& state, double u, const Vector& y) const;

  [[nodiscard]] const DiscreteModel& model() const { return model_; }
  [[nodiscard]] const UnscentedParams& params() const { return params_; }
  [[nodiscard]] const TriangularFactor& sqrt_q() const { return sqrt_q_; }
  [[nodiscard]] const TriangularFactor& sqrt_r() const { return sqrt_r_; }
  [[nodiscard]] const RecoveryCounter& recoveries() const { return recoveries_; }

 private:
  TriangularFactor weighted_root(const Matrix& deviations, const TriangularFactor& noise_root,
                                 std::size_t& recovery_slot) const;

  DiscreteModel model_;
  UnscentedParams params_;
  TriangularFactor sqrt_q_;
  TriangularFactor sqrt_r_;
  mutable RecoveryCounter recoveries_;
};

/// Square root of a noise covariance: Cholesky factor, or zero for a zero matrix.
TriangularFactor noise_root(const Matrix& cov);

}  // namespace sparse_ukf
