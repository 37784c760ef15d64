#pragma once

#include <cstddef>

#include "sparse_ukf/squkf.hpp"

namespace sparse_ukf {

struct SparsityConfig {
  double barrier = 0.1;           // lambda tilde
  std::size_t max_active = 3;     // n_theta,act
  std::size_t max_iterations = 10;  // N
  double gamma = 0.2;             // weight kept on the pre-loop theta
  double r_pm = 1.0;              // pseudo-measurement noise variance
  bool pseudo_predict = true;     // run the model prediction inside each pseudo iteration

  /// Throws InvalidParams unless every field is in range for `n_theta` coefficients.
  void validate(std::size_t n_theta) const;
};

struct SparsityDiagnostics {
  std::size_t iterations = 0;
  std::size_t active_before = 0;
  std::size_t active_after = 0;
  double l1_before = 0.0;
  double l1_after = 0.0;
  bool hit_limit = false;
  bool aborted = false;  // loop stopped on an unrecoverable filter error
};

/// ||theta||_1 of the trailing n_theta entries of a joint state.
double pseudo_measurement(const Vector& joint, Eigen::Index n_theta);

/// #{ i : |theta_i| > barrier }
std::size_t active_count(const Vector& theta, double barrier);

/// Final estimate: x-part of `pre`, theta = (1 - gamma) theta_pm + gamma theta_pre,
/// square root taken from the pseudo-update iterate.
FilterState soft_switch(const FilterState& pre, const FilterState& pm, Eigen::Index n_x,
                        double gamma);

/// Joint filter with a sparsity-promoting pseudo-measurement loop after each
/// regular correction.
///
/// The pseudo measurement observes ||theta||_1 with value zero and noise
/// variance r_pm. The loop repeats while more than max_active coefficients
/// exceed the barrier, for at most max_iterations passes.
class JointSqUkf {
 public:
  JointSqUkf(DiscreteModel joint_model, Eigen::Index n_x, const NoiseSpec& noise,
             UnscentedParams params, SparsityConfig config);

  [[nodiscard]] FilterState initialize(const Vector& mean, const Matrix& cov) const {
    return ukf_.initialize(mean, cov);
  }

  /// Runs the pseudo-measurement loop on a corrected state; returns the last iterate.
  [[nodiscard]] FilterState sparsity_loop(const FilterState& corrected, double u,
                                          SparsityDiagnostics& diag) const;

  struct StepResult {
    FilterState state;
    SparsityDiagnostics diagnostics;
  };

  [[nodiscard]] StepResult step(const FilterState& state, double u, const Vector& y) const;

  [[nodiscard]] const SquareRootUkf& filter() const { return ukf_; }
  [[nodiscard]] const SparsityConfig& config() const { return config_; }
  [[nodiscard]] Eigen::Index n_x() const { return n_x_; }
  [[nodiscard]] Eigen::Index n_theta() const { return n_theta_; }

 private:
  SquareRootUkf ukf_;
  Eigen::Index n_x_;
  Eigen::Index n_theta_;
  SparsityConfig config_;
  TriangularFactor sqrt_r_pm_;
  ObservationFn pseudo_observation_;
};

}  // namespace sparse_ukf
