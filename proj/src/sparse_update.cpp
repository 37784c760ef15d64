#include "sparse_ukf/sparse_update.hpp"

#include <cmath>
#include <string>

#include "sparse_ukf/errors.hpp"

namespace sparse_ukf {

void SparsityConfig::validate(std::size_t n_theta) const {
  if (!(barrier > 0.0)) throw InvalidParams("sparsity: lambda_tilde must be positive");
  if (max_active < 1 || max_active > n_theta) {
    throw InvalidParams("sparsity: n_theta_act must be in [1, " + std::to_string(n_theta) + "]");
  }
  if (max_iterations < 1) throw InvalidParams("sparsity: max_pseudo_iters must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidParams("sparsity: gamma must be in (0, 1)");
  if (!(r_pm > 0.0)) throw InvalidParams("sparsity: r_pm must be positive");
}

double pseudo_measurement(const Vector& joint, Eigen::Index n_theta) {
  if (n_theta < 1 || n_theta > joint.size()) {
    throw DimensionMismatch("pseudo_measurement: n_theta out of range");
  }
  return joint.tail(n_theta).lpNorm<1>();
}

std::size_t active_count(const Vector& theta, double barrier) {
  if (!(barrier > 0.0)) throw InvalidParams("active_count: barrier must be positive");
  return static_cast<std::size_t>((theta.array().abs() > barrier).count());
}

FilterState soft_switch(const FilterState& pre, const FilterState& pm, Eigen::Index n_x,
                        double gamma) {
  if (pre.mean.size() != pm.mean.size()) {
    throw DimensionMismatch("soft_switch: states differ in dimension");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidParams("soft_switch: gamma must be in (0, 1)");
  const Eigen::Index n_theta = pre.mean.size() - n_x;
  FilterState out;
  out.mean.resize(pre.mean.size());
  out.mean.head(n_x) = pre.mean.head(n_x);
  // pre + (1 - gamma)(pm - pre); exact when the loop left the state untouched.
  out.mean.tail(n_theta) =
      pre.mean.tail(n_theta) + (1.0 - gamma) * (pm.mean.tail(n_theta) - pre.mean.tail(n_theta));
  out.sqrt_cov = pm.sqrt_cov;
  out.step = pre.step;
  return out;
}

JointSqUkf::JointSqUkf(DiscreteModel joint_model, Eigen::Index n_x, const NoiseSpec& noise,
                       UnscentedParams params, SparsityConfig config)
    : ukf_(std::move(joint_model), noise, std::move(params)),
      n_x_(n_x),
      n_theta_(ukf_.model().state_dim - n_x),
      config_(config) {
  if (n_x_ < 1 || n_theta_ < 1) throw DimensionMismatch("JointSqUkf: invalid state partition");
  config_.validate(static_cast<std::size_t>(n_theta_));
  sqrt_r_pm_ = TriangularFactor(Matrix::Constant(1, 1, std::sqrt(config_.r_pm)));
  pseudo_observation_ = [n_theta = n_theta_](const Vector& x, double) -> Vector {
    return Vector::Constant(1, pseudo_measurement(x, n_theta));
  };
}

FilterState JointSqUkf::sparsity_loop(const FilterState& corrected, double u,
                                      SparsityDiagnostics& diag) const {
  diag = SparsityDiagnostics{};
  diag.active_before = active_count(corrected.mean.tail(n_theta_), config_.barrier);
  diag.l1_before = pseudo_measurement(corrected.mean, n_theta_);

  const Vector zero = Vector::Zero(1);
  FilterState current = corrected;
  while (active_count(current.mean.tail(n_theta_), config_.barrier) > config_.max_active &&
         diag.iterations < config_.max_iterations) {
    try {
      Prediction pred;
      if (config_.pseudo_predict) {
        pred = ukf_.predict(current, u);
      } else {
        // Correction only: the sigma points of the current iterate act as the prior.
        pred.mean = current.mean;
        pred.sqrt_cov = current.sqrt_cov;
        pred.points = sigma_points(current.mean, current.sqrt_cov, ukf_.params().eta);
      }
      FilterState next = ukf_.correct(pred, zero, u, pseudo_observation_, sqrt_r_pm_);
      if (!next.mean.allFinite() || !next.sqrt_cov.matrix().allFinite()) {
        diag.aborted = true;
        break;
      }
      next.step = current.step;
      current = std::move(next);
    } catch (const Error&) {
      diag.aborted = true;
      break;
    }
    ++diag.iterations;
  }
  diag.hit_limit = diag.iterations >= config_.max_iterations;
  diag.active_after = active_count(current.mean.tail(n_theta_), config_.barrier);
  diag.l1_after = pseudo_measurement(current.mean, n_theta_);
  return current;
}

JointSqUkf::StepResult JointSqUkf::step(const FilterState& state, double u,
                                        const Vector& y) const {
  const FilterState corrected = ukf_.step(state, u, y);
  StepResult result;
  const FilterState pm = sparsity_loop(corrected, u, result.diagnostics);
  result.state = soft_switch(corrected, pm, n_x_, config_.gamma);
  return result;
}

}  // namespace sparse_ukf
