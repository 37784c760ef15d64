#include "sparse_ukf/squkf.hpp"

#include <cmath>
#include <string>

#include "sparse_ukf/errors.hpp"

namespace sparse_ukf {

UnscentedParams compute_weights(double alpha, double beta, double kappa, Eigen::Index n,
                                WeightMode mode) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InvalidParams("compute_weights: alpha must be in (0, 1]");
  }
  if (n < 1) throw InvalidParams("compute_weights: state dimension must be >= 1");
  if (!std::isfinite(beta) || !std::isfinite(kappa)) {
    throw InvalidParams("compute_weights: beta and kappa must be finite");
  }
  // Extended precision keeps W0 (about -1/alpha^2) within an ulp of its true value.
  const auto nl = static_cast<long double>(n);
  const long double al = alpha;
  const long double lambda = al * al * (nl + kappa) - nl;
  if (!(nl + lambda > 0.0L)) throw InvalidParams("compute_weights: n + lambda must be positive");

  const long double outer_denominator = mode == WeightMode::kStandard ? nl + lambda : nl + kappa;
  if (!(outer_denominator > 0.0L)) {
    throw InvalidParams("compute_weights: n + kappa must be positive for printed weights");
  }
  const long double w0 = lambda / (lambda + nl);
  const long double wi = 1.0L / (2.0L * outer_denominator);

  UnscentedParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.kappa = kappa;
  p.n = n;
  p.mode = mode;
  p.lambda = static_cast<double>(lambda);
  p.eta = static_cast<double>(std::sqrt(nl + lambda));
  p.wm = Vector::Constant(2 * n + 1, static_cast<double>(wi));
  p.wc = p.wm;
  p.wm(0) = static_cast<double>(w0);
  p.wc(0) = static_cast<double>(w0 + 1.0L - al * al + beta);
  p.wm_sum = mode == WeightMode::kStandard ? 1.0 : static_cast<double>(w0 + 2.0L * nl * wi);
  return p;
}

Matrix sigma_points(const Vector& mean, const TriangularFactor& s, double eta) {
  const Eigen::Index n = mean.size();
  if (s.order() != n) throw DimensionMismatch("sigma_points: factor order does not match mean");
  Matrix pts(n, 2 * n + 1);
  pts.col(0) = mean;
  const Matrix spread = eta * s.matrix();
  pts.middleCols(1, n) = spread.colwise() + mean;
  pts.rightCols(n) = (-spread).colwise() + mean;
  return pts;
}

Vector weighted_mean(const Matrix& points, const UnscentedParams& params) {
  // sum_i W_i X_i, expanded about X_0 so the large W_0 never multiplies X_0 directly.
  const Eigen::Index outer = points.cols() - 1;
  const Vector x0 = points.col(0);
  return params.wm_sum * x0 + (points.rightCols(outer).colwise() - x0) * params.wm.tail(outer);
}

Matrix block_diagonal(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

TriangularFactor noise_root(const Matrix& cov) {
  if (cov.rows() != cov.cols()) throw DimensionMismatch("noise_root: covariance must be square");
  if (cov.isZero(0.0)) return TriangularFactor::zero(cov.rows());
  return cholesky(cov);
}

SquareRootUkf::SquareRootUkf(DiscreteModel model, const NoiseSpec& noise, UnscentedParams params)
    : model_(std::move(model)), params_(std::move(params)) {
  if (!model_.transition || !model_.observation) {
    throw InvalidParams("SquareRootUkf: model functions must be set");
  }
  if (params_.n != model_.state_dim) {
    throw DimensionMismatch("SquareRootUkf: unscented params built for dimension " +
                            std::to_string(params_.n) + ", model has " +
                            std::to_string(model_.state_dim));
  }
  if (noise.q.rows() != model_.state_dim || noise.q.cols() != model_.state_dim) {
    throw DimensionMismatch("SquareRootUkf: Q has wrong shape");
  }
  if (noise.r.rows() != model_.measurement_dim || noise.r.cols() != model_.measurement_dim) {
    throw DimensionMismatch("SquareRootUkf: R has wrong shape");
  }
  sqrt_q_ = noise_root(noise.q);
  sqrt_r_ = noise_root(noise.r);
}

FilterState SquareRootUkf::initialize(const Vector& mean, const Matrix& cov) const {
  if (mean.size() != model_.state_dim) {
    throw DimensionMismatch("SquareRootUkf::initialize: mean has wrong dimension");
  }
  return FilterState{mean, cholesky(cov), 0};
}

TriangularFactor SquareRootUkf::weighted_root(const Matrix& deviations,
                                              const TriangularFactor& noise_root,
                                              std::size_t& recovery_slot) const {
  const Eigen::Index rows = deviations.rows();
  const Eigen::Index outer = deviations.cols() - 1;
  Matrix compound(rows, outer + rows);
  compound.leftCols(outer) = std::sqrt(params_.wc(1)) * deviations.rightCols(outer);
  compound.rightCols(rows) = noise_root.matrix();

  const Vector centre = deviations.col(0);
  try {
    const TriangularFactor r = qr_triangularize(compound.transpose());
    return chol_rank1_update(r, centre, params_.wc(0));
  } catch (const DowndateFailure&) {
  } catch (const RankDeficient&) {
  }
  ++recovery_slot;
  const Matrix p =
      compound * compound.transpose() + params_.wc(0) * centre * centre.transpose();
  return project_and_factor(p);
}

Prediction SquareRootUkf::predict(const FilterState& state, double u) const {
  const Eigen::Index n = model_.state_dim;
  if (state.mean.size() != n || state.sqrt_cov.order() != n) {
    throw DimensionMismatch("SquareRootUkf::predict: state has wrong dimension");
  }
  const Matrix chi = sigma_points(state.mean, state.sqrt_cov, params_.eta);
  Matrix propagated(n, chi.cols());
  for (Eigen::Index i = 0; i < chi.cols(); ++i) {
    propagated.col(i) = model_.transition(chi.col(i), u);
  }
  const Vector mean = weighted_mean(propagated, params_);
  const Matrix dev = propagated.colwise() - mean;
  TriangularFactor s = weighted_root(dev, sqrt_q_, recoveries_.prediction);
  if (params_.redraw) propagated = sigma_points(mean, s, params_.eta);
  return Prediction{mean, std::move(s), std::move(propagated)};
}

FilterState SquareRootUkf::correct(const Prediction& pred, const Vector& y, double u) const {
  return correct(pred, y, u, model_.observation, sqrt_r_);
}

FilterState SquareRootUkf::correct(const Prediction& pred, const Vector& y, double u,
                                   const ObservationFn& observation,
                                   const TriangularFactor& sqrt_r) const {
  const Eigen::Index m = y.size();
  if (sqrt_r.order() != m) {
    throw DimensionMismatch("SquareRootUkf::correct: measurement and noise dimensions differ");
  }
  const Eigen::Index cols = pred.points.cols();
  Matrix ys(m, cols);
  for (Eigen::Index i = 0; i < cols; ++i) {
    const Vector yi = observation(pred.points.col(i), u);
    if (yi.size() != m) {
      throw DimensionMismatch("SquareRootUkf::correct: observation returned wrong dimension");
    }
    ys.col(i) = yi;
  }
  const Vector y_mean = weighted_mean(ys, params_);
  const Matrix y_dev = ys.colwise() - y_mean;
  const TriangularFactor s_y = weighted_root(y_dev, sqrt_r, recoveries_.innovation);

  const Matrix x_dev = pred.points.colwise() - pred.mean;
  const Matrix p_xy = x_dev * params_.wc.asDiagonal() * y_dev.transpose();

  // K (S_y S_y^T) = P_xy
  const Matrix tmp = triangular_solve(s_y, p_xy, Side::kRight, /*transpose=*/true);
  const Matrix gain = triangular_solve(s_y, tmp, Side::kRight, /*transpose=*/false);

  FilterState out;
  out.mean = pred.mean + gain * (y - y_mean);
  const Matrix u_cols = gain * s_y.matrix();
  try {
    out.sqrt_cov = chol_rank1_update(pred.sqrt_cov, u_cols, -1.0);
  } catch (const DowndateFailure&) {
    ++recoveries_.correction;
    out.sqrt_cov =
        project_and_factor(pred.sqrt_cov.covariance() - u_cols * u_cols.transpose());
  }
  return out;
}

FilterState SquareRootUkf::step(const FilterState& state, double u, const Vector& y) const {
  FilterState next = correct(predict(state, u), y, u);
  next.step = state.step + 1;
  return next;
}

}  // namespace sparse_ukf
