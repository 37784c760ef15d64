// Independent reference implementations used as test oracles. Nothing here
// calls into the square-root kernels under test; factorizations go through
// Eigen's own LLT / HouseholderQR / SelfAdjointEigenSolver.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Seeded generator for hand-rolled property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Matrix gaussian(Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j) {
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = normal();
    }
    return m;
  }
  Vector gaussian(Eigen::Index n) { return gaussian(n, 1).col(0); }

  /// SPD matrix with eigenvalues in [lo, hi] (condition number <= hi / lo).
  Matrix spd(Eigen::Index n, double lo = 0.5, double hi = 2.0) {
    const Eigen::HouseholderQR<Matrix> qr(gaussian(n, n));
    const Matrix q = qr.householderQ();
    Vector ev(n);
    for (Eigen::Index i = 0; i < n; ++i) ev(i) = uniform(lo, hi);
    Matrix p = q * ev.asDiagonal() * q.transpose();
    return 0.5 * (p + p.transpose());
  }

  /// Lower-triangular with diagonal in [lo, hi].
  Matrix lower(Eigen::Index n, double lo = 0.5, double hi = 2.0) {
    Matrix l = gaussian(n, n).triangularView<Eigen::Lower>();
    for (Eigen::Index i = 0; i < n; ++i) l(i, i) = uniform(lo, hi);
    return l;
  }

 private:
  std::mt19937_64 rng_;
};

inline double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

// Sum of the stored values, accumulated in 64-bit mantissa precision.
inline double exact_sum(const Vector& v) {
  long double s = 0.0L;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v(i);
  return static_cast<double>(s);
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

inline double min_eigenvalue(const Matrix& p) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (p + p.transpose()));
  return es.eigenvalues().minCoeff();
}

/// Textbook unscented Kalman filter on the full covariance.
///
/// Weights are passed in explicitly so the oracle never shares code with the
/// filter under test. Sigma points use Eigen's LLT factor.
struct FullCovarianceUkf {
  std::function<Vector(const Vector&, double)> f;
  std::function<Vector(const Vector&, double)> h;
  Matrix q;
  Matrix r;
  Vector wm;
  Vector wc;
  double eta = 1.0;
  bool redraw = true;

  struct State {
    Vector x;
    Matrix p;
  };

  Matrix points(const Vector& x, const Matrix& p) const {
    const Eigen::Index n = x.size();
    const Matrix l = p.llt().matrixL();
    Matrix pts(n, 2 * n + 1);
    pts.col(0) = x;
    for (Eigen::Index j = 0; j < n; ++j) {
      pts.col(1 + j) = x + eta * l.col(j);
      pts.col(1 + n + j) = x - eta * l.col(j);
    }
    return pts;
  }

  State step(const State& s, double u, const Vector& y) const {
    const Matrix chi = points(s.x, s.p);
    Matrix prop(chi.rows(), chi.cols());
    for (Eigen::Index i = 0; i < chi.cols(); ++i) prop.col(i) = f(chi.col(i), u);
    Vector xm = Vector::Zero(chi.rows());
    for (Eigen::Index i = 0; i < chi.cols(); ++i) xm += wm(i) * prop.col(i);
    Matrix pm = q;
    for (Eigen::Index i = 0; i < chi.cols(); ++i) {
      const Vector d = prop.col(i) - xm;
      pm += wc(i) * d * d.transpose();
    }
    const Matrix pts = redraw ? points(xm, pm) : prop;

    Matrix ys(y.size(), pts.cols());
    for (Eigen::Index i = 0; i < pts.cols(); ++i) ys.col(i) = h(pts.col(i), u);
    Vector ym = Vector::Zero(y.size());
    for (Eigen::Index i = 0; i < pts.cols(); ++i) ym += wm(i) * ys.col(i);
    Matrix pyy = r;
    Matrix pxy = Matrix::Zero(xm.size(), y.size());
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      const Vector dy = ys.col(i) - ym;
      pyy += wc(i) * dy * dy.transpose();
      pxy += wc(i) * (pts.col(i) - xm) * dy.transpose();
    }
    const Matrix k = pyy.transpose().ldlt().solve(pxy.transpose()).transpose();
    State out;
    out.x = xm + k * (y - ym);
    out.p = pm - k * pyy * k.transpose();
    return out;
  }
};

/// Closed-form Kalman recursion for x' = A x + b u, y = C x + d u.
struct KalmanFilter {
  Matrix a;
  Vector b;
  Matrix c;
  Vector d;
  Matrix q;
  Matrix r;

  struct State {
    Vector x;
    Matrix p;
  };

  State step(const State& s, double u, const Vector& y) const {
    const Vector xm = a * s.x + b * u;
    const Matrix pm = a * s.p * a.transpose() + q;
    const Matrix sy = c * pm * c.transpose() + r;
    const Matrix k = sy.ldlt().solve(c * pm).transpose();
    State out;
    out.x = xm + k * (y - c * xm - d * u);
    out.p = pm - k * sy * k.transpose();
    return out;
  }
};

}  // namespace oracle
