#include "sparse_ukf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparse_ukf/errors.hpp"

namespace sparse_ukf {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NonFiniteResult(std::string(what) + ": input contains NaN or Inf");
  }
}

// Forward/back substitution on a lower-triangular factor, in place on `x`.
void solve_lower_left(const Matrix& l, Matrix& x, bool transpose) {
  const Eigen::Index n = l.rows();
  if (!transpose) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < i; ++k) {
        x.row(i) -= l(i, k) * x.row(k);
      }
      x.row(i) /= l(i, i);
    }
  } else {
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      for (Eigen::Index k = i + 1; k < n; ++k) {
        x.row(i) -= l(k, i) * x.row(k);
      }
      x.row(i) /= l(i, i);
    }
  }
}

}  // namespace

TriangularFactor::TriangularFactor(Matrix lower) : lower_(std::move(lower)) {
  if (lower_.rows() != lower_.cols()) {
    throw DimensionMismatch("TriangularFactor: matrix must be square");
  }
  for (Eigen::Index j = 1; j < lower_.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (lower_(i, j) != 0.0) {
        throw DimensionMismatch("TriangularFactor: non-zero entry above the diagonal");
      }
    }
  }
}

TriangularFactor TriangularFactor::identity(Eigen::Index order) {
  return TriangularFactor(Matrix::Identity(order, order));
}

TriangularFactor TriangularFactor::zero(Eigen::Index order) {
  return TriangularFactor(Matrix::Zero(order, order));
}

Matrix TriangularFactor::covariance() const { return lower_ * lower_.transpose(); }

TriangularFactor cholesky(const Matrix& p) {
  if (p.rows() != p.cols() || p.rows() == 0) {
    throw DimensionMismatch("cholesky: matrix must be square and non-empty");
  }
  require_finite(p, "cholesky");
  const double scale = std::max(p.cwiseAbs().maxCoeff(), 1.0);
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw NotPositiveDefinite("cholesky: matrix is not symmetric");
  }
  const double diag_scale = p.diagonal().cwiseAbs().maxCoeff();

  const Eigen::Index n = p.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = p(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > kPivotTolerance * diag_scale)) {
      throw NotPositiveDefinite("cholesky: non-positive pivot at index " + std::to_string(j));
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (p(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
    }
  }
  return TriangularFactor(std::move(l));
}

TriangularFactor qr_triangularize(const Matrix& a) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (n == 0 || m < n) {
    throw DimensionMismatch("qr_triangularize: need rows >= cols > 0");
  }
  require_finite(a, "qr_triangularize");

  double col_scale = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) col_scale = std::max(col_scale, a.col(j).norm());

  Matrix r = a;
  Vector v(m);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index len = m - k;
    auto x = r.col(k).tail(len);
    const double norm = x.norm();
    if (!(norm > 1e-13 * col_scale)) {
      throw RankDeficient("qr_triangularize: column " + std::to_string(k) +
                          " is linearly dependent on the preceding columns");
    }
    const double alpha = x(0) >= 0.0 ? -norm : norm;
    auto hv = v.head(len);
    hv = x;
    hv(0) -= alpha;
    const double vnorm2 = hv.squaredNorm();
    if (vnorm2 > 0.0) {
      auto block = r.bottomRightCorner(len, n - k);
      const Eigen::RowVectorXd w = (2.0 / vnorm2) * (hv.transpose() * block);
      block.noalias() -= hv * w;
    }
    r.col(k).tail(len - 1).setZero();
    r(k, k) = alpha;
  }

  Matrix lower = r.topRows(n).transpose().triangularView<Eigen::Lower>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (lower(j, j) < 0.0) lower.col(j) = -lower.col(j);
  }
  return TriangularFactor(std::move(lower));
}

TriangularFactor chol_rank1_update(const TriangularFactor& s, const Vector& v, double weight) {
  const Eigen::Index n = s.order();
  if (v.size() != n) {
    throw DimensionMismatch("chol_rank1_update: vector length does not match factor order");
  }
  Matrix l = s.matrix();
  Vector x = std::sqrt(std::abs(weight)) * v;
  if (weight == 0.0 || x.isZero(0.0)) return TriangularFactor(std::move(l));

  if (weight > 0.0) {
    // Givens rotations; no division by the current diagonal.
    for (Eigen::Index k = 0; k < n; ++k) {
      if (x(k) == 0.0) continue;
      const double r = std::hypot(l(k, k), x(k));
      const double c = l(k, k) / r;
      const double sn = x(k) / r;
      l(k, k) = r;
      for (Eigen::Index i = k + 1; i < n; ++i) {
        const double lik = l(i, k);
        l(i, k) = c * lik + sn * x(i);
        x(i) = c * x(i) - sn * lik;
      }
    }
  } else {
    // Hyperbolic rotations.
    for (Eigen::Index k = 0; k < n; ++k) {
      if (x(k) == 0.0) continue;
      const double lkk = l(k, k);
      const double r2 = (lkk - x(k)) * (lkk + x(k));
      if (!(r2 > 0.0) || std::sqrt(r2) <= kPivotTolerance * std::abs(lkk)) {
        throw DowndateFailure("chol_rank1_update: downdate is not positive definite at index " +
                              std::to_string(k));
      }
      const double r = std::sqrt(r2);
      const double c = r / lkk;
      const double sn = x(k) / lkk;
      l(k, k) = r;
      for (Eigen::Index i = k + 1; i < n; ++i) {
        l(i, k) = (l(i, k) - sn * x(i)) / c;
        x(i) = c * x(i) - sn * l(i, k);
      }
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (l(j, j) < 0.0) l.col(j).tail(n - j) = -l.col(j).tail(n - j);
  }
  if (!l.allFinite()) throw DowndateFailure("chol_rank1_update: non-finite result");
  return TriangularFactor(std::move(l));
}

TriangularFactor chol_rank1_update(const TriangularFactor& s, const Matrix& columns,
                                   double weight) {
  TriangularFactor out = s;
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    out = chol_rank1_update(out, Vector(columns.col(j)), weight);
  }
  return out;
}

Matrix triangular_solve(const TriangularFactor& s, const Matrix& b, Side side, bool transpose) {
  const Matrix& l = s.matrix();
  const Eigen::Index n = l.rows();
  if ((side == Side::kLeft && b.rows() != n) || (side == Side::kRight && b.cols() != n)) {
    throw DimensionMismatch("triangular_solve: right-hand side does not match factor order");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(std::abs(l(i, i)) > kSingularTolerance)) {
      throw SingularFactor("triangular_solve: zero diagonal entry at index " + std::to_string(i));
    }
  }
  if (side == Side::kLeft) {
    Matrix x = b;
    solve_lower_left(l, x, transpose);
    return x;
  }
  // X * L = B  <=>  L^T * X^T = B^T ;  X * L^T = B  <=>  L * X^T = B^T
  Matrix xt = b.transpose();
  solve_lower_left(l, xt, !transpose);
  return xt.transpose();
}

TriangularFactor project_and_factor(const Matrix& p, double floor) {
  require_finite(p, "project_and_factor");
  const Matrix sym = 0.5 * (p + p.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector clamped = eig.eigenvalues().cwiseMax(floor);
  // root * root^T is the projected matrix; its QR gives the factor directly.
  const Matrix root = eig.eigenvectors() * clamped.cwiseSqrt().asDiagonal();
  return qr_triangularize(root.transpose());
}

}  // namespace sparse_ukf
