#pragma once

#include <Eigen/Dense>

namespace sparse_ukf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Lower-triangular square-root factor S of a covariance P = S * S^T.
///
/// Entries above the diagonal are identically zero. Factors produced by the
/// kernels in this header additionally have a non-negative diagonal.
class TriangularFactor {
 public:
  TriangularFactor() = default;

  /// Wraps `lower`; throws DimensionMismatch if it is not square or has a
  /// non-zero entry above the diagonal.
  explicit TriangularFactor(Matrix lower);

  static TriangularFactor identity(Eigen::Index order);
  static TriangularFactor zero(Eigen::Index order);

  [[nodiscard]] Eigen::Index order() const { return lower_.rows(); }
  [[nodiscard]] const Matrix& matrix() const { return lower_; }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return lower_(i, j); }

  /// S * S^T
  [[nodiscard]] Matrix covariance() const;

 private:
  Matrix lower_;
};

enum class Side { kLeft, kRight };

// Pivot magnitude below which a factorization is declared not positive definite.
inline constexpr double kPivotTolerance = 1e-12;
inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kSingularTolerance = 1e-14;

/// Cholesky factor L with L * L^T = p.
TriangularFactor cholesky(const Matrix& p);

/// Triangular factor of the thin QR of a tall matrix, returned as R^T so that
/// result * result^T = a^T * a. No pivoting.
TriangularFactor qr_triangularize(const Matrix& a);

/// Returns R with R * R^T = S * S^T + weight * v * v^T.
///
/// A negative weight is a downdate of magnitude |weight|; v is scaled by
/// sqrt(|weight|) internally. Throws DowndateFailure when the downdated
/// matrix is not positive definite.
TriangularFactor chol_rank1_update(const TriangularFactor& s, const Vector& v, double weight);

/// Applies chol_rank1_update once per column of `columns`, in order.
TriangularFactor chol_rank1_update(const TriangularFactor& s, const Matrix& columns, double weight);

/// Solves op(S) * X = B (left) or X * op(S) = B (right), op(S) = S or S^T.
Matrix triangular_solve(const TriangularFactor& s, const Matrix& b, Side side, bool transpose);

/// Nearest symmetric PSD approximation of `p` with eigenvalues clamped at
/// `floor`, refactored. Used to recover from failed downdates.
TriangularFactor project_and_factor(const Matrix& p, double floor = 1e-12);

}  // namespace sparse_ukf
