#pragma once

// Dense linear-algebra primitives shared by every other module.
//
// Storage is Eigen's default column-major order, so vec() is a plain copy
// of the underlying buffer and matches the column-stacking convention used
// throughout (vec of a p x q matrix lists column 0, then column 1, ...).

#include <cstddef>
#include <string_view>

#include <Eigen/Dense>

namespace covsel::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Singular values below rank_tol * sigma_max are treated as zero.
inline constexpr double kDefaultRankTol = 1e-10;

/// Default cap on the number of entries a dense Kronecker-type oracle may allocate.
inline constexpr std::size_t kDefaultSizeGuard = 1'000'000;

/// Throws std::invalid_argument naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& a, std::string_view what);

/// Column-major stacking.
Vector vec(const Matrix& a);

/// Inverse of vec for a rows x cols matrix.
Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols);

/// Tr(a b^T). Throws std::invalid_argument on shape mismatch.
double frob_inner(const Matrix& a, const Matrix& b);

double frob_norm_sq(const Matrix& a);

/// Largest absolute entry; 0 for an empty matrix.
double max_abs(const Matrix& a);

/// Moore-Penrose pseudo-inverse via SVD. The result is a reflexive
/// generalized inverse: pinv(A) A pinv(A) = pinv(A) and A pinv(A) A = A.
Matrix pinv(const Matrix& a, double rank_tol = kDefaultRankTol);

/// Numerical rank with the same cutoff as pinv().
Eigen::Index numerical_rank(const Matrix& a, double rank_tol = kDefaultRankTol);

/// Orthogonal projector onto a column space. Always symmetric, idempotent
/// to rounding, and carries its rank so D_m = rank^2 needs no trace.
class Projector {
 public:
  Projector() = default;

  const Matrix& matrix() const { return matrix_; }
  Eigen::Index size() const { return matrix_.rows(); }
  Eigen::Index rank() const { return rank_; }

  /// ||P - P^T||_inf
  double symmetry_defect() const;
  /// ||P^2 - P||_inf
  double idempotence_defect() const;

 private:
  friend Projector projector_from_design(const Matrix& g, double rank_tol);
  Projector(Matrix m, Eigen::Index rank) : matrix_(std::move(m)), rank_(rank) {}

  Matrix matrix_;
  Eigen::Index rank_ = 0;
};

/// Projector onto the column space of g, i.e. G (G^T G)^+ G^T.
///
/// Evaluated as U_r U_r^T from the thin SVD of g, which is algebraically the
/// same matrix and avoids squaring the condition number of g. A zero design
/// yields the zero projector.
Projector projector_from_design(const Matrix& g, double rank_tol = kDefaultRankTol);

/// Kronecker product a (x) b. Satisfies (A (x) B) vec(X) = vec(B X A^T).
/// Throws SizeGuardError if the output would exceed `guard` entries.
Matrix kron(const Matrix& a, const Matrix& b, std::size_t guard = kDefaultSizeGuard);

/// The p^2 x p^2 permutation K with K vec(A) = vec(A^T).
Matrix commutation_matrix(Eigen::Index p, std::size_t guard = kDefaultSizeGuard);

/// Tr((P (x) P) psi) by explicit Kronecker construction. Test/diagnostic use.
double projected_trace_dense(const Matrix& p, const Matrix& psi,
                             std::size_t guard = kDefaultSizeGuard);

/// Smallest eigenvalue of a symmetric matrix (self-adjoint solver on the
/// symmetrized input).
double min_eigenvalue(const Matrix& sym);

}  // namespace covsel::linalg
