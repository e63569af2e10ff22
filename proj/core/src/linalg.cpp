#include "covsel/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "covsel/error.hpp"

namespace covsel::linalg {

namespace {

void check_guard(Eigen::Index rows, Eigen::Index cols, std::size_t guard, const char* what) {
  const auto entries = static_cast<double>(rows) * static_cast<double>(cols);
  if (entries > static_cast<double>(guard)) {
    throw SizeGuardError(std::string(what) + ": " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " exceeds size guard of " +
                         std::to_string(guard) + " entries");
  }
}

}  // namespace

void require_finite(const Matrix& a, std::string_view what) {
  if (!a.allFinite()) {
    throw std::invalid_argument(std::string(what) + " contains non-finite entries");
  }
}

Vector vec(const Matrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != v.size()) {
    throw std::invalid_argument("unvec: length " + std::to_string(v.size()) +
                                " does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

double frob_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("frob_inner: shape mismatch");
  }
  return a.cwiseProduct(b).sum();
}

double frob_norm_sq(const Matrix& a) { return a.squaredNorm(); }

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

Matrix pinv(const Matrix& a, double rank_tol) {
  require_finite(a, "pinv input");
  if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = rank_tol * (sv.size() > 0 ? sv(0) : 0.0);
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::Index numerical_rank(const Matrix& a, double rank_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& sv = svd.singularValues();
  const double cutoff = rank_tol * sv(0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) ++r;
  }
  return r;
}

double Projector::symmetry_defect() const { return max_abs(matrix_ - matrix_.transpose()); }

double Projector::idempotence_defect() const { return max_abs(matrix_ * matrix_ - matrix_); }

Projector projector_from_design(const Matrix& g, double rank_tol) {
  require_finite(g, "design matrix");
  const Eigen::Index p = g.rows();
  if (g.cols() == 0) return Projector(Matrix::Zero(p, p), 0);
  Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double cutoff = rank_tol * sv(0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > cutoff && sv(r) > 0.0) ++r;
  const auto u = svd.matrixU().leftCols(r);
  Matrix pm = u * u.transpose();
  // Exact symmetry; the product is symmetric only up to rounding.
  pm = 0.5 * (pm + pm.transpose()).eval();
  return Projector(std::move(pm), r);
}

Matrix kron(const Matrix& a, const Matrix& b, std::size_t guard) {
  check_guard(a.rows() * b.rows(), a.cols() * b.cols(), guard, "kron");
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix commutation_matrix(Eigen::Index p, std::size_t guard) {
  if (p < 1) throw std::invalid_argument("commutation_matrix: p must be >= 1");
  check_guard(p * p, p * p, guard, "commutation_matrix");
  Matrix k = Matrix::Zero(p * p, p * p);
  // vec(A)[i + j p] = A(i, j) and vec(A^T)[j + i p] = A(i, j).
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      k(j + i * p, i + j * p) = 1.0;
    }
  }
  return k;
}

double projected_trace_dense(const Matrix& p, const Matrix& psi, std::size_t guard) {
  const Matrix pp = kron(p, p, guard);
  if (psi.rows() != pp.cols() || psi.cols() != pp.rows()) {
    throw std::invalid_argument("projected_trace_dense: psi must be p^2 x p^2");
  }
  // Tr(A B) without forming the product.
  return pp.cwiseProduct(psi.transpose()).sum();
}

double min_eigenvalue(const Matrix& sym) {
  if (sym.size() == 0) return 0.0;
  const Matrix s = 0.5 * (sym + sym.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace covsel::linalg
