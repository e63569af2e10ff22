#pragma once

// Empirical covariance, projection estimators Sigma_m = P S P and the
// data-driven variance factor delta_hat_m^2.

#include <cstddef>
#include <vector>

#include "covsel/dictionary.hpp"
#include "covsel/linalg.hpp"

namespace covsel::est {

using linalg::Matrix;
using dict::Grid;

/// n replications of a process observed on a common grid; row i of data() is x_i.
class SampleSet {
 public:
  /// Throws InputError unless n >= 2, p >= 1, the grid is strictly increasing,
  /// data is n x p, and every value is finite.
  SampleSet(Grid grid, Matrix data);

  std::size_t n() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t p() const { return grid_.size(); }
  const Grid& grid() const { return grid_; }
  const Matrix& data() const { return data_; }

  /// Copy with the column means subtracted. Not part of the centered-process
  /// model; exposed for data that is known not to be centered.
  SampleSet centered() const;

 private:
  Grid grid_;
  Matrix data_;
};

struct EmpiricalCov {
  Matrix s;
};

/// S = (1/n) sum_i x_i x_i^T, without mean subtraction.
EmpiricalCov empirical_cov(const SampleSet& samples);

struct ModelFit {
  dict::ModelSpec model;
  Matrix sigma_hat;
  /// (1/n) sum_i ||x_i x_i^T - sigma_hat||^2
  double loss = 0.0;
  /// Tr((P (x) P) Phi_hat)
  double trace_term = 0.0;
  /// trace_term / D_m
  double delta_hat_sq = 0.0;
};

/// Tr((P (x) P) Phi_hat) = (1/n) sum_i ||P x_i||^4 - ||P S P||^2, in O(n p^2)
/// without materializing any p^2 x p^2 matrix.
/// Throws InputError if the model grid differs from the sample grid.
double phi_hat_trace(const SampleSet& samples, const EmpiricalCov& s,
                     const dict::ModelSpec& model);

/// Projection estimate, empirical loss and delta_hat^2 for one model.
///
/// The loss uses <S, P S P> = ||P S P||^2, valid because P is an orthogonal
/// projector: loss = (1/n) sum_i ||x_i||^4 - ||sigma_hat||^2.
ModelFit fit_model(const SampleSet& samples, const EmpiricalCov& s, const dict::ModelSpec& model);

/// fit_model over a whole collection. Fits are independent, so with
/// threads > 1 they are computed concurrently; output order always matches
/// the input order and values are identical to the serial path.
std::vector<ModelFit> fit_all(const SampleSet& samples, const EmpiricalCov& s,
                              const std::vector<dict::ModelSpec>& models,
                              unsigned threads = 1);

/// Explicit Phi_hat = (1/n) sum_i y_i y_i^T - S_vec S_vec^T with y_i = vec(x_i x_i^T).
/// p^4 storage: test oracle only. Throws SizeGuardError above `guard` entries.
Matrix phi_hat_dense(const SampleSet& samples, std::size_t guard = linalg::kDefaultSizeGuard);

}  // namespace covsel::est
