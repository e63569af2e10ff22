#pragma once

// Random problem instances for the brute-force equivalence checks.

#include "covsel/dictionary.hpp"
#include "covsel/estimator.hpp"
#include "covsel/sampling.hpp"

namespace covsel::sim {

/// rows x cols matrix of independent N(0,1) entries.
Matrix random_normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols);

/// A A^T with A p x rank standard normal: symmetric PSD of rank <= `rank`.
Matrix random_psd(Rng& rng, Eigen::Index p, Eigen::Index rank);

/// Model with a random p x k design, k uniform in [1, p]; with probability
/// 1/3 one column is duplicated so the design is rank deficient.
dict::ModelSpec random_model(Rng& rng, const Grid& grid);

/// n standard normal replications on grid 0..p-1 (no covariance structure).
est::SampleSet random_samples(Rng& rng, std::size_t n, std::size_t p);

}  // namespace covsel::sim
