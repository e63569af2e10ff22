#pragma once

// Covariance kernels on a grid and seeded Gaussian path sampling.

#include <cstdint>
#include <random>
#include <string_view>

#include "covsel/dictionary.hpp"
#include "covsel/estimator.hpp"

namespace covsel::sim {

using linalg::Matrix;
using dict::Grid;

using Rng = std::mt19937_64;

/// Seed for an independent stream keyed by (seed, a, b), via SplitMix64
/// mixing. Streams for different keys are decorrelated, and a replication's
/// stream depends only on its key, never on the order replications run in.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

Rng make_rng(std::uint64_t seed);

enum class KernelKind { brownian, ornstein_uhlenbeck, finite_rank };

std::string_view to_string(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view name);

struct KernelSpec {
  KernelKind kind = KernelKind::brownian;
  /// ornstein_uhlenbeck: sigma(s,t) = exp(-|s-t| / length_scale)
  double length_scale = 1.0;
  /// finite_rank: Sigma = G_m Psi G_m^T
  dict::BasisFamily family;
  dict::IndexSet indices;
  Matrix psi;
};

/// Sigma_{jk} = sigma(t_j, t_k). Throws InputError for a grid that is not
/// strictly increasing, invalid kernel parameters, or a result that is not
/// PSD within -1e-10 ||Sigma||.
Matrix kernel_to_sigma(const KernelSpec& kernel, const Grid& grid);

/// Draws x ~ N(0, Sigma) as L z with Sigma = L L^T (Cholesky).
///
/// If the factorization fails, a diagonal jitter of 1e-12 * trace(Sigma) / p
/// is added once and the factorization retried; the applied jitter is
/// reported by jitter(). A zero Sigma yields a zero factor.
class GaussianSampler {
 public:
  /// Throws std::runtime_error if the factorization fails after jitter.
  explicit GaussianSampler(const Matrix& sigma);

  const Matrix& factor() const { return factor_; }
  double jitter() const { return jitter_; }
  Eigen::Index p() const { return factor_.rows(); }

  /// n x p matrix whose rows are independent draws.
  Matrix draw(std::size_t n, Rng& rng) const;

 private:
  Matrix factor_;
  double jitter_ = 0.0;
};

/// n i.i.d. N(0, Sigma) replications on `grid`, deterministic in `seed`.
est::SampleSet sample_paths(const Matrix& sigma, const Grid& grid, std::size_t n,
                            std::uint64_t seed);

/// Uniform grid t_j = t_min + j (t_max - t_min) / p, j = 0..p-1.
Grid uniform_grid(std::size_t p, double t_min = 0.0, double t_max = 1.0);

}  // namespace covsel::sim
