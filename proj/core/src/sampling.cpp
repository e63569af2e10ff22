#include "covsel/sampling.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "covsel/error.hpp"

namespace covsel::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_grid(const Grid& grid) {
  if (grid.empty()) throw InputError("kernel grid is empty");
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (!std::isfinite(grid[j])) throw InputError("kernel grid has a non-finite point");
    if (j > 0 && !(grid[j] > grid[j - 1])) {
      throw InputError("kernel grid must be strictly increasing");
    }
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::brownian: return "brownian";
    case KernelKind::ornstein_uhlenbeck: return "ornstein_uhlenbeck";
    case KernelKind::finite_rank: return "finite_rank";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "brownian") return KernelKind::brownian;
  if (name == "ornstein_uhlenbeck" || name == "ou") return KernelKind::ornstein_uhlenbeck;
  if (name == "finite_rank") return KernelKind::finite_rank;
  throw InputError("unknown kernel '" + std::string(name) +
                   "' (expected brownian, ornstein_uhlenbeck or finite_rank)");
}

Matrix kernel_to_sigma(const KernelSpec& kernel, const Grid& grid) {
  check_grid(grid);
  const auto p = static_cast<Eigen::Index>(grid.size());
  Matrix sigma(p, p);
  switch (kernel.kind) {
    case KernelKind::brownian:
      if (grid.front() < 0.0) throw InputError("brownian kernel needs grid points >= 0");
      for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index k = 0; k < p; ++k)
          sigma(j, k) = std::min(grid[static_cast<std::size_t>(j)], grid[static_cast<std::size_t>(k)]);
      break;
    case KernelKind::ornstein_uhlenbeck:
      if (!(kernel.length_scale > 0.0) || !std::isfinite(kernel.length_scale)) {
        throw InputError("ornstein_uhlenbeck length_scale must be > 0");
      }
      for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index k = 0; k < p; ++k)
          sigma(j, k) = std::exp(-std::abs(grid[static_cast<std::size_t>(j)] -
                                           grid[static_cast<std::size_t>(k)]) /
                                 kernel.length_scale);
      break;
    case KernelKind::finite_rank: {
      kernel.family.validate();
      const Matrix g = dict::build_design(kernel.family, kernel.indices, grid);
      const auto m = static_cast<Eigen::Index>(kernel.indices.size());
      if (kernel.psi.rows() != m || kernel.psi.cols() != m) {
        throw InputError("finite_rank psi must be " + std::to_string(m) + "x" +
                         std::to_string(m));
      }
      if (!kernel.psi.allFinite() || linalg::max_abs(kernel.psi - kernel.psi.transpose()) > 0.0) {
        throw InputError("finite_rank psi must be finite and symmetric");
      }
      if (linalg::min_eigenvalue(kernel.psi) < -1e-10 * kernel.psi.norm()) {
        throw InputError("finite_rank psi is not positive semi-definite");
      }
      sigma = g * kernel.psi * g.transpose();
      sigma = 0.5 * (sigma + sigma.transpose()).eval();
      break;
    }
  }
  if (linalg::min_eigenvalue(sigma) < -1e-10 * sigma.norm()) {
    throw InputError("kernel '" + std::string(to_string(kernel.kind)) +
                     "' produced a covariance that is not positive semi-definite on this grid");
  }
  return sigma;
}

GaussianSampler::GaussianSampler(const Matrix& sigma) {
  linalg::require_finite(sigma, "sampling covariance");
  if (sigma.rows() != sigma.cols()) throw std::invalid_argument("sampling covariance not square");
  const auto p = sigma.rows();
  if (sigma.isZero(0.0)) {
    factor_ = Matrix::Zero(p, p);
    return;
  }
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) {
    jitter_ = 1e-12 * sigma.trace() / static_cast<double>(p);
    llt.compute(sigma + jitter_ * Matrix::Identity(p, p));
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("Cholesky factorization of the covariance failed after jitter " +
                               std::to_string(jitter_));
    }
  }
  factor_ = llt.matrixL();
}

Matrix GaussianSampler::draw(std::size_t n, Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(p(), static_cast<Eigen::Index>(n));
  // Column i holds replication i, so draws are consumed replication by replication.
  for (Eigen::Index i = 0; i < z.cols(); ++i)
    for (Eigen::Index j = 0; j < z.rows(); ++j) z(j, i) = normal(rng);
  return (factor_ * z).transpose();
}

est::SampleSet sample_paths(const Matrix& sigma, const Grid& grid, std::size_t n,
                            std::uint64_t seed) {
  if (static_cast<std::size_t>(sigma.rows()) != grid.size()) {
    throw InputError("covariance size does not match grid");
  }
  GaussianSampler sampler(sigma);
  auto rng = make_rng(seed);
  return est::SampleSet(grid, sampler.draw(n, rng));
}

Grid uniform_grid(std::size_t p, double t_min, double t_max) {
  Grid g(p);
  for (std::size_t j = 0; j < p; ++j) {
    g[j] = t_min + (t_max - t_min) * static_cast<double>(j) / static_cast<double>(p);
  }
  return g;
}

}  // namespace covsel::sim
