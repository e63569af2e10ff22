#include "covsel/estimator.hpp"

#include <cmath>
#include <string>

#include "covsel/error.hpp"
#include "covsel/parallel.hpp"

namespace covsel::est {

SampleSet::SampleSet(Grid grid, Matrix data) : grid_(std::move(grid)), data_(std::move(data)) {
  if (grid_.empty()) throw InputError("sample grid is empty (p must be >= 1)");
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    if (!std::isfinite(grid_[j])) {
      throw InputError("grid value t_" + std::to_string(j + 1) + " is not finite");
    }
    if (j > 0 && !(grid_[j] > grid_[j - 1])) {
      throw InputError("grid must be strictly increasing (t_" + std::to_string(j) +
                       " >= t_" + std::to_string(j + 1) + ")");
    }
  }
  if (data_.rows() < 2) {
    throw InputError("need at least n = 2 replications, got " + std::to_string(data_.rows()));
  }
  if (static_cast<std::size_t>(data_.cols()) != grid_.size()) {
    throw InputError("data has " + std::to_string(data_.cols()) + " columns but grid has " +
                     std::to_string(grid_.size()) + " points");
  }
  if (!data_.allFinite()) throw InputError("sample data contains non-finite values");
}

SampleSet SampleSet::centered() const {
  Matrix c = data_.rowwise() - data_.colwise().mean();
  return SampleSet(grid_, std::move(c));
}

EmpiricalCov empirical_cov(const SampleSet& samples) {
  const Matrix& x = samples.data();
  Matrix s = Matrix::Zero(x.cols(), x.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / static_cast<double>(x.rows()));
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return {std::move(s)};
}

namespace {

void check_grid(const SampleSet& samples, const dict::ModelSpec& model) {
  if (model.grid != samples.grid()) {
    throw InputError("model grid does not match sample grid");
  }
}

}  // namespace

double phi_hat_trace(const SampleSet& samples, const EmpiricalCov& s,
                     const dict::ModelSpec& model) {
  check_grid(samples, model);
  const Matrix& pm = model.projector.matrix();
  // Row i of px is (P x_i)^T.
  const Matrix px = samples.data() * pm;
  const auto n = static_cast<double>(samples.n());
  const double fourth = px.rowwise().squaredNorm().array().square().sum() / n;
  const Matrix sigma_hat = pm * s.s * pm;
  return fourth - sigma_hat.squaredNorm();
}

ModelFit fit_model(const SampleSet& samples, const EmpiricalCov& s, const dict::ModelSpec& model) {
  check_grid(samples, model);
  const Matrix& pm = model.projector.matrix();
  Matrix sigma_hat = pm * s.s * pm;
  sigma_hat = 0.5 * (sigma_hat + sigma_hat.transpose()).eval();

  const auto n = static_cast<double>(samples.n());
  const double mean_fourth = samples.data().rowwise().squaredNorm().array().square().sum() / n;
  const double fit_norm_sq = sigma_hat.squaredNorm();

  ModelFit fit;
  fit.loss = mean_fourth - fit_norm_sq;
  fit.trace_term = phi_hat_trace(samples, s, model);
  fit.delta_hat_sq = fit.trace_term / static_cast<double>(model.dim());
  fit.sigma_hat = std::move(sigma_hat);
  fit.model = model;
  return fit;
}

std::vector<ModelFit> fit_all(const SampleSet& samples, const EmpiricalCov& s,
                              const std::vector<dict::ModelSpec>& models, unsigned threads) {
  std::vector<ModelFit> fits(models.size());
  parallel_for(models.size(), threads,
               [&](std::size_t i) { fits[i] = fit_model(samples, s, models[i]); });
  return fits;
}

Matrix phi_hat_dense(const SampleSet& samples, std::size_t guard) {
  const auto p = static_cast<Eigen::Index>(samples.p());
  const auto p2 = p * p;
  if (static_cast<double>(p2) * static_cast<double>(p2) > static_cast<double>(guard)) {
    throw SizeGuardError("phi_hat_dense: " + std::to_string(p2) + "x" + std::to_string(p2) +
                         " exceeds size guard of " + std::to_string(guard) + " entries");
  }
  const Matrix& x = samples.data();
  const auto n = static_cast<double>(samples.n());
  Matrix phi = Matrix::Zero(p2, p2);
  linalg::Vector mean = linalg::Vector::Zero(p2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const linalg::Vector xi = x.row(i).transpose();
    const linalg::Vector yi = linalg::vec(xi * xi.transpose());
    phi.noalias() += yi * yi.transpose();
    mean += yi;
  }
  phi /= n;
  mean /= n;
  phi.noalias() -= mean * mean.transpose();
  return phi;
}

}  // namespace covsel::est
