#include "covsel/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "covsel/error.hpp"
#include "covsel/estimator.hpp"
#include "covsel/parallel.hpp"
#include "covsel/sampling.hpp"
#include "covsel/selection.hpp"
#include "covsel/stats.hpp"

namespace covsel::oracle {

void TruthSpec::validate() const {
  linalg::require_finite(sigma, "true covariance");
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw std::invalid_argument("true covariance must be square and non-empty");
  }
  if (linalg::max_abs(sigma - sigma.transpose()) > 1e-12 * std::max(1.0, linalg::max_abs(sigma))) {
    throw std::invalid_argument("true covariance must be symmetric");
  }
  if (linalg::min_eigenvalue(sigma) < -1e-10 * sigma.norm()) {
    throw std::invalid_argument("true covariance must be positive semi-definite");
  }
  if (phi_dense) {
    const auto p2 = sigma.rows() * sigma.rows();
    if (phi_dense->rows() != p2 || phi_dense->cols() != p2) {
      throw std::invalid_argument("phi_dense must be p^2 x p^2");
    }
    linalg::require_finite(*phi_dense, "phi_dense");
    if (linalg::max_abs(*phi_dense - phi_dense->transpose()) >
        1e-12 * std::max(1.0, linalg::max_abs(*phi_dense))) {
      throw std::invalid_argument("phi_dense must be symmetric");
    }
    if (linalg::min_eigenvalue(*phi_dense) < -1e-10 * phi_dense->norm()) {
      throw std::invalid_argument("phi_dense must be positive semi-definite");
    }
  }
}

GaussianTraceTerms gaussian_trace_terms(const Matrix& projector, const Matrix& sigma) {
  const Matrix ps = projector * sigma;
  const Matrix psp = ps * projector;
  return {ps.trace() * ps.trace(), psp.squaredNorm()};
}

Matrix gaussian_phi_dense(const Matrix& sigma, std::size_t guard) {
  const auto p = sigma.rows();
  const Matrix ss = linalg::kron(sigma, sigma, guard);
  const Matrix k = linalg::commutation_matrix(p, guard);
  return ss + k * ss;
}

double true_phi_trace(const TruthSpec& truth, const dict::ModelSpec& model) {
  if (static_cast<std::size_t>(truth.sigma.rows()) != model.p()) {
    throw std::invalid_argument("truth dimension does not match model grid");
  }
  if (truth.gaussian) {
    const auto t = gaussian_trace_terms(model.projector.matrix(), truth.sigma);
    return t.trace_sq + t.frob_sq;
  }
  if (truth.phi_dense) {
    return linalg::projected_trace_dense(model.projector.matrix(), *truth.phi_dense);
  }
  throw std::invalid_argument("true Phi unavailable: truth is not Gaussian and has no phi_dense");
}

RiskRecord true_risk(const TruthSpec& truth, const dict::ModelSpec& model, std::size_t n) {
  if (n == 0) throw std::invalid_argument("true_risk needs n >= 1");
  const Matrix& pm = model.projector.matrix();
  RiskRecord r;
  r.indices = model.indices;
  r.dim = model.dim();
  r.bias_sq = (truth.sigma - pm * truth.sigma * pm).squaredNorm();
  const double trace = true_phi_trace(truth, model);
  r.delta_sq = trace / static_cast<double>(r.dim);
  r.variance_term = trace / static_cast<double>(n);
  r.risk = r.bias_sq + r.variance_term;
  return r;
}

double OracleResult::delta_sup_sq() const {
  double best = 0.0;
  for (const auto& r : table) best = std::max(best, r.delta_sq);
  return best;
}

OracleResult oracle_model(const TruthSpec& truth, const std::vector<dict::ModelSpec>& models,
                          std::size_t n) {
  if (models.empty()) throw DegenerateCollectionError("oracle_model: empty collection");
  OracleResult out;
  std::vector<double> risks;
  std::vector<std::size_t> dims;
  std::vector<dict::IndexSet> indices;
  for (const auto& m : models) {
    out.table.push_back(true_risk(truth, m, n));
    risks.push_back(out.table.back().risk);
    dims.push_back(m.dim());
    indices.push_back(m.indices);
  }
  out.best = sel::argmin_with_tiebreak(risks, dims, indices);
  return out;
}

CInfResult c_inf(const TruthSpec& truth, const std::vector<dict::ModelSpec>& models) {
  if (models.empty()) throw DegenerateCollectionError("c_inf: empty collection");
  CInfResult out;
  out.value = true_phi_trace(truth, models.front());
  for (const auto& m : models) out.value = std::min(out.value, true_phi_trace(truth, m));
  const double scale = std::max(1.0, truth.sigma.squaredNorm());
  if (out.value <= 1e-12 * scale) {
    out.degenerate = true;
    out.warning = "C_inf = " + std::to_string(out.value) +
                  " is not positive; the data-driven penalty can vanish for some model";
  }
  return out;
}

namespace {

void require_gaussian(const TruthSpec& truth, const char* what) {
  if (!truth.gaussian) {
    throw std::invalid_argument(std::string(what) + " needs a Gaussian truth for sampling");
  }
}

// delta_hat_m^2 for every model on one replication.
std::vector<double> replicate_delta_hat(const sim::GaussianSampler& sampler, const dict::Grid& grid,
                                        const std::vector<dict::ModelSpec>& models, std::size_t n,
                                        std::uint64_t stream_seed) {
  auto rng = sim::make_rng(stream_seed);
  const est::SampleSet samples(grid, sampler.draw(n, rng));
  const auto s = est::empirical_cov(samples);
  std::vector<double> out;
  out.reserve(models.size());
  for (const auto& m : models) {
    out.push_back(est::phi_hat_trace(samples, s, m) / static_cast<double>(m.dim()));
  }
  return out;
}

}  // namespace

std::vector<A1Record> check_A1(const TruthSpec& truth, const std::vector<dict::ModelSpec>& models,
                               std::size_t n, std::size_t reps, std::uint64_t seed,
                               unsigned threads) {
  if (reps < 100) throw std::invalid_argument("check_A1 needs reps >= 100");
  if (n < 2) throw std::invalid_argument("check_A1 needs n >= 2");
  if (models.empty()) throw DegenerateCollectionError("check_A1: empty collection");
  require_gaussian(truth, "check_A1");
  const sim::GaussianSampler sampler(truth.sigma);
  const auto& grid = models.front().grid;

  // per_model[k][r] = delta_hat^2 of model k on replication r
  std::vector<std::vector<double>> per_model(models.size(), std::vector<double>(reps));
  parallel_for(reps, threads, [&](std::size_t r) {
    const auto d = replicate_delta_hat(sampler, grid, models, n, sim::derive_seed(seed, r, n));
    for (std::size_t k = 0; k < d.size(); ++k) per_model[k][r] = d[k];
  });

  std::vector<A1Record> out;
  const double factor = static_cast<double>(n - 1) / static_cast<double>(n);
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto ms = stats::mean_and_se(per_model[k]);
    A1Record rec;
    rec.indices = models[k].indices;
    rec.mean_delta_hat_sq = ms.mean;
    rec.standard_error = ms.se;
    rec.delta_sq = true_phi_trace(truth, models[k]) / static_cast<double>(models[k].dim());
    rec.target = factor * rec.delta_sq;
    const double diff = rec.mean_delta_hat_sq - rec.target;
    rec.z_score = ms.se > 0.0 ? diff / ms.se : (diff == 0.0 ? 0.0 : INFINITY);
    rec.flagged = std::abs(rec.z_score) > 4.0;
    out.push_back(std::move(rec));
  }
  return out;
}

BinomialEstimate wilson_interval(std::size_t successes, std::size_t trials, double z) {
  BinomialEstimate b;
  b.successes = successes;
  b.trials = trials;
  if (trials == 0) {
    b.ci_high = 1.0;
    return b;
  }
  const auto nt = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / nt;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nt;
  const double center = (ph + z2 / (2.0 * nt)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nt + z2 / (4.0 * nt * nt)) / denom;
  b.estimate = ph;
  // The exact interval endpoints at 0 and n successes; the formula only reaches them up to rounding.
  b.ci_low = successes == 0 ? 0.0 : std::max(0.0, center - half);
  b.ci_high = successes == trials ? 1.0 : std::min(1.0, center + half);
  return b;
}

A2Result check_A2_omega(const TruthSpec& truth, const std::vector<dict::ModelSpec>& models,
                        std::size_t n, double alpha, std::size_t reps, std::uint64_t seed,
                        unsigned threads) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (reps < 100) throw std::invalid_argument("check_A2_omega needs reps >= 100");
  if (n < 2) throw std::invalid_argument("check_A2_omega needs n >= 2");
  if (models.empty()) throw DegenerateCollectionError("check_A2_omega: empty collection");
  require_gaussian(truth, "check_A2_omega");
  const sim::GaussianSampler sampler(truth.sigma);
  const auto& grid = models.front().grid;

  std::vector<double> delta_sq;
  for (const auto& m : models) {
    delta_sq.push_back(true_phi_trace(truth, m) / static_cast<double>(m.dim()));
  }
  std::vector<unsigned char> violated(reps, 0);
  parallel_for(reps, threads, [&](std::size_t r) {
    const auto d = replicate_delta_hat(sampler, grid, models, n, sim::derive_seed(seed, r, n));
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (!(d[k] >= (1.0 - alpha) * delta_sq[k])) {
        violated[r] = 1;
        break;
      }
    }
  });
  const auto count = static_cast<std::size_t>(std::count(violated.begin(), violated.end(), 1));
  return {alpha, n, wilson_interval(count, reps)};
}

TailResult check_quadratic_form_tail(const TruthSpec& truth, const dict::ModelSpec& model,
                                     std::size_t n, const std::vector<double>& x_grid,
                                     std::size_t reps, std::uint64_t seed, double beta,
                                     unsigned threads) {
  if (reps < 1000) throw std::invalid_argument("check_quadratic_form_tail needs reps >= 1000");
  if (n < 2) throw std::invalid_argument("check_quadratic_form_tail needs n >= 2");
  if (!(beta >= 2.0)) throw std::invalid_argument("tail exponent beta must be >= 2");
  for (double x : x_grid) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("x_grid values must be >= 0");
  }
  require_gaussian(truth, "check_quadratic_form_tail");
  const sim::GaussianSampler sampler(truth.sigma);
  const Matrix& pm = model.projector.matrix();
  const auto nd = static_cast<double>(n);

  std::vector<double> zeta_sq(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    auto rng = sim::make_rng(sim::derive_seed(seed, r, n));
    const est::SampleSet samples(model.grid, sampler.draw(n, rng));
    // Matricized S_vec - mu is S - Sigma, and (P (x) P) vec(M) = vec(P M P).
    const Matrix dev = est::empirical_cov(samples).s - truth.sigma;
    zeta_sq[r] = nd * (pm * dev * pm).squaredNorm();
  });

  const auto dim = static_cast<double>(model.dim());
  const double delta_sq = true_phi_trace(truth, model) / dim;
  TailResult out;
  out.beta = beta;
  out.mean_zeta_sq = stats::pairwise_sum(zeta_sq) / static_cast<double>(reps);
  for (double x : x_grid) {
    TailRow row;
    row.x = x;
    row.threshold = delta_sq * dim + 2.0 * delta_sq * std::sqrt(dim * x) + delta_sq * x;
    const auto hits = std::count_if(zeta_sq.begin(), zeta_sq.end(),
                                    [&](double z) { return z >= row.threshold; });
    row.exceedance = static_cast<double>(hits) / static_cast<double>(reps);
    row.standard_error =
        std::sqrt(row.exceedance * (1.0 - row.exceedance) / static_cast<double>(reps));
    out.rows.push_back(row);
  }

  const auto anchor = std::find_if(out.rows.begin(), out.rows.end(),
                                   [](const TailRow& r) { return r.x > 0.0; });
  if (anchor != out.rows.end()) {
    out.fitted_c = anchor->exceedance * std::pow(anchor->x, beta / 2.0);
  }
  out.monotone = true;
  out.decays_as_bound = true;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    auto& row = out.rows[i];
    row.bound_shape = row.x > 0.0 ? std::min(1.0, out.fitted_c * std::pow(row.x, -beta / 2.0)) : 1.0;
    if (row.x > 0.0 && row.exceedance > row.bound_shape + 3.0 * row.standard_error) {
      out.decays_as_bound = false;
    }
    for (std::size_t j = 0; j < out.rows.size(); ++j) {
      if (out.rows[j].x > row.x && out.rows[j].exceedance > row.exceedance) out.monotone = false;
    }
  }
  return out;
}

}  // namespace covsel::oracle
