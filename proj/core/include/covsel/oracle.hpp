#pragma once

// Simulation-only ground truth: the true variance factor delta_m^2, the
// exact risk of each projection estimator, the risk-minimizing model, and
// Monte Carlo diagnostics for the conditions the data-driven penalty needs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "covsel/dictionary.hpp"
#include "covsel/linalg.hpp"

namespace covsel::oracle {

using linalg::Matrix;

struct TruthSpec {
  Matrix sigma;
  /// x ~ N(0, sigma): Phi = (I + K)(sigma (x) sigma), handled in closed form.
  bool gaussian = true;
  /// Explicit Phi = Var(vec(x x^T)) for non-Gaussian truths at small p.
  std::optional<Matrix> phi_dense;

  /// Throws std::invalid_argument unless sigma is square, symmetric and PSD
  /// within -1e-10 ||sigma||, and phi_dense (if any) is p^2 x p^2 symmetric PSD.
  void validate() const;

  /// mu = vec(sigma)
  linalg::Vector mu() const { return linalg::vec(sigma); }
};

/// The two pieces of the Gaussian closed form for Tr((P (x) P) Phi).
struct GaussianTraceTerms {
  /// (Tr(P Sigma))^2, from the Sigma (x) Sigma part.
  double trace_sq = 0.0;
  /// ||P Sigma P||^2, from the K (Sigma (x) Sigma) part.
  double frob_sq = 0.0;
};

GaussianTraceTerms gaussian_trace_terms(const Matrix& projector, const Matrix& sigma);

/// Dense (I + K)(Sigma (x) Sigma). Test oracle; guarded like kron().
Matrix gaussian_phi_dense(const Matrix& sigma, std::size_t guard = linalg::kDefaultSizeGuard);

/// Tr((P_m (x) P_m) Phi) = delta_m^2 D_m. Closed form for Gaussian truths,
/// dense Kronecker trace otherwise. Throws std::invalid_argument if the
/// truth is neither Gaussian nor carries phi_dense.
double true_phi_trace(const TruthSpec& truth, const dict::ModelSpec& model);

struct RiskRecord {
  dict::IndexSet indices;
  std::size_t dim = 0;
  /// ||Sigma - P Sigma P||^2
  double bias_sq = 0.0;
  /// delta_m^2 D_m / n
  double variance_term = 0.0;
  double risk = 0.0;
  double delta_sq = 0.0;
};

/// E||Sigma - Sigma_hat_m||^2 = ||Sigma - P Sigma P||^2 + delta_m^2 D_m / n.
RiskRecord true_risk(const TruthSpec& truth, const dict::ModelSpec& model, std::size_t n);

struct OracleResult {
  std::size_t best = 0;
  std::vector<RiskRecord> table;
  double oracle_risk() const { return table.at(best).risk; }
  /// max_m delta_m^2
  double delta_sup_sq() const;
};

/// Risk-minimizing model, with the same tie-break as selection.
/// Throws DegenerateCollectionError on an empty collection.
OracleResult oracle_model(const TruthSpec& truth, const std::vector<dict::ModelSpec>& models,
                          std::size_t n);

struct CInfResult {
  double value = 0.0;
  /// Set when the infimum is <= 0 within tolerance.
  bool degenerate = false;
  std::string warning;
};

/// inf over the collection of Tr((P_m (x) P_m) Phi).
CInfResult c_inf(const TruthSpec& truth, const std::vector<dict::ModelSpec>& models);

// Monte Carlo diagnostics. Replication r draws from the stream
// derive_seed(seed, r), so results do not depend on the thread count.

struct A1Record {
  dict::IndexSet indices;
  double mean_delta_hat_sq = 0.0;
  double standard_error = 0.0;
  double delta_sq = 0.0;
  /// (n-1)/n delta_m^2
  double target = 0.0;
  double z_score = 0.0;
  /// |z| > 4
  bool flagged = false;
};

/// Monte Carlo mean of delta_hat_m^2 against its expectation (n-1)/n delta_m^2.
/// Requires a Gaussian truth and reps >= 100 (std::invalid_argument otherwise).
std::vector<A1Record> check_A1(const TruthSpec& truth, const std::vector<dict::ModelSpec>& models,
                               std::size_t n, std::size_t reps, std::uint64_t seed,
                               unsigned threads = 1);

struct BinomialEstimate {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double estimate = 0.0;
  /// 95% Wilson score interval.
  double ci_low = 0.0;
  double ci_high = 0.0;
};

BinomialEstimate wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct A2Result {
  double alpha = 0.0;
  std::size_t n = 0;
  /// Replications where some model has delta_hat_m^2 < (1 - alpha) delta_m^2.
  BinomialEstimate omega_complement;
};

/// Estimates P(Omega^c). Requires alpha in (0,1), reps >= 100, Gaussian truth.
A2Result check_A2_omega(const TruthSpec& truth, const std::vector<dict::ModelSpec>& models,
                        std::size_t n, double alpha, std::size_t reps, std::uint64_t seed,
                        unsigned threads = 1);

struct TailRow {
  double x = 0.0;
  /// delta^2 D + 2 delta^2 sqrt(D x) + delta^2 x
  double threshold = 0.0;
  double exceedance = 0.0;
  double standard_error = 0.0;
  /// c x^{-beta/2}, with c fitted at the first positive x in the grid
  double bound_shape = 0.0;
};

struct TailResult {
  std::vector<TailRow> rows;
  double beta = 0.0;
  double fitted_c = 0.0;
  double mean_zeta_sq = 0.0;
  /// Exceedance non-increasing in x.
  bool monotone = false;
  /// Every exceedance <= c x^{-beta/2} + 3 SE.
  bool decays_as_bound = false;
};

/// Empirical tail of zeta^2 = n ||P (S - Sigma) P||^2 against the deviation
/// threshold for each x in x_grid (x >= 0). Requires a Gaussian truth and
/// reps >= 1000.
TailResult check_quadratic_form_tail(const TruthSpec& truth, const dict::ModelSpec& model,
                                     std::size_t n, const std::vector<double>& x_grid,
                                     std::size_t reps, std::uint64_t seed, double beta = 4.0,
                                     unsigned threads = 1);

}  // namespace covsel::oracle
