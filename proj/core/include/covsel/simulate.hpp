#pragma once

// Monte Carlo experiment driver: sample, fit every model, select with the
// data-driven penalty (and the known-Phi penalty), and compare against the
// oracle risk.

#include <cstdint>
#include <optional>
#include <vector>

#include "covsel/dictionary.hpp"
#include "covsel/oracle.hpp"
#include "covsel/sampling.hpp"

namespace covsel::sim {

struct ExperimentConfig {
  KernelSpec kernel;
  Grid grid;
  std::size_t n = 100;
  /// When non-empty, replaces n: one study per entry.
  std::vector<std::size_t> n_grid;
  double theta = 1.0;
  dict::BasisFamily family;
  dict::CollectionScheme scheme;
  std::size_t reps = 100;
  std::uint64_t seed = 0;
  /// Run the A1 / A2 diagnostics per n (each needs reps >= 100).
  bool diagnostics = false;
  double alpha = 0.5;
  unsigned threads = 1;
  /// Keep one record per replication in the report.
  bool keep_replications = false;

  /// Throws InputError for an inconsistent configuration.
  void validate() const;
  std::vector<std::size_t> sample_sizes() const;
};

struct ReplicationRecord {
  std::size_t n = 0;
  std::size_t rep = 0;
  /// Position in the collection of the data-driven choice.
  std::size_t selected = 0;
  std::size_t selected_dim = 0;
  /// ||Sigma - Sigma_tilde||^2
  double loss = 0.0;
  std::size_t selected_known = 0;
  double loss_known = 0.0;
};

struct NStudy {
  std::size_t n = 0;
  oracle::OracleResult oracle;
  /// Mean ||Sigma - Sigma_tilde||^2 (data-driven penalty) and its SE.
  double mean_risk = 0.0;
  double mean_risk_se = 0.0;
  /// Same with the known-Phi penalty.
  double mean_risk_known = 0.0;
  double mean_risk_known_se = 0.0;
  /// mean_risk / oracle risk; the SE is mean_risk_se / oracle risk.
  double risk_ratio = 0.0;
  double risk_ratio_se = 0.0;
  /// Selection counts per model, in collection order.
  std::vector<std::size_t> selection_counts;
  std::vector<std::size_t> selection_counts_known;
  std::optional<std::vector<oracle::A1Record>> a1;
  std::optional<oracle::A2Result> a2;
  std::vector<ReplicationRecord> replications;
};

struct ExperimentReport {
  ExperimentConfig config;
  Matrix sigma;
  double sampler_jitter = 0.0;
  std::vector<dict::IndexSet> models;
  std::vector<std::size_t> model_dims;
  oracle::CInfResult c_inf;
  std::vector<NStudy> studies;
  std::vector<std::string> warnings;
};

/// Runs every study. Replication r at sample size n uses the stream
/// derive_seed(seed, r, n); per-replication results are reduced in
/// replication order, so the report is identical for any thread count.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

}  // namespace covsel::sim
