#include "covsel/simulate.hpp"

#include <map>

#include "covsel/error.hpp"
#include "covsel/estimator.hpp"
#include "covsel/parallel.hpp"
#include "covsel/selection.hpp"
#include "covsel/stats.hpp"

namespace covsel::sim {

void ExperimentConfig::validate() const {
  if (reps < 1) throw InputError("reps must be >= 1");
  for (auto size : sample_sizes()) {
    if (size < 2) throw InputError("every sample size must be >= 2");
  }
  sel::PenaltyConfig{theta}.validate();
  family.validate();
  if (grid.empty()) throw InputError("experiment grid is empty");
  if (diagnostics) {
    if (reps < 100) throw InputError("diagnostics need reps >= 100");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  }
  if (threads < 1) throw InputError("threads must be >= 1");
}

std::vector<std::size_t> ExperimentConfig::sample_sizes() const {
  return n_grid.empty() ? std::vector<std::size_t>{n} : n_grid;
}

namespace {

// Diagnostics use a stream family disjoint from the selection replications.
constexpr std::uint64_t kDiagnosticStream = 0x6469616700000000ULL;

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  report.config = cfg;
  report.sigma = kernel_to_sigma(cfg.kernel, cfg.grid);

  const auto collection = dict::build_collection(cfg.family, cfg.scheme, cfg.grid);
  report.warnings = collection.warnings;
  for (const auto& m : collection.models) {
    report.models.push_back(m.indices);
    report.model_dims.push_back(m.dim());
  }

  const oracle::TruthSpec truth{report.sigma, true, std::nullopt};
  report.c_inf = oracle::c_inf(truth, collection.models);
  if (report.c_inf.degenerate) report.warnings.push_back(report.c_inf.warning);

  const GaussianSampler sampler(report.sigma);
  report.sampler_jitter = sampler.jitter();
  if (sampler.jitter() > 0.0) {
    report.warnings.push_back("covariance factorization needed diagonal jitter " +
                              std::to_string(sampler.jitter()));
  }

  std::map<dict::IndexSet, double> known_delta;
  for (const auto& m : collection.models) {
    known_delta[m.indices] = oracle::true_phi_trace(truth, m) / static_cast<double>(m.dim());
  }
  const sel::PenaltyConfig penalty{cfg.theta};
  const auto known_mode = sel::PenaltyMode::known(known_delta);

  for (const auto n : cfg.sample_sizes()) {
    NStudy study;
    study.n = n;
    study.oracle = oracle::oracle_model(truth, collection.models, n);

    std::vector<ReplicationRecord> records(cfg.reps);
    parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
      auto rng = make_rng(derive_seed(cfg.seed, r, n));
      const est::SampleSet samples(cfg.grid, sampler.draw(n, rng));
      const auto s = est::empirical_cov(samples);
      const auto fits = est::fit_all(samples, s, collection.models);
      const auto chosen = sel::select(fits, penalty, n);
      const auto chosen_known = sel::select(fits, penalty, n, known_mode);

      ReplicationRecord& rec = records[r];
      rec.n = n;
      rec.rep = r;
      rec.selected = chosen.selected;
      rec.selected_dim = fits[chosen.selected].model.dim();
      rec.loss = (report.sigma - fits[chosen.selected].sigma_hat).squaredNorm();
      rec.selected_known = chosen_known.selected;
      rec.loss_known = (report.sigma - fits[chosen_known.selected].sigma_hat).squaredNorm();
    });

    std::vector<double> losses;
    std::vector<double> losses_known;
    study.selection_counts.assign(collection.models.size(), 0);
    study.selection_counts_known.assign(collection.models.size(), 0);
    for (const auto& rec : records) {
      losses.push_back(rec.loss);
      losses_known.push_back(rec.loss_known);
      ++study.selection_counts[rec.selected];
      ++study.selection_counts_known[rec.selected_known];
    }
    const auto risk = stats::mean_and_se(losses);
    const auto risk_known = stats::mean_and_se(losses_known);
    study.mean_risk = risk.mean;
    study.mean_risk_se = risk.se;
    study.mean_risk_known = risk_known.mean;
    study.mean_risk_known_se = risk_known.se;
    const double oracle_risk = study.oracle.oracle_risk();
    if (oracle_risk > 0.0) {
      study.risk_ratio = risk.mean / oracle_risk;
      study.risk_ratio_se = risk.se / oracle_risk;
    }

    if (cfg.diagnostics) {
      const auto diag_seed = derive_seed(cfg.seed, kDiagnosticStream);
      study.a1 = oracle::check_A1(truth, collection.models, n, cfg.reps, diag_seed, cfg.threads);
      study.a2 = oracle::check_A2_omega(truth, collection.models, n, cfg.alpha, cfg.reps,
                                        derive_seed(diag_seed, 1), cfg.threads);
    }
    if (cfg.keep_replications) study.replications = std::move(records);
    report.studies.push_back(std::move(study));
  }
  return report;
}

}  // namespace covsel::sim
