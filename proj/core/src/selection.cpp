#include "covsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "covsel/error.hpp"

namespace covsel::sel {

void PenaltyConfig::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw InputError("theta must be a finite value > 0, got " + std::to_string(theta));
  }
}

double penalty_data_driven(const est::ModelFit& fit, const PenaltyConfig& cfg, std::size_t n) {
  return (1.0 + cfg.theta) * fit.trace_term / static_cast<double>(n);
}

double penalty_known(const dict::ModelSpec& model, double delta_sq, const PenaltyConfig& cfg,
                     std::size_t n) {
  if (delta_sq < 0.0) throw std::invalid_argument("known delta^2 must be >= 0");
  return (1.0 + cfg.theta) * delta_sq * static_cast<double>(model.dim()) /
         static_cast<double>(n);
}

std::size_t argmin_with_tiebreak(const std::vector<double>& values,
                                 const std::vector<std::size_t>& dims,
                                 const std::vector<dict::IndexSet>& indices,
                                 std::vector<std::size_t>* ties) {
  if (values.empty()) throw InputError("cannot select from an empty set of models");
  const double best = *std::min_element(values.begin(), values.end());
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  const double slack = kTieRelTol * scale;

  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= best + slack) tied.push_back(i);
  }
  const auto winner = *std::min_element(tied.begin(), tied.end(), [&](auto a, auto b) {
    if (dims[a] != dims[b]) return dims[a] < dims[b];
    return indices[a] < indices[b];
  });
  if (ties) *ties = std::move(tied);
  return winner;
}

SelectionReport select(const std::vector<est::ModelFit>& fits, const PenaltyConfig& cfg,
                       std::size_t n, const PenaltyMode& mode) {
  if (fits.empty()) throw InputError("cannot select from an empty set of fits");
  cfg.validate();
  if (n < 2) throw InputError("selection needs n >= 2");

  SelectionReport report;
  report.theta = cfg.theta;
  report.penalty_kind = mode.kind;
  report.rows.reserve(fits.size());

  std::vector<double> criteria;
  std::vector<std::size_t> dims;
  std::vector<dict::IndexSet> indices;
  for (const auto& fit : fits) {
    CriterionRow row;
    row.indices = fit.model.indices;
    row.dim = fit.model.dim();
    row.loss = fit.loss;
    row.delta_hat_sq = fit.delta_hat_sq;
    switch (mode.kind) {
      case PenaltyKind::data_driven:
        row.penalty = penalty_data_driven(fit, cfg, n);
        break;
      case PenaltyKind::known: {
        const auto it = mode.known_delta_sq.find(fit.model.indices);
        if (it == mode.known_delta_sq.end()) {
          throw std::invalid_argument("no known delta^2 for model " +
                                      dict::format_indices(fit.model.indices));
        }
        row.penalty = penalty_known(fit.model, it->second, cfg, n);
        break;
      }
      case PenaltyKind::none:
        row.penalty = 0.0;
        break;
    }
    row.criterion = row.loss + row.penalty;
    report.delta_sup_sq = report.rows.empty() ? row.delta_hat_sq
                                              : std::max(report.delta_sup_sq, row.delta_hat_sq);
    criteria.push_back(row.criterion);
    dims.push_back(row.dim);
    indices.push_back(row.indices);
    report.rows.push_back(std::move(row));
  }

  std::vector<std::size_t> tied;
  report.selected = argmin_with_tiebreak(criteria, dims, indices, &tied);
  report.selected_model = fits[report.selected].model;
  for (auto i : tied) report.ties.push_back(indices[i]);
  std::sort(report.ties.begin(), report.ties.end());
  return report;
}

}  // namespace covsel::sel
