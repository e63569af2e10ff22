#pragma once

// Penalties, the penalized criterion and argmin selection.

#include <cstddef>
#include <map>
#include <vector>

#include "covsel/dictionary.hpp"
#include "covsel/estimator.hpp"

namespace covsel::sel {

struct PenaltyConfig {
  double theta = 1.0;

  /// Throws InputError unless theta > 0.
  void validate() const;
};

/// (1 + theta) delta_hat_m^2 D_m / n.
double penalty_data_driven(const est::ModelFit& fit, const PenaltyConfig& cfg, std::size_t n);

/// (1 + theta) delta_m^2 D_m / n with delta_m^2 known (simulation only).
/// Throws std::invalid_argument if delta_sq < 0.
double penalty_known(const dict::ModelSpec& model, double delta_sq, const PenaltyConfig& cfg,
                     std::size_t n);

enum class PenaltyKind {
  data_driven,
  known,
  /// Diagnostic only: criterion = loss.
  none,
};

struct PenaltyMode {
  PenaltyKind kind = PenaltyKind::data_driven;
  /// Required for PenaltyKind::known: delta_m^2 per index set.
  std::map<dict::IndexSet, double> known_delta_sq;

  static PenaltyMode data_driven() { return {}; }
  static PenaltyMode known(std::map<dict::IndexSet, double> delta_sq) {
    return {PenaltyKind::known, std::move(delta_sq)};
  }
  static PenaltyMode none() { return {PenaltyKind::none, {}}; }
};

struct CriterionRow {
  dict::IndexSet indices;
  std::size_t dim = 0;
  double loss = 0.0;
  double delta_hat_sq = 0.0;
  double penalty = 0.0;
  double criterion = 0.0;
};

struct SelectionReport {
  /// Position of the selected model in the input fits.
  std::size_t selected = 0;
  dict::ModelSpec selected_model;
  /// One row per input fit, in input order.
  std::vector<CriterionRow> rows;
  /// max_m delta_hat_m^2
  double delta_sup_sq = 0.0;
  double theta = 0.0;
  PenaltyKind penalty_kind = PenaltyKind::data_driven;
  /// Index sets whose criterion ties the minimum (including the selected one).
  std::vector<dict::IndexSet> ties;
};

/// Values within this relative distance of the minimum count as tied.
inline constexpr double kTieRelTol = 1e-12;

/// Shared argmin rule: smallest value, ties (within kTieRelTol) broken by
/// smallest dimension, then lexicographically smallest index set. The
/// result does not depend on the order of the inputs.
/// Returns the winning position; `ties` (if non-null) receives all tied positions.
std::size_t argmin_with_tiebreak(const std::vector<double>& values,
                                 const std::vector<std::size_t>& dims,
                                 const std::vector<dict::IndexSet>& indices,
                                 std::vector<std::size_t>* ties = nullptr);

/// Minimizes loss + penalty over the fits. Throws InputError on empty input
/// and std::invalid_argument if a known delta^2 is missing or negative.
SelectionReport select(const std::vector<est::ModelFit>& fits, const PenaltyConfig& cfg,
                       std::size_t n, const PenaltyMode& mode = PenaltyMode::data_driven());

}  // namespace covsel::sel
