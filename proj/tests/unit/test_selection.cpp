#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "covsel/error.hpp"
#include "covsel/random_instances.hpp"
#include "covsel/selection.hpp"

using namespace covsel;
using linalg::Matrix;

namespace {

// A fit with hand-set loss and trace term on a rank-`r` model of p = 4.
est::ModelFit fake_fit(std::size_t r, dict::IndexSet indices, double loss, double trace_term) {
  Matrix g = Matrix::Zero(4, static_cast<Eigen::Index>(r));
  for (std::size_t k = 0; k < r; ++k) g(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
  est::ModelFit fit;
  fit.model = *dict::model_from_design(g, {0.0, 1.0, 2.0, 3.0}, std::move(indices));
  fit.sigma_hat = Matrix::Zero(4, 4);
  fit.loss = loss;
  fit.trace_term = trace_term;
  fit.delta_hat_sq = trace_term / static_cast<double>(fit.model.dim());
  return fit;
}

std::vector<est::ModelFit> random_fits(sim::Rng& rng, std::size_t n) {
  dict::BasisFamily f{dict::BasisKind::fourier, 0.0, 1.0, 7};
  dict::CollectionScheme scheme;
  scheme.max_dim = 8;
  const auto grid = sim::uniform_grid(8);
  const auto c = dict::build_collection(f, scheme, grid);
  const est::SampleSet samples(grid, sim::random_normal_matrix(rng, static_cast<Eigen::Index>(n), 8));
  return est::fit_all(samples, est::empirical_cov(samples), c.models);
}

}  // namespace

TEST_CASE("PenaltyConfig") {
  CHECK_NOTHROW(sel::PenaltyConfig{1.0}.validate());
  CHECK_THROWS_AS(sel::PenaltyConfig{0.0}.validate(), InputError);
  CHECK_THROWS_AS(sel::PenaltyConfig{-0.5}.validate(), InputError);
}

TEST_CASE("penalty_data_driven") {
  const auto fit = fake_fit(2, {0, 1}, 0.0, 0.5);
  CHECK(sel::penalty_data_driven(fit, {1.0}, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sel::penalty_data_driven(fit, {1.0}, 4) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(sel::penalty_data_driven(fake_fit(2, {0, 1}, 0.0, 0.0), {7.0}, 3) == 0.0);
  // (1 + theta) delta_hat^2 D / n
  CHECK(sel::penalty_data_driven(fit, {3.0}, 10) ==
        doctest::Approx(4.0 * fit.delta_hat_sq * static_cast<double>(fit.model.dim()) / 10.0));
}

TEST_CASE("penalty_known") {
  const auto full = fake_fit(2, {0, 1}, 0.0, 0.0).model;
  REQUIRE(full.dim() == 4);
  CHECK(sel::penalty_known(full, 1.5, {1.0}, 100) == doctest::Approx(0.12).epsilon(1e-15));
  CHECK(sel::penalty_known(full, 0.0, {1.0}, 100) == 0.0);
  CHECK(sel::penalty_known(full, 1.5, {3.0}, 100) ==
        doctest::Approx(2.0 * sel::penalty_known(full, 1.5, {1.0}, 100)));
  CHECK_THROWS_AS(sel::penalty_known(full, -1e-3, {1.0}, 100), std::invalid_argument);
}

TEST_CASE("argmin_with_tiebreak") {
  std::vector<std::size_t> ties;
  // Equal values: smaller dimension wins.
  CHECK(sel::argmin_with_tiebreak({1.0, 1.0}, {9, 4}, {{0, 1, 2}, {0, 1}}, &ties) == 1);
  CHECK(ties.size() == 2);
  // Equal values and dimensions: lexicographic order on index sets.
  CHECK(sel::argmin_with_tiebreak({2.0, 2.0, 2.0}, {4, 4, 4}, {{1, 3}, {0, 5}, {1, 2}}) == 1);
  // Differences beyond the tolerance are not ties.
  CHECK(sel::argmin_with_tiebreak({1.0 + 1e-9, 1.0}, {1, 4}, {{0}, {0, 1}}, &ties) == 1);
  CHECK(ties == std::vector<std::size_t>{1});
  // Within the tolerance they are.
  CHECK(sel::argmin_with_tiebreak({1.0 + 1e-14, 1.0}, {1, 4}, {{0}, {0, 1}}) == 0);
}

TEST_CASE("select") {
  SUBCASE("criterion rows") {
    auto rng = sim::make_rng(211);
    const auto fits = random_fits(rng, 30);
    const auto report = sel::select(fits, {1.0}, 30);
    REQUIRE(report.rows.size() == fits.size());
    double sup = 0.0;
    for (std::size_t k = 0; k < fits.size(); ++k) {
      const auto& row = report.rows[k];
      CHECK(row.criterion == row.loss + row.penalty);
      CHECK(row.loss == fits[k].loss);
      CHECK(row.penalty == doctest::Approx(sel::penalty_data_driven(fits[k], {1.0}, 30)).epsilon(1e-15));
      CHECK(report.rows[report.selected].criterion <= row.criterion);
      sup = std::max(sup, fits[k].delta_hat_sq);
    }
    CHECK(report.delta_sup_sq == sup);
    CHECK(report.selected_model.indices == fits[report.selected].model.indices);
    CHECK(report.theta == 1.0);
  }
  SUBCASE("ties") {
    const std::vector<est::ModelFit> fits{fake_fit(2, {0, 1}, 1.0, 0.0), fake_fit(1, {0}, 1.0, 0.0)};
    const auto report = sel::select(fits, {1.0}, 10);
    CHECK(report.selected == 1);
    CHECK(report.ties.size() == 2);
    const std::vector<est::ModelFit> same_dim{fake_fit(1, {3}, 1.0, 0.0), fake_fit(1, {2}, 1.0, 0.0)};
    CHECK(sel::select(same_dim, {1.0}, 10).selected_model.indices == dict::IndexSet{2});
  }
  SUBCASE("huge theta picks the smallest penalty") {
    auto rng = sim::make_rng(223);
    const auto fits = random_fits(rng, 25);
    const auto report = sel::select(fits, {1e6}, 25);
    std::size_t smallest = 0;
    for (std::size_t k = 1; k < fits.size(); ++k)
      if (report.rows[k].penalty < report.rows[smallest].penalty) smallest = k;
    CHECK(report.selected == smallest);
  }
  SUBCASE("single model") {
    const std::vector<est::ModelFit> fits{fake_fit(3, {0, 1, 2}, 5.0, 2.0)};
    const auto report = sel::select(fits, {1.0}, 10);
    CHECK(report.selected == 0);
    CHECK(report.rows.size() == 1);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(sel::select({}, {1.0}, 10), InputError);
    const std::vector<est::ModelFit> fits{fake_fit(1, {0}, 1.0, 0.5)};
    CHECK_THROWS_AS(sel::select(fits, {1.0}, 1), InputError);
    CHECK_THROWS_AS(sel::select(fits, {0.0}, 10), InputError);
    CHECK_THROWS_AS(sel::select(fits, {1.0}, 10, sel::PenaltyMode::known({})), std::invalid_argument);
    CHECK_THROWS_AS(sel::select(fits, {1.0}, 10, sel::PenaltyMode::known({{{0}, -1.0}})),
                    std::invalid_argument);
  }
}

TEST_CASE("known penalty mode uses the supplied delta^2") {
  // The data-driven penalty rules out the larger model; the known one does not.
  const std::vector<est::ModelFit> fits{fake_fit(1, {0}, 1.0, 0.0), fake_fit(2, {0, 1}, 0.9, 100.0)};
  CHECK(sel::select(fits, {1.0}, 10).selected == 0);
  const auto mode = sel::PenaltyMode::known({{{0}, 10.0}, {{0, 1}, 0.001}});
  const auto report = sel::select(fits, {1.0}, 10, mode);
  CHECK(report.penalty_kind == sel::PenaltyKind::known);
  CHECK(report.selected == 1);
  CHECK(report.rows[1].penalty == doctest::Approx(sel::penalty_known(fits[1].model, 0.001, {1.0}, 10)));
}

TEST_CASE("penalty-free mode selects the minimal loss and penalties change decisions") {
  auto rng = sim::make_rng(227);
  bool changed = false;
  for (int trial = 0; trial < 20; ++trial) {
    const auto fits = random_fits(rng, 12);
    const auto none = sel::select(fits, {1.0}, 12, sel::PenaltyMode::none());
    for (const auto& row : none.rows) {
      CHECK(row.penalty == 0.0);
      CHECK(none.rows[none.selected].loss <= row.loss);
    }
    // Nested least squares: the largest model has the smallest loss.
    CHECK(none.selected == fits.size() - 1);
    if (sel::select(fits, {1.0}, 12).selected != none.selected) changed = true;
  }
  CHECK(changed);
}

TEST_CASE("selection is invariant to the order of the collection") {
  auto rng = sim::make_rng(229);
  for (int trial = 0; trial < 20; ++trial) {
    auto fits = random_fits(rng, 15);
    const auto base = sel::select(fits, {1.0}, 15);
    std::shuffle(fits.begin(), fits.end(), rng);
    CHECK(sel::select(fits, {1.0}, 15).selected_model.indices == base.selected_model.indices);
  }
  // Exact ties resolve the same way in any order.
  std::vector<est::ModelFit> tied{fake_fit(2, {1, 2}, 1.0, 0.0), fake_fit(2, {0, 3}, 1.0, 0.0),
                                  fake_fit(2, {0, 2}, 1.0, 0.0)};
  for (int k = 0; k < 6; ++k) {
    CHECK(sel::select(tied, {1.0}, 10).selected_model.indices == dict::IndexSet{0, 2});
    std::next_permutation(tied.begin(), tied.end(), [](const auto& a, const auto& b) {
      return a.model.indices < b.model.indices;
    });
  }
}

TEST_CASE("selected dimension is non-increasing in theta") {
  auto rng = sim::make_rng(233);
  for (int trial = 0; trial < 20; ++trial) {
    const auto fits = random_fits(rng, 10 + static_cast<std::size_t>(trial));
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (double theta : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0, 1e4}) {
      const auto report = sel::select(fits, {theta}, 10 + static_cast<std::size_t>(trial));
      CHECK(report.selected_model.dim() <= prev);
      prev = report.selected_model.dim();
    }
  }
}
