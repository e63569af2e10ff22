#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "covsel/error.hpp"
#include "covsel/estimator.hpp"
#include "covsel/oracle.hpp"
#include "covsel/random_instances.hpp"
#include "covsel/stats.hpp"
#include "support/oracles.hpp"

using namespace covsel;
using linalg::Matrix;
using testing::max_abs;

namespace {

est::SampleSet toy_samples() {
  Matrix x(2, 2);
  x << 1, 0, 0, 1;
  return est::SampleSet({0.0, 1.0}, x);
}

dict::ModelSpec model_of(const Matrix& design, const dict::Grid& grid) {
  return *dict::model_from_design(design, grid);
}

}  // namespace

TEST_CASE("SampleSet invariants") {
  CHECK_THROWS_AS(est::SampleSet({0.0, 1.0}, Matrix::Zero(1, 2)), InputError);
  CHECK_THROWS_AS(est::SampleSet({0.0, 0.0}, Matrix::Zero(2, 2)), InputError);
  CHECK_THROWS_AS(est::SampleSet({1.0, 0.0}, Matrix::Zero(2, 2)), InputError);
  CHECK_THROWS_AS(est::SampleSet({0.0, 1.0}, Matrix::Zero(3, 3)), InputError);
  CHECK_THROWS_AS(est::SampleSet({}, Matrix::Zero(2, 0)), InputError);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(est::SampleSet({0.0, 1.0}, bad), InputError);
  CHECK_NOTHROW(est::SampleSet({0.5}, Matrix::Ones(2, 1)));
}

TEST_CASE("empirical_cov") {
  const auto s = est::empirical_cov(toy_samples());
  CHECK(s.s == 0.5 * Matrix::Identity(2, 2));

  Matrix rep(2, 2);
  rep << 1, 2, 1, 2;
  Matrix want(2, 2);
  want << 1, 2, 2, 4;
  CHECK(est::empirical_cov(est::SampleSet({0.0, 1.0}, rep)).s == want);

  auto rng = sim::make_rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const auto samples = sim::random_samples(rng, 3 + trial, 1 + trial % 6);
    const Matrix& x = samples.data();
    const Matrix direct = x.transpose() * x / static_cast<double>(samples.n());
    const auto s2 = est::empirical_cov(samples);
    CHECK(max_abs(s2.s - direct) < 1e-12 * std::max(1.0, max_abs(direct)));
    CHECK(s2.s == s2.s.transpose());
  }
}

TEST_CASE("no mean subtraction unless centered() is requested") {
  Matrix x(2, 1);
  x << 3, 5;
  const est::SampleSet samples({0.0}, x);
  CHECK(est::empirical_cov(samples).s(0, 0) == doctest::Approx(17.0));
  CHECK(est::empirical_cov(samples.centered()).s(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("phi_hat_trace worked example") {
  const auto samples = toy_samples();
  const auto s = est::empirical_cov(samples);
  const auto full = model_of(Matrix::Identity(2, 2), samples.grid());
  CHECK(est::phi_hat_trace(samples, s, full) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(testing::projected_trace_bruteforce(Matrix::Identity(2, 2),
                                            testing::phi_hat_bruteforce(samples.data())) ==
        doctest::Approx(0.5));
}

TEST_CASE("identical replications give a zero trace") {
  auto rng = sim::make_rng(103);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix row = sim::random_normal_matrix(rng, 1, 3);
    const est::SampleSet samples({0.0, 1.0, 2.0}, row.replicate(4, 1));
    const auto s = est::empirical_cov(samples);
    const auto m = sim::random_model(rng, samples.grid());
    const double scale = std::pow(row.squaredNorm(), 2);
    CHECK(std::abs(est::phi_hat_trace(samples, s, m)) < 1e-12 * std::max(1.0, scale));
    CHECK(max_abs(est::phi_hat_dense(samples)) < 1e-12 * std::max(1.0, scale));
  }
}

TEST_CASE("Kronecker-free trace equals the dense trace") {
  auto rng = sim::make_rng(107);
  for (std::size_t p : {2, 3, 4}) {
    for (std::size_t n : {5, 10}) {
      for (int seed = 0; seed < 100; ++seed) {
        const auto samples = sim::random_samples(rng, n, p);
        const auto s = est::empirical_cov(samples);
        const auto m = sim::random_model(rng, samples.grid());
        const Matrix phi = testing::phi_hat_bruteforce(samples.data());
        const double dense = testing::projected_trace_bruteforce(m.projector.matrix(), phi);
        const double fast = est::phi_hat_trace(samples, s, m);
        CHECK(testing::rel_diff(fast, dense, 1e-12 * phi.trace()) < 1e-8);
        // Projected trace of a PSD matrix stays in [0, Tr(Phi_hat)].
        CHECK(fast >= -1e-9);
        CHECK(fast <= phi.trace() + 1e-9);
      }
    }
  }
}

TEST_CASE("phi_hat_dense") {
  auto rng = sim::make_rng(109);
  for (int trial = 0; trial < 40; ++trial) {
    const auto samples = sim::random_samples(rng, 4 + trial % 7, 1 + trial % 4);
    const Matrix phi = est::phi_hat_dense(samples);
    CHECK(max_abs(phi - testing::phi_hat_bruteforce(samples.data())) < 1e-12 * std::max(1.0, max_abs(phi)));
    CHECK(linalg::min_eigenvalue(phi) >= -1e-10 * std::max(1.0, phi.norm()));
    // Tr(Phi_hat) = (1/n) sum ||x_i x_i^T||^2 - ||S||^2
    const auto s = est::empirical_cov(samples);
    double fourth = 0.0;
    for (Eigen::Index i = 0; i < samples.data().rows(); ++i)
      fourth += std::pow(samples.data().row(i).squaredNorm(), 2);
    fourth /= static_cast<double>(samples.n());
    CHECK(phi.trace() == doctest::Approx(fourth - s.s.squaredNorm()).epsilon(1e-10));
  }
  CHECK_THROWS_AS(est::phi_hat_dense(sim::random_samples(rng, 3, 40)), SizeGuardError);
}

TEST_CASE("fit_model") {
  SUBCASE("full model reproduces S") {
    auto rng = sim::make_rng(113);
    const auto samples = sim::random_samples(rng, 12, 4);
    const auto s = est::empirical_cov(samples);
    const auto fit = est::fit_model(samples, s, model_of(Matrix::Identity(4, 4), samples.grid()));
    CHECK(max_abs(fit.sigma_hat - s.s) < 1e-12);
    CHECK(fit.delta_hat_sq == doctest::Approx(fit.trace_term / 16.0));
  }
  SUBCASE("rank-1 projector on p = 2") {
    const Matrix pi = Matrix::Constant(2, 2, 0.5);
    const auto m = model_of(Matrix::Ones(2, 1), {0.0, 1.0});
    // S = I: Sigma_hat = P I P = P
    Matrix x(2, 2);
    x << std::sqrt(2.0), 0, 0, std::sqrt(2.0);
    const est::SampleSet unit({0.0, 1.0}, x);
    const auto fit_unit = est::fit_model(unit, est::empirical_cov(unit), m);
    CHECK(max_abs(fit_unit.sigma_hat - pi * Matrix::Identity(2, 2) * pi) < 1e-15);
    CHECK(max_abs(fit_unit.sigma_hat - pi) < 1e-15);
    // Toy data, S = I/2: Sigma_hat = P/2
    const auto toy = toy_samples();
    const auto fit_toy = est::fit_model(toy, est::empirical_cov(toy), m);
    CHECK(max_abs(fit_toy.sigma_hat - 0.5 * pi) < 1e-15);
    CHECK(fit_toy.model.dim() == 1);
  }
  SUBCASE("loss expansion matches direct summation") {
    auto rng = sim::make_rng(127);
    for (int trial = 0; trial < 50; ++trial) {
      const auto samples = sim::random_samples(rng, 3 + trial % 9, 1 + trial % 5);
      const auto s = est::empirical_cov(samples);
      const auto m = sim::random_model(rng, samples.grid());
      const auto fit = est::fit_model(samples, s, m);
      double direct = 0.0;
      for (Eigen::Index i = 0; i < samples.data().rows(); ++i) {
        const linalg::Vector xi = samples.data().row(i).transpose();
        direct += (xi * xi.transpose() - fit.sigma_hat).squaredNorm();
      }
      direct /= static_cast<double>(samples.n());
      CHECK(fit.loss == doctest::Approx(direct).epsilon(1e-9));
      const Matrix& pm = m.projector.matrix();
      CHECK(max_abs(pm * fit.sigma_hat * pm - fit.sigma_hat) < 1e-9);
      CHECK(fit.sigma_hat == fit.sigma_hat.transpose());
      CHECK(fit.trace_term >= -1e-9);
    }
  }
  SUBCASE("grid mismatch") {
    const auto toy = toy_samples();
    const auto other = model_of(Matrix::Identity(2, 2), {0.0, 2.0});
    CHECK_THROWS_AS(est::fit_model(toy, est::empirical_cov(toy), other), InputError);
    CHECK_THROWS_AS(est::phi_hat_trace(toy, est::empirical_cov(toy), other), InputError);
  }
}

TEST_CASE("loss is monotone along nested models") {
  auto rng = sim::make_rng(131);
  dict::BasisFamily f{dict::BasisKind::polynomial, 0.0, 1.0, 5};
  dict::CollectionScheme scheme;
  scheme.max_dim = 6;
  const auto grid = sim::uniform_grid(8);
  const auto c = dict::build_collection(f, scheme, grid);
  for (int trial = 0; trial < 20; ++trial) {
    const est::SampleSet samples(grid, sim::random_normal_matrix(rng, 15, 8));
    const auto s = est::empirical_cov(samples);
    const auto fits = est::fit_all(samples, s, c.models);
    for (std::size_t k = 1; k < fits.size(); ++k) CHECK(fits[k].loss <= fits[k - 1].loss + 1e-9);
  }
}

TEST_CASE("fit_model is invariant to replication order") {
  auto rng = sim::make_rng(137);
  const auto samples = sim::random_samples(rng, 9, 4);
  const auto m = sim::random_model(rng, samples.grid());
  std::vector<Eigen::Index> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix shuffled(9, 4);
  for (Eigen::Index i = 0; i < 9; ++i) shuffled.row(i) = samples.data().row(perm[static_cast<std::size_t>(i)]);
  const est::SampleSet other(samples.grid(), shuffled);
  const auto a = est::fit_model(samples, est::empirical_cov(samples), m);
  const auto b = est::fit_model(other, est::empirical_cov(other), m);
  CHECK(max_abs(a.sigma_hat - b.sigma_hat) < 1e-13);
  CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
  CHECK(a.trace_term == doctest::Approx(b.trace_term).epsilon(1e-12));
}

TEST_CASE("fit_all threads give identical results") {
  auto rng = sim::make_rng(139);
  dict::BasisFamily f{dict::BasisKind::fourier, 0.0, 1.0, 9};
  dict::CollectionScheme scheme;
  scheme.max_dim = 10;
  const auto grid = sim::uniform_grid(10);
  const auto c = dict::build_collection(f, scheme, grid);
  const est::SampleSet samples(grid, sim::random_normal_matrix(rng, 20, 10));
  const auto s = est::empirical_cov(samples);
  const auto serial = est::fit_all(samples, s, c.models, 1);
  const auto parallel = est::fit_all(samples, s, c.models, 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t k = 0; k < serial.size(); ++k) {
    CHECK(serial[k].loss == parallel[k].loss);
    CHECK(serial[k].trace_term == parallel[k].trace_term);
    CHECK(serial[k].sigma_hat == parallel[k].sigma_hat);
  }
}

TEST_CASE("delta_hat^2 has mean (n-1)/n delta^2 under a Gaussian truth") {
  const auto grid = sim::uniform_grid(3);
  Matrix sigma(3, 3);
  sigma << 2.0, 0.5, 0.1, 0.5, 1.0, 0.3, 0.1, 0.3, 1.5;
  const oracle::TruthSpec truth{sigma, true, std::nullopt};
  const auto m = model_of((Matrix(3, 2) << 1, 0, 1, 1, 1, 2).finished(), grid);
  const std::size_t n = 8;
  const std::size_t reps = 20000;
  std::vector<double> draws(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto samples = sim::sample_paths(sigma, grid, n, sim::derive_seed(2024, r));
    draws[r] = est::fit_model(samples, est::empirical_cov(samples), m).delta_hat_sq;
  }
  const auto ms = stats::mean_and_se(draws);
  const double target = (n - 1.0) / n * oracle::true_phi_trace(truth, m) / static_cast<double>(m.dim());
  CHECK(std::abs(ms.mean - target) <= 3.0 * ms.se);
}
