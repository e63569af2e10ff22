#include "covsel/validate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "covsel/estimator.hpp"
#include "covsel/linalg.hpp"
#include "covsel/oracle.hpp"
#include "covsel/random_instances.hpp"
#include "covsel/sampling.hpp"

namespace covsel::validate {

namespace {

using linalg::Matrix;
using linalg::Vector;

constexpr std::size_t kPs[] = {2, 3, 4};
constexpr std::size_t kNs[] = {5, 10};

double rel_err(double got, double want, double floor) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

struct Check {
  CheckResult result;

  Check(std::string name, double tol) {
    result.name = std::move(name);
    result.tolerance = tol;
  }
  void observe(double err) {
    ++result.cases;
    if (!(err <= result.max_error)) result.max_error = std::isnan(err) ? INFINITY : err;
  }
  CheckResult finish() {
    result.passed = result.cases > 0 && result.max_error <= result.tolerance;
    std::ostringstream os;
    os << result.cases << " cases, max error " << result.max_error << " (tol "
       << result.tolerance << ")";
    result.detail = os.str();
    return std::move(result);
  }
};

dict::Grid index_grid(std::size_t p) {
  dict::Grid g(p);
  for (std::size_t j = 0; j < p; ++j) g[j] = static_cast<double>(j);
  return g;
}

CheckResult check_pinv(sim::Rng& rng, std::size_t instances) {
  Check c("pinv_reflexive_identities", 1e-9);
  for (std::size_t i = 0; i < instances; ++i) {
    const Matrix a = sim::random_normal_matrix(rng, 5, 2) * sim::random_normal_matrix(rng, 2, 3);
    const Matrix ai = linalg::pinv(a);
    const double scale = std::max({1.0, linalg::max_abs(a), linalg::max_abs(ai)});
    c.observe(linalg::max_abs(ai * a * ai - ai) / scale);
    c.observe(linalg::max_abs(a * ai * a - a) / scale);
  }
  return c.finish();
}

CheckResult check_projectors(sim::Rng& rng, std::size_t instances) {
  Check c("projector_symmetric_idempotent", 1e-10);
  for (auto p : kPs) {
    for (std::size_t i = 0; i < instances; ++i) {
      const auto m = sim::random_model(rng, index_grid(p));
      const auto& pr = m.projector;
      c.observe(pr.symmetry_defect() <= 1e-12 ? 0.0 : INFINITY);
      c.observe(pr.idempotence_defect());
      c.observe(pr.rank() == linalg::numerical_rank(m.design) ? 0.0 : INFINITY);
      c.observe(std::abs(pr.matrix().trace() - static_cast<double>(pr.rank())));
    }
  }
  return c.finish();
}

CheckResult check_projector_formula(sim::Rng& rng, std::size_t instances) {
  Check c("projector_matches_gram_pinv_formula", 1e-10);
  for (auto p : kPs) {
    for (std::size_t i = 0; i < instances; ++i) {
      const auto m = sim::random_model(rng, index_grid(p));
      const Matrix& g = m.design;
      const Matrix direct = g * linalg::pinv(g.transpose() * g) * g.transpose();
      c.observe(linalg::max_abs(direct - m.projector.matrix()));
    }
  }
  return c.finish();
}

CheckResult check_kron(sim::Rng& rng, std::size_t instances) {
  Check c("kron_vec_and_trace_identities", 1e-12);
  for (std::size_t i = 0; i < instances; ++i) {
    const Matrix a = sim::random_normal_matrix(rng, 2, 2);
    const Matrix b = sim::random_normal_matrix(rng, 2, 2);
    const Matrix x = sim::random_normal_matrix(rng, 2, 2);
    const Vector lhs = linalg::kron(a, b) * linalg::vec(x);
    const Vector rhs = linalg::vec(b * x * a.transpose());
    c.observe((lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, rhs.cwiseAbs().maxCoeff()));

    const Matrix a3 = sim::random_normal_matrix(rng, 3, 3);
    const Matrix b3 = sim::random_normal_matrix(rng, 3, 3);
    const double want = a3.trace() * b3.trace();
    c.observe(rel_err(linalg::kron(a3, b3).trace(), want, 1.0));
  }
  return c.finish();
}

CheckResult check_commutation(sim::Rng& rng, std::size_t instances) {
  Check c("commutation_matrix_transposes", 0.0);
  for (auto p : kPs) {
    const Matrix k = linalg::commutation_matrix(static_cast<Eigen::Index>(p));
    const auto p2 = static_cast<Eigen::Index>(p * p);
    c.observe(linalg::max_abs(k * k - Matrix::Identity(p2, p2)));
    for (std::size_t i = 0; i < instances; ++i) {
      const Matrix a = sim::random_normal_matrix(rng, static_cast<Eigen::Index>(p),
                                                 static_cast<Eigen::Index>(p));
      const Vector diff = k * linalg::vec(a) - linalg::vec(a.transpose());
      c.observe(diff.cwiseAbs().maxCoeff());
    }
  }
  return c.finish();
}

CheckResult check_phi_hat_trace(sim::Rng& rng, std::size_t instances) {
  Check c("phi_hat_trace_matches_dense", 1e-8);
  for (auto p : kPs) {
    for (auto n : kNs) {
      for (std::size_t i = 0; i < instances; ++i) {
        const auto samples = sim::random_samples(rng, n, p);
        const auto s = est::empirical_cov(samples);
        auto m = sim::random_model(rng, samples.grid());
        const Matrix phi = est::phi_hat_dense(samples);
        const double dense = linalg::projected_trace_dense(m.projector.matrix(), phi);
        const double fast = est::phi_hat_trace(samples, s, m);
        c.observe(rel_err(fast, dense, 1e-12 * std::max(1.0, phi.trace())));
      }
    }
  }
  return c.finish();
}

CheckResult check_phi_hat_psd(sim::Rng& rng, std::size_t instances) {
  Check c("phi_hat_dense_psd", 1e-10);
  for (auto p : kPs) {
    for (auto n : kNs) {
      for (std::size_t i = 0; i < instances; ++i) {
        const auto samples = sim::random_samples(rng, n, p);
        const Matrix phi = est::phi_hat_dense(samples);
        const double floor = std::max(1.0, phi.norm());
        c.observe(std::max(0.0, -linalg::min_eigenvalue(phi)) / floor);
        c.observe(linalg::max_abs(phi - phi.transpose()) / floor);
      }
    }
  }
  return c.finish();
}

CheckResult check_gaussian_closed_form(sim::Rng& rng, std::size_t instances, bool inject_fault) {
  Check c("gaussian_closed_form_matches_dense", 1e-10);
  for (auto p : kPs) {
    for (std::size_t i = 0; i < instances; ++i) {
      const auto pe = static_cast<Eigen::Index>(p);
      std::uniform_int_distribution<Eigen::Index> rank_dist(1, pe);
      const Matrix sigma = sim::random_psd(rng, pe, rank_dist(rng));
      const auto m = sim::random_model(rng, index_grid(p));
      const oracle::TruthSpec truth{sigma, true, std::nullopt};
      double closed = oracle::true_phi_trace(truth, m);
      if (inject_fault) {
        const auto t = oracle::gaussian_trace_terms(m.projector.matrix(), sigma);
        closed = t.trace_sq - t.frob_sq;
      }
      const Matrix phi = oracle::gaussian_phi_dense(sigma);
      const double dense = linalg::projected_trace_dense(m.projector.matrix(), phi);
      c.observe(rel_err(closed, dense, 1e-12 * std::max(1.0, phi.trace())));
    }
  }
  return c.finish();
}

CheckResult check_projected_trace_range(sim::Rng& rng, std::size_t instances) {
  Check c("projected_trace_within_0_and_trace", 1e-10);
  for (auto p : kPs) {
    const auto p2 = static_cast<Eigen::Index>(p * p);
    for (std::size_t i = 0; i < instances; ++i) {
      std::uniform_int_distribution<Eigen::Index> rank_dist(1, p2);
      const Matrix psi = sim::random_psd(rng, p2, rank_dist(rng));
      const auto m = sim::random_model(rng, index_grid(p));
      const double t = linalg::projected_trace_dense(m.projector.matrix(), psi);
      const double total = psi.trace();
      const double below = std::max(0.0, -t) / total;
      const double above = std::max(0.0, t - total) / total;
      c.observe(std::max(below, above));
    }
  }
  return c.finish();
}

CheckResult check_sigma_hat_structure(sim::Rng& rng, std::size_t instances) {
  Check c("sigma_hat_in_model_space", 1e-10);
  for (auto p : kPs) {
    for (auto n : kNs) {
      for (std::size_t i = 0; i < instances; ++i) {
        const auto samples = sim::random_samples(rng, n, p);
        const auto s = est::empirical_cov(samples);
        const auto m = sim::random_model(rng, samples.grid());
        const auto fit = est::fit_model(samples, s, m);
        const Matrix& pm = m.projector.matrix();
        const double scale = std::max(1.0, linalg::max_abs(s.s));
        c.observe(linalg::max_abs(pm * fit.sigma_hat * pm - fit.sigma_hat) / scale);
        c.observe(linalg::max_abs(fit.sigma_hat - fit.sigma_hat.transpose()) / scale);
      }
    }
  }
  return c.finish();
}

CheckResult check_full_model(sim::Rng& rng, std::size_t instances) {
  Check c("full_rank_model_reproduces_S", 1e-12);
  for (auto p : kPs) {
    for (auto n : kNs) {
      for (std::size_t i = 0; i < instances; ++i) {
        const auto samples = sim::random_samples(rng, n, p);
        const auto s = est::empirical_cov(samples);
        const auto pe = static_cast<Eigen::Index>(p);
        const auto m = *dict::model_from_design(sim::random_normal_matrix(rng, pe, pe),
                                                samples.grid());
        const auto fit = est::fit_model(samples, s, m);
        c.observe(linalg::max_abs(fit.sigma_hat - s.s) / std::max(1.0, linalg::max_abs(s.s)));
      }
    }
  }
  return c.finish();
}

CheckResult check_loss_expansion(sim::Rng& rng, std::size_t instances) {
  Check c("loss_expansion_matches_direct_sum", 1e-9);
  for (auto p : kPs) {
    for (auto n : kNs) {
      for (std::size_t i = 0; i < instances; ++i) {
        const auto samples = sim::random_samples(rng, n, p);
        const auto s = est::empirical_cov(samples);
        const auto m = sim::random_model(rng, samples.grid());
        const auto fit = est::fit_model(samples, s, m);
        double direct = 0.0;
        for (Eigen::Index r = 0; r < samples.data().rows(); ++r) {
          const Vector x = samples.data().row(r).transpose();
          direct += (x * x.transpose() - fit.sigma_hat).squaredNorm();
        }
        direct /= static_cast<double>(n);
        c.observe(rel_err(fit.loss, direct, 1.0));
      }
    }
  }
  return c.finish();
}

}  // namespace

std::vector<CheckResult> run_suite(const SuiteOptions& options) {
  using CheckFn = std::function<CheckResult(sim::Rng&)>;
  const auto k = options.instances;
  const std::vector<CheckFn> checks = {
      [&](sim::Rng& r) { return check_pinv(r, k); },
      [&](sim::Rng& r) { return check_projectors(r, k); },
      [&](sim::Rng& r) { return check_projector_formula(r, k); },
      [&](sim::Rng& r) { return check_kron(r, k); },
      [&](sim::Rng& r) { return check_commutation(r, k); },
      [&](sim::Rng& r) { return check_phi_hat_trace(r, k); },
      [&](sim::Rng& r) { return check_phi_hat_psd(r, k); },
      [&](sim::Rng& r) { return check_gaussian_closed_form(r, k, options.inject_fault); },
      [&](sim::Rng& r) { return check_projected_trace_range(r, k); },
      [&](sim::Rng& r) { return check_sigma_hat_structure(r, k); },
      [&](sim::Rng& r) { return check_full_model(r, k); },
      [&](sim::Rng& r) { return check_loss_expansion(r, k); },
  };
  std::vector<CheckResult> out;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    auto rng = sim::make_rng(sim::derive_seed(options.seed, i));
    out.push_back(checks[i](rng));
  }
  return out;
}

}  // namespace covsel::validate
