#include "covsel/dictionary.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "covsel/error.hpp"

namespace covsel::dict {

std::string_view to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::fourier: return "fourier";
    case BasisKind::polynomial: return "polynomial";
    case BasisKind::histogram: return "histogram";
  }
  return "unknown";
}

BasisKind parse_basis_kind(std::string_view name) {
  if (name == "fourier") return BasisKind::fourier;
  if (name == "polynomial") return BasisKind::polynomial;
  if (name == "histogram") return BasisKind::histogram;
  throw InputError("unknown basis family '" + std::string(name) +
                   "' (expected fourier, polynomial or histogram)");
}

void BasisFamily::validate() const {
  if (!(std::isfinite(t_min) && std::isfinite(t_max) && t_min < t_max)) {
    throw InputError("basis domain must satisfy t_min < t_max");
  }
  if (kind == BasisKind::histogram && !std::has_single_bit(size())) {
    throw InputError("histogram cell count max_index+1 = " + std::to_string(size()) +
                     " is not a power of two");
  }
}

double eval_basis(const BasisFamily& family, std::size_t lambda, double t) {
  if (lambda > family.max_index) {
    throw std::out_of_range("basis index " + std::to_string(lambda) + " exceeds max_index " +
                            std::to_string(family.max_index));
  }
  if (!(t >= family.t_min && t <= family.t_max)) {
    std::ostringstream os;
    os << "point " << t << " outside basis domain [" << family.t_min << ", " << family.t_max
       << "]";
    throw std::out_of_range(os.str());
  }
  const double u = (t - family.t_min) / (family.t_max - family.t_min);
  switch (family.kind) {
    case BasisKind::fourier: {
      if (lambda == 0) return 1.0;
      const auto freq = static_cast<double>((lambda + 1) / 2);
      const double arg = 2.0 * std::numbers::pi * freq * u;
      return std::numbers::sqrt2 * (lambda % 2 == 1 ? std::cos(arg) : std::sin(arg));
    }
    case BasisKind::polynomial: {
      const auto k = static_cast<unsigned>(lambda);
      return std::sqrt(2.0 * k + 1.0) * std::legendre(k, 2.0 * u - 1.0);
    }
    case BasisKind::histogram: {
      const auto cells = static_cast<double>(family.size());
      auto cell = static_cast<std::size_t>(std::floor(u * cells));
      if (cell >= family.size()) cell = family.size() - 1;
      return cell == lambda ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

Matrix build_design(const BasisFamily& family, const IndexSet& m, const Grid& grid) {
  if (m.empty()) throw InputError("model index set is empty");
  Matrix g(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(m.size()));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          eval_basis(family, m[k], grid[j]);
    }
  }
  return g;
}

std::optional<ModelSpec> make_model(const BasisFamily& family, IndexSet m, const Grid& grid,
                                    double rank_tol) {
  Matrix design = build_design(family, m, grid);
  auto projector = linalg::projector_from_design(design, rank_tol);
  if (projector.rank() == 0) return std::nullopt;
  return ModelSpec{std::move(m), std::move(design), std::move(projector), grid};
}

std::optional<ModelSpec> model_from_design(Matrix design, Grid grid, IndexSet indices,
                                           double rank_tol) {
  if (static_cast<std::size_t>(design.rows()) != grid.size()) {
    throw InputError("design rows do not match grid size");
  }
  if (indices.empty()) {
    for (Eigen::Index k = 0; k < design.cols(); ++k) indices.push_back(static_cast<std::size_t>(k));
  }
  auto projector = linalg::projector_from_design(design, rank_tol);
  if (projector.rank() == 0) return std::nullopt;
  return ModelSpec{std::move(indices), std::move(design), std::move(projector), std::move(grid)};
}

std::string format_indices(const IndexSet& m) {
  std::string out = "{";
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (k > 0) out += ",";
    out += std::to_string(m[k]);
  }
  return out + "}";
}

std::string_view to_string(SchemeKind kind) {
  return kind == SchemeKind::nested ? "nested" : "all_subsets";
}

SchemeKind parse_scheme_kind(std::string_view name) {
  if (name == "nested") return SchemeKind::nested;
  if (name == "all_subsets" || name == "all-subsets") return SchemeKind::all_subsets;
  throw InputError("unknown collection scheme '" + std::string(name) +
                   "' (expected nested or all_subsets)");
}

namespace {

// Subsets of {0..n-1} of exactly `size` elements, in lexicographic order.
void enumerate_subsets(std::size_t n, std::size_t size, std::vector<IndexSet>& out) {
  IndexSet current(size);
  for (std::size_t k = 0; k < size; ++k) current[k] = k;
  if (size == 0 || size > n) return;
  while (true) {
    out.push_back(current);
    std::size_t k = size;
    while (k > 0 && current[k - 1] == n - size + (k - 1)) --k;
    if (k == 0) return;
    ++current[k - 1];
    for (std::size_t r = k; r < size; ++r) current[r] = current[r - 1] + 1;
  }
}

}  // namespace

ModelCollection build_collection(const BasisFamily& family, const CollectionScheme& scheme,
                                 const Grid& grid, double rank_tol) {
  family.validate();
  if (grid.empty()) throw InputError("observation grid is empty");

  std::vector<IndexSet> candidates;
  switch (scheme.kind) {
    case SchemeKind::nested:
      if (scheme.max_dim < 1 || scheme.max_dim > family.size()) {
        throw InputError("nested scheme needs 1 <= max_dim <= max_index+1 (max_dim = " +
                         std::to_string(scheme.max_dim) + ", max_index = " +
                         std::to_string(family.max_index) + ")");
      }
      for (std::size_t d = 1; d <= scheme.max_dim; ++d) {
        IndexSet m(d);
        for (std::size_t k = 0; k < d; ++k) m[k] = k;
        candidates.push_back(std::move(m));
      }
      break;
    case SchemeKind::all_subsets:
      if (scheme.subset_size < 1 || scheme.subset_size > scheme.subset_guard) {
        throw InputError("all_subsets scheme needs 1 <= subset_size <= " +
                         std::to_string(scheme.subset_guard) + " (got " +
                         std::to_string(scheme.subset_size) + ")");
      }
      for (std::size_t s = 1; s <= scheme.subset_size; ++s) {
        enumerate_subsets(family.size(), s, candidates);
      }
      break;
  }

  ModelCollection out{family, grid, {}, {}};
  for (auto& m : candidates) {
    const std::string label = format_indices(m);
    if (auto model = make_model(family, std::move(m), grid, rank_tol)) {
      out.models.push_back(std::move(*model));
    } else {
      out.warnings.push_back("dropped model " + label + ": design has numerical rank 0");
    }
  }
  if (out.models.empty()) {
    throw DegenerateCollectionError("model collection is empty: every candidate design has rank 0");
  }
  return out;
}

}  // namespace covsel::dict
