#pragma once

// Basis families g_lambda on a 1-D domain, design matrices on the
// observation grid, and finite model collections built from them.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "covsel/linalg.hpp"

namespace covsel::dict {

using linalg::Matrix;
using IndexSet = std::vector<std::size_t>;
using Grid = std::vector<double>;

enum class BasisKind { fourier, polynomial, histogram };

std::string_view to_string(BasisKind kind);
/// Throws InputError on an unknown name.
BasisKind parse_basis_kind(std::string_view name);

/// A family of basis functions indexed 0..max_index on [t_min, t_max].
///
/// fourier:    1, sqrt2 cos(2 pi u), sqrt2 sin(2 pi u), sqrt2 cos(4 pi u), ...
///             with u = (t - t_min) / (t_max - t_min)
/// polynomial: sqrt(2k+1) P_k(2u - 1), Legendre polynomials orthonormal on the domain
/// histogram:  indicator of cell k in a uniform dyadic partition into
///             max_index + 1 cells (a power of two); cells are half-open
///             [a, b) except the last, which also contains t_max
struct BasisFamily {
  BasisKind kind = BasisKind::fourier;
  double t_min = 0.0;
  double t_max = 1.0;
  std::size_t max_index = 0;

  /// Throws InputError if the domain is empty or a histogram cell count is
  /// not a power of two.
  void validate() const;
  std::size_t size() const { return max_index + 1; }
};

/// g_lambda(t). Throws std::out_of_range if lambda > max_index or t is outside the domain.
double eval_basis(const BasisFamily& family, std::size_t lambda, double t);

/// (G_m)_{j,k} = g_{m[k]}(t_j). Throws InputError on an empty index set and
/// std::out_of_range for grid points outside the domain.
Matrix build_design(const BasisFamily& family, const IndexSet& m, const Grid& grid);

/// An index set with its design matrix and orthogonal projector.
///
/// Invariant: rank >= 1 and dim() == rank^2, which equals Tr(P (x) P).
struct ModelSpec {
  IndexSet indices;
  Matrix design;
  linalg::Projector projector;
  Grid grid;

  std::size_t rank() const { return static_cast<std::size_t>(projector.rank()); }
  std::size_t dim() const { return rank() * rank(); }
  std::size_t p() const { return grid.size(); }
};

/// Builds a model, or returns nullopt if its design has numerical rank 0.
std::optional<ModelSpec> make_model(const BasisFamily& family, IndexSet m, const Grid& grid,
                                    double rank_tol = linalg::kDefaultRankTol);

/// Model from an explicit p x k design (e.g. a random design in tests).
/// `indices` labels the model; defaults to {0..k-1}.
std::optional<ModelSpec> model_from_design(Matrix design, Grid grid, IndexSet indices = {},
                                           double rank_tol = linalg::kDefaultRankTol);

/// "{0,1,2}"
std::string format_indices(const IndexSet& m);

enum class SchemeKind { nested, all_subsets };

std::string_view to_string(SchemeKind kind);
SchemeKind parse_scheme_kind(std::string_view name);

struct CollectionScheme {
  SchemeKind kind = SchemeKind::nested;
  /// nested: models {0}, {0,1}, ..., {0..max_dim-1}
  std::size_t max_dim = 1;
  /// all_subsets: every nonempty subset of {0..max_index} of size <= subset_size
  std::size_t subset_size = 1;
  /// Upper bound accepted for subset_size; keeps all-subsets collections small.
  std::size_t subset_guard = 2;
};

struct ModelCollection {
  BasisFamily family;
  Grid grid;
  std::vector<ModelSpec> models;
  /// One entry per dropped rank-0 candidate.
  std::vector<std::string> warnings;
};

/// Throws InputError for inconsistent scheme parameters and
/// DegenerateCollectionError if no candidate survives.
ModelCollection build_collection(const BasisFamily& family, const CollectionScheme& scheme,
                                 const Grid& grid, double rank_tol = linalg::kDefaultRankTol);

}  // namespace covsel::dict
