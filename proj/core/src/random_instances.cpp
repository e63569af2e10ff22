#include "covsel/random_instances.hpp"

#include <numeric>

namespace covsel::sim {

Matrix random_normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = normal(rng);
  return a;
}

Matrix random_psd(Rng& rng, Eigen::Index p, Eigen::Index rank) {
  const Matrix a = random_normal_matrix(rng, p, rank);
  Matrix s = a * a.transpose();
  return 0.5 * (s + s.transpose());
}

dict::ModelSpec random_model(Rng& rng, const Grid& grid) {
  const auto p = static_cast<Eigen::Index>(grid.size());
  std::uniform_int_distribution<Eigen::Index> cols_dist(1, p);
  const auto k = cols_dist(rng);
  Matrix g = random_normal_matrix(rng, p, k);
  if (k >= 2 && std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
    g.col(k - 1) = g.col(0);
  }
  // A standard normal design has rank >= 1 almost surely.
  return *dict::model_from_design(std::move(g), grid);
}

est::SampleSet random_samples(Rng& rng, std::size_t n, std::size_t p) {
  Grid grid(p);
  std::iota(grid.begin(), grid.end(), 0.0);
  return est::SampleSet(std::move(grid),
                        random_normal_matrix(rng, static_cast<Eigen::Index>(n),
                                             static_cast<Eigen::Index>(p)));
}

}  // namespace covsel::sim
