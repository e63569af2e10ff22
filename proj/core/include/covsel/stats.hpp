#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace covsel::stats {

/// Pairwise (cascade) summation in index order. The reduction tree depends
/// only on the length, so the result is bit-stable for a given input order.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const auto half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct MeanSe {
  double mean = 0.0;
  /// Standard error of the mean: sample sd / sqrt(count). 0 when count < 2.
  double se = 0.0;
  std::size_t count = 0;
};

inline MeanSe mean_and_se(std::span<const double> v) {
  MeanSe out;
  out.count = v.size();
  if (v.empty()) return out;
  const auto n = static_cast<double>(v.size());
  out.mean = pairwise_sum(v) / n;
  if (v.size() < 2) return out;
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

}  // namespace covsel::stats
