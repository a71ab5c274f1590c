#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace emsx {

struct KMeansOptions {
  int k = 10;
  int max_iterations = 100;
  double tolerance = 1e-8;  // stop when no center moves more than this
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<double> centers;      // ascending
  std::vector<std::size_t> counts;  // points assigned to each center
  int distinct_values = 0;
};

/// Lloyd's algorithm on scalars with k-means++ seeding. Empty clusters are
/// re-seeded at the point farthest from its center. When the data has fewer
/// distinct values than k, the result has one center per distinct value.
/// Final centers are the means of their clusters.
KMeansResult kmeans_1d(std::span<const double> values, const KMeansOptions& options);

/// Index of the closest center; ties go to the lowest index.
std::size_t nearest_center(std::span<const double> centers, double v);

}  // namespace emsx
