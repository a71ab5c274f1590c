#include "emsx/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "emsx/error.hpp"
#include "emsx/rng.hpp"

namespace emsx {

std::size_t nearest_center(std::span<const double> centers, double v) {
  std::size_t best = 0;
  double best_d = std::abs(v - centers[0]);
  for (std::size_t c = 1; c < centers.size(); ++c) {
    double d = std::abs(v - centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

KMeansResult kmeans_1d(std::span<const double> values, const KMeansOptions& options) {
  if (values.empty()) throw DomainError("k-means on an empty sample");
  if (options.k < 1) throw DomainError("k-means needs k >= 1");

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  KMeansResult result;
  result.distinct_values = static_cast<int>(distinct.size());
  if (distinct.size() <= static_cast<std::size_t>(options.k)) {
    result.centers = distinct;
    result.counts.assign(distinct.size(), 0);
    for (double v : sorted)
      ++result.counts[static_cast<std::size_t>(
          std::lower_bound(distinct.begin(), distinct.end(), v) - distinct.begin())];
    return result;
  }

  const std::size_t k = static_cast<std::size_t>(options.k);
  const std::size_t n = sorted.size();
  RandomStream rng(options.seed);

  // k-means++ seeding.
  std::vector<double> centers;
  centers.push_back(sorted[rng.index(n)]);
  std::vector<double> d2(n);
  while (centers.size() < k) {
    for (std::size_t i = 0; i < n; ++i) {
      double d = sorted[i] - centers[nearest_center(centers, sorted[i])];
      d2[i] = d * d;
    }
    centers.push_back(sorted[rng.categorical(d2)]);
  }

  std::vector<std::size_t> assign(n);
  std::vector<double> sums(k);
  std::vector<std::size_t> counts(k);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      assign[i] = nearest_center(centers, sorted[i]);
      sums[assign[i]] += sorted[i];
      ++counts[assign[i]];
    }
    bool reseeded = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      // Move the farthest point into the empty cluster.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        double d = std::abs(sorted[i] - centers[assign[i]]);
        if (d > far_d && counts[assign[i]] > 1) {
          far_d = d;
          far = i;
        }
      }
      sums[assign[far]] -= sorted[far];
      --counts[assign[far]];
      assign[far] = c;
      sums[c] = sorted[far];
      counts[c] = 1;
      reseeded = true;
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double updated = sums[c] / static_cast<double>(counts[c]);
      shift = std::max(shift, std::abs(updated - centers[c]));
      centers[c] = updated;
    }
    if (!reseeded && shift < options.tolerance) break;
  }

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return centers[a] < centers[b] || (centers[a] == centers[b] && a < b);
  });
  for (std::size_t c : order) {
    result.centers.push_back(centers[c]);
    result.counts.push_back(counts[c]);
  }
  return result;
}

}  // namespace emsx
