#pragma once

#include <vector>

namespace emsx {

/// Convex piecewise-linear function on a closed interval, stored as a start
/// point, its value, and segments of nondecreasing slope.
class ConvexPwl {
 public:
  struct Segment {
    double length;
    double slope;
  };

  ConvexPwl() = default;
  ConvexPwl(double start, double start_value, std::vector<Segment> segments);

  static ConvexPwl constant(double lo, double hi, double value);

  double start() const { return start_; }
  double end() const { return end_; }
  double start_value() const { return start_value_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// f(x) for x in the domain (clamped to it).
  double operator()(double x) const;

  /// Breakpoints including both domain ends.
  const std::vector<double>& knots() const { return knots_; }

  /// x -> f(-x).
  ConvexPwl reflected() const;

  /// Same function on [lo, hi], which must lie inside the domain.
  ConvexPwl restricted(double lo, double hi) const;

 private:
  void finalize();

  double start_ = 0.0;
  double start_value_ = 0.0;
  double end_ = 0.0;
  std::vector<Segment> segments_;
  std::vector<double> knots_;   // segment boundaries
  std::vector<double> values_;  // f at knots_
};

/// Infimal convolution (f [] g)(x) = min_y f(y) + g(x - y), computed exactly
/// by merging slope sequences.
ConvexPwl inf_convolution(const ConvexPwl& f, const ConvexPwl& g);

}  // namespace emsx
