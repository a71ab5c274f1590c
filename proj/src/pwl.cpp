#include "emsx/pwl.hpp"

#include <algorithm>

#include "emsx/error.hpp"

namespace emsx {

ConvexPwl::ConvexPwl(double start, double start_value, std::vector<Segment> segments)
    : start_(start), start_value_(start_value) {
  // Drop empty pieces and fuse equal slopes.
  for (const auto& s : segments) {
    if (!(s.length > 0.0)) continue;
    if (!segments_.empty() && segments_.back().slope == s.slope)
      segments_.back().length += s.length;
    else
      segments_.push_back(s);
  }
  finalize();
}

ConvexPwl ConvexPwl::constant(double lo, double hi, double value) {
  return ConvexPwl(lo, value, {{hi - lo, 0.0}});
}

void ConvexPwl::finalize() {
  knots_.assign(1, start_);
  values_.assign(1, start_value_);
  for (const auto& s : segments_) {
    knots_.push_back(knots_.back() + s.length);
    values_.push_back(values_.back() + s.length * s.slope);
  }
  end_ = knots_.back();
}

double ConvexPwl::operator()(double x) const {
  if (x <= start_) return start_value_;
  if (x >= end_) return values_.back();
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  return values_[i] + (x - knots_[i]) * segments_[i].slope;
}

ConvexPwl ConvexPwl::reflected() const {
  std::vector<Segment> segs(segments_.rbegin(), segments_.rend());
  for (auto& s : segs) s.slope = -s.slope;
  return ConvexPwl(-end_, values_.back(), std::move(segs));
}

ConvexPwl ConvexPwl::restricted(double lo, double hi) const {
  if (lo < start_ - 1e-12 || hi > end_ + 1e-12 || lo > hi)
    throw DomainError("restriction outside the function domain");
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    double a = std::max(knots_[i], lo);
    double b = std::min(knots_[i + 1], hi);
    if (b > a) segs.push_back({b - a, segments_[i].slope});
  }
  if (segs.empty()) segs.push_back({hi - lo, 0.0});
  return ConvexPwl(lo, (*this)(lo), std::move(segs));
}

ConvexPwl inf_convolution(const ConvexPwl& f, const ConvexPwl& g) {
  const auto& a = f.segments();
  const auto& b = g.segments();
  std::vector<ConvexPwl::Segment> merged;
  merged.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged),
             [](const auto& x, const auto& y) { return x.slope < y.slope; });
  return ConvexPwl(f.start() + g.start(), f.start_value() + g.start_value(), std::move(merged));
}

}  // namespace emsx
