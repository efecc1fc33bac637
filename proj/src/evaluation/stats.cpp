#include "dynnet/evaluation/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "dynnet/core/error.hpp"

namespace dynnet::eval {

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.empty() || predicted.size() != truth.size()) {
    throw DataError(DataErrorCode::invalid_argument, "accuracy needs equal, non-empty label lists");
  }
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
  return 100.0 * static_cast<double>(hit) / static_cast<double>(truth.size());
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

TTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ConfigError("paired t test needs two equal-length samples of at least 2 values");
  }
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  TTest r;
  r.df = static_cast<double>(d.size() - 1);
  const double m = mean(d);
  const double s = sample_std(d);
  if (s == 0.0) {
    if (m == 0.0) return r;
    r.degenerate = true;
    r.t = std::copysign(std::numeric_limits<double>::infinity(), m);
    r.p = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.t = m / (s / std::sqrt(static_cast<double>(d.size())));
  const boost::math::students_t dist(r.df);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  return r;
}

}  // namespace dynnet::eval
