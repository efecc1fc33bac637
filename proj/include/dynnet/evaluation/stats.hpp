#pragma once

#include <span>
#include <vector>

namespace dynnet::eval {

/// 100 * matches / total. Throws DataError on empty or unequal inputs.
double accuracy(std::span<const int> predicted, std::span<const int> truth);

struct TTest {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
  // Every difference identical but nonzero: t is infinite and p undefined.
  bool degenerate = false;
};

/// Paired two-sided Student t test on a - b. Identical inputs give t = 0,
/// p = 1.
TTest paired_t_test(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_std(std::span<const double> v);

}  // namespace dynnet::eval
