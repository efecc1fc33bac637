#include "dynnet/signal/ema.hpp"

#include <algorithm>
#include <cmath>

#include "dynnet/core/error.hpp"
#include "rows.hpp"

namespace dynnet::signal {

std::vector<double> ema_standardize(std::span<const double> x, double decay,
                                    double sigma_floor) {
  if (!(decay > 0.0 && decay < 1.0)) {
    throw ConfigError("EMA decay must lie in (0, 1), got " + std::to_string(decay));
  }
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  double mean = x[0];
  double var = sigma_floor * sigma_floor;
  y[0] = 0.0;
  for (std::size_t t = 1; t < x.size(); ++t) {
    mean = decay * mean + (1.0 - decay) * x[t];
    const double d = x[t] - mean;
    var = decay * var + (1.0 - decay) * d * d;
    y[t] = d / std::max(std::sqrt(var), sigma_floor);
  }
  return y;
}

nn::Tensor<float> ema_standardize(const nn::Tensor<float>& x, double decay,
                                  double sigma_floor) {
  return detail::map_rows(x, [&](std::span<const double> row) {
    return ema_standardize(row, decay, sigma_floor);
  });
}

}  // namespace dynnet::signal
