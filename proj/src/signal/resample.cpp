#include "dynnet/signal/resample.hpp"

#include <cmath>
#include <numeric>
#include <numbers>

#include "dynnet/core/error.hpp"
#include "rows.hpp"

namespace dynnet::signal {

namespace {

constexpr double kKaiserBeta = 5.0;
constexpr std::size_t kTapsPerPhase = 10;

std::vector<double> lowpass_taps(std::size_t half_len, double cutoff, double gain) {
  const std::size_t len = 2 * half_len + 1;
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);
  std::vector<double> h(len);
  double sum = 0.0;
  for (std::size_t n = 0; n < len; ++n) {
    const double t = static_cast<double>(n) - static_cast<double>(half_len);
    const double arg = std::numbers::pi * cutoff * t;
    const double sinc = t == 0.0 ? 1.0 : std::sin(arg) / arg;
    const double r = t / static_cast<double>(half_len);
    const double window = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
    h[n] = cutoff * sinc * window;
    sum += h[n];
  }
  for (double& v : h) v *= gain / sum;  // unity DC gain per phase
  return h;
}

}  // namespace

Ratio resample_ratio(double fs_in, double fs_out) {
  if (!(fs_in > 0.0) || !(fs_out > 0.0)) {
    throw ConfigError("sampling rates must be positive");
  }
  const auto a = static_cast<unsigned long long>(std::llround(fs_in * 1000.0));
  const auto b = static_cast<unsigned long long>(std::llround(fs_out * 1000.0));
  if (a == 0 || b == 0) throw ConfigError("sampling rate below 1 mHz");
  const unsigned long long g = std::gcd(a, b);
  return Ratio{static_cast<std::size_t>(b / g), static_cast<std::size_t>(a / g)};
}

std::size_t resampled_length(std::size_t n, double fs_in, double fs_out) {
  const Ratio r = resample_ratio(fs_in, fs_out);
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) *
                                               static_cast<double>(r.up) /
                                               static_cast<double>(r.down)));
}

std::vector<double> resample(std::span<const double> x, double fs_in, double fs_out) {
  if (x.empty()) throw DataError(DataErrorCode::invalid_argument, "cannot resample an empty signal");
  const Ratio r = resample_ratio(fs_in, fs_out);
  if (r.up == r.down) return std::vector<double>(x.begin(), x.end());

  const std::size_t rate = std::max(r.up, r.down);
  const std::size_t half_len = kTapsPerPhase * rate;
  const std::vector<double> h =
      lowpass_taps(half_len, 1.0 / static_cast<double>(rate), static_cast<double>(r.up));
  const auto len = static_cast<long long>(h.size());
  const auto up = static_cast<long long>(r.up);
  const auto n_in = static_cast<long long>(x.size());

  std::vector<double> y(resampled_length(x.size(), fs_in, fs_out));
  for (std::size_t k = 0; k < y.size(); ++k) {
    // Position on the upsampled grid, shifted so the filter is centred.
    const long long t = static_cast<long long>(k * r.down + half_len);
    long long first = t - len + 1;
    first = first <= 0 ? 0 : (first + up - 1) / up;
    const long long last = std::min(t / up, n_in - 1);
    double acc = 0.0;
    for (long long n = first; n <= last; ++n) acc += x[static_cast<std::size_t>(n)] * h[static_cast<std::size_t>(t - n * up)];
    y[k] = acc;
  }
  return y;
}

nn::Tensor<float> resample(const nn::Tensor<float>& x, double fs_in, double fs_out) {
  return detail::map_rows(
      x, [&](std::span<const double> row) { return resample(row, fs_in, fs_out); });
}

}  // namespace dynnet::signal
