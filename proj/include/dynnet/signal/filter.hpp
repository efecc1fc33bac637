#pragma once

#include <array>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "dynnet/neuralnet/tensor.hpp"

namespace dynnet::signal {

/// One biquad: b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2.
struct Section {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};
};

struct IirFilter {
  std::vector<Section> sections;
  int order = 0;
  double lo = 0.0;
  double hi = 0.0;
  double fs = 0.0;

  std::vector<std::complex<double>> poles() const;
  double max_pole_modulus() const;
  /// Complex response at frequency f (Hz).
  std::complex<double> response(double f) const;
};

/// Digital Butterworth band-pass of the given prototype order (2*order
/// poles), designed by band transform of the analog prototype and a
/// pre-warped bilinear map. Throws ConfigError unless 0 < lo < hi < fs/2.
IirFilter butter_bandpass(int order, double lo, double hi, double fs);

/// Cascade filtering with direct-form II transposed sections.
std::vector<double> sosfilt(const IirFilter& filter, std::span<const double> x);

/// Samples of padding used by filtfilt on each side.
std::size_t filtfilt_padlen(const IirFilter& filter);

/// Zero-phase forward-backward filtering with odd reflective padding and
/// steady-state initial conditions. Throws DataError if x is not longer
/// than the padding.
std::vector<double> filtfilt(const IirFilter& filter, std::span<const double> x);

/// filtfilt along the last axis of a tensor.
nn::Tensor<float> filtfilt(const IirFilter& filter, const nn::Tensor<float>& x);

struct FilterBank {
  std::vector<IirFilter> filters;
  std::size_t size() const { return filters.size(); }
};

/// (4,8), (8,12), ..., (36,40).
std::vector<std::pair<double, double>> default_bank_edges();

/// Bands must be sorted and may share edges but not overlap.
FilterBank make_filter_bank(const std::vector<std::pair<double, double>>& edges, int order,
                            double fs);

}  // namespace dynnet::signal
