#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dynnet/neuralnet/tensor.hpp"

namespace dynnet::signal {

struct Ratio {
  std::size_t up = 1;
  std::size_t down = 1;
};

/// fs_out/fs_in as a reduced fraction. Rates are taken to a millihertz.
Ratio resample_ratio(double fs_in, double fs_out);

std::size_t resampled_length(std::size_t n, double fs_in, double fs_out);

/// Polyphase rational resampling with a Kaiser-windowed sinc anti-aliasing
/// filter cut at min(fs_in, fs_out)/2. Output has round(n*fs_out/fs_in)
/// samples; equal rates return the input unchanged.
std::vector<double> resample(std::span<const double> x, double fs_in, double fs_out);

/// resample along the last axis of a tensor.
nn::Tensor<float> resample(const nn::Tensor<float>& x, double fs_in, double fs_out);

}  // namespace dynnet::signal
