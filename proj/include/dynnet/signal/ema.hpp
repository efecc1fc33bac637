#pragma once

#include <span>
#include <vector>

#include "dynnet/neuralnet/tensor.hpp"

namespace dynnet::signal {

inline constexpr double kSigmaFloor = 1e-8;

/// Causal exponential-moving standardization of one channel:
///   m_t = d m_{t-1} + (1-d) x_t,  v_t = d v_{t-1} + (1-d) (x_t - m_t)^2,
///   y_t = (x_t - m_t) / max(sqrt(v_t), floor),
/// starting from m_0 = x_0 and sqrt(v_0) = floor.
std::vector<double> ema_standardize(std::span<const double> x, double decay,
                                    double sigma_floor = kSigmaFloor);

/// Per row of the last axis.
nn::Tensor<float> ema_standardize(const nn::Tensor<float>& x, double decay,
                                  double sigma_floor = kSigmaFloor);

}  // namespace dynnet::signal
