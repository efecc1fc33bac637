#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include "dynnet/neuralnet/tensor.hpp"

namespace dynnet::nn {

struct Extent2 {
  std::size_t h = 1;
  std::size_t w = 1;
  friend bool operator==(const Extent2&, const Extent2&) = default;
};

struct Conv2dGeometry {
  Extent2 stride{1, 1};
  Extent2 padding{0, 0};
  std::size_t groups = 1;
};

/// floor((in + 2*pad - kernel) / stride) + 1; throws BuildError if the
/// padded input is smaller than the kernel.
std::size_t conv_output_extent(std::size_t in, std::size_t kernel,
                               std::size_t pad, std::size_t stride);

/// Output shape of a grouped convolution over an (N, Cin, H, W) input with
/// (Cout, Cin/groups, kh, kw) weights.
Shape conv2d_output_shape(const Shape& input, const Shape& weight,
                          const Conv2dGeometry& geometry);

/// Grouped 2-D cross-correlation with zero padding.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight,
                 std::type_identity_t<const Tensor<T>*> bias, const Conv2dGeometry& geometry);

template <typename T>
struct Conv2dGrads {
  Tensor<T> input;
  Tensor<T> weight;
  std::optional<Tensor<T>> bias;
};

template <typename T>
Conv2dGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& weight,
                               const Tensor<T>& grad_output, bool has_bias,
                               const Conv2dGeometry& geometry);

// Activation registry shared by the spec format and the layer stack.
enum class ActivationCode : int { identity = -1, elu = 3, log_softmax = 9 };

bool is_known_activation(int code);

template <typename T>
Tensor<T> elu(const Tensor<T>& x, T alpha = T(1));
template <typename T>
Tensor<T> elu_backward(const Tensor<T>& x, const Tensor<T>& grad_output, T alpha = T(1));

/// Row-wise log-softmax over the last dimension.
template <typename T>
Tensor<T> log_softmax(const Tensor<T>& x);
template <typename T>
Tensor<T> log_softmax_backward(const Tensor<T>& output, const Tensor<T>& grad_output);

enum class PoolCode : int { none = -1, max = 0, average = 1 };

bool is_known_pooling(int code);

Shape pool2d_output_shape(const Shape& input, Extent2 kernel);

/// Non-overlapping pooling (stride == kernel). The trailing remainder of
/// each spatial axis is discarded. For max pooling `argmax` receives the
/// flat input index that produced each output.
template <typename T>
Tensor<T> pool2d(const Tensor<T>& input, PoolCode code, Extent2 kernel,
                 std::vector<std::size_t>* argmax = nullptr);

template <typename T>
Tensor<T> pool2d_backward(const Shape& input_shape, const Tensor<T>& grad_output,
                          PoolCode code, Extent2 kernel,
                          std::span<const std::size_t> argmax = {});

/// y = x W + b with x (N, F), W (F, K), b (K).
template <typename T>
Tensor<T> dense(const Tensor<T>& input, const Tensor<T>& weight,
                std::type_identity_t<const Tensor<T>*> bias);

template <typename T>
struct DenseGrads {
  Tensor<T> input;
  Tensor<T> weight;
  std::optional<Tensor<T>> bias;
};

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& input, const Tensor<T>& weight,
                             const Tensor<T>& grad_output, bool has_bias);

template <typename T>
struct LossResult {
  double value = 0.0;
  Tensor<T> grad;  // d loss / d logprobs
};

/// Mean negative log-likelihood of `labels` under row-wise log-probabilities.
template <typename T>
LossResult<T> nll_loss(const Tensor<T>& logprobs, std::span<const int> labels);

/// Index of the maximum of each row of an (N, K) tensor; ties resolve to the
/// lowest index.
template <typename T>
std::vector<int> argmax_rows(const Tensor<T>& scores);

}  // namespace dynnet::nn
