#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "dynnet/neuralnet/ops.hpp"
#include "dynnet/neuralnet/tensor.hpp"

namespace dynnet::nn {

enum class LayerKind { conv2d, batchnorm2d, activation, pool2d, dropout, dense, flatten };

const char* to_string(LayerKind kind);

enum class Mode { train, eval };

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

/// One element of a sequential stack. forward() caches whatever backward()
/// needs; backward() accumulates parameter gradients and returns the
/// gradient with respect to the layer input.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual std::string describe() const = 0;
  virtual Shape output_shape(const Shape& input) const = 0;
  virtual Tensor<T> forward(const Tensor<T>& input, Mode mode) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_output) = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;

  virtual std::vector<Parameter<T>*> parameters() { return {}; }
  // Non-trainable state that still belongs to the model (running stats).
  virtual std::vector<Tensor<T>*> buffers() { return {}; }
  virtual void reseed(std::uint64_t /*seed*/) {}
};

template <typename T>
using LayerPtr = std::unique_ptr<Layer<T>>;

struct Conv2dOptions {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  Extent2 kernel{1, 1};
  Conv2dGeometry geometry{};
  bool bias = false;
};

template <typename T>
class Conv2d final : public Layer<T> {
 public:
  explicit Conv2d(const Conv2dOptions& options);

  LayerKind kind() const override { return LayerKind::conv2d; }
  std::string describe() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Conv2d>(*this); }
  std::vector<Parameter<T>*> parameters() override;

  const Conv2dOptions& options() const { return options_; }
  Parameter<T>& weight() { return weight_; }
  Parameter<T>* bias() { return options_.bias ? &bias_ : nullptr; }

 private:
  Conv2dOptions options_;
  Parameter<T> weight_;
  Parameter<T> bias_;
  Tensor<T> input_;
};

template <typename T>
class BatchNorm2d final : public Layer<T> {
 public:
  explicit BatchNorm2d(std::size_t channels, double eps = 1e-5, double momentum = 0.1);

  LayerKind kind() const override { return LayerKind::batchnorm2d; }
  std::string describe() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;
  std::unique_ptr<Layer<T>> clone() const override {
    return std::make_unique<BatchNorm2d>(*this);
  }
  std::vector<Parameter<T>*> parameters() override { return {&gamma_, &beta_}; }
  std::vector<Tensor<T>*> buffers() override { return {&running_mean_, &running_var_}; }

  Parameter<T>& gamma() { return gamma_; }
  Parameter<T>& beta() { return beta_; }
  const Tensor<T>& running_mean() const { return running_mean_; }
  const Tensor<T>& running_var() const { return running_var_; }

 private:
  std::size_t channels_;
  double eps_;
  double momentum_;
  Parameter<T> gamma_;
  Parameter<T> beta_;
  Tensor<T> running_mean_;
  Tensor<T> running_var_;
  // Forward cache.
  Mode mode_ = Mode::eval;
  Tensor<T> normalized_;
  std::vector<T> inv_std_;
};

template <typename T>
class Activation final : public Layer<T> {
 public:
  /// Throws ConfigError for codes outside the registry or for -1.
  explicit Activation(int code);

  LayerKind kind() const override { return LayerKind::activation; }
  std::string describe() const override;
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor<T> forward(const Tensor<T>& input, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;
  std::unique_ptr<Layer<T>> clone() const override {
    return std::make_unique<Activation>(*this);
  }

  ActivationCode code() const { return code_; }

 private:
  ActivationCode code_;
  Tensor<T> cache_;  // input for ELU, output for log-softmax
};

template <typename T>
class Pool2d final : public Layer<T> {
 public:
  Pool2d(PoolCode code, Extent2 kernel);

  LayerKind kind() const override { return LayerKind::pool2d; }
  std::string describe() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Pool2d>(*this); }

  PoolCode code() const { return code_; }
  Extent2 kernel() const { return kernel_; }

 private:
  PoolCode code_;
  Extent2 kernel_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

/// Inverted dropout: survivors are scaled by 1/(1-p) in train mode, eval
/// mode is the identity.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  Dropout(double p, std::uint64_t seed);

  LayerKind kind() const override { return LayerKind::dropout; }
  std::string describe() const override;
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor<T> forward(const Tensor<T>& input, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dropout>(*this); }
  void reseed(std::uint64_t seed) override { rng_.seed(seed); }

  double probability() const { return p_; }
  const Tensor<T>& mask() const { return mask_; }

 private:
  double p_;
  std::mt19937_64 rng_;
  Tensor<T> mask_;
  bool masked_ = false;
};

template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::size_t in_features, std::size_t out_features, bool bias);

  LayerKind kind() const override { return LayerKind::dense; }
  std::string describe() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dense>(*this); }
  std::vector<Parameter<T>*> parameters() override;

  std::size_t in_features() const { return in_features_; }
  std::size_t out_features() const { return out_features_; }
  Parameter<T>& weight() { return weight_; }
  Parameter<T>* bias() { return has_bias_ ? &bias_ : nullptr; }

 private:
  std::size_t in_features_;
  std::size_t out_features_;
  bool has_bias_;
  Parameter<T> weight_;
  Parameter<T> bias_;
  Tensor<T> input_;
};

template <typename T>
class Flatten final : public Layer<T> {
 public:
  LayerKind kind() const override { return LayerKind::flatten; }
  std::string describe() const override { return "flatten"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Flatten>(*this); }

 private:
  Shape input_shape_;
};

/// Glorot-uniform initialization of every conv/dense weight; biases and
/// batch-norm shifts to zero, batch-norm scales to one.
template <typename T>
void glorot_initialize(Layer<T>& layer, std::mt19937_64& rng);

}  // namespace dynnet::nn
