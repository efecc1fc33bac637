#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dynnet/neuralnet/layers.hpp"

namespace dynnet::nn {

/// Flat copy of every parameter value and buffer, in layer order.
template <typename T>
struct ModelState {
  std::vector<T> values;
  friend bool operator==(const ModelState&, const ModelState&) = default;
};

/// Sequential stack of layers with a fixed per-sample input shape.
template <typename T>
class Model {
 public:
  Model() = default;
  /// `input_shape` excludes the batch axis. Layer chaining is checked here.
  Model(Shape input_shape, std::vector<LayerPtr<T>> layers, std::uint64_t seed);

  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  Tensor<T> forward(const Tensor<T>& input);
  Tensor<T> backward(const Tensor<T>& grad_output);

  void set_mode(Mode mode) { mode_ = mode; }
  Mode mode() const { return mode_; }

  /// Restarts the stochastic layers' generators from `seed`.
  void reseed(std::uint64_t seed);
  std::uint64_t seed() const { return seed_; }

  std::vector<Parameter<T>*> parameters();
  void zero_grad();
  std::size_t parameter_count() const;

  const Shape& input_shape() const { return input_shape_; }
  /// Per-sample output shape (batch axis excluded).
  Shape output_shape() const;
  std::size_t size() const { return layers_.size(); }
  const Layer<T>& layer(std::size_t i) const { return *layers_.at(i); }
  Layer<T>& layer(std::size_t i) { return *layers_.at(i); }

  ModelState<T> state() const;
  void load_state(const ModelState<T>& state);

 private:
  Shape input_shape_;
  std::vector<LayerPtr<T>> layers_;
  Mode mode_ = Mode::train;
  std::uint64_t seed_ = 0;
};

}  // namespace dynnet::nn
