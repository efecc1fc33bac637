#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dynnet/builder/model_spec.hpp"
#include "dynnet/neuralnet/model.hpp"

namespace dynnet::builder {

struct Violation {
  std::optional<std::size_t> layer;
  std::string key;
  std::string message;
};

std::string to_string(const Violation& v);

/// Every list-length, channel-chain, code and shape problem of `spec`, each
/// tagged with its layer index where one applies. Empty means valid.
std::vector<Violation> validate_spec(const ModelSpec& spec);

struct LayerShape {
  std::string description;
  nn::Shape input;
  nn::Shape output;
};

struct BuildReport {
  std::vector<LayerShape> layers;
  std::size_t flatten_dim = 0;  // 0 when the model has no convolutional section
  std::size_t parameter_count = 0;
  std::vector<std::string> warnings;
};

template <typename T>
struct BuiltModel {
  nn::Model<T> model;
  BuildReport report;
};

/// Phase 1: for each convolutional block emit conv, then batch norm,
/// activation, pooling and dropout where the lists ask for them.
template <typename T>
std::vector<nn::LayerPtr<T>> build_conv_section(const ModelSpec& spec, std::uint64_t seed);

/// Phase 2: size of the flattened conv output for an (in_channels, h, w)
/// sample, from the layers' shape rules.
template <typename T>
std::size_t infer_flatten_dim(const std::vector<nn::LayerPtr<T>>& conv_section,
                              std::size_t in_channels, std::size_t h, std::size_t w);

/// Phases 1-3. Validates first and throws BuildError listing every
/// violation. Parameters are Glorot-initialized from `seed`.
template <typename T>
BuiltModel<T> build_model(const ModelSpec& spec, std::uint64_t seed);

/// Per-sample input shape expected by a model built from `spec`:
/// (in_channels, h, w) with a conv section, (h * w) without.
nn::Shape model_input_shape(const ModelSpec& spec);

}  // namespace dynnet::builder
