#pragma once

#include <filesystem>
#include <string>

#include "dynnet/builder/builder.hpp"

namespace dynnet::builder {

/// "DNNW" blob: version, the spec in canonical text form, then every
/// parameter and running statistic as little-endian f32.
std::string serialize_weights(const ModelSpec& spec, const nn::Model<float>& model);

struct LoadedModel {
  ModelSpec spec;
  nn::Model<float> model;
};

LoadedModel deserialize_weights(const std::string& bytes);

void save_weights(const ModelSpec& spec, const nn::Model<float>& model,
                  const std::filesystem::path& path);
LoadedModel load_weights(const std::filesystem::path& path);

}  // namespace dynnet::builder
