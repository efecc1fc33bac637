#include "dynnet/builder/builder.hpp"

#include <random>
#include <sstream>

#include "dynnet/core/log.hpp"
#include "dynnet/core/seed.hpp"

namespace dynnet::builder {

using nn::Shape;

std::string to_string(const Violation& v) {
  std::string s = v.layer ? "layer " + std::to_string(*v.layer) + ": " : std::string{};
  return s + v.key + ": " + v.message;
}

namespace {

void check_length(std::vector<Violation>& out, const char* key, std::size_t actual,
                  std::size_t expected, const char* expected_name) {
  if (actual != expected) {
    out.push_back({std::nullopt, key,
                   std::string(key) + " length " + std::to_string(actual) + " != " +
                       expected_name + " " + std::to_string(expected)});
  }
}

bool dropout_ok(double p) { return p == kAbsent || (p >= 0.0 && p < 1.0); }

}  // namespace

std::vector<Violation> validate_spec(const ModelSpec& s) {
  std::vector<Violation> out;
  const std::size_t total = s.layers_cnn + s.layers_ff;
  if (total == 0) out.push_back({std::nullopt, "layers", "model has no layers"});
  if (s.h == 0) out.push_back({std::nullopt, "h", "input height must be positive"});
  if (s.w == 0) out.push_back({std::nullopt, "w", "input width must be positive"});

  const std::size_t n = s.layers_cnn;
  check_length(out, "kernel_list", s.kernel_list.size(), n, "layers_cnn");
  check_length(out, "filters_list", s.filters_list.size(), n, "layers_cnn");
  if (!s.stride_list.empty()) check_length(out, "stride_list", s.stride_list.size(), n, "layers_cnn");
  check_length(out, "padding_list", s.padding_list.size(), n, "layers_cnn");
  check_length(out, "pooling_list", s.pooling_list.size(), n, "layers_cnn");
  check_length(out, "groups_list", s.groups_list.size(), n, "layers_cnn");
  check_length(out, "CNN_normalization_list", s.cnn_normalization_list.size(), n, "layers_cnn");
  check_length(out, "neurons_list", s.neurons_list.size(), s.layers_ff, "layers_ff");
  check_length(out, "activation_list", s.activation_list.size(), total,
               "layers_cnn + layers_ff");
  check_length(out, "dropout_list", s.dropout_list.size(), total, "layers_cnn + layers_ff");
  if (s.bias_list.size() < total) {
    out.push_back({std::nullopt, "bias_list",
                   "bias_list length " + std::to_string(s.bias_list.size()) +
                       " < layers_cnn + layers_ff " + std::to_string(total)});
  }

  for (std::size_t i = 0; i < s.activation_list.size(); ++i) {
    if (!nn::is_known_activation(s.activation_list[i])) {
      out.push_back({i, "activation_list",
                     "unknown activation code " + std::to_string(s.activation_list[i])});
    }
  }
  for (std::size_t i = 0; i < s.dropout_list.size(); ++i) {
    if (!dropout_ok(s.dropout_list[i])) {
      std::ostringstream os;
      os << "dropout probability " << s.dropout_list[i] << " outside [0, 1)";
      out.push_back({i, "dropout_list", os.str()});
    }
  }
  for (std::size_t i = 0; i < s.neurons_list.size(); ++i) {
    if (s.neurons_list[i] == 0) out.push_back({n + i, "neurons_list", "zero neurons"});
  }

  // Per-block checks only make sense where every per-block list has entries.
  std::size_t usable = std::min({n, s.kernel_list.size(), s.filters_list.size(),
                                 s.padding_list.size(), s.pooling_list.size(),
                                 s.groups_list.size()});
  if (!s.stride_list.empty()) usable = std::min(usable, s.stride_list.size());

  bool structure_ok = true;
  for (std::size_t i = 0; i < usable; ++i) {
    const auto& f = s.filters_list[i];
    if (f.in == 0 || f.out == 0) {
      out.push_back({i, "filters_list", "channel counts must be positive"});
      structure_ok = false;
    }
    if (i + 1 < usable && s.filters_list[i + 1].in != f.out) {
      out.push_back({i + 1, "filters_list",
                     "channel chain " + std::to_string(f.out) + "≠" +
                         std::to_string(s.filters_list[i + 1].in)});
      structure_ok = false;
    }
    const std::size_t g = s.groups_list[i];
    if (g == 0 || f.in % g != 0 || f.out % g != 0) {
      out.push_back({i, "groups_list",
                     "groups " + std::to_string(g) + " must divide in_channels " +
                         std::to_string(f.in) + " and out_channels " + std::to_string(f.out)});
      structure_ok = false;
    }
    if (s.kernel_list[i].h == 0 || s.kernel_list[i].w == 0) {
      out.push_back({i, "kernel_list", "kernel extents must be positive"});
      structure_ok = false;
    }
    const Extent2 st = s.stride(i);
    if (st.h == 0 || st.w == 0) {
      out.push_back({i, "stride_list", "stride must be positive"});
      structure_ok = false;
    }
    const auto& p = s.pooling_list[i];
    if (!nn::is_known_pooling(p.code)) {
      out.push_back({i, "pooling_list", "unknown pooling code " + std::to_string(p.code)});
      structure_ok = false;
    } else if (p.code != kAbsent && (p.kernel.h == 0 || p.kernel.w == 0)) {
      out.push_back({i, "pooling_list", "pool kernel extents must be positive"});
      structure_ok = false;
    }
  }

  // Shape propagation through the conv section.
  if (structure_ok && usable == n && s.h > 0 && s.w > 0) {
    std::size_t H = s.h, W = s.w;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& k = s.kernel_list[i];
      const auto& pad = s.padding_list[i];
      const Extent2 st = s.stride(i);
      if (H + 2 * pad.h < k.h || W + 2 * pad.w < k.w) {
        out.push_back({i, "kernel_list",
                       "kernel (" + std::to_string(k.h) + ", " + std::to_string(k.w) +
                           ") does not fit padded input (" + std::to_string(H + 2 * pad.h) +
                           ", " + std::to_string(W + 2 * pad.w) + "): output dimension <= 0"});
        break;
      }
      H = (H + 2 * pad.h - k.h) / st.h + 1;
      W = (W + 2 * pad.w - k.w) / st.w + 1;
      const auto& pool = s.pooling_list[i];
      if (pool.code != kAbsent) {
        if (pool.kernel.h > H || pool.kernel.w > W) {
          out.push_back({i, "pooling_list",
                         "pool kernel (" + std::to_string(pool.kernel.h) + ", " +
                             std::to_string(pool.kernel.w) + ") larger than input (" +
                             std::to_string(H) + ", " + std::to_string(W) +
                             "): output dimension <= 0"});
          break;
        }
        H /= pool.kernel.h;
        W /= pool.kernel.w;
      }
    }
  }
  return out;
}

template <typename T>
std::vector<nn::LayerPtr<T>> build_conv_section(const ModelSpec& s, std::uint64_t seed) {
  std::vector<nn::LayerPtr<T>> layers;
  for (std::size_t i = 0; i < s.layers_cnn; ++i) {
    nn::Conv2dOptions o;
    o.in_channels = s.filters_list.at(i).in;
    o.out_channels = s.filters_list.at(i).out;
    o.kernel = s.kernel_list.at(i);
    o.geometry.stride = s.stride(i);
    o.geometry.padding = s.padding_list.at(i);
    o.geometry.groups = s.groups_list.at(i);
    o.bias = s.bias_list.at(i);
    layers.push_back(std::make_unique<nn::Conv2d<T>>(o));
    if (s.cnn_normalization_list.at(i)) {
      layers.push_back(std::make_unique<nn::BatchNorm2d<T>>(o.out_channels));
    }
    if (s.activation_list.at(i) != kAbsent) {
      layers.push_back(std::make_unique<nn::Activation<T>>(s.activation_list[i]));
    }
    if (const auto& pool = s.pooling_list.at(i); pool.code != kAbsent) {
      layers.push_back(
          std::make_unique<nn::Pool2d<T>>(static_cast<nn::PoolCode>(pool.code), pool.kernel));
    }
    if (s.dropout_list.at(i) != kAbsent) {
      layers.push_back(std::make_unique<nn::Dropout<T>>(s.dropout_list[i],
                                                        splitmix64(seed ^ (i + 1))));
    }
  }
  return layers;
}

template <typename T>
std::size_t infer_flatten_dim(const std::vector<nn::LayerPtr<T>>& conv_section,
                              std::size_t in_channels, std::size_t h, std::size_t w) {
  Shape shape{1, in_channels, h, w};
  for (std::size_t i = 0; i < conv_section.size(); ++i) {
    try {
      shape = conv_section[i]->output_shape(shape);
    } catch (const BuildError& e) {
      throw BuildError("layer " + std::to_string(i) + " (" + conv_section[i]->describe() +
                       "): " + e.what());
    }
    for (std::size_t d = 1; d < shape.size(); ++d) {
      if (shape[d] == 0) {
        throw BuildError("layer " + std::to_string(i) + " (" + conv_section[i]->describe() +
                         ") produces a zero dimension " + nn::to_string(shape));
      }
    }
  }
  return nn::shape_size(shape);
}

Shape model_input_shape(const ModelSpec& s) {
  if (s.layers_cnn == 0) return {s.h * s.w};
  return {s.filters_list.at(0).in, s.h, s.w};
}

template <typename T>
BuiltModel<T> build_model(const ModelSpec& s, std::uint64_t seed) {
  if (auto violations = validate_spec(s); !violations.empty()) {
    std::string msg = "invalid model spec:";
    for (const auto& v : violations) msg += "\n  " + to_string(v);
    throw BuildError(msg);
  }
  BuildReport report;
  const std::size_t total = s.layers_cnn + s.layers_ff;
  if (s.bias_list.size() > total) {
    const std::string w = "bias_list has " + std::to_string(s.bias_list.size()) +
                          " entries for " + std::to_string(total) + " layers; surplus ignored";
    report.warnings.push_back(w);
    warn(w);
  }

  std::vector<nn::LayerPtr<T>> layers = build_conv_section<T>(s, seed);
  std::size_t features = s.h * s.w;
  if (s.layers_cnn > 0) {
    features = infer_flatten_dim(layers, s.filters_list[0].in, s.h, s.w);
    if (s.layers_ff > 0) {
      report.flatten_dim = features;
      layers.push_back(std::make_unique<nn::Flatten<T>>());
    }
  }
  for (std::size_t j = 0; j < s.layers_ff; ++j) {
    const std::size_t idx = s.layers_cnn + j;
    layers.push_back(std::make_unique<nn::Dense<T>>(features, s.neurons_list[j], s.bias_list[idx]));
    if (s.activation_list[idx] != kAbsent) {
      layers.push_back(std::make_unique<nn::Activation<T>>(s.activation_list[idx]));
    }
    if (s.dropout_list[idx] != kAbsent) {
      layers.push_back(
          std::make_unique<nn::Dropout<T>>(s.dropout_list[idx], splitmix64(seed ^ (idx + 1))));
    }
    features = s.neurons_list[j];
  }

  std::mt19937_64 rng(seed);
  for (auto& l : layers) nn::glorot_initialize(*l, rng);

  const Shape input = model_input_shape(s);
  nn::Model<T> model(input, std::move(layers), seed);

  Shape shape{1};
  shape.insert(shape.end(), input.begin(), input.end());
  for (std::size_t i = 0; i < model.size(); ++i) {
    Shape next = model.layer(i).output_shape(shape);
    report.layers.push_back({model.layer(i).describe(), shape, next});
    shape = std::move(next);
  }
  report.parameter_count = model.parameter_count();
  return {std::move(model), std::move(report)};
}

template std::vector<nn::LayerPtr<float>> build_conv_section(const ModelSpec&, std::uint64_t);
template std::vector<nn::LayerPtr<double>> build_conv_section(const ModelSpec&, std::uint64_t);
template std::size_t infer_flatten_dim(const std::vector<nn::LayerPtr<float>>&, std::size_t,
                                       std::size_t, std::size_t);
template std::size_t infer_flatten_dim(const std::vector<nn::LayerPtr<double>>&, std::size_t,
                                       std::size_t, std::size_t);
template BuiltModel<float> build_model(const ModelSpec&, std::uint64_t);
template BuiltModel<double> build_model(const ModelSpec&, std::uint64_t);

}  // namespace dynnet::builder
