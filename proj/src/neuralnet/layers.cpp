#include "dynnet/neuralnet/layers.hpp"

#include <cmath>
#include <sstream>

namespace dynnet::nn {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::batchnorm2d: return "batchnorm2d";
    case LayerKind::activation: return "activation";
    case LayerKind::pool2d: return "pool2d";
    case LayerKind::dropout: return "dropout";
    case LayerKind::dense: return "dense";
    case LayerKind::flatten: return "flatten";
  }
  return "unknown";
}

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
Parameter<T> make_parameter(std::string name, Shape shape) {
  Tensor<T> value(shape);
  Tensor<T> grad(std::move(shape));
  return {std::move(name), std::move(value), std::move(grad)};
}

template <typename T>
void accumulate(Tensor<T>& into, const Tensor<T>& from) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
}

template <typename T>
void fill_uniform(Tensor<T>& t, double limit, std::mt19937_64& rng) {
  for (auto& v : t.data()) v = static_cast<T>((2.0 * unit_uniform(rng) - 1.0) * limit);
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(const Conv2dOptions& o) : options_(o) {
  const std::size_t g = o.geometry.groups;
  if (g == 0 || o.in_channels % g != 0 || o.out_channels % g != 0) {
    throw BuildError("conv2d: groups " + std::to_string(g) + " must divide in_channels " +
                     std::to_string(o.in_channels) + " and out_channels " +
                     std::to_string(o.out_channels));
  }
  weight_ = make_parameter<T>("weight",
                              {o.out_channels, o.in_channels / g, o.kernel.h, o.kernel.w});
  if (o.bias) bias_ = make_parameter<T>("bias", {o.out_channels});
}

template <typename T>
std::string Conv2d<T>::describe() const {
  std::ostringstream os;
  os << "conv2d " << options_.in_channels << "->" << options_.out_channels << " kernel ("
     << options_.kernel.h << ", " << options_.kernel.w << ") stride ("
     << options_.geometry.stride.h << ", " << options_.geometry.stride.w << ") padding ("
     << options_.geometry.padding.h << ", " << options_.geometry.padding.w << ") groups "
     << options_.geometry.groups << (options_.bias ? " bias" : "");
  return os.str();
}

template <typename T>
Shape Conv2d<T>::output_shape(const Shape& input) const {
  return conv2d_output_shape(input, weight_.value.shape(), options_.geometry);
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& input, Mode) {
  input_ = input;
  return conv2d(input, weight_.value, options_.bias ? &bias_.value : nullptr,
                options_.geometry);
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& grad_output) {
  auto g = conv2d_backward(input_, weight_.value, grad_output, options_.bias,
                           options_.geometry);
  accumulate(weight_.grad, g.weight);
  if (options_.bias) accumulate(bias_.grad, *g.bias);
  return std::move(g.input);
}

template <typename T>
std::vector<Parameter<T>*> Conv2d<T>::parameters() {
  if (options_.bias) return {&weight_, &bias_};
  return {&weight_};
}

// ----------------------------------------------------------- BatchNorm2d

template <typename T>
BatchNorm2d<T>::BatchNorm2d(std::size_t channels, double eps, double momentum)
    : channels_(channels),
      eps_(eps),
      momentum_(momentum),
      gamma_(make_parameter<T>("gamma", {channels})),
      beta_(make_parameter<T>("beta", {channels})),
      running_mean_(Shape{channels}),
      running_var_(Shape{channels}, T(1)) {
  gamma_.value.fill(T(1));
}

template <typename T>
std::string BatchNorm2d<T>::describe() const {
  return "batchnorm2d " + std::to_string(channels_);
}

template <typename T>
Shape BatchNorm2d<T>::output_shape(const Shape& input) const {
  if (input.size() != 4 || input[1] != channels_) {
    throw BuildError("batchnorm2d over " + std::to_string(channels_) +
                     " channels cannot take " + to_string(input));
  }
  return input;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::forward(const Tensor<T>& x, Mode mode) {
  output_shape(x.shape());
  const std::size_t N = x.dim(0), C = channels_, HW = x.dim(2) * x.dim(3);
  const std::size_t count = N * HW;
  Tensor<T> out(x.shape());
  normalized_ = Tensor<T>(x.shape());
  inv_std_.assign(C, T(0));
  mode_ = mode;
  if (mode == Mode::train && count < 2) {
    throw ConfigError("batchnorm2d in train mode needs at least 2 values per channel");
  }
  for (std::size_t c = 0; c < C; ++c) {
    double mean, var;
    if (mode == Mode::train) {
      // Shifted by the first sample: exact for constant channels.
      const double shift = x[c * HW];
      double sum = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        const T* p = x.ptr() + (n * C + c) * HW;
        for (std::size_t i = 0; i < HW; ++i) sum += p[i] - shift;
      }
      mean = shift + sum / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        const T* p = x.ptr() + (n * C + c) * HW;
        for (std::size_t i = 0; i < HW; ++i) {
          const double d = p[i] - mean;
          sq += d * d;
        }
      }
      var = sq / static_cast<double>(count);
      const double unbiased = sq / static_cast<double>(count - 1);
      running_mean_[c] = static_cast<T>((1.0 - momentum_) * running_mean_[c] + momentum_ * mean);
      running_var_[c] =
          static_cast<T>((1.0 - momentum_) * running_var_[c] + momentum_ * unbiased);
    } else {
      mean = running_mean_[c];
      var = running_var_[c];
    }
    const T inv_std = static_cast<T>(1.0 / std::sqrt(var + eps_));
    const T m = static_cast<T>(mean);
    inv_std_[c] = inv_std;
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t off = (n * C + c) * HW;
      for (std::size_t i = 0; i < HW; ++i) {
        const T xhat = (x[off + i] - m) * inv_std;
        normalized_[off + i] = xhat;
        out[off + i] = gamma_.value[c] * xhat + beta_.value[c];
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::backward(const Tensor<T>& gy) {
  const std::size_t N = gy.dim(0), C = channels_, HW = gy.dim(2) * gy.dim(3);
  const T count = static_cast<T>(N * HW);
  Tensor<T> gx(gy.shape());
  for (std::size_t c = 0; c < C; ++c) {
    T sum_g{}, sum_gx{};
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t off = (n * C + c) * HW;
      for (std::size_t i = 0; i < HW; ++i) {
        sum_g += gy[off + i];
        sum_gx += gy[off + i] * normalized_[off + i];
      }
    }
    gamma_.grad[c] += sum_gx;
    beta_.grad[c] += sum_g;
    const T gamma = gamma_.value[c];
    const T inv_std = inv_std_[c];
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t off = (n * C + c) * HW;
      for (std::size_t i = 0; i < HW; ++i) {
        if (mode_ == Mode::train) {
          gx[off + i] = gamma * inv_std / count *
                        (count * gy[off + i] - sum_g - normalized_[off + i] * sum_gx);
        } else {
          gx[off + i] = gamma * inv_std * gy[off + i];
        }
      }
    }
  }
  return gx;
}

// ------------------------------------------------------------ Activation

template <typename T>
Activation<T>::Activation(int code) {
  if (!is_known_activation(code) || code == static_cast<int>(ActivationCode::identity)) {
    throw ConfigError("unknown activation code " + std::to_string(code));
  }
  code_ = static_cast<ActivationCode>(code);
}

template <typename T>
std::string Activation<T>::describe() const {
  return code_ == ActivationCode::elu ? "activation elu" : "activation log_softmax";
}

template <typename T>
Tensor<T> Activation<T>::forward(const Tensor<T>& input, Mode) {
  if (code_ == ActivationCode::elu) {
    cache_ = input;
    return elu(input);
  }
  cache_ = log_softmax(input);
  return cache_;
}

template <typename T>
Tensor<T> Activation<T>::backward(const Tensor<T>& grad_output) {
  if (code_ == ActivationCode::elu) return elu_backward(cache_, grad_output);
  return log_softmax_backward(cache_, grad_output);
}

// ---------------------------------------------------------------- Pool2d

template <typename T>
Pool2d<T>::Pool2d(PoolCode code, Extent2 kernel) : code_(code), kernel_(kernel) {
  if (code == PoolCode::none) throw ConfigError("pool2d layer needs code 0 or 1");
  if (kernel.h == 0 || kernel.w == 0) throw BuildError("pool kernel must be positive");
}

template <typename T>
std::string Pool2d<T>::describe() const {
  return std::string(code_ == PoolCode::max ? "maxpool" : "avgpool") + " (" +
         std::to_string(kernel_.h) + ", " + std::to_string(kernel_.w) + ")";
}

template <typename T>
Shape Pool2d<T>::output_shape(const Shape& input) const {
  return pool2d_output_shape(input, kernel_);
}

template <typename T>
Tensor<T> Pool2d<T>::forward(const Tensor<T>& input, Mode) {
  input_shape_ = input.shape();
  return pool2d(input, code_, kernel_, code_ == PoolCode::max ? &argmax_ : nullptr);
}

template <typename T>
Tensor<T> Pool2d<T>::backward(const Tensor<T>& grad_output) {
  return pool2d_backward(input_shape_, grad_output, code_, kernel_, argmax_);
}

// --------------------------------------------------------------- Dropout

template <typename T>
Dropout<T>::Dropout(double p, std::uint64_t seed) : p_(p), rng_(seed) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("dropout probability must lie in [0, 1), got " + std::to_string(p));
  }
}

template <typename T>
std::string Dropout<T>::describe() const {
  std::ostringstream os;
  os << "dropout " << p_;
  return os.str();
}

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& input, Mode mode) {
  masked_ = mode == Mode::train && p_ > 0.0;
  if (!masked_) return input;
  mask_ = Tensor<T>(input.shape());
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p_));
  Tensor<T> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    mask_[i] = unit_uniform(rng_) < p_ ? T(0) : keep_scale;
    out[i] = input[i] * mask_[i];
  }
  return out;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& grad_output) {
  if (!masked_) return grad_output;
  Tensor<T> g(grad_output.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = grad_output[i] * mask_[i];
  return g;
}

// ----------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(std::size_t in_features, std::size_t out_features, bool bias)
    : in_features_(in_features),
      out_features_(out_features),
      has_bias_(bias),
      weight_(make_parameter<T>("weight", {in_features, out_features})) {
  if (in_features == 0 || out_features == 0) throw BuildError("dense layer with zero width");
  if (bias) bias_ = make_parameter<T>("bias", {out_features});
}

template <typename T>
std::string Dense<T>::describe() const {
  return "dense " + std::to_string(in_features_) + "->" + std::to_string(out_features_) +
         (has_bias_ ? " bias" : "");
}

template <typename T>
Shape Dense<T>::output_shape(const Shape& input) const {
  if (input.size() != 2 || input[1] != in_features_) {
    throw BuildError("dense expects (N, " + std::to_string(in_features_) + "), got " +
                     to_string(input));
  }
  return {input[0], out_features_};
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& input, Mode) {
  output_shape(input.shape());
  input_ = input;
  return dense(input, weight_.value, has_bias_ ? &bias_.value : nullptr);
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& grad_output) {
  auto g = dense_backward(input_, weight_.value, grad_output, has_bias_);
  accumulate(weight_.grad, g.weight);
  if (has_bias_) accumulate(bias_.grad, *g.bias);
  return std::move(g.input);
}

template <typename T>
std::vector<Parameter<T>*> Dense<T>::parameters() {
  if (has_bias_) return {&weight_, &bias_};
  return {&weight_};
}

// --------------------------------------------------------------- Flatten

template <typename T>
Shape Flatten<T>::output_shape(const Shape& input) const {
  if (input.empty()) throw BuildError("flatten of a scalar");
  std::size_t features = 1;
  for (std::size_t i = 1; i < input.size(); ++i) features *= input[i];
  return {input[0], features};
}

template <typename T>
Tensor<T> Flatten<T>::forward(const Tensor<T>& input, Mode) {
  input_shape_ = input.shape();
  return input.reshaped(output_shape(input.shape()));
}

template <typename T>
Tensor<T> Flatten<T>::backward(const Tensor<T>& grad_output) {
  return grad_output.reshaped(input_shape_);
}

// ------------------------------------------------------------------ init

template <typename T>
void glorot_initialize(Layer<T>& layer, std::mt19937_64& rng) {
  if (auto* conv = dynamic_cast<Conv2d<T>*>(&layer)) {
    const auto& o = conv->options();
    const double receptive = static_cast<double>(o.kernel.h * o.kernel.w);
    const double fan_in = static_cast<double>(o.in_channels / o.geometry.groups) * receptive;
    const double fan_out = static_cast<double>(o.out_channels) * receptive;
    fill_uniform(conv->weight().value, std::sqrt(6.0 / (fan_in + fan_out)), rng);
    if (auto* b = conv->bias()) b->value.fill(T(0));
  } else if (auto* fc = dynamic_cast<Dense<T>*>(&layer)) {
    const double fan_in = static_cast<double>(fc->in_features());
    const double fan_out = static_cast<double>(fc->out_features());
    fill_uniform(fc->weight().value, std::sqrt(6.0 / (fan_in + fan_out)), rng);
    if (auto* b = fc->bias()) b->value.fill(T(0));
  } else if (auto* bn = dynamic_cast<BatchNorm2d<T>*>(&layer)) {
    bn->gamma().value.fill(T(1));
    bn->beta().value.fill(T(0));
  }
}

template class Conv2d<float>;
template class Conv2d<double>;
template class BatchNorm2d<float>;
template class BatchNorm2d<double>;
template class Activation<float>;
template class Activation<double>;
template class Pool2d<float>;
template class Pool2d<double>;
template class Dropout<float>;
template class Dropout<double>;
template class Dense<float>;
template class Dense<double>;
template class Flatten<float>;
template class Flatten<double>;
template void glorot_initialize(Layer<float>&, std::mt19937_64&);
template void glorot_initialize(Layer<double>&, std::mt19937_64&);

}  // namespace dynnet::nn
