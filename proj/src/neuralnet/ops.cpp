#include "dynnet/neuralnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dynnet::nn {

namespace {

void require_rank(const Shape& shape, std::size_t rank, const char* what) {
  if (shape.size() != rank) {
    throw BuildError(std::string(what) + " expects a rank-" + std::to_string(rank) +
                     " tensor, got " + to_string(shape));
  }
}

// Range of output positions o for which o*stride + k - pad lands in [0, in).
struct ValidRange {
  std::size_t lo;
  std::size_t hi;
};

ValidRange valid_outputs(std::size_t in, std::size_t out, std::size_t k,
                         std::size_t pad, std::size_t stride) {
  // o*stride >= pad - k  and  o*stride <= in - 1 + pad - k
  const long long shift = static_cast<long long>(pad) - static_cast<long long>(k);
  const long long s = static_cast<long long>(stride);
  long long lo = shift > 0 ? (shift + s - 1) / s : 0;
  const long long top = static_cast<long long>(in) - 1 + shift;
  long long hi = top < 0 ? 0 : top / s + 1;
  lo = std::clamp<long long>(lo, 0, static_cast<long long>(out));
  hi = std::clamp<long long>(hi, lo, static_cast<long long>(out));
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace

std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t pad,
                               std::size_t stride) {
  if (kernel == 0 || stride == 0) {
    throw BuildError("kernel and stride must be positive");
  }
  if (in + 2 * pad < kernel) {
    throw BuildError("kernel " + std::to_string(kernel) + " exceeds padded input " +
                     std::to_string(in + 2 * pad));
  }
  return (in + 2 * pad - kernel) / stride + 1;
}

Shape conv2d_output_shape(const Shape& input, const Shape& weight,
                          const Conv2dGeometry& g) {
  require_rank(input, 4, "conv2d input");
  require_rank(weight, 4, "conv2d weight");
  const std::size_t cin = input[1];
  const std::size_t cout = weight[0];
  if (g.groups == 0 || cin % g.groups != 0 || cout % g.groups != 0) {
    throw BuildError("conv2d groups " + std::to_string(g.groups) +
                     " must divide in_channels " + std::to_string(cin) +
                     " and out_channels " + std::to_string(cout));
  }
  if (weight[1] != cin / g.groups) {
    throw BuildError("conv2d weight expects " + std::to_string(weight[1] * g.groups) +
                     " input channels, got " + std::to_string(cin));
  }
  return {input[0], cout, conv_output_extent(input[2], weight[2], g.padding.h, g.stride.h),
          conv_output_extent(input[3], weight[3], g.padding.w, g.stride.w)};
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight,
                 std::type_identity_t<const Tensor<T>*> bias, const Conv2dGeometry& g) {
  const Shape out_shape = conv2d_output_shape(input.shape(), weight.shape(), g);
  const std::size_t n_batch = input.dim(0), cin = input.dim(1), H = input.dim(2),
                    W = input.dim(3);
  const std::size_t cout = out_shape[1], Ho = out_shape[2], Wo = out_shape[3];
  const std::size_t kh = weight.dim(2), kw = weight.dim(3);
  const std::size_t cin_g = cin / g.groups, cout_g = cout / g.groups;
  if (bias && bias->size() != cout) {
    throw BuildError("conv2d bias length mismatch");
  }

  Tensor<T> out(out_shape);
  for (std::size_t n = 0; n < n_batch; ++n) {
    for (std::size_t oc = 0; oc < cout; ++oc) {
      const std::size_t grp = oc / cout_g;
      T* out_plane = &out.at(n, oc, 0, 0);
      if (bias) std::fill(out_plane, out_plane + Ho * Wo, (*bias)[oc]);
      for (std::size_t icl = 0; icl < cin_g; ++icl) {
        const T* in_plane = &input.at(n, grp * cin_g + icl, 0, 0);
        const T* w = weight.ptr() + (oc * cin_g + icl) * kh * kw;
        for (std::size_t ki = 0; ki < kh; ++ki) {
          const ValidRange rows = valid_outputs(H, Ho, ki, g.padding.h, g.stride.h);
          for (std::size_t kj = 0; kj < kw; ++kj) {
            const T wv = w[ki * kw + kj];
            const ValidRange cols = valid_outputs(W, Wo, kj, g.padding.w, g.stride.w);
            for (std::size_t oh = rows.lo; oh < rows.hi; ++oh) {
              const T* in_row = in_plane + (oh * g.stride.h + ki - g.padding.h) * W;
              T* out_row = out_plane + oh * Wo;
              if (g.stride.w == 1) {
                for (std::size_t ow = cols.lo; ow < cols.hi; ++ow) {
                  out_row[ow] += wv * in_row[ow + kj - g.padding.w];
                }
              } else {
                for (std::size_t ow = cols.lo; ow < cols.hi; ++ow) {
                  out_row[ow] += wv * in_row[ow * g.stride.w + kj - g.padding.w];
                }
              }
            }
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
Conv2dGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& weight,
                               const Tensor<T>& grad_output, bool has_bias,
                               const Conv2dGeometry& g) {
  const Shape out_shape = conv2d_output_shape(input.shape(), weight.shape(), g);
  if (grad_output.shape() != out_shape) {
    throw BuildError("conv2d gradient shape " + to_string(grad_output.shape()) +
                     " does not match output " + to_string(out_shape));
  }
  const std::size_t n_batch = input.dim(0), cin = input.dim(1), H = input.dim(2),
                    W = input.dim(3);
  const std::size_t cout = out_shape[1], Ho = out_shape[2], Wo = out_shape[3];
  const std::size_t kh = weight.dim(2), kw = weight.dim(3);
  const std::size_t cin_g = cin / g.groups, cout_g = cout / g.groups;

  Conv2dGrads<T> grads{Tensor<T>(input.shape()), Tensor<T>(weight.shape()), std::nullopt};
  if (has_bias) grads.bias = Tensor<T>(Shape{cout});

  for (std::size_t n = 0; n < n_batch; ++n) {
    for (std::size_t oc = 0; oc < cout; ++oc) {
      const std::size_t grp = oc / cout_g;
      const T* gout_plane = &grad_output.at(n, oc, 0, 0);
      if (has_bias) {
        T acc{};
        for (std::size_t i = 0; i < Ho * Wo; ++i) acc += gout_plane[i];
        (*grads.bias)[oc] += acc;
      }
      for (std::size_t icl = 0; icl < cin_g; ++icl) {
        const std::size_t ic = grp * cin_g + icl;
        const T* in_plane = &input.at(n, ic, 0, 0);
        T* gin_plane = &grads.input.at(n, ic, 0, 0);
        const T* w = weight.ptr() + (oc * cin_g + icl) * kh * kw;
        T* gw = grads.weight.ptr() + (oc * cin_g + icl) * kh * kw;
        for (std::size_t ki = 0; ki < kh; ++ki) {
          const ValidRange rows = valid_outputs(H, Ho, ki, g.padding.h, g.stride.h);
          for (std::size_t kj = 0; kj < kw; ++kj) {
            const T wv = w[ki * kw + kj];
            const ValidRange cols = valid_outputs(W, Wo, kj, g.padding.w, g.stride.w);
            T acc{};
            for (std::size_t oh = rows.lo; oh < rows.hi; ++oh) {
              const std::size_t row_off = (oh * g.stride.h + ki - g.padding.h) * W;
              const T* in_row = in_plane + row_off;
              T* gin_row = gin_plane + row_off;
              const T* gout_row = gout_plane + oh * Wo;
              for (std::size_t ow = cols.lo; ow < cols.hi; ++ow) {
                const std::size_t iw = ow * g.stride.w + kj - g.padding.w;
                acc += gout_row[ow] * in_row[iw];
                gin_row[iw] += wv * gout_row[ow];
              }
            }
            gw[ki * kw + kj] += acc;
          }
        }
      }
    }
  }
  return grads;
}

bool is_known_activation(int code) {
  return code == static_cast<int>(ActivationCode::identity) ||
         code == static_cast<int>(ActivationCode::elu) ||
         code == static_cast<int>(ActivationCode::log_softmax);
}

template <typename T>
Tensor<T> elu(const Tensor<T>& x, T alpha) {
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] >= T(0) ? x[i] : alpha * std::expm1(x[i]);
  }
  return out;
}

template <typename T>
Tensor<T> elu_backward(const Tensor<T>& x, const Tensor<T>& grad_output, T alpha) {
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = grad_output[i] * (x[i] >= T(0) ? T(1) : alpha * std::exp(x[i]));
  }
  return out;
}

template <typename T>
Tensor<T> log_softmax(const Tensor<T>& x) {
  if (x.rank() == 0 || x.size() == 0) throw BuildError("log_softmax of empty tensor");
  const std::size_t k = x.shape().back();
  const std::size_t rows = x.size() / k;
  Tensor<T> out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = x.ptr() + r * k;
    T* o = out.ptr() + r * k;
    const T mx = *std::max_element(in, in + k);
    T sum{};
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(in[j] - mx);
    const T lse = mx + std::log(sum);
    for (std::size_t j = 0; j < k; ++j) o[j] = in[j] - lse;
  }
  return out;
}

template <typename T>
Tensor<T> log_softmax_backward(const Tensor<T>& output, const Tensor<T>& grad_output) {
  const std::size_t k = output.shape().back();
  const std::size_t rows = output.size() / k;
  Tensor<T> out(output.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* y = output.ptr() + r * k;
    const T* gy = grad_output.ptr() + r * k;
    T total{};
    for (std::size_t j = 0; j < k; ++j) total += gy[j];
    for (std::size_t j = 0; j < k; ++j) out[r * k + j] = gy[j] - std::exp(y[j]) * total;
  }
  return out;
}

bool is_known_pooling(int code) {
  return code == static_cast<int>(PoolCode::none) ||
         code == static_cast<int>(PoolCode::max) ||
         code == static_cast<int>(PoolCode::average);
}

Shape pool2d_output_shape(const Shape& input, Extent2 kernel) {
  require_rank(input, 4, "pool2d input");
  if (kernel.h == 0 || kernel.w == 0) throw BuildError("pool kernel must be positive");
  if (kernel.h > input[2] || kernel.w > input[3]) {
    throw BuildError("pool kernel (" + std::to_string(kernel.h) + ", " +
                     std::to_string(kernel.w) + ") larger than input " + to_string(input));
  }
  return {input[0], input[1], input[2] / kernel.h, input[3] / kernel.w};
}

template <typename T>
Tensor<T> pool2d(const Tensor<T>& input, PoolCode code, Extent2 kernel,
                 std::vector<std::size_t>* argmax) {
  const Shape out_shape = pool2d_output_shape(input.shape(), kernel);
  if (code == PoolCode::none) throw BuildError("pool2d called with code -1");
  const std::size_t H = input.dim(2), W = input.dim(3);
  const std::size_t Ho = out_shape[2], Wo = out_shape[3];
  const std::size_t planes = out_shape[0] * out_shape[1];
  Tensor<T> out(out_shape);
  if (argmax) argmax->assign(out.size(), 0);
  const T scale = T(1) / static_cast<T>(kernel.h * kernel.w);
  for (std::size_t p = 0; p < planes; ++p) {
    const T* in = input.ptr() + p * H * W;
    for (std::size_t oh = 0; oh < Ho; ++oh) {
      for (std::size_t ow = 0; ow < Wo; ++ow) {
        const std::size_t o = (p * Ho + oh) * Wo + ow;
        if (code == PoolCode::average) {
          T acc{};
          for (std::size_t i = 0; i < kernel.h; ++i) {
            const T* row = in + (oh * kernel.h + i) * W + ow * kernel.w;
            for (std::size_t j = 0; j < kernel.w; ++j) acc += row[j];
          }
          out[o] = acc * scale;
        } else {
          std::size_t best = (oh * kernel.h) * W + ow * kernel.w;
          for (std::size_t i = 0; i < kernel.h; ++i) {
            for (std::size_t j = 0; j < kernel.w; ++j) {
              const std::size_t idx = (oh * kernel.h + i) * W + ow * kernel.w + j;
              if (in[idx] > in[best]) best = idx;
            }
          }
          out[o] = in[best];
          if (argmax) (*argmax)[o] = p * H * W + best;
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> pool2d_backward(const Shape& input_shape, const Tensor<T>& grad_output,
                          PoolCode code, Extent2 kernel,
                          std::span<const std::size_t> argmax) {
  const Shape out_shape = pool2d_output_shape(input_shape, kernel);
  if (grad_output.shape() != out_shape) throw BuildError("pool2d gradient shape mismatch");
  Tensor<T> grad_in(input_shape);
  if (code == PoolCode::max) {
    if (argmax.size() != grad_output.size()) {
      throw BuildError("max pool backward needs the forward argmax");
    }
    for (std::size_t o = 0; o < grad_output.size(); ++o) grad_in[argmax[o]] += grad_output[o];
    return grad_in;
  }
  const std::size_t H = input_shape[2], W = input_shape[3];
  const std::size_t Ho = out_shape[2], Wo = out_shape[3];
  const std::size_t planes = out_shape[0] * out_shape[1];
  const T scale = T(1) / static_cast<T>(kernel.h * kernel.w);
  for (std::size_t p = 0; p < planes; ++p) {
    T* gin = grad_in.ptr() + p * H * W;
    for (std::size_t oh = 0; oh < Ho; ++oh) {
      for (std::size_t ow = 0; ow < Wo; ++ow) {
        const T g = grad_output[(p * Ho + oh) * Wo + ow] * scale;
        for (std::size_t i = 0; i < kernel.h; ++i) {
          T* row = gin + (oh * kernel.h + i) * W + ow * kernel.w;
          for (std::size_t j = 0; j < kernel.w; ++j) row[j] += g;
        }
      }
    }
  }
  return grad_in;
}

template <typename T>
Tensor<T> dense(const Tensor<T>& input, const Tensor<T>& weight,
                std::type_identity_t<const Tensor<T>*> bias) {
  require_rank(input.shape(), 2, "dense input");
  require_rank(weight.shape(), 2, "dense weight");
  const std::size_t n = input.dim(0), f = input.dim(1), k = weight.dim(1);
  if (weight.dim(0) != f) {
    throw BuildError("dense expects " + std::to_string(weight.dim(0)) +
                     " input features, got " + std::to_string(f));
  }
  if (bias && bias->size() != k) throw BuildError("dense bias length mismatch");
  Tensor<T> out(Shape{n, k});
  for (std::size_t r = 0; r < n; ++r) {
    T* o = out.ptr() + r * k;
    if (bias) std::copy(bias->ptr(), bias->ptr() + k, o);
    const T* x = input.ptr() + r * f;
    for (std::size_t i = 0; i < f; ++i) {
      const T xv = x[i];
      const T* wrow = weight.ptr() + i * k;
      for (std::size_t j = 0; j < k; ++j) o[j] += xv * wrow[j];
    }
  }
  return out;
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& input, const Tensor<T>& weight,
                             const Tensor<T>& grad_output, bool has_bias) {
  const std::size_t n = input.dim(0), f = input.dim(1), k = weight.dim(1);
  if (grad_output.shape() != Shape{n, k}) throw BuildError("dense gradient shape mismatch");
  DenseGrads<T> g{Tensor<T>(input.shape()), Tensor<T>(weight.shape()), std::nullopt};
  if (has_bias) g.bias = Tensor<T>(Shape{k});
  for (std::size_t r = 0; r < n; ++r) {
    const T* gy = grad_output.ptr() + r * k;
    const T* x = input.ptr() + r * f;
    T* gx = g.input.ptr() + r * f;
    for (std::size_t i = 0; i < f; ++i) {
      const T* wrow = weight.ptr() + i * k;
      T* gwrow = g.weight.ptr() + i * k;
      T acc{};
      for (std::size_t j = 0; j < k; ++j) {
        acc += gy[j] * wrow[j];
        gwrow[j] += x[i] * gy[j];
      }
      gx[i] = acc;
    }
    if (has_bias) {
      for (std::size_t j = 0; j < k; ++j) (*g.bias)[j] += gy[j];
    }
  }
  return g;
}

template <typename T>
LossResult<T> nll_loss(const Tensor<T>& logprobs, std::span<const int> labels) {
  require_rank(logprobs.shape(), 2, "nll_loss input");
  const std::size_t n = logprobs.dim(0), k = logprobs.dim(1);
  if (labels.size() != n) throw ConfigError("nll_loss: label count does not match batch");
  if (n == 0) throw ConfigError("nll_loss: empty batch");
  LossResult<T> result{0.0, Tensor<T>(logprobs.shape())};
  const T inv_n = T(1) / static_cast<T>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw ConfigError("nll_loss: label " + std::to_string(y) + " outside [0, " +
                        std::to_string(k) + ")");
    }
    result.value -= static_cast<double>(logprobs[i * k + y]);
    result.grad[i * k + y] = -inv_n;
  }
  result.value /= static_cast<double>(n);
  return result;
}

template <typename T>
std::vector<int> argmax_rows(const Tensor<T>& scores) {
  require_rank(scores.shape(), 2, "argmax_rows input");
  const std::size_t n = scores.dim(0), k = scores.dim(1);
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = scores.ptr() + i * k;
    out[i] = static_cast<int>(std::max_element(row, row + k) - row);
  }
  return out;
}

#define DYNNET_INSTANTIATE_OPS(T)                                                        \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>*,        \
                            const Conv2dGeometry&);                                      \
  template Conv2dGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&,            \
                                          const Tensor<T>&, bool, const Conv2dGeometry&); \
  template Tensor<T> elu(const Tensor<T>&, T);                                           \
  template Tensor<T> elu_backward(const Tensor<T>&, const Tensor<T>&, T);                \
  template Tensor<T> log_softmax(const Tensor<T>&);                                      \
  template Tensor<T> log_softmax_backward(const Tensor<T>&, const Tensor<T>&);           \
  template Tensor<T> pool2d(const Tensor<T>&, PoolCode, Extent2, std::vector<std::size_t>*); \
  template Tensor<T> pool2d_backward(const Shape&, const Tensor<T>&, PoolCode, Extent2,  \
                                     std::span<const std::size_t>);                      \
  template Tensor<T> dense(const Tensor<T>&, const Tensor<T>&, const Tensor<T>*);        \
  template DenseGrads<T> dense_backward(const Tensor<T>&, const Tensor<T>&,              \
                                        const Tensor<T>&, bool);                         \
  template LossResult<T> nll_loss(const Tensor<T>&, std::span<const int>);               \
  template std::vector<int> argmax_rows(const Tensor<T>&);

DYNNET_INSTANTIATE_OPS(float)
DYNNET_INSTANTIATE_OPS(double)

#undef DYNNET_INSTANTIATE_OPS

}  // namespace dynnet::nn
