#include "dynnet/neuralnet/model.hpp"

#include "dynnet/core/seed.hpp"

namespace dynnet::nn {

namespace {

Shape with_batch(const Shape& per_sample, std::size_t batch) {
  Shape s{batch};
  s.insert(s.end(), per_sample.begin(), per_sample.end());
  return s;
}

}  // namespace

template <typename T>
Model<T>::Model(Shape input_shape, std::vector<LayerPtr<T>> layers, std::uint64_t seed)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers)), seed_(seed) {
  Shape s = with_batch(input_shape_, 1);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    try {
      s = layers_[i]->output_shape(s);
    } catch (const BuildError& e) {
      throw BuildError("layer " + std::to_string(i) + " (" + layers_[i]->describe() +
                       "): " + e.what());
    }
  }
  reseed(seed);
}

template <typename T>
Model<T>::Model(const Model& other)
    : input_shape_(other.input_shape_), mode_(other.mode_), seed_(other.seed_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

template <typename T>
Model<T>& Model<T>::operator=(const Model& other) {
  if (this != &other) {
    Model copy(other);
    *this = std::move(copy);
  }
  return *this;
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& input) {
  if (input.rank() != input_shape_.size() + 1 ||
      !std::equal(input_shape_.begin(), input_shape_.end(), input.shape().begin() + 1)) {
    throw ConfigError("model expects input (N, ...) with per-sample shape " +
                      to_string(input_shape_) + ", got " + to_string(input.shape()));
  }
  Tensor<T> x = input;
  for (auto& l : layers_) x = l->forward(x, mode_);
  return x;
}

template <typename T>
Tensor<T> Model<T>::backward(const Tensor<T>& grad_output) {
  Tensor<T> g = grad_output;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

template <typename T>
void Model<T>::reseed(std::uint64_t seed) {
  seed_ = seed;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->reseed(splitmix64(seed ^ splitmix64(i + 1)));
  }
}

template <typename T>
std::vector<Parameter<T>*> Model<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& l : layers_) {
    for (auto* p : l->parameters()) out.push_back(p);
  }
  return out;
}

template <typename T>
void Model<T>::zero_grad() {
  for (auto* p : parameters()) p->grad.fill(T(0));
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) {
    for (const auto* p : l->parameters()) n += p->value.size();
  }
  return n;
}

template <typename T>
Shape Model<T>::output_shape() const {
  Shape s = with_batch(input_shape_, 1);
  for (const auto& l : layers_) s = l->output_shape(s);
  return Shape(s.begin() + 1, s.end());
}

template <typename T>
ModelState<T> Model<T>::state() const {
  ModelState<T> st;
  for (const auto& l : layers_) {
    for (const auto* p : l->parameters()) {
      st.values.insert(st.values.end(), p->value.data().begin(), p->value.data().end());
    }
    for (const auto* b : l->buffers()) {
      st.values.insert(st.values.end(), b->data().begin(), b->data().end());
    }
  }
  return st;
}

template <typename T>
void Model<T>::load_state(const ModelState<T>& st) {
  std::size_t pos = 0;
  auto take = [&](Tensor<T>& t) {
    if (pos + t.size() > st.values.size()) throw ConfigError("model state too short");
    std::copy(st.values.begin() + static_cast<std::ptrdiff_t>(pos),
              st.values.begin() + static_cast<std::ptrdiff_t>(pos + t.size()), t.ptr());
    pos += t.size();
  };
  for (auto& l : layers_) {
    for (auto* p : l->parameters()) take(p->value);
    for (auto* b : l->buffers()) take(*b);
  }
  if (pos != st.values.size()) throw ConfigError("model state length mismatch");
}

template class Model<float>;
template class Model<double>;

}  // namespace dynnet::nn
