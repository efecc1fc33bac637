#include "dynnet/neuralnet/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "dynnet/neuralnet/ops.hpp"

namespace dynnet::nn {

bool TrainReport::same_outcome(const TrainReport& o) const {
  return epoch_loss == o.epoch_loss && validation_accuracy == o.validation_accuracy &&
         epochs_run == o.epochs_run && best_epoch == o.best_epoch &&
         final_parameters == o.final_parameters;
}

namespace {

template <typename T>
double accuracy_of(Model<T>& model, const LabeledTensors<T>& set) {
  const auto pred = predict(model, set.inputs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.labels.size(); ++i) hits += pred.labels[i] == set.labels[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(pred.labels.size());
}

template <typename T>
std::vector<double> flat_parameters(Model<T>& model) {
  std::vector<double> out;
  for (auto* p : model.parameters()) {
    out.insert(out.end(), p->value.data().begin(), p->value.data().end());
  }
  return out;
}

template <typename T>
void check_set(const LabeledTensors<T>& set, const char* what) {
  if (set.inputs.rank() == 0 || set.inputs.dim(0) == 0) {
    throw ConfigError(std::string(what) + " set is empty");
  }
  if (set.labels.size() != set.inputs.dim(0)) {
    throw ConfigError(std::string(what) + " set: label count does not match inputs");
  }
}

}  // namespace

template <typename T>
TrainReport train(Model<T>& model, const LabeledTensors<T>& train_set, const TrainConfig& config,
                  const LabeledTensors<T>* validation) {
  check_set(train_set, "training");
  if (validation) check_set(*validation, "validation");
  if (config.batch_size == 0) throw ConfigError("batch size must be positive");

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = train_set.inputs.dim(0);
  const std::size_t k_out = model.output_shape().back();
  for (int y : train_set.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= k_out) {
      throw ConfigError("training label " + std::to_string(y) + " outside model output range");
    }
  }

  TrainReport report;
  Adam<T> adam(model.parameters(), config.adam);
  std::mt19937_64 shuffle_rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::optional<ModelState<T>> best_state;
  double best_accuracy = -1.0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with an explicit draw keeps the permutation identical
    // across standard library implementations.
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(shuffle_rng() % i);
      std::swap(order[i - 1], order[j]);
    }
    model.set_mode(Mode::train);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const Tensor<T> batch = gather_rows(train_set.inputs, idx);
      std::vector<int> labels(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = train_set.labels[idx[i]];

      model.zero_grad();
      const Tensor<T> out = model.forward(batch);
      auto loss = nll_loss(out, labels);
      if (!std::isfinite(loss.value)) {
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch + 1));
      }
      model.backward(loss.grad);
      adam.step();
      loss_sum += loss.value * static_cast<double>(idx.size());
    }
    report.epoch_loss.push_back(loss_sum / static_cast<double>(n));
    ++report.epochs_run;

    if (validation) {
      const double acc = accuracy_of(model, *validation);
      report.validation_accuracy.push_back(acc);
      if (acc > best_accuracy) {
        best_accuracy = acc;
        best_state = model.state();
        report.best_epoch = epoch + 1;
      }
    }
  }
  if (best_state) model.load_state(*best_state);
  model.set_mode(Mode::eval);
  report.final_parameters = flat_parameters(model);
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

template <typename T>
Prediction<T> predict(Model<T>& model, const Tensor<T>& inputs, std::size_t batch_size) {
  if (inputs.rank() == 0) throw ConfigError("predict: empty input");
  model.set_mode(Mode::eval);
  const std::size_t n = inputs.dim(0);
  const Shape out_shape = model.output_shape();
  if (out_shape.size() != 1) throw ConfigError("predict needs a model with (N, K) output");
  const std::size_t k = out_shape[0];
  Prediction<T> pred{{}, Tensor<T>(Shape{n, k})};
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < n; begin += batch_size) {
    const std::size_t end = std::min(n, begin + batch_size);
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const Tensor<T> out = model.forward(gather_rows(inputs, idx));
    std::copy(out.ptr(), out.ptr() + out.size(), pred.logprobs.ptr() + begin * k);
  }
  pred.labels = argmax_rows(pred.logprobs);
  return pred;
}

template TrainReport train(Model<float>&, const LabeledTensors<float>&, const TrainConfig&,
                           const LabeledTensors<float>*);
template TrainReport train(Model<double>&, const LabeledTensors<double>&, const TrainConfig&,
                           const LabeledTensors<double>*);
template Prediction<float> predict(Model<float>&, const Tensor<float>&, std::size_t);
template Prediction<double> predict(Model<double>&, const Tensor<double>&, std::size_t);

}  // namespace dynnet::nn
