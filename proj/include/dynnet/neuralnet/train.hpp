#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dynnet/neuralnet/adam.hpp"
#include "dynnet/neuralnet/model.hpp"

namespace dynnet::nn {

struct TrainConfig {
  std::size_t epochs = 500;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  AdamConfig adam{};
};

/// Inputs (N, ...) with one class label per row.
template <typename T>
struct LabeledTensors {
  Tensor<T> inputs;
  std::vector<int> labels;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> validation_accuracy;  // empty without a validation set
  std::size_t epochs_run = 0;
  // 1-based index of the epoch whose parameters were kept; 0 means the last
  // epoch (no validation) or the untrained initialization (epochs == 0).
  std::size_t best_epoch = 0;
  std::vector<double> final_parameters;
  double elapsed_seconds = 0.0;

  /// Compares everything except wall time.
  bool same_outcome(const TrainReport& other) const;
};

/// Mini-batch Adam on the mean NLL of the model's log-probability output.
/// Each epoch reshuffles with a generator seeded from `config.seed`. With a
/// validation set the parameters of the best-validation epoch are restored
/// at the end (first best wins on ties).
template <typename T>
TrainReport train(Model<T>& model, const LabeledTensors<T>& train_set,
                  const TrainConfig& config,
                  const LabeledTensors<T>* validation = nullptr);

template <typename T>
struct Prediction {
  std::vector<int> labels;
  Tensor<T> logprobs;
};

/// Eval-mode forward in chunks of `batch_size`; label = row argmax.
template <typename T>
Prediction<T> predict(Model<T>& model, const Tensor<T>& inputs, std::size_t batch_size = 256);

}  // namespace dynnet::nn
