#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "dynnet/builder/model_spec.hpp"
#include "dynnet/dataio/trialset.hpp"
#include "dynnet/evaluation/results.hpp"
#include "dynnet/evaluation/splits.hpp"
#include "dynnet/fbcsp/fbcsp.hpp"
#include "dynnet/neuralnet/train.hpp"

namespace dynnet::eval {

/// Per-trial preprocessing applied before any split.
struct Preprocess {
  std::optional<std::pair<double, double>> window{{2.0, 6.0}};  // seconds
  std::optional<std::pair<double, double>> bandpass;  // Hz
  int bandpass_order = 3;
  std::optional<double> ema_decay;
  std::optional<double> resample_hz;
};

/// window -> band-pass -> resample -> EMA standardization.
data::TrialSet preprocess(const data::TrialSet& set, const Preprocess& p);

struct EegnetMethod {
  builder::ModelSpec spec;
  nn::TrainConfig train;  // seed is replaced per fold and repetition
  Preprocess preprocess{std::pair{2.0, 6.0}, std::nullopt, 3, std::nullopt, 128.0};
};

struct FbcspMethod {
  fbcsp::FbcspConfig config;
  Preprocess preprocess{};
};

using Method = std::variant<EegnetMethod, FbcspMethod>;

std::string method_name(const Method& m);

struct ExperimentOptions {
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  /// Called after each (fold, repetition) with a one-line summary.
  std::function<void(const std::string&)> log;
  /// Receives each fitted model as (first fold of its group, repetition,
  /// file extension, bytes). FBCSP models are reported once, as rep 0.
  std::function<void(std::size_t, std::size_t, const std::string&, const std::string&)> save_model;
};

/// Fits on every fold's training trials (validating when the fold has a
/// validation set) and scores its test trials, `repetitions` times with
/// seeds derive_seed(seed, fold, rep). Folds that share training and
/// validation sets are trained once per repetition. The first failure
/// aborts the run. Column name: "<method>-<scheme>".
ResultColumn run_experiment(const Method& method, const data::TrialSet& set, const SplitPlan& plan,
                            const ExperimentOptions& options);

/// (N, 1, channels, samples) float inputs with labels.
nn::LabeledTensors<float> to_tensors(const data::TrialSet& set);

}  // namespace dynnet::eval
