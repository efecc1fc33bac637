#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dynnet/neuralnet/tensor.hpp"

namespace dynnet::data {

enum class Session : std::uint8_t { train = 0, test = 1 };

inline constexpr int kMaxLabel = 3;

/// Trials of multichannel EEG with per-trial metadata.
struct TrialSet {
  nn::Tensor<float> data;  // (n_trials, n_channels, n_samples)
  std::vector<int> labels;  // 0..3
  std::vector<int> subjects;  // >= 1
  std::vector<Session> sessions;
  double fs = 0.0;

  std::size_t n_trials() const { return labels.size(); }
  std::size_t n_channels() const { return data.rank() == 3 ? data.dim(1) : 0; }
  std::size_t n_samples() const { return data.rank() == 3 ? data.dim(2) : 0; }

  /// Pointer to trial i, laid out channel-major then time.
  const float* trial(std::size_t i) const {
    return data.ptr() + i * n_channels() * n_samples();
  }

  /// Throws DataError if any invariant fails.
  void validate() const;

  friend bool operator==(const TrialSet&, const TrialSet&) = default;
};

/// Trials at `indices`, in that order.
TrialSet subset(const TrialSet& set, std::span<const std::size_t> indices);

/// Keeps samples [round(t_start*fs), round(t_end*fs)) of every trial.
TrialSet extract_window(const TrialSet& set, double t_start, double t_end);

/// Distinct subject ids in ascending order.
std::vector<int> subject_ids(const TrialSet& set);

}  // namespace dynnet::data
