#include "dynnet/dataio/trialset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dynnet/core/error.hpp"

namespace dynnet::data {

void TrialSet::validate() const {
  const std::size_t n = labels.size();
  if (data.rank() != 3) {
    throw DataError(DataErrorCode::invalid_argument,
                    "trial data must be (trials, channels, samples), got " +
                        nn::to_string(data.shape()));
  }
  if (data.dim(0) != n || subjects.size() != n || sessions.size() != n) {
    throw DataError(DataErrorCode::invalid_argument, "per-trial metadata lengths disagree");
  }
  if (!(fs > 0.0)) throw DataError(DataErrorCode::invalid_argument, "sampling rate must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] > kMaxLabel) {
      throw DataError(DataErrorCode::label_out_of_range,
                      "trial " + std::to_string(i) + " has label " + std::to_string(labels[i]));
    }
    if (subjects[i] < 1 || subjects[i] > 255) {
      throw DataError(DataErrorCode::subject_out_of_range,
                      "trial " + std::to_string(i) + " has subject " + std::to_string(subjects[i]));
    }
    if (sessions[i] != Session::train && sessions[i] != Session::test) {
      throw DataError(DataErrorCode::invalid_argument,
                      "trial " + std::to_string(i) + " has an unknown session flag");
    }
  }
}

TrialSet subset(const TrialSet& set, std::span<const std::size_t> indices) {
  TrialSet out;
  out.fs = set.fs;
  out.data = nn::gather_rows(set.data, indices);
  for (std::size_t i : indices) {
    if (i >= set.n_trials()) {
      throw DataError(DataErrorCode::invalid_argument, "trial index " + std::to_string(i) + " out of range");
    }
    out.labels.push_back(set.labels[i]);
    out.subjects.push_back(set.subjects[i]);
    out.sessions.push_back(set.sessions[i]);
  }
  return out;
}

TrialSet extract_window(const TrialSet& set, double t_start, double t_end) {
  const double b = std::round(t_start * set.fs);
  const double e = std::round(t_end * set.fs);
  if (!(b >= 0.0) || !(e > b) || e > static_cast<double>(set.n_samples())) {
    std::ostringstream os;
    os << "window [" << t_start << ", " << t_end << ") s is empty or outside trials of "
       << set.n_samples() << " samples at " << set.fs << " Hz";
    throw DataError(DataErrorCode::invalid_argument, os.str());
  }
  const auto begin = static_cast<std::size_t>(b);
  const auto len = static_cast<std::size_t>(e) - begin;
  const std::size_t rows = set.n_trials() * set.n_channels();
  const std::size_t old_len = set.n_samples();
  TrialSet out = set;
  out.data = nn::Tensor<float>(nn::Shape{set.n_trials(), set.n_channels(), len});
  for (std::size_t r = 0; r < rows; ++r) {
    const float* from = set.data.ptr() + r * old_len + begin;
    std::copy(from, from + len, out.data.ptr() + r * len);
  }
  return out;
}

std::vector<int> subject_ids(const TrialSet& set) {
  std::vector<int> ids = set.subjects;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace dynnet::data
