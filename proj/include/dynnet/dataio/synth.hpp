#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dynnet/dataio/trialset.hpp"

namespace dynnet::data {

/// Band-power motor-imagery stand-in: every trial is unit-variance pink
/// noise on all channels plus, for its class, band-limited noise in that
/// class's band on that class's channels, scaled to rms `snr`.
struct SynthConfig {
  std::size_t channels = 8;
  std::size_t samples = 500;
  double fs = 250.0;
  std::vector<std::pair<double, double>> class_bands{{9, 11}, {29, 31}};
  std::vector<std::size_t> class_channels{0, 1};
  double snr = 1.0;
  std::size_t trials_per_class = 40;  // per subject and session
  std::size_t subjects = 1;
  std::uint64_t seed = 1;
};

/// Trials ordered subject, then session (train first), then shuffled
/// classes. Throws ConfigError on overlapping bands or bad channel indices.
TrialSet synth_mi(const SynthConfig& config);

}  // namespace dynnet::data
