#include "dynnet/dataio/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dynnet/core/error.hpp"
#include "dynnet/signal/filter.hpp"

namespace dynnet::data {

namespace {

// Kellet's economy pink-noise filter over Gaussian white noise.
class PinkNoise {
 public:
  double operator()(double white) {
    b_[0] = 0.99886 * b_[0] + white * 0.0555179;
    b_[1] = 0.99332 * b_[1] + white * 0.0750759;
    b_[2] = 0.96900 * b_[2] + white * 0.1538520;
    b_[3] = 0.86650 * b_[3] + white * 0.3104856;
    b_[4] = 0.55000 * b_[4] + white * 0.5329522;
    b_[5] = -0.7616 * b_[5] - white * 0.0168980;
    const double out = b_[0] + b_[1] + b_[2] + b_[3] + b_[4] + b_[5] + b_[6] + white * 0.5362;
    b_[6] = white * 0.115926;
    return out;
  }

 private:
  double b_[7] = {};
};

void normalize_rms(std::vector<double>& x, double target) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double& v : x) {
    v -= mean;
    ss += v * v;
  }
  const double rms = std::sqrt(ss / static_cast<double>(x.size()));
  for (double& v : x) v = rms > 0 ? v * target / rms : 0.0;
}

void check(const SynthConfig& c) {
  const std::size_t k = c.class_bands.size();
  if (k < 2 || k > static_cast<std::size_t>(kMaxLabel) + 1) {
    throw ConfigError("synthetic data needs 2 to 4 classes, got " + std::to_string(k));
  }
  if (c.class_channels.size() != k) {
    throw ConfigError("class_channels must name one channel per class");
  }
  for (std::size_t ch : c.class_channels) {
    if (ch >= c.channels) throw ConfigError("class channel " + std::to_string(ch) + " out of range");
  }
  if (c.samples == 0 || c.trials_per_class == 0 || c.subjects == 0 || c.subjects > 255) {
    throw ConfigError("synthetic set needs samples, trials and 1..255 subjects");
  }
  if (c.snr < 0.0) throw ConfigError("snr must be non-negative");
  for (std::size_t i = 0; i < k; ++i) {
    const auto [lo, hi] = c.class_bands[i];
    if (!(lo > 0.0 && lo < hi && hi < c.fs / 2.0)) {
      throw ConfigError("class band " + std::to_string(i) + " must satisfy 0 < lo < hi < fs/2");
    }
    for (std::size_t j = 0; j < i; ++j) {
      const auto [lo2, hi2] = c.class_bands[j];
      if (lo < hi2 && lo2 < hi) {
        throw ConfigError("class bands " + std::to_string(j) + " and " + std::to_string(i) +
                          " overlap");
      }
    }
  }
}

}  // namespace

TrialSet synth_mi(const SynthConfig& c) {
  check(c);
  const std::size_t classes = c.class_bands.size();
  std::vector<signal::IirFilter> bands;
  for (const auto& [lo, hi] : c.class_bands) bands.push_back(signal::butter_bandpass(4, lo, hi, c.fs));

  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> white(0.0, 1.0);
  const std::size_t per_session = classes * c.trials_per_class;
  const std::size_t n = c.subjects * 2 * per_session;
  // Run the oscillator on a longer stretch so filter edges stay outside.
  const std::size_t margin = 64;

  TrialSet set;
  set.fs = c.fs;
  set.data = nn::Tensor<float>(nn::Shape{n, c.channels, c.samples});
  std::vector<double> buf(c.samples);
  std::vector<double> osc(c.samples + 2 * margin);
  std::size_t t = 0;
  for (std::size_t s = 0; s < c.subjects; ++s) {
    for (Session session : {Session::train, Session::test}) {
      std::vector<int> order(per_session);
      for (std::size_t i = 0; i < per_session; ++i) order[i] = static_cast<int>(i % classes);
      std::shuffle(order.begin(), order.end(), rng);
      for (int label : order) {
        float* out = set.data.ptr() + t * c.channels * c.samples;
        for (std::size_t ch = 0; ch < c.channels; ++ch) {
          PinkNoise pink;
          for (int warm = 0; warm < 256; ++warm) pink(white(rng));
          for (double& v : buf) v = pink(white(rng));
          normalize_rms(buf, 1.0);
          if (ch == c.class_channels[label] && c.snr > 0.0) {
            for (double& v : osc) v = white(rng);
            osc = signal::filtfilt(bands[label], osc);
            std::vector<double> core(osc.begin() + margin, osc.begin() + margin + c.samples);
            normalize_rms(core, c.snr);
            for (std::size_t i = 0; i < c.samples; ++i) buf[i] += core[i];
          }
          for (std::size_t i = 0; i < c.samples; ++i) out[ch * c.samples + i] = static_cast<float>(buf[i]);
        }
        set.labels.push_back(label);
        set.subjects.push_back(static_cast<int>(s + 1));
        set.sessions.push_back(session);
        ++t;
      }
    }
  }
  return set;
}

}  // namespace dynnet::data
