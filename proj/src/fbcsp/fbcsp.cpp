#include "dynnet/fbcsp/fbcsp.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "dynnet/core/bytes.hpp"
#include "dynnet/core/error.hpp"

namespace dynnet::fbcsp {

namespace {

constexpr char kMagic[5] = "FBCS";
constexpr std::uint32_t kVersion = 1;

using BandTrials = std::vector<std::vector<Eigen::MatrixXd>>;
using BandCovs = std::vector<std::vector<Eigen::MatrixXd>>;

BandCovs covariances(const BandTrials& trials) {
  BandCovs out(trials.size());
  for (std::size_t t = 0; t < trials.size(); ++t) {
    for (const auto& band : trials[t]) out[t].push_back(trial_covariance(band));
  }
  return out;
}

BinaryHead fit_head(const BandTrials& trials, const BandCovs& covs, std::span<const int> labels,
                    int positive, const FbcspConfig& config) {
  std::vector<int> binary(labels.size());
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    binary[i] = labels[i] == positive ? 1 : 0;
    n_pos += binary[i];
  }
  if (n_pos < 2 || labels.size() - n_pos < 2) {
    throw DataError(DataErrorCode::degenerate,
                    "class " + std::to_string(positive) + " vs rest needs at least 2 trials per side, have " +
                        std::to_string(n_pos) + " and " + std::to_string(labels.size() - n_pos));
  }
  const std::size_t bands = config.bands.size();
  const Eigen::Index channels = covs.front().front().rows();

  BinaryHead head;
  head.positive_class = positive;
  for (std::size_t b = 0; b < bands; ++b) {
    Eigen::MatrixXd c1 = Eigen::MatrixXd::Zero(channels, channels);
    Eigen::MatrixXd c2 = c1;
    for (std::size_t t = 0; t < covs.size(); ++t) (binary[t] ? c1 : c2) += covs[t][b];
    c1 /= static_cast<double>(n_pos);
    c2 /= static_cast<double>(labels.size() - n_pos);
    CspModel csp = csp_fit(c1, c2, config.m);
    csp.band = b;
    csp.positive_class = positive;
    head.csp.push_back(std::move(csp));
  }

  Eigen::MatrixXd features(static_cast<Eigen::Index>(trials.size()),
                           static_cast<Eigen::Index>(bands * 2 * config.m));
  for (std::size_t t = 0; t < trials.size(); ++t) {
    features.row(static_cast<Eigen::Index>(t)) = csp_features(trials[t], head.csp).transpose();
  }
  head.selected = mibif_select(features, binary, config.k, config.m);
  Eigen::MatrixXd chosen(features.rows(), static_cast<Eigen::Index>(head.selected.size()));
  for (std::size_t j = 0; j < head.selected.size(); ++j) {
    chosen.col(static_cast<Eigen::Index>(j)) = features.col(static_cast<Eigen::Index>(head.selected[j]));
  }
  head.lda = lda_fit(chosen, binary);
  return head;
}

void check_config(const FbcspConfig& config, std::size_t channels) {
  if (config.bands.empty()) throw ConfigError("FBCSP needs at least one band");
  if (config.m == 0 || 2 * config.m > channels) {
    throw ConfigError("FBCSP pairs m=" + std::to_string(config.m) + " invalid for " +
                      std::to_string(channels) + " channels");
  }
  if (config.k == 0 || config.k > config.bands.size() * 2 * config.m) {
    throw ConfigError("FBCSP k=" + std::to_string(config.k) + " exceeds the feature count");
  }
}

}  // namespace

double BinaryHead::posterior(const std::vector<Eigen::MatrixXd>& bands) const {
  const Eigen::VectorXd all = csp_features(bands, csp);
  Eigen::VectorXd x(static_cast<Eigen::Index>(selected.size()));
  for (std::size_t j = 0; j < selected.size(); ++j) {
    x(static_cast<Eigen::Index>(j)) = all(static_cast<Eigen::Index>(selected[j]));
  }
  return lda_posterior(lda, x);
}

std::vector<std::vector<Eigen::MatrixXd>> filter_trials(const data::TrialSet& set,
                                                        const signal::FilterBank& bank) {
  const std::size_t C = set.n_channels(), T = set.n_samples();
  std::vector<std::vector<Eigen::MatrixXd>> out(set.n_trials());
  std::vector<double> row(T);
  for (std::size_t t = 0; t < set.n_trials(); ++t) {
    const float* x = set.trial(t);
    for (const auto& filter : bank.filters) {
      Eigen::MatrixXd band(C, T);
      for (std::size_t c = 0; c < C; ++c) {
        std::copy(x + c * T, x + (c + 1) * T, row.begin());
        const std::vector<double> y = signal::filtfilt(filter, row);
        for (std::size_t i = 0; i < T; ++i) band(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = y[i];
      }
      out[t].push_back(std::move(band));
    }
  }
  return out;
}

BinaryHead fbcsp_fit(const data::TrialSet& train, int positive_class, const FbcspConfig& config) {
  train.validate();
  check_config(config, train.n_channels());
  const auto bank = signal::make_filter_bank(config.bands, config.order, train.fs);
  const auto trials = filter_trials(train, bank);
  return fit_head(trials, covariances(trials), train.labels, positive_class, config);
}

FbcspModel ovr_fit(const data::TrialSet& train, const FbcspConfig& config, int classes) {
  train.validate();
  check_config(config, train.n_channels());
  for (int c = 0; c < classes; ++c) {
    if (std::find(train.labels.begin(), train.labels.end(), c) == train.labels.end()) {
      throw DataError(DataErrorCode::degenerate, "class " + std::to_string(c) + " missing from training data");
    }
  }
  FbcspModel model;
  model.config = config;
  model.fs = train.fs;
  model.channels = train.n_channels();
  const auto bank = signal::make_filter_bank(config.bands, config.order, train.fs);
  const auto trials = filter_trials(train, bank);
  const auto covs = covariances(trials);
  for (int c = 0; c < classes; ++c) model.heads.push_back(fit_head(trials, covs, train.labels, c, config));
  return model;
}

int ovr_predict(const FbcspModel& model, const std::vector<Eigen::MatrixXd>& bands) {
  int best = -1;
  double best_p = -1.0;
  for (const auto& head : model.heads) {
    const double p = head.posterior(bands);
    if (p > best_p) best_p = p, best = head.positive_class;
  }
  return best;
}

std::vector<int> ovr_predict(const FbcspModel& model, const data::TrialSet& set) {
  if (set.n_channels() != model.channels || set.fs != model.fs) {
    throw DataError(DataErrorCode::invalid_argument, "trials do not match the FBCSP model's channels or rate");
  }
  const auto bank = signal::make_filter_bank(model.config.bands, model.config.order, model.fs);
  const auto trials = filter_trials(set, bank);
  std::vector<int> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(ovr_predict(model, t));
  return out;
}

int ovr_predict(const FbcspModel& model, const data::TrialSet& set, std::size_t trial) {
  const std::size_t one[] = {trial};
  return ovr_predict(model, data::subset(set, one)).front();
}

std::string serialize(const FbcspModel& model) {
  ByteWriter w;
  w.magic(kMagic);
  w.u32(kVersion);
  w.f64(model.fs);
  w.u32(static_cast<std::uint32_t>(model.channels));
  w.u32(static_cast<std::uint32_t>(model.config.bands.size()));
  for (const auto& [lo, hi] : model.config.bands) {
    w.f64(lo);
    w.f64(hi);
  }
  w.u32(static_cast<std::uint32_t>(model.config.order));
  w.u32(static_cast<std::uint32_t>(model.config.m));
  w.u32(static_cast<std::uint32_t>(model.config.k));
  w.u32(static_cast<std::uint32_t>(model.heads.size()));
  for (const auto& head : model.heads) {
    w.u32(static_cast<std::uint32_t>(head.positive_class));
    for (const auto& csp : head.csp) {
      for (Eigen::Index r = 0; r < csp.W.rows(); ++r)
        for (Eigen::Index c = 0; c < csp.W.cols(); ++c) w.f64(csp.W(r, c));
      for (Eigen::Index r = 0; r < csp.eigenvalues.size(); ++r) w.f64(csp.eigenvalues(r));
    }
    w.u32(static_cast<std::uint32_t>(head.selected.size()));
    for (std::size_t s : head.selected) w.u32(static_cast<std::uint32_t>(s));
    for (Eigen::Index i = 0; i < head.lda.w.size(); ++i) w.f64(head.lda.w(i));
    w.f64(head.lda.b);
  }
  return w.bytes();
}

FbcspModel deserialize_fbcsp(const std::string& bytes) {
  ByteReader r(bytes);
  r.expect_magic(kMagic, "FBCSP model");
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw DataError(DataErrorCode::bad_version, "unsupported FBCSP model version " + std::to_string(version));
  FbcspModel model;
  model.fs = r.f64();
  model.channels = r.u32();
  const std::uint32_t bands = r.u32();
  model.config.bands.clear();
  for (std::uint32_t b = 0; b < bands; ++b) {
    const double lo = r.f64();
    model.config.bands.emplace_back(lo, r.f64());
  }
  model.config.order = static_cast<int>(r.u32());
  model.config.m = r.u32();
  model.config.k = r.u32();
  const std::uint32_t heads = r.u32();
  const auto rows = static_cast<Eigen::Index>(2 * model.config.m);
  const auto cols = static_cast<Eigen::Index>(model.channels);
  for (std::uint32_t h = 0; h < heads; ++h) {
    BinaryHead head;
    head.positive_class = static_cast<int>(r.u32());
    for (std::uint32_t b = 0; b < bands; ++b) {
      CspModel csp;
      csp.band = b;
      csp.positive_class = head.positive_class;
      csp.W.resize(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) csp.W(i, j) = r.f64();
      csp.eigenvalues.resize(rows);
      for (Eigen::Index i = 0; i < rows; ++i) csp.eigenvalues(i) = r.f64();
      head.csp.push_back(std::move(csp));
    }
    const std::uint32_t n_sel = r.u32();
    for (std::uint32_t i = 0; i < n_sel; ++i) {
      const std::uint32_t s = r.u32();
      if (s >= bands * rows) throw DataError(DataErrorCode::invalid_argument, "selected feature index out of range");
      head.selected.push_back(s);
    }
    head.lda.w.resize(static_cast<Eigen::Index>(n_sel));
    for (std::uint32_t i = 0; i < n_sel; ++i) head.lda.w(i) = r.f64();
    head.lda.b = r.f64();
    model.heads.push_back(std::move(head));
  }
  if (!r.done()) throw DataError(DataErrorCode::invalid_argument, "trailing bytes after FBCSP model");
  return model;
}

void save(const FbcspModel& model, const std::filesystem::path& path) {
  const std::string bytes = serialize(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(DataErrorCode::io, "cannot write " + path.string());
}

FbcspModel load_fbcsp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataErrorCode::io, "cannot open " + path.string());
  return deserialize_fbcsp(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
}

}  // namespace dynnet::fbcsp
