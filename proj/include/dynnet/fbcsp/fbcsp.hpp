#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dynnet/dataio/trialset.hpp"
#include "dynnet/fbcsp/csp.hpp"
#include "dynnet/fbcsp/selection.hpp"
#include "dynnet/signal/filter.hpp"

namespace dynnet::fbcsp {

struct FbcspConfig {
  std::vector<std::pair<double, double>> bands = signal::default_bank_edges();
  int order = 3;
  std::size_t m = 2;
  std::size_t k = 4;
};

/// One class-vs-rest classifier.
struct BinaryHead {
  int positive_class = 0;
  std::vector<CspModel> csp;  // one per band
  std::vector<std::size_t> selected;
  LdaModel lda;

  /// P(positive | trial) from the band-filtered trial.
  double posterior(const std::vector<Eigen::MatrixXd>& bands) const;
};

struct FbcspModel {
  FbcspConfig config;
  double fs = 0.0;
  std::size_t channels = 0;
  std::vector<BinaryHead> heads;
};

/// Band-filtered copies of every trial: result[trial][band] is
/// (channels x samples).
std::vector<std::vector<Eigen::MatrixXd>> filter_trials(const data::TrialSet& set,
                                                        const signal::FilterBank& bank);

/// Filter bank -> class covariances -> CSP per band -> log-variance
/// features -> MIBIF -> LDA, for `positive_class` against all other labels.
BinaryHead fbcsp_fit(const data::TrialSet& train, int positive_class, const FbcspConfig& config);

/// One head per label present (all four labels 0..3 must be present
/// unless `classes` says otherwise).
FbcspModel ovr_fit(const data::TrialSet& train, const FbcspConfig& config, int classes = 4);

/// argmax over heads of the positive-class posterior.
int ovr_predict(const FbcspModel& model, const std::vector<Eigen::MatrixXd>& bands);
int ovr_predict(const FbcspModel& model, const data::TrialSet& set, std::size_t trial);
std::vector<int> ovr_predict(const FbcspModel& model, const data::TrialSet& set);

std::string serialize(const FbcspModel& model);
FbcspModel deserialize_fbcsp(const std::string& bytes);
void save(const FbcspModel& model, const std::filesystem::path& path);
FbcspModel load_fbcsp(const std::filesystem::path& path);

}  // namespace dynnet::fbcsp
