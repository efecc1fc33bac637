#include "dynnet/fbcsp/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "dynnet/core/error.hpp"

namespace dynnet::fbcsp {

namespace {

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double stddev(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void check_binary(std::span<const int> labels, std::size_t n, std::size_t min_per_class) {
  if (labels.size() != n) throw ConfigError("feature and label counts differ");
  std::size_t counts[2] = {0, 0};
  for (int y : labels) {
    if (y != 0 && y != 1) throw ConfigError("binary labels must be 0 or 1");
    ++counts[y];
  }
  if (counts[0] < min_per_class || counts[1] < min_per_class) {
    throw DataError(DataErrorCode::degenerate, "each class needs at least " +
                                                   std::to_string(min_per_class) + " samples");
  }
}

}  // namespace

double mutual_information(std::span<const double> feature, std::span<const int> labels) {
  const std::size_t n = feature.size();
  check_binary(labels, n, 2);
  std::vector<double> cls[2];
  for (std::size_t i = 0; i < n; ++i) cls[labels[i]].push_back(feature[i]);

  const std::vector<double> all(feature.begin(), feature.end());
  const double overall = stddev(all);
  if (!(overall > 0.0)) return 0.0;

  const double prior[2] = {static_cast<double>(cls[0].size()) / n,
                           static_cast<double>(cls[1].size()) / n};
  const double h_y = -(prior[0] * std::log2(prior[0]) + prior[1] * std::log2(prior[1]));
  double h[2];
  for (int y = 0; y < 2; ++y) {
    double s = stddev(cls[y]);
    if (!(s > 0.0)) s = overall;
    h[y] = 1.06 * s * std::pow(static_cast<double>(cls[y].size()), -0.2);
  }

  double h_cond = 0.0;
  std::vector<double> terms;
  for (std::size_t i = 0; i < n; ++i) {
    double log_joint[2];
    for (int y = 0; y < 2; ++y) {
      terms.clear();
      for (double f : cls[y]) {
        const double z = (feature[i] - f) / h[y];
        terms.push_back(-0.5 * z * z);
      }
      const double log_density = log_sum_exp(terms) - std::log(cls[y].size() * h[y]) -
                                 0.5 * std::log(2.0 * std::numbers::pi);
      log_joint[y] = log_density + std::log(prior[y]);
    }
    const double norm = log_sum_exp({log_joint[0], log_joint[1]});
    for (int y = 0; y < 2; ++y) {
      const double p = std::exp(log_joint[y] - norm);
      if (p > 0.0) h_cond -= p * std::log2(p);
    }
  }
  h_cond /= static_cast<double>(n);
  return std::clamp(h_y - h_cond, 0.0, h_y);
}

std::size_t csp_complement(std::size_t index, std::size_t m) {
  const std::size_t per_band = 2 * m;
  const std::size_t band = index / per_band;
  return band * per_band + (per_band - 1 - index % per_band);
}

std::vector<std::size_t> mibif_select(const Eigen::MatrixXd& features, std::span<const int> labels,
                                      std::size_t k, std::size_t m) {
  const auto total = static_cast<std::size_t>(features.cols());
  if (k == 0 || k > total) {
    throw ConfigError("cannot select " + std::to_string(k) + " of " + std::to_string(total) + " features");
  }
  if (m == 0 || total % (2 * m) != 0) throw ConfigError("feature count is not a multiple of 2m");
  std::vector<double> mi(total);
  std::vector<double> column(static_cast<std::size_t>(features.rows()));
  for (std::size_t j = 0; j < total; ++j) {
    Eigen::Map<Eigen::VectorXd>(column.data(), features.rows()) = features.col(static_cast<Eigen::Index>(j));
    mi[j] = mutual_information(column, labels);
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mi[a] > mi[b]; });
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < k; ++i) {
    picked.push_back(order[i]);
    picked.push_back(csp_complement(order[i], m));
  }
  std::sort(picked.begin(), picked.end());
  picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
  return picked;
}

LdaModel lda_fit(const Eigen::MatrixXd& features, std::span<const int> labels) {
  const auto n = static_cast<std::size_t>(features.rows());
  check_binary(labels, n, 2);
  const Eigen::Index d = features.cols();
  Eigen::VectorXd mean[2] = {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  double count[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    mean[labels[i]] += features.row(static_cast<Eigen::Index>(i)).transpose();
    count[labels[i]] += 1;
  }
  mean[0] /= count[0];
  mean[1] /= count[1];
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd r = features.row(static_cast<Eigen::Index>(i)).transpose() - mean[labels[i]];
    pooled += r * r.transpose();
  }
  pooled /= static_cast<double>(n - 2);
  pooled.diagonal().array() += 1e-6 * pooled.trace() / static_cast<double>(d);

  Eigen::LDLT<Eigen::MatrixXd> solver(pooled);
  if (solver.info() != Eigen::Success || !solver.isPositive() ||
      solver.vectorD().minCoeff() <= 1e-300) {
    throw NumericError("LDA pooled covariance is singular");
  }
  LdaModel lda;
  lda.w = solver.solve(mean[1] - mean[0]);
  lda.b = -0.5 * lda.w.dot(mean[0] + mean[1]) + std::log(count[1] / count[0]);
  if (!lda.w.allFinite() || !std::isfinite(lda.b)) throw NumericError("LDA produced non-finite weights");
  return lda;
}

double lda_posterior(const LdaModel& lda, const Eigen::VectorXd& x) {
  const double score = lda.w.dot(x) + lda.b;
  return score >= 0 ? 1.0 / (1.0 + std::exp(-score)) : std::exp(score) / (1.0 + std::exp(score));
}

}  // namespace dynnet::fbcsp
