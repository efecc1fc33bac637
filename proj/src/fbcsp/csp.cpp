#include "dynnet/fbcsp/csp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dynnet/core/error.hpp"
#include "dynnet/core/log.hpp"

namespace dynnet::fbcsp {

namespace {

constexpr double kVarianceFloor = 1e-12;

// Fix the sign of each eigenvector so its largest-magnitude entry is
// positive; keeps fits reproducible across Eigen versions.
void canonical_signs(Eigen::MatrixXd& rows) {
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    Eigen::Index at = 0;
    rows.row(r).cwiseAbs().maxCoeff(&at);
    if (rows(r, at) < 0) rows.row(r) *= -1.0;
  }
}

}  // namespace

Eigen::MatrixXd trial_covariance(const Eigen::MatrixXd& trial) {
  const Eigen::MatrixXd centered = trial.colwise() - trial.rowwise().mean();
  Eigen::MatrixXd cov = centered * centered.transpose();
  const double tr = cov.trace();
  if (!(tr > 0.0)) throw DataError(DataErrorCode::degenerate, "degenerate trial: zero variance on every channel");
  cov /= tr;
  return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd trial_covariance(const float* trial, std::size_t channels, std::size_t samples) {
  Eigen::MatrixXd x(channels, samples);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t t = 0; t < samples; ++t) x(c, t) = trial[c * samples + t];
  return trial_covariance(x);
}

CspModel csp_fit(const Eigen::MatrixXd& C1, const Eigen::MatrixXd& C2, std::size_t m) {
  const Eigen::Index n = C1.rows();
  if (C1.cols() != n || C2.rows() != n || C2.cols() != n) {
    throw ConfigError("CSP covariances must be square and of equal size");
  }
  if (m == 0 || 2 * m > static_cast<std::size_t>(n)) {
    throw ConfigError("CSP needs 1 <= m <= channels/2, got m=" + std::to_string(m) +
                      " for " + std::to_string(n) + " channels");
  }
  Eigen::MatrixXd A = C1, B = C2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> composite(A + B);
  const double top = composite.eigenvalues().maxCoeff();
  const double bottom = composite.eigenvalues().minCoeff();
  if (!(top > 0.0)) throw NumericError("CSP composite covariance is zero");
  if (bottom <= 1e-12 * top) {
    const double ridge = 1e-9 * (A + B).trace();
    std::ostringstream os;
    os << "near-singular composite covariance (eigenvalue ratio " << bottom / top
       << "); adding ridge " << ridge;
    warn(os.str());
    A.diagonal().array() += ridge / 2;
    B.diagonal().array() += ridge / 2;
    composite.compute(A + B);
  }
  // P = D^{-1/2} U^T whitens A + B.
  const Eigen::MatrixXd P = composite.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                            composite.eigenvectors().transpose();
  const Eigen::MatrixXd S = P * A * P.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> whitened(0.5 * (S + S.transpose()));
  // Eigen sorts ascending; take descending order so row j pairs with 2m-1-j.
  const Eigen::MatrixXd all = whitened.eigenvectors().transpose() * P;
  const Eigen::VectorXd& lambda = whitened.eigenvalues();

  CspModel model;
  model.W.resize(static_cast<Eigen::Index>(2 * m), n);
  model.eigenvalues.resize(static_cast<Eigen::Index>(2 * m));
  for (std::size_t j = 0; j < m; ++j) {
    const Eigen::Index hi = n - 1 - static_cast<Eigen::Index>(j);
    const Eigen::Index lo = static_cast<Eigen::Index>(m - 1 - j);
    model.W.row(static_cast<Eigen::Index>(j)) = all.row(hi);
    model.eigenvalues(static_cast<Eigen::Index>(j)) = lambda(hi);
    model.W.row(static_cast<Eigen::Index>(m + j)) = all.row(lo);
    model.eigenvalues(static_cast<Eigen::Index>(m + j)) = lambda(lo);
  }
  canonical_signs(model.W);
  return model;
}

Eigen::VectorXd log_variance_ratio(const Eigen::VectorXd& variances) {
  Eigen::VectorXd v = variances;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v(i) >= kVarianceFloor)) {
      warn("projected variance " + std::to_string(v(i)) + " clamped to 1e-12");
      v(i) = kVarianceFloor;
    }
  }
  return (v / v.sum()).array().log();
}

Eigen::VectorXd csp_features(const std::vector<Eigen::MatrixXd>& bands,
                             const std::vector<CspModel>& models) {
  if (bands.size() != models.size()) {
    throw ConfigError("have " + std::to_string(bands.size()) + " filtered bands for " +
                      std::to_string(models.size()) + " CSP models");
  }
  Eigen::Index total = 0;
  for (const auto& m : models) total += m.W.rows();
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const Eigen::MatrixXd z = models[b].W * bands[b];
    const Eigen::MatrixXd centered = z.colwise() - z.rowwise().mean();
    const Eigen::VectorXd var = centered.rowwise().squaredNorm() / static_cast<double>(z.cols());
    out.segment(at, z.rows()) = log_variance_ratio(var);
    at += z.rows();
  }
  return out;
}

}  // namespace dynnet::fbcsp
