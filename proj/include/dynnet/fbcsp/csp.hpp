#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace dynnet::fbcsp {

/// Mean-free E*E^T normalized to unit trace for a (channels x samples)
/// trial stored row-major. Throws DataError on an all-zero trial.
Eigen::MatrixXd trial_covariance(const float* trial, std::size_t channels, std::size_t samples);
Eigen::MatrixXd trial_covariance(const Eigen::MatrixXd& trial);

struct CspModel {
  // Rows are spatial filters, ordered by decreasing eigenvalue: row j and
  // row 2m-1-j form a pair. W (C1 + C2) W^T = I.
  Eigen::MatrixXd W;
  Eigen::VectorXd eigenvalues;  // w^T C1 w per row, in [0, 1]
  std::size_t band = 0;
  int positive_class = 0;

  std::size_t pairs() const { return static_cast<std::size_t>(W.rows()) / 2; }
};

/// Generalized eigenproblem C1 w = lambda (C1 + C2) w solved by whitening
/// C1 + C2. Keeps the m largest and m smallest eigenvalues. A near-singular
/// composite gets a ridge of 1e-9 * trace (split evenly) and a warning.
CspModel csp_fit(const Eigen::MatrixXd& C1, const Eigen::MatrixXd& C2, std::size_t m);

/// log(var_j / sum var) of the projected signal, per band, concatenated
/// band-major. `bands[b]` is the trial filtered by bank member b.
Eigen::VectorXd csp_features(const std::vector<Eigen::MatrixXd>& bands,
                             const std::vector<CspModel>& models);

/// The same map for one band, from precomputed projected variances.
Eigen::VectorXd log_variance_ratio(const Eigen::VectorXd& variances);

}  // namespace dynnet::fbcsp
