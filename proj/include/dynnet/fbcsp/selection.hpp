#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace dynnet::fbcsp {

/// I(F;Y) in bits for binary labels (0/1): H(Y) - H(Y|F), with the class
/// conditional densities of F estimated by Gaussian Parzen windows with
/// Silverman bandwidths. Clamped to [0, H(Y)]; a constant feature gives 0.
double mutual_information(std::span<const double> feature, std::span<const int> labels);

/// Complement of CSP feature `index` in a band-major layout with m pairs.
std::size_t csp_complement(std::size_t index, std::size_t m);

/// Top-k columns of `features` (trials x features) by mutual information,
/// ties broken by lower index, closed under CSP-pair complements. Sorted.
std::vector<std::size_t> mibif_select(const Eigen::MatrixXd& features, std::span<const int> labels,
                                      std::size_t k, std::size_t m);

struct LdaModel {
  Eigen::VectorXd w;
  double b = 0.0;
};

/// Two-class LDA with pooled covariance plus ridge 1e-6 * trace / d.
/// Labels are 0/1; each class needs at least two rows.
LdaModel lda_fit(const Eigen::MatrixXd& features, std::span<const int> labels);

/// P(label 1 | x) from the Gaussian shared-covariance model.
double lda_posterior(const LdaModel& lda, const Eigen::VectorXd& x);

}  // namespace dynnet::fbcsp
