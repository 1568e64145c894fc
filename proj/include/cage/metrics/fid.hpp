#pragma once

#include <vector>

#include <Eigen/Dense>

namespace cage::metrics {

// n feature vectors of dimension d, one per row. All entries finite, n >= 1.
class FeatureSet {
 public:
  FeatureSet() = default;
  explicit FeatureSet(Eigen::MatrixXd rows);
  static FeatureSet from_rows(const std::vector<std::vector<double>>& rows);

  Eigen::Index size() const { return rows_.rows(); }
  Eigen::Index dimension() const { return rows_.cols(); }
  const Eigen::MatrixXd& rows() const { return rows_; }

  Eigen::VectorXd mean() const;
  // Sample covariance, 1/(n-1) normalization. Requires n >= 2.
  Eigen::MatrixXd covariance() const;

 private:
  Eigen::MatrixXd rows_;
};

// Principal square root of a symmetric positive semi-definite matrix. Throws
// ValidationError when the input is asymmetric beyond 1e-8 (relative to its
// largest entry) or has an eigenvalue below -1e-8 (relative to the largest).
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m);

inline constexpr double kFidEpsilon = 1e-6;

// Frechet distance between the Gaussians fitted to each set. Both covariances
// get epsilon * I added. Throws DimensionError or ValidationError (n < 2).
double fid(const FeatureSet& a, const FeatureSet& b, double epsilon = kFidEpsilon);

}  // namespace cage::metrics
