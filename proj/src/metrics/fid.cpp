#include "cage/metrics/fid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cage/error.hpp"

namespace cage::metrics {

FeatureSet::FeatureSet(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
  if (rows_.rows() == 0 || rows_.cols() == 0) throw ValidationError("feature set is empty");
  if (!rows_.allFinite()) throw ValidationError("feature set contains non-finite values");
}

FeatureSet FeatureSet::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ValidationError("feature set is empty");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) {
      throw DimensionError("feature vector " + std::to_string(i) + " has dimension " +
                           std::to_string(rows[i].size()) + ", expected " + std::to_string(rows[0].size()));
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return FeatureSet(std::move(m));
}

Eigen::VectorXd FeatureSet::mean() const { return rows_.colwise().mean().transpose(); }

Eigen::MatrixXd FeatureSet::covariance() const {
  if (rows_.rows() < 2) throw ValidationError("covariance needs at least 2 feature vectors");
  const Eigen::MatrixXd centered = rows_.rowwise() - rows_.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(rows_.rows() - 1);
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionError("matrix square root needs a square matrix");
  if (m.size() == 0) return m;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw ValidationError("matrix is not symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw ValidationError("eigendecomposition did not converge");
  Eigen::VectorXd lambda = eig.eigenvalues();
  const double floor = -1e-8 * std::max(1.0, lambda.maxCoeff());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < floor) {
      throw ValidationError("matrix has a negative eigenvalue: " + std::to_string(lambda(i)));
    }
    lambda(i) = std::sqrt(std::max(0.0, lambda(i)));
  }
  return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

double fid(const FeatureSet& a, const FeatureSet& b, double epsilon) {
  if (a.dimension() != b.dimension()) {
    throw DimensionError("feature dimensions differ: " + std::to_string(a.dimension()) + " vs " +
                         std::to_string(b.dimension()));
  }
  if (a.size() < 2 || b.size() < 2) throw ValidationError("FID needs at least 2 feature vectors per set");
  const auto d = a.dimension();
  const Eigen::MatrixXd reg = epsilon * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd sa = a.covariance() + reg;
  const Eigen::MatrixXd sb = b.covariance() + reg;
  const Eigen::MatrixXd ra = matrix_sqrt_psd(sa);
  Eigen::MatrixXd inner = ra * sb * ra;
  inner = 0.5 * (inner + inner.transpose());
  const double mean_term = (a.mean() - b.mean()).squaredNorm();
  const double value = mean_term + sa.trace() + sb.trace() - 2.0 * matrix_sqrt_psd(inner).trace();
  return std::max(0.0, value);
}

}  // namespace cage::metrics
