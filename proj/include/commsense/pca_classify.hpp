#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace commsense {

/// Column z-scoring plus the right singular vectors of the normalized training matrix.
struct PCAModel {
  Eigen::VectorXd column_means;
  /// Population standard deviations; 1 for zero-variance columns.
  Eigen::VectorXd column_scales;
  std::vector<std::size_t> zero_variance_columns;
  /// K x L right singular vectors. Sign: largest-magnitude entry of each column >= 0.
  Eigen::MatrixXd components;
  /// L nonincreasing singular values.
  Eigen::VectorXd singular_values;

  Eigen::Index features() const noexcept { return column_means.size(); }
  Eigen::Index num_components() const noexcept { return components.cols(); }

  Eigen::MatrixXd normalize(const Eigen::MatrixXd& a) const;
  /// Number of singular values above 1e-10 * the largest.
  Eigen::Index rank() const;
  /// sigma_i^2 / sum sigma^2.
  Eigen::VectorXd explained_variance_ratio() const;
};

struct PCAFit {
  PCAModel model;
  /// F = A_norm V (J x L).
  Eigen::MatrixXd scores;
};

/// z-score the columns of A (J x K, J >= 2) and take its thin SVD, L = min(J, K).
PCAFit fit_pca(const Eigen::MatrixXd& a);

struct ProjectedDataset {
  Eigen::MatrixXd scores;
  std::string label;
};

/// F = normalize(A) V.
ProjectedDataset project(const PCAModel& model, const Eigen::MatrixXd& a, std::string label = {});

struct LabeledDataset {
  Eigen::MatrixXd rows;
  std::string label;
};

/// Nearest-centroid classifier in the space of the first `dims` principal components.
struct CentroidClassifier {
  PCAModel model;
  int dims = 2;
  /// Sorted, unique.
  std::vector<std::string> labels;
  /// labels.size() x dims.
  Eigen::MatrixXd centroids;
  std::vector<std::string> warnings;
};

CentroidClassifier train_classifier(std::span<const LabeledDataset> datasets, int dims = 2);

struct Classification {
  std::string label;
  /// Euclidean distance to every centroid, in `labels` order.
  std::vector<double> distances;
};

/// Nearest centroid; on a tie the lexicographically first label wins.
Classification classify(const CentroidClassifier& c, std::span<const double> row);
Classification classify(const CentroidClassifier& c, const Eigen::RowVectorXd& row);

}  // namespace commsense
