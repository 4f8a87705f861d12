#include "commsense/pca_classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "commsense/errors.hpp"

namespace commsense {

namespace {

constexpr double kRankTolerance = 1e-10;
constexpr double kTieTolerance = 1e-12;

}  // namespace

Eigen::MatrixXd PCAModel::normalize(const Eigen::MatrixXd& a) const {
  if (a.cols() != features()) {
    throw InvalidArgument("dataset has " + std::to_string(a.cols()) + " columns, model expects " +
                          std::to_string(features()));
  }
  return (a.rowwise() - column_means.transpose()).array().rowwise() /
         column_scales.transpose().array();
}

Eigen::Index PCAModel::rank() const {
  if (singular_values.size() == 0 || !(singular_values(0) > 0.0)) return 0;
  const double floor = kRankTolerance * singular_values(0);
  return static_cast<Eigen::Index>((singular_values.array() > floor).count());
}

Eigen::VectorXd PCAModel::explained_variance_ratio() const {
  const Eigen::VectorXd s2 = singular_values.array().square();
  const double total = s2.sum();
  if (total <= 0.0) return Eigen::VectorXd::Zero(s2.size());
  return s2 / total;
}

PCAFit fit_pca(const Eigen::MatrixXd& a) {
  if (a.rows() < 2) throw InvalidArgument("fit_pca needs at least 2 observations");
  if (a.cols() < 1) throw InvalidArgument("fit_pca needs at least 1 variable");
  if (!a.allFinite()) throw InvalidArgument("fit_pca: matrix contains non-finite values");

  PCAFit out;
  PCAModel& m = out.model;
  const auto j = static_cast<double>(a.rows());
  m.column_means = a.colwise().mean().transpose();
  const Eigen::MatrixXd centered = a.rowwise() - m.column_means.transpose();
  m.column_scales = (centered.colwise().squaredNorm() / j).cwiseSqrt().transpose();
  for (Eigen::Index c = 0; c < m.column_scales.size(); ++c) {
    // Constant columns: relative spread at rounding level counts as zero.
    const double ref = std::max(1.0, std::abs(m.column_means(c)));
    if (!(m.column_scales(c) > 1e-13 * ref)) {
      m.column_scales(c) = 1.0;
      m.zero_variance_columns.push_back(static_cast<std::size_t>(c));
    }
  }
  const Eigen::MatrixXd norm = m.normalize(a);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(norm, Eigen::ComputeThinU | Eigen::ComputeThinV);
  m.singular_values = svd.singularValues();
  m.components = svd.matrixV();
  for (Eigen::Index c = 0; c < m.components.cols(); ++c) {
    Eigen::Index idx = 0;
    m.components.col(c).cwiseAbs().maxCoeff(&idx);
    if (m.components(idx, c) < 0.0) m.components.col(c) *= -1.0;
  }
  out.scores = norm * m.components;
  return out;
}

ProjectedDataset project(const PCAModel& model, const Eigen::MatrixXd& a, std::string label) {
  return {model.normalize(a) * model.components, std::move(label)};
}

CentroidClassifier train_classifier(std::span<const LabeledDataset> datasets, int dims) {
  if (dims < 1) throw InvalidArgument("projection dimension must be >= 1");
  std::map<std::string, std::vector<const LabeledDataset*>> by_label;
  Eigen::Index k = -1;
  Eigen::Index total = 0;
  for (const auto& d : datasets) {
    if (d.rows.rows() == 0) throw InvalidArgument("dataset '" + d.label + "' is empty");
    if (k >= 0 && d.rows.cols() != k) {
      throw InvalidArgument("datasets disagree on width (" + std::to_string(k) + " vs " +
                            std::to_string(d.rows.cols()) + ")");
    }
    k = d.rows.cols();
    total += d.rows.rows();
    by_label[d.label].push_back(&d);
  }
  if (by_label.size() < 2) throw InvalidArgument("classifier needs at least 2 distinct labels");

  Eigen::MatrixXd stacked(total, k);
  Eigen::Index row = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> spans;  // per label, in map order
  for (const auto& [label, parts] : by_label) {
    const Eigen::Index begin = row;
    for (const auto* d : parts) {
      stacked.middleRows(row, d->rows.rows()) = d->rows;
      row += d->rows.rows();
    }
    spans.emplace_back(begin, row - begin);
  }

  PCAFit pca = fit_pca(stacked);
  if (dims > pca.model.rank()) {
    throw InvalidArgument("projection dimension " + std::to_string(dims) +
                          " exceeds the data rank " + std::to_string(pca.model.rank()));
  }

  CentroidClassifier c;
  c.dims = dims;
  c.model = std::move(pca.model);
  c.centroids.resize(static_cast<Eigen::Index>(by_label.size()), dims);
  Eigen::Index li = 0;
  for (const auto& [label, parts] : by_label) {
    c.labels.push_back(label);
    const auto [begin, count] = spans[static_cast<std::size_t>(li)];
    c.centroids.row(li) = pca.scores.block(begin, 0, count, dims).colwise().mean();
    ++li;
  }
  for (Eigen::Index a = 0; a < c.centroids.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < c.centroids.rows(); ++b) {
      const double sep = (c.centroids.row(a) - c.centroids.row(b)).norm();
      if (sep <= 1e-9 * std::max(1.0, c.centroids.row(a).norm())) {
        c.warnings.push_back("centroids of '" + c.labels[static_cast<std::size_t>(a)] + "' and '" +
                             c.labels[static_cast<std::size_t>(b)] + "' coincide");
      }
    }
  }
  return c;
}

Classification classify(const CentroidClassifier& c, const Eigen::RowVectorXd& row) {
  if (row.size() != c.model.features()) {
    throw InvalidArgument("row has " + std::to_string(row.size()) + " values, classifier expects " +
                          std::to_string(c.model.features()));
  }
  const Eigen::RowVectorXd norm =
      (row - c.model.column_means.transpose()).array() / c.model.column_scales.transpose().array();
  const Eigen::RowVectorXd score = norm * c.model.components.leftCols(c.dims);

  Classification out;
  std::size_t best = 0;
  for (Eigen::Index i = 0; i < c.centroids.rows(); ++i) {
    const double d = (score - c.centroids.row(i)).norm();
    out.distances.push_back(d);
    const double cur = out.distances[best];
    // Labels are sorted, so keeping the earlier index on a tie picks the first label.
    if (d < cur && !(std::abs(d - cur) <= kTieTolerance * std::max(1.0, cur))) {
      best = static_cast<std::size_t>(i);
    }
  }
  out.label = c.labels[best];
  return out;
}

Classification classify(const CentroidClassifier& c, std::span<const double> row) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(row.size()));
  for (std::size_t i = 0; i < row.size(); ++i) r(static_cast<Eigen::Index>(i)) = row[i];
  return classify(c, r);
}

}  // namespace commsense
