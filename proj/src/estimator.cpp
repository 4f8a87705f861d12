#include "commsense/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "commsense/errors.hpp"

namespace commsense {

namespace bl = burst_layout;

ToeplitzTrainingMatrix::ToeplitzTrainingMatrix(std::span<const cplx> m, int reference_length,
                                               int cir_length)
    : p_(reference_length), cl_(cir_length) {
  if (cl_ < 1) throw InvalidArgument("CIR length must be >= 1");
  if (p_ < 1) throw InvalidArgument("reference length must be >= 1");
  if (cl_ > p_) {
    throw InvalidArgument("CIR length " + std::to_string(cl_) + " exceeds reference length " +
                          std::to_string(p_) + " (system underdetermined)");
  }
  if (m.size() < static_cast<std::size_t>(p_)) {
    throw InvalidArgument("reference sequence shorter than P");
  }
  matrix_ = Eigen::MatrixXcd::Zero(p_ + cl_ - 1, cl_);
  for (int j = 0; j < cl_; ++j) {
    for (int i = 0; i < p_; ++i) matrix_(i + j, j) = m[static_cast<std::size_t>(i)];
  }
}

Eigen::MatrixXcd ToeplitzTrainingMatrix::interior_rows() const {
  return matrix_.middleRows(cl_ - 1, p_ - cl_ + 1);
}

ToeplitzTrainingMatrix build_training_matrix(std::span<const cplx> m, int reference_length,
                                             int cir_length) {
  return ToeplitzTrainingMatrix(m, reference_length, cir_length);
}

std::string to_string(EstimationMethod m) {
  return m == EstimationMethod::least_squares ? "ls" : "corr";
}

EstimationMethod parse_method(const std::string& name) {
  if (name == "ls") return EstimationMethod::least_squares;
  if (name == "corr") return EstimationMethod::correlation;
  throw InvalidArgument("unknown estimation method '" + name + "' (expected ls or corr)");
}

namespace {

EstimatedCIR finish(std::vector<cplx> taps, EstimationMethod method, double residual) {
  EstimatedCIR out;
  out.magnitudes.reserve(taps.size());
  for (const cplx& t : taps) out.magnitudes.push_back(std::abs(t));
  out.taps = std::move(taps);
  out.method = method;
  out.residual_norm = residual;
  return out;
}

}  // namespace

EstimatedCIR ls_estimate(std::span<const cplx> y, const Eigen::MatrixXcd& m) {
  if (static_cast<Eigen::Index>(y.size()) != m.rows()) {
    throw InvalidArgument("observation length " + std::to_string(y.size()) +
                          " does not match matrix rows " + std::to_string(m.rows()));
  }
  if (m.cols() == 0 || m.rows() < m.cols()) {
    throw SingularSystem("training matrix has fewer rows than unknowns");
  }
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(sv.size() - 1) < kRankTolerance * sv(0)) {
    throw SingularSystem("training matrix is rank deficient (sigma_min / sigma_max = " +
                         std::to_string(sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0) + ")");
  }
  const Eigen::Map<const Eigen::VectorXcd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::VectorXcd h =
      svd.matrixV() * (sv.cwiseInverse().asDiagonal() * (svd.matrixU().adjoint() * yv));
  const double residual = (yv - m * h).norm();
  return finish(std::vector<cplx>(h.data(), h.data() + h.size()), EstimationMethod::least_squares,
                residual);
}

EstimatedCIR ls_estimate(std::span<const cplx> y, const ToeplitzTrainingMatrix& m) {
  return ls_estimate(y, m.matrix());
}

EstimatedCIR correlation_estimate(std::span<const cplx> y, std::span<const cplx> t, int cir_length) {
  if (t.empty()) throw InvalidArgument("training sequence is empty");
  if (y.size() < t.size()) throw InvalidArgument("received window shorter than training sequence");
  if (cir_length < 1 || static_cast<std::size_t>(cir_length) > y.size()) {
    throw InvalidArgument("CIR length " + std::to_string(cir_length) +
                          " must be in [1, len(y) = " + std::to_string(y.size()) + "]");
  }
  double energy = 0.0;
  for (const cplx& v : t) energy += std::norm(v);
  if (energy == 0.0) throw DegenerateInput("training sequence has zero energy");

  std::vector<cplx> taps(static_cast<std::size_t>(cir_length));
  for (std::size_t k = 0; k < taps.size(); ++k) {
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < t.size() && i + k < y.size(); ++i) acc += y[i + k] * std::conj(t[i]);
    taps[k] = acc / energy;
  }
  return finish(std::move(taps), EstimationMethod::correlation, 0.0);
}

EstimatedCIR estimate_burst(std::span<const cplx> x, const BurstBoundary& b,
                            const EstimatorConfig& config) {
  if (config.oversample < 1) throw InvalidArgument("oversample must be >= 1");
  const auto os = static_cast<std::size_t>(config.oversample);
  const TrainingSequence ts = training_sequence(config.tsc);
  const auto ref = ts.window(config.window);
  const int p = static_cast<int>(ref.size());

  if (config.method == EstimationMethod::least_squares) {
    const ToeplitzTrainingMatrix m = build_training_matrix(ref, p, config.cir_length);
    const std::vector<cplx> window = extract_training_window(x, b, config.oversample, config.window);
    std::vector<cplx> y;
    for (Eigen::Index r = m.first_interior_row(); r < p; ++r) {
      y.push_back(window[static_cast<std::size_t>(r) * os]);
    }
    return ls_estimate(y, m.interior_rows());
  }

  // Validates the boundary.
  (void)extract_training_window(x, b, config.oversample, config.window);
  const std::size_t first =
      b.start_sample + (bl::kTrainingOffset + window_offset(config.window)) * os;
  const std::size_t wanted = static_cast<std::size_t>(p + config.cir_length - 1);
  std::vector<cplx> y;
  for (std::size_t i = 0; i < wanted && first + i * os < x.size(); ++i) y.push_back(x[first + i * os]);
  return correlation_estimate(y, ref, config.cir_length);
}

std::size_t slot_index(std::size_t start_sample, int oversample) {
  // 156.25 symbols per slot -> 625 quarter symbols.
  return (4 * start_sample) / (625 * static_cast<std::size_t>(oversample));
}

StreamEstimate estimate_stream(const IQStream& x, const EstimatorConfig& config) {
  DetectorConfig dc;
  dc.oversample = config.oversample;
  dc.power_threshold = config.power_threshold;
  dc.lock_slot_grid = config.lock_slot_grid;
  if (config.cir_length < 1) throw InvalidArgument("CIR length must be >= 1");
  const auto p = static_cast<int>(window_length(config.window));
  if (config.method == EstimationMethod::least_squares && config.cir_length > p) {
    throw InvalidArgument("CIR length " + std::to_string(config.cir_length) +
                          " exceeds reference length " + std::to_string(p) +
                          " (system underdetermined)");
  }
  (void)training_sequence(config.tsc);

  BurstDetector detector(dc);
  const DetectionReport report = detector.scan(x.samples);

  StreamEstimate out;
  out.rejected = report.rejected;
  out.dataset.cir_length = static_cast<std::size_t>(config.cir_length);
  out.dataset.meta.method = to_string(config.method);
  out.dataset.meta.tsc = config.tsc;
  out.dataset.meta.window = static_cast<int>(window_length(config.window));
  out.dataset.meta.oversample = config.oversample;
  out.dataset.meta.scenario = x.scenario_id;

  for (const BurstBoundary& b : report.boundaries) {
    EstimatedCIR est = estimate_burst(x.samples, b, config);
    out.dataset.records.push_back({slot_index(b.start_sample, config.oversample), b.start_sample,
                                   std::move(est.taps)});
  }
  out.accepted = out.dataset.records.size();
  if (out.accepted == 0) {
    throw EmptyDataset("no burst passed the two-guard rule (" + std::to_string(report.rejected) +
                       " rejected)");
  }
  return out;
}

double nmse_db(std::span<const cplx> estimate, std::span<const cplx> truth) {
  if (estimate.size() != truth.size() || truth.empty()) {
    throw InvalidArgument("nmse: estimate and truth must have equal nonzero length");
  }
  double err = 0.0;
  double ref = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    err += std::norm(estimate[k] - truth[k]);
    ref += std::norm(truth[k]);
  }
  if (ref == 0.0) throw DegenerateInput("nmse: reference CIR has zero energy");
  return 10.0 * std::log10(err / ref);
}

}  // namespace commsense
