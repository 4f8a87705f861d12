#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "commsense/burst_model.hpp"
#include "commsense/sync.hpp"
#include "commsense/types.hpp"

namespace commsense {

/// Full-convolution matrix of a reference sequence: (P + Cl - 1) x Cl, column j is
/// column 0 shifted down j rows with zero fill, column 0 holds m_0 ... m_{P-1}.
class ToeplitzTrainingMatrix {
 public:
  ToeplitzTrainingMatrix(std::span<const cplx> m, int reference_length, int cir_length);

  int reference_length() const noexcept { return p_; }
  int cir_length() const noexcept { return cl_; }
  Eigen::Index rows() const noexcept { return matrix_.rows(); }
  Eigen::Index cols() const noexcept { return matrix_.cols(); }
  const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }
  cplx operator()(Eigen::Index r, Eigen::Index c) const { return matrix_(r, c); }

  /// Rows Cl-1 ... P-1: the rows with no zero fill. When the reference is embedded in
  /// a longer known or unknown stream these are the only rows whose received sample
  /// depends on reference symbols alone.
  Eigen::MatrixXcd interior_rows() const;
  Eigen::Index first_interior_row() const noexcept { return cl_ - 1; }

 private:
  int p_;
  int cl_;
  Eigen::MatrixXcd matrix_;
};

ToeplitzTrainingMatrix build_training_matrix(std::span<const cplx> m, int reference_length,
                                             int cir_length);

enum class EstimationMethod { least_squares, correlation };

std::string to_string(EstimationMethod m);
EstimationMethod parse_method(const std::string& name);

struct EstimatedCIR {
  std::vector<cplx> taps;
  std::vector<double> magnitudes;
  EstimationMethod method = EstimationMethod::least_squares;
  /// ||y - M h|| for least squares; 0 for correlation.
  double residual_norm = 0.0;
};

/// Relative singular-value floor below which a training matrix counts as rank deficient.
inline constexpr double kRankTolerance = 1e-10;

/// h = argmin ||y - M h||^2, i.e. (M^H M)^-1 M^H y, solved through the SVD of M.
/// Throws SingularSystem when sigma_min < 1e-10 sigma_max.
EstimatedCIR ls_estimate(std::span<const cplx> y, const Eigen::MatrixXcd& m);
EstimatedCIR ls_estimate(std::span<const cplx> y, const ToeplitzTrainingMatrix& m);

/// tap_k = sum_i y[i+k] conj(t[i]) / sum_i |t[i]|^2 for k < Cl. Terms with i+k past the
/// end of y are taken as zero.
EstimatedCIR correlation_estimate(std::span<const cplx> y, std::span<const cplx> t, int cir_length);

struct EstimatorConfig {
  EstimationMethod method = EstimationMethod::correlation;
  TrainingWindow window = TrainingWindow::full26;
  int cir_length = 40;
  int tsc = 0;
  int oversample = 1;
  double power_threshold = 0.2;
  /// Snap detected starts onto one fitted slot grid (see lock_to_slot_grid).
  bool lock_slot_grid = true;
};

/// Estimate the CIR of one burst whose boundary is known.
///
/// Least squares uses the interior rows of the window's training matrix against the
/// symbol-spaced samples inside the window. Correlation slides the window symbols over
/// the received symbols starting at the window, P + Cl - 1 symbols long (clipped to the
/// stream).
EstimatedCIR estimate_burst(std::span<const cplx> x, const BurstBoundary& b,
                            const EstimatorConfig& config);

struct StreamEstimate {
  CaptureDataset dataset;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// sync -> extract -> estimate for every accepted burst. Rows are in stream order and
/// carry burst_index = floor(start / (156.25 * oversample)).
/// Throws EmptyDataset when no burst is accepted.
StreamEstimate estimate_stream(const IQStream& x, const EstimatorConfig& config);

std::size_t slot_index(std::size_t start_sample, int oversample);

/// ||h_est - h||^2 / ||h||^2 in dB.
double nmse_db(std::span<const cplx> estimate, std::span<const cplx> truth);

}  // namespace commsense
