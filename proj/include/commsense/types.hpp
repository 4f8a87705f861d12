#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace commsense {

using cplx = std::complex<double>;

/// GSM symbol rate: 156.25 symbol periods per 577 us timeslot.
inline constexpr double kSymbolRateHz = 156.25 / 577e-6;

/// Complex baseband samples plus the metadata needed to interpret them.
struct IQStream {
  std::vector<cplx> samples;
  double sample_rate_hz = kSymbolRateHz;
  int oversample = 1;
  std::string scenario_id;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
};

/// Symbol-spaced channel taps h_0 ... h_{Cl-1}.
struct ChannelImpulseResponse {
  std::vector<cplx> taps;

  std::size_t length() const noexcept { return taps.size(); }
  std::vector<double> magnitudes() const;
};

/// One estimated (or ground-truth) CIR in a capture, tagged with the burst it came from.
struct CaptureRecord {
  /// TDMA slot number of the burst relative to the stream origin.
  std::size_t burst_index = 0;
  std::size_t start_sample = 0;
  std::vector<cplx> taps;
};

struct CaptureMetadata {
  std::string label = "unlabeled";
  std::string method = "corr";
  int tsc = 0;
  int window = 26;
  int oversample = 1;
  std::optional<double> snr_db;
  std::string scenario;
  std::string created;
};

/// Per-burst CIR vectors from one capture session. Every record has `cir_length` taps.
struct CaptureDataset {
  CaptureMetadata meta;
  std::size_t cir_length = 0;
  std::vector<CaptureRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }

  /// J x Cl matrix of |h_k| = sqrt(I^2 + Q^2).
  Eigen::MatrixXd magnitudes() const;
  /// Magnitudes of one CIR index across all bursts.
  std::vector<double> magnitude_column(std::size_t index) const;
  /// All magnitudes, row-major.
  std::vector<double> pooled_magnitudes() const;
};

}  // namespace commsense
