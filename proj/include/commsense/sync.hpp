#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "commsense/burst_model.hpp"
#include "commsense/types.hpp"

namespace commsense {

struct BurstBoundary {
  std::size_t start_sample = 0;
  /// One past the last active sample.
  std::size_t end_sample = 0;
  double confidence = 0.0;

  std::size_t span() const noexcept { return end_sample - start_sample; }
};

struct DetectorConfig {
  int oversample = 1;
  /// Guard threshold as a fraction of the stream mean power, in (0, 1).
  double power_threshold = 0.2;
  /// A low region ends once smoothed power exceeds threshold * hysteresis.
  double hysteresis = 2.0;
  /// Moving-average length in symbols.
  int smoothing_symbols = 4;
  /// Shortest smoothed low run (in symbols) accepted as a guard.
  double min_guard_symbols = 1.0;
  /// Fit one TDMA slot grid to all detections and move every start onto it. Starts the
  /// grid would move by more than one guard plus the smoothing window are rejected.
  bool lock_slot_grid = true;
};

struct DetectionReport {
  std::vector<BurstBoundary> boundaries;
  /// Powered regions that were not bracketed by two guards or had the wrong span.
  std::size_t rejected = 0;
};

/// Finds normal bursts by the two-consecutive-guards rule.
///
/// Smoothed power (centered moving average over smoothing_symbols*oversample samples)
/// is thresholded with hysteresis into low runs. Each low run is the trailing guard of
/// one burst and the leading guard of the next, so overlapping guards are shared. A
/// powered region is accepted only when a low run sits on both sides and its length is
/// consistent with one 148-symbol burst, skipping fades inside the burst. The start is
/// the largest rise in mean power from the preceding smoothing window to the following
/// 16 symbols; with lock_slot_grid the starts are then snapped to a common slot grid. Regions at stream edges without a
/// guard on both sides are dropped.
///
/// One instance per stream; scan() keeps per-scan working state.
class BurstDetector {
 public:
  explicit BurstDetector(DetectorConfig config);

  DetectionReport scan(std::span<const cplx> x);
  const DetectorConfig& config() const noexcept { return config_; }

 private:
  struct LowRun {
    std::size_t begin;
    std::size_t end;
  };

  void smooth(std::span<const cplx> x);
  void find_low_runs(double mean_power);

  DetectorConfig config_;
  std::vector<double> power_;
  std::vector<double> prefix_;
  std::vector<double> smoothed_;
  std::vector<LowRun> runs_;
};

std::vector<BurstBoundary> detect_bursts(std::span<const cplx> x, int oversample,
                                         double power_threshold = 0.2);

/// Timing lock on the TDMA slot grid. Burst n of a locked stream starts at
/// floor(phase + n * 156.25 * oversample); phase is fitted to all detections by least
/// absolute deviation on a 1/8-sample grid and every start is moved onto the grid.
/// Detections that land on an already occupied slot keep only the most confident one.
struct SlotGridLock {
  double phase = 0.0;
  /// Per input boundary: samples moved, and whether it survived (duplicates on one slot
  /// and starts pushed outside the stream are dropped).
  std::vector<long> corrections;
  std::vector<bool> kept;
  std::vector<BurstBoundary> boundaries;
};

SlotGridLock lock_to_slot_grid(std::span<const BurstBoundary> boundaries, int oversample,
                               std::size_t stream_length);

struct FreqOffsetEstimate {
  double offset_hz = 0.0;
  /// RMS deviation of the per-sample phase increments from their mean, in radians.
  double residual = 0.0;
  std::size_t pairs_used = 0;
};

/// Mean phase increment of x[k+1]*conj(x[k]) scaled by fs / (2 pi). Sample pairs whose
/// power product is below 1e-6 of the peak are excluded, so zero padding has no effect.
FreqOffsetEstimate estimate_freq_offset(std::span<const cplx> x, double sample_rate_hz);

/// Multiplies by exp(-j 2 pi f k / fs).
std::vector<cplx> apply_freq_correction(std::span<const cplx> x, double offset_hz,
                                        double sample_rate_hz);

/// Samples of the training window of one detected burst (window_length * oversample).
std::vector<cplx> extract_training_window(std::span<const cplx> x, const BurstBoundary& b,
                                          int oversample, TrainingWindow window);

/// 64-bit SCH extended training sequence (GSM 05.02), antipodal symbols.
std::vector<cplx> sch_training_symbols();

struct CoarseAlignment {
  std::size_t offset = 0;
  /// |normalized correlation| at the peak, in [0, 1].
  double peak = 0.0;
};

/// Timing lock by sliding correlation against a known symbol sequence.
CoarseAlignment coarse_align(std::span<const cplx> x, std::span<const cplx> known, int oversample);

}  // namespace commsense
