#include "commsense/sync.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "commsense/errors.hpp"

namespace commsense {

namespace bl = burst_layout;

BurstDetector::BurstDetector(DetectorConfig config) : config_(config) {
  if (config_.oversample < 1) throw InvalidArgument("oversample must be >= 1");
  if (!(config_.power_threshold > 0.0 && config_.power_threshold < 1.0)) {
    throw InvalidArgument("power threshold must lie in (0, 1)");
  }
  if (config_.hysteresis < 1.0) throw InvalidArgument("hysteresis factor must be >= 1");
  if (config_.smoothing_symbols < 1) throw InvalidArgument("smoothing window must be >= 1 symbol");
}

void BurstDetector::smooth(std::span<const cplx> x) {
  const std::size_t n = x.size();
  power_.resize(n);
  prefix_.assign(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    power_[k] = std::norm(x[k]);
    prefix_[k + 1] = prefix_[k] + power_[k];
  }
  const auto w = static_cast<std::size_t>(config_.smoothing_symbols * config_.oversample);
  const std::size_t half = w / 2;
  smoothed_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = k >= half ? k - half : 0;
    const std::size_t hi = std::min(n, k + (w - half));
    smoothed_[k] = (prefix_[hi] - prefix_[lo]) / static_cast<double>(hi - lo);
  }
}

void BurstDetector::find_low_runs(double mean_power) {
  runs_.clear();
  const double enter = config_.power_threshold * mean_power;
  const double leave =
      std::min(config_.power_threshold * config_.hysteresis, (1.0 + config_.power_threshold) / 2.0) *
      mean_power;
  const auto min_len = static_cast<std::size_t>(
      std::max(1.0, std::ceil(config_.min_guard_symbols * config_.oversample)));

  bool low = false;
  std::size_t begin = 0;
  const std::size_t n = smoothed_.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (!low && smoothed_[k] < enter) {
      low = true;
      begin = k;
    } else if (low && smoothed_[k] > leave) {
      low = false;
      if (k - begin >= min_len) runs_.push_back({begin, k});
    }
  }
  if (low && n - begin >= min_len) runs_.push_back({begin, n});
}

DetectionReport BurstDetector::scan(std::span<const cplx> x) {
  DetectionReport report;
  const auto os = static_cast<std::size_t>(config_.oversample);
  const std::size_t active = bl::kActiveBits * os;
  const std::size_t guard = guard_step(config_.oversample, 0).samples;
  if (x.size() < active + 2 * guard) return report;

  smooth(x);
  const double mean_power = prefix_.back() / static_cast<double>(x.size());
  if (mean_power <= 0.0) return report;
  find_low_runs(mean_power);

  if (runs_.empty()) {
    report.rejected = 1;
    return report;
  }
  // Powered material before the first or after the last guard is a partial burst.
  if (runs_.front().begin > 0) ++report.rejected;
  if (runs_.back().end < x.size()) ++report.rejected;

  const auto w = static_cast<std::size_t>(config_.smoothing_symbols) * os;
  const std::size_t min_gap = active > w ? active - w : 0;
  const std::size_t max_gap = active + w + 12 * os;

  auto run_power = [&](const LowRun& r) {
    return (prefix_[r.end] - prefix_[r.begin]) / static_cast<double>(r.end - r.begin);
  };

  const std::size_t before = w;
  const std::size_t after = 16 * os;
  std::size_t i = 0;
  while (i + 1 < runs_.size()) {
    // Low runs closer than one burst to the leading guard are fades inside the burst.
    std::size_t j = i + 1;
    while (j < runs_.size() && runs_[j].begin - runs_[i].end < min_gap) ++j;
    if (j == runs_.size()) {
      ++report.rejected;
      break;
    }
    const LowRun& lead = runs_[i];
    const LowRun& trail = runs_[j];
    if (trail.begin - lead.end > max_gap) {
      // A skipped run may be the leading guard of the next burst after a truncated one.
      ++report.rejected;
      i = j - 1 > i ? j - 1 : j;
      continue;
    }
    i = j;
    // The burst edges sit near the inner ends of the guards.
    const std::size_t reach = guard + w;
    const std::size_t lo = std::max(lead.begin, lead.end > reach ? lead.end - reach : 0);
    const std::size_t hi_end = std::min(trail.end, trail.begin + reach);
    if (hi_end < lo + active) {
      ++report.rejected;
      continue;
    }
    // Leading edge: largest rise from the end of the guard into the burst. The channel
    // is causal, so this edge is sharp while the trailing one smears into the next guard.
    std::size_t best = lo;
    double best_rise = -std::numeric_limits<double>::infinity();
    const std::size_t last = std::min(hi_end - active, lead.end + w);
    for (std::size_t s = lo; s <= last; ++s) {
      const std::size_t pre = std::min(before, s);
      if (pre == 0) continue;
      const double rise = (prefix_[s + after] - prefix_[s]) / static_cast<double>(after) -
                          (prefix_[s] - prefix_[s - pre]) / static_cast<double>(pre);
      if (rise > best_rise) {
        best_rise = rise;
        best = s;
      }
    }
    const double best_energy = prefix_[best + active] - prefix_[best];
    const double burst_power = best_energy / static_cast<double>(active);
    const double guard_power = 0.5 * (run_power(lead) + run_power(trail));
    const double conf = burst_power > 0.0 ? std::clamp(1.0 - guard_power / burst_power, 0.0, 1.0) : 0.0;
    report.boundaries.push_back({best, best + active, conf});
  }

  if (config_.lock_slot_grid && !report.boundaries.empty()) {
    SlotGridLock lock = lock_to_slot_grid(report.boundaries, config_.oversample, x.size());
    std::vector<BurstBoundary> kept;
    for (std::size_t b = 0; b < report.boundaries.size(); ++b) {
      if (!lock.kept[b] || static_cast<std::size_t>(std::abs(lock.corrections[b])) > guard + w) continue;
      BurstBoundary snapped = report.boundaries[b];
      snapped.start_sample = static_cast<std::size_t>(static_cast<long>(snapped.start_sample) +
                                                      lock.corrections[b]);
      snapped.end_sample = snapped.start_sample + active;
      kept.push_back(snapped);
    }
    report.rejected += report.boundaries.size() - kept.size();
    report.boundaries = std::move(kept);
  }
  return report;
}

std::vector<BurstBoundary> detect_bursts(std::span<const cplx> x, int oversample,
                                         double power_threshold) {
  DetectorConfig cfg;
  cfg.oversample = oversample;
  cfg.power_threshold = power_threshold;
  BurstDetector detector(cfg);
  return detector.scan(x).boundaries;
}

SlotGridLock lock_to_slot_grid(std::span<const BurstBoundary> boundaries, int oversample,
                               std::size_t stream_length) {
  if (oversample < 1) throw InvalidArgument("oversample must be >= 1");
  SlotGridLock lock;
  lock.corrections.assign(boundaries.size(), 0);
  lock.kept.assign(boundaries.size(), false);
  if (boundaries.empty()) return lock;

  const double period = 156.25 * oversample;
  const auto active = static_cast<long>(bl::kActiveBits) * oversample;
  const auto ref = static_cast<double>(boundaries.front().start_sample);
  std::vector<long> slot(boundaries.size());
  std::vector<double> residual(boundaries.size());
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    const auto s = static_cast<double>(boundaries[i].start_sample);
    slot[i] = std::lround((s - ref) / period);
    residual[i] = s - static_cast<double>(slot[i]) * period;
  }
  std::vector<double> sorted = residual;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                   sorted.end());
  const double median = std::floor(sorted[sorted.size() / 2]);

  auto grid_start = [&](double phase, long n) {
    return static_cast<long>(std::floor(phase + static_cast<double>(n) * period));
  };
  double best_phase = median;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int step = -24; step <= 32; ++step) {
    const double phase = median + step / 8.0;
    double cost = 0.0;
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
      cost += std::abs(static_cast<double>(grid_start(phase, slot[i]) -
                                           static_cast<long>(boundaries[i].start_sample)));
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_phase = phase;
    }
  }
  lock.phase = best_phase;

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    const long start = grid_start(best_phase, slot[i]);
    if (start < 0 || static_cast<std::size_t>(start + active) > stream_length) continue;
    if (!order.empty() && slot[order.back()] == slot[i]) {
      if (boundaries[i].confidence <= boundaries[order.back()].confidence) continue;
      order.back() = i;
      continue;
    }
    order.push_back(i);
  }
  for (std::size_t i : order) {
    const long start = grid_start(best_phase, slot[i]);
    lock.kept[i] = true;
    lock.corrections[i] = start - static_cast<long>(boundaries[i].start_sample);
    lock.boundaries.push_back({static_cast<std::size_t>(start), static_cast<std::size_t>(start + active),
                               boundaries[i].confidence});
  }
  return lock;
}

FreqOffsetEstimate estimate_freq_offset(std::span<const cplx> x, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("sample rate must be positive");
  double peak = 0.0;
  for (const cplx& s : x) peak = std::max(peak, std::norm(s));
  if (x.size() < 2 || peak == 0.0) {
    throw DegenerateInput("frequency offset estimation needs a nonzero tone");
  }

  const double gate = 1e-6 * peak * peak;
  std::vector<double> increments;
  increments.reserve(x.size() - 1);
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    const cplx prod = x[k + 1] * std::conj(x[k]);
    if (std::norm(prod) > gate) increments.push_back(std::arg(prod));
  }
  if (increments.empty()) throw DegenerateInput("no sample pairs above the power gate");

  double mean = 0.0;
  for (double d : increments) mean += d;
  mean /= static_cast<double>(increments.size());
  double ss = 0.0;
  for (double d : increments) ss += (d - mean) * (d - mean);

  FreqOffsetEstimate est;
  est.offset_hz = mean * sample_rate_hz / (2.0 * std::numbers::pi);
  est.residual = std::sqrt(ss / static_cast<double>(increments.size()));
  est.pairs_used = increments.size();
  return est;
}

std::vector<cplx> apply_freq_correction(std::span<const cplx> x, double offset_hz,
                                        double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("sample rate must be positive");
  std::vector<cplx> out(x.size());
  const double w = -2.0 * std::numbers::pi * offset_hz / sample_rate_hz;
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k] = x[k] * std::polar(1.0, w * static_cast<double>(k));
  }
  return out;
}

std::vector<cplx> extract_training_window(std::span<const cplx> x, const BurstBoundary& b,
                                          int oversample, TrainingWindow window) {
  if (oversample < 1) throw InvalidArgument("oversample must be >= 1");
  const auto os = static_cast<std::size_t>(oversample);
  if (b.start_sample >= b.end_sample || b.end_sample > x.size() ||
      b.span() < bl::kActiveBits * os) {
    throw InvalidArgument("burst boundary [" + std::to_string(b.start_sample) + ", " +
                          std::to_string(b.end_sample) + ") is not valid for a stream of " +
                          std::to_string(x.size()) + " samples");
  }
  const std::size_t first = b.start_sample + (bl::kTrainingOffset + window_offset(window)) * os;
  const std::size_t len = window_length(window) * os;
  return {x.begin() + static_cast<std::ptrdiff_t>(first),
          x.begin() + static_cast<std::ptrdiff_t>(first + len)};
}

std::vector<cplx> sch_training_symbols() {
  static constexpr const char* kSch =
      "1011100101100010000001000000111100101101010001010111011000011011";
  std::vector<cplx> out;
  for (const char* p = kSch; *p; ++p) out.push_back(map_bit(*p == '1' ? 1 : 0));
  return out;
}

CoarseAlignment coarse_align(std::span<const cplx> x, std::span<const cplx> known, int oversample) {
  if (oversample < 1) throw InvalidArgument("oversample must be >= 1");
  if (known.empty()) throw InvalidArgument("known sequence is empty");
  const auto os = static_cast<std::size_t>(oversample);
  const std::size_t span = (known.size() - 1) * os + 1;
  if (x.size() < span) throw InvalidArgument("stream shorter than the known sequence");

  double known_energy = 0.0;
  for (const cplx& k : known) known_energy += std::norm(k);

  CoarseAlignment best;
  for (std::size_t s = 0; s + span <= x.size(); ++s) {
    cplx acc(0.0, 0.0);
    double energy = 0.0;
    for (std::size_t i = 0; i < known.size(); ++i) {
      const cplx v = x[s + i * os];
      acc += v * std::conj(known[i]);
      energy += std::norm(v);
    }
    if (energy <= 0.0) continue;
    const double c = std::abs(acc) / std::sqrt(energy * known_energy);
    if (c > best.peak) best = {s, c};
  }
  return best;
}

}  // namespace commsense
