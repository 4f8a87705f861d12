#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "commsense/types.hpp"

namespace commsense {

using Bit = std::uint8_t;

namespace burst_layout {
inline constexpr std::size_t kTailBits = 3;
inline constexpr std::size_t kDataBits = 57;
inline constexpr std::size_t kFlagBits = 1;
inline constexpr std::size_t kTrainingBits = 26;
inline constexpr std::size_t kPayloadBits = 2 * kDataBits;  // 114
inline constexpr std::size_t kActiveBits =
    2 * kTailBits + 2 * kDataBits + 2 * kFlagBits + kTrainingBits;  // 148
/// First training bit within the serialized burst.
inline constexpr std::size_t kTrainingOffset = kTailBits + kDataBits + kFlagBits;  // 61
/// Guard period of 8.25 symbols, kept as an exact fraction.
inline constexpr int kGuardQuarterSymbols = 33;
/// Central 16 of the 26 training bits start at bit 5.
inline constexpr std::size_t kCentralOffset = 5;
inline constexpr std::size_t kCentralLength = 16;
}  // namespace burst_layout

/// Which part of the training sequence is used as the estimation reference.
enum class TrainingWindow { full26, central16 };

std::size_t window_offset(TrainingWindow w) noexcept;
std::size_t window_length(TrainingWindow w) noexcept;

/// Antipodal map used throughout: 0 -> +1, 1 -> -1.
cplx map_bit(Bit b) noexcept;

struct TrainingSequence {
  int tsc_id = 0;
  std::array<Bit, burst_layout::kTrainingBits> bits{};
  std::array<cplx, burst_layout::kTrainingBits> symbols{};

  /// Symbols of the chosen reference window.
  std::span<const cplx> window(TrainingWindow w) const noexcept;
  std::span<const Bit> window_bits(TrainingWindow w) const noexcept;
};

/// Standard normal-burst training sequence for `tsc_id` in [0, 7].
TrainingSequence training_sequence(int tsc_id);

struct NormalBurst {
  std::array<Bit, burst_layout::kTailBits> tail_head{};
  std::array<Bit, burst_layout::kDataBits> data_a{};
  Bit flag_a = 0;
  std::array<Bit, burst_layout::kTrainingBits> training{};
  Bit flag_b = 0;
  std::array<Bit, burst_layout::kDataBits> data_b{};
  std::array<Bit, burst_layout::kTailBits> tail_tail{};
  int tsc_id = 0;

  /// The 148 active bits in transmission order.
  std::vector<Bit> serialize() const;
  /// Inverse of serialize(). The tsc id cannot be recovered from bits and is left at 0
  /// unless the training field matches one of the standard codes.
  static NormalBurst parse(std::span<const Bit> bits);

  std::vector<Bit> payload() const;

  friend bool operator==(const NormalBurst&, const NormalBurst&) = default;
};

NormalBurst build_burst(std::span<const Bit> data, int tsc_id, std::span<const Bit> flags);
NormalBurst build_burst(std::span<const Bit> data, int tsc_id);

std::array<Bit, burst_layout::kTrainingBits> extract_training(const NormalBurst& burst);

struct ModulatorOptions {
  int oversample = 1;
  double guard_amplitude = 0.0;
  /// Fractional guard carried over from previous bursts, in quarter samples (0..3).
  int guard_remainder = 0;
};

struct ModulatedBurst {
  std::vector<cplx> samples;
  std::size_t active_samples = 0;
  std::size_t guard_samples = 0;
  /// Remainder to pass as `guard_remainder` to the next burst.
  int guard_remainder = 0;
};

/// Rectangular-pulse antipodal baseband: 148*oversample active samples then the guard.
/// The guard length is floor((remainder + 33*oversample) / 4) samples.
ModulatedBurst modulate(const NormalBurst& burst, const ModulatorOptions& options = {});

/// Guard samples to emit given a carried quarter-sample remainder.
struct GuardStep {
  std::size_t samples;
  int remainder;
};
GuardStep guard_step(int oversample, int remainder_in);

}  // namespace commsense
