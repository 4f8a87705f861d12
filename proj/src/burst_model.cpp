#include "commsense/burst_model.hpp"

#include <algorithm>
#include <string>

#include "commsense/errors.hpp"

namespace commsense {

namespace bl = burst_layout;

namespace {

// GSM 05.02 normal-burst training sequence codes, TSC 0..7, transmission order.
constexpr std::array<const char*, 8> kTscTable = {
    "00100101110000100010010111",
    "00101101110111100010110111",
    "01000011101110100100001110",
    "01000111101101000100011110",
    "00011010111001000001101011",
    "01001110101100000100111010",
    "10100111110110001010011111",
    "11101111000100101110111100",
};

template <std::size_t N>
void copy_bits(std::span<const Bit> src, std::size_t offset, std::array<Bit, N>& dst) {
  std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(offset), N, dst.begin());
}

template <std::size_t N>
void append(std::vector<Bit>& out, const std::array<Bit, N>& a) {
  out.insert(out.end(), a.begin(), a.end());
}

void check_bits(std::span<const Bit> bits, const char* what) {
  for (Bit b : bits) {
    if (b > 1) throw InvalidArgument(std::string(what) + ": bit values must be 0 or 1");
  }
}

}  // namespace

std::size_t window_offset(TrainingWindow w) noexcept {
  return w == TrainingWindow::central16 ? bl::kCentralOffset : 0;
}

std::size_t window_length(TrainingWindow w) noexcept {
  return w == TrainingWindow::central16 ? bl::kCentralLength : bl::kTrainingBits;
}

cplx map_bit(Bit b) noexcept { return b ? cplx(-1.0, 0.0) : cplx(1.0, 0.0); }

std::span<const cplx> TrainingSequence::window(TrainingWindow w) const noexcept {
  return std::span<const cplx>(symbols).subspan(window_offset(w), window_length(w));
}

std::span<const Bit> TrainingSequence::window_bits(TrainingWindow w) const noexcept {
  return std::span<const Bit>(bits).subspan(window_offset(w), window_length(w));
}

TrainingSequence training_sequence(int tsc_id) {
  if (tsc_id < 0 || tsc_id >= static_cast<int>(kTscTable.size())) {
    throw InvalidArgument("training sequence code must be in [0, 7], got " +
                          std::to_string(tsc_id));
  }
  TrainingSequence ts;
  ts.tsc_id = tsc_id;
  const char* row = kTscTable[static_cast<std::size_t>(tsc_id)];
  for (std::size_t i = 0; i < bl::kTrainingBits; ++i) {
    ts.bits[i] = row[i] == '1' ? 1 : 0;
    ts.symbols[i] = map_bit(ts.bits[i]);
  }
  return ts;
}

std::vector<Bit> NormalBurst::serialize() const {
  std::vector<Bit> out;
  out.reserve(bl::kActiveBits);
  append(out, tail_head);
  append(out, data_a);
  out.push_back(flag_a);
  append(out, training);
  out.push_back(flag_b);
  append(out, data_b);
  append(out, tail_tail);
  return out;
}

NormalBurst NormalBurst::parse(std::span<const Bit> bits) {
  if (bits.size() != bl::kActiveBits) {
    throw InvalidArgument("normal burst must have 148 bits, got " + std::to_string(bits.size()));
  }
  check_bits(bits, "parse");
  NormalBurst b;
  std::size_t pos = 0;
  copy_bits(bits, pos, b.tail_head);
  pos += bl::kTailBits;
  copy_bits(bits, pos, b.data_a);
  pos += bl::kDataBits;
  b.flag_a = bits[pos++];
  copy_bits(bits, pos, b.training);
  pos += bl::kTrainingBits;
  b.flag_b = bits[pos++];
  copy_bits(bits, pos, b.data_b);
  pos += bl::kDataBits;
  copy_bits(bits, pos, b.tail_tail);

  for (int id = 0; id < static_cast<int>(kTscTable.size()); ++id) {
    if (training_sequence(id).bits == b.training) {
      b.tsc_id = id;
      break;
    }
  }
  return b;
}

std::vector<Bit> NormalBurst::payload() const {
  std::vector<Bit> out;
  out.reserve(bl::kPayloadBits);
  append(out, data_a);
  append(out, data_b);
  return out;
}

NormalBurst build_burst(std::span<const Bit> data, int tsc_id, std::span<const Bit> flags) {
  if (data.size() != bl::kPayloadBits) {
    throw InvalidArgument("burst payload must be 114 bits, got " + std::to_string(data.size()));
  }
  if (flags.size() != 2) {
    throw InvalidArgument("burst needs exactly 2 stealing flags, got " +
                          std::to_string(flags.size()));
  }
  check_bits(data, "build_burst data");
  check_bits(flags, "build_burst flags");

  NormalBurst b;
  b.tsc_id = tsc_id;
  b.training = training_sequence(tsc_id).bits;
  copy_bits(data, 0, b.data_a);
  copy_bits(data, bl::kDataBits, b.data_b);
  b.flag_a = flags[0];
  b.flag_b = flags[1];
  return b;
}

NormalBurst build_burst(std::span<const Bit> data, int tsc_id) {
  const std::array<Bit, 2> flags{0, 0};
  return build_burst(data, tsc_id, flags);
}

std::array<Bit, bl::kTrainingBits> extract_training(const NormalBurst& burst) {
  return burst.training;
}

GuardStep guard_step(int oversample, int remainder_in) {
  if (oversample < 1) throw InvalidArgument("oversample must be >= 1");
  if (remainder_in < 0 || remainder_in > 3) throw InvalidArgument("guard remainder must be in [0, 3]");
  const int quarters = remainder_in + bl::kGuardQuarterSymbols * oversample;
  return {static_cast<std::size_t>(quarters / 4), quarters % 4};
}

ModulatedBurst modulate(const NormalBurst& burst, const ModulatorOptions& options) {
  if (options.oversample < 1) {
    throw InvalidArgument("oversample must be >= 1, got " + std::to_string(options.oversample));
  }
  if (options.guard_remainder < 0 || options.guard_remainder > 3) {
    throw InvalidArgument("guard remainder must be in [0, 3]");
  }
  const auto os = static_cast<std::size_t>(options.oversample);
  const GuardStep guard = guard_step(options.oversample, options.guard_remainder);

  ModulatedBurst out;
  out.active_samples = bl::kActiveBits * os;
  out.guard_samples = guard.samples;
  out.guard_remainder = guard.remainder;
  out.samples.reserve(out.active_samples + out.guard_samples);
  for (Bit b : burst.serialize()) {
    out.samples.insert(out.samples.end(), os, map_bit(b));
  }
  out.samples.insert(out.samples.end(), guard.samples, cplx(options.guard_amplitude, 0.0));
  return out;
}

}  // namespace commsense
