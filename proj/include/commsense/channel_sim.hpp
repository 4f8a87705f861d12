#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "commsense/burst_model.hpp"
#include "commsense/types.hpp"

namespace commsense {

struct NoiseSpec {
  double snr_db = 30.0;
  std::uint64_t seed = 1;
};

/// Linear convolution; output length is len(x) + Cl - 1.
std::vector<cplx> apply_channel(std::span<const cplx> x, std::span<const cplx> taps);
IQStream apply_channel(const IQStream& x, const ChannelImpulseResponse& h);

/// Adds circular complex AWGN with E|n|^2 = mean(|x|^2) * 10^(-snr_db/10).
IQStream add_awgn(const IQStream& x, const NoiseSpec& noise);
/// Same, with the reference signal power given explicitly.
IQStream add_awgn(const IQStream& x, const NoiseSpec& noise, double signal_power);

/// Everything needed to generate a ground-truthed multi-burst capture.
struct ScenarioSpec {
  std::size_t bursts = 1;
  int tsc = 0;
  /// Template CIR (symbol spaced).
  std::vector<cplx> cir_template{cplx(1.0, 0.0)};
  /// Per-burst, per-tap complex Gaussian perturbation std (E|d|^2 = spread^2).
  double perturbation_spread = 0.0;
  /// nullopt means noiseless.
  std::optional<double> snr_db;
  std::uint64_t seed = 1;
  int oversample = 1;
  double guard_amplitude = 0.0;
  std::string label = "scenario";
};

struct SimulatedCapture {
  IQStream stream;
  std::vector<ChannelImpulseResponse> ground_truth;
  /// First active sample of each burst in `stream`.
  std::vector<std::size_t> burst_starts;
  std::vector<NormalBurst> bursts;
};

/// Stream layout: one leading guard period, then for every burst its 148 active
/// symbols followed by a guard period (8.25 symbols, remainder carried), then a
/// (Cl-1)*oversample channel tail. Each burst is convolved with its own CIR and the
/// contributions are summed, so channel tails spill into the following guard.
///
/// Random draws, from Rng(seed), in this order per burst: 114 data bits, 2 flag bits,
/// then Cl perturbation taps when spread > 0. Noise uses Rng(mix_seed(seed, 1)).
/// SNR is measured over the active samples of the noiseless received stream.
SimulatedCapture simulate_capture(const ScenarioSpec& scenario);

/// Places symbol-spaced taps on the sample grid (zeros between taps).
std::vector<cplx> upsample_taps(std::span<const cplx> taps, int oversample);

/// Random multipath template: tap k is complex Gaussian with variance exp(-k / decay),
/// then the vector is scaled to unit energy.
std::vector<cplx> random_cir(std::size_t length, double decay_symbols, std::uint64_t seed);

}  // namespace commsense
