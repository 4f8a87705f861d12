#include "commsense/channel_sim.hpp"

#include <cmath>
#include <string>

#include "commsense/errors.hpp"
#include "commsense/random.hpp"

namespace commsense {

std::vector<cplx> apply_channel(std::span<const cplx> x, std::span<const cplx> taps) {
  if (x.empty()) throw InvalidArgument("apply_channel: empty input stream");
  if (taps.empty()) throw InvalidArgument("apply_channel: CIR must have at least one tap");

  std::vector<cplx> y(x.size() + taps.size() - 1, cplx(0.0, 0.0));
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const cplx h = taps[k];
    if (h == cplx(0.0, 0.0)) continue;
    for (std::size_t n = 0; n < x.size(); ++n) y[n + k] += h * x[n];
  }
  return y;
}

IQStream apply_channel(const IQStream& x, const ChannelImpulseResponse& h) {
  IQStream out = x;
  out.samples = apply_channel(x.samples, h.taps);
  return out;
}

IQStream add_awgn(const IQStream& x, const NoiseSpec& noise, double signal_power) {
  if (!std::isfinite(noise.snr_db)) throw InvalidArgument("add_awgn: snr_db must be finite");
  if (signal_power < 0.0) throw InvalidArgument("add_awgn: negative signal power");

  const double noise_power = signal_power * std::pow(10.0, -noise.snr_db / 10.0);
  Rng rng(noise.seed);
  IQStream out = x;
  for (cplx& s : out.samples) s += rng.complex_normal(noise_power);
  return out;
}

IQStream add_awgn(const IQStream& x, const NoiseSpec& noise) {
  double power = 0.0;
  for (const cplx& s : x.samples) power += std::norm(s);
  if (!x.samples.empty()) power /= static_cast<double>(x.samples.size());
  return add_awgn(x, noise, power);
}

std::vector<cplx> upsample_taps(std::span<const cplx> taps, int oversample) {
  if (oversample < 1) throw InvalidArgument("oversample must be >= 1");
  if (taps.empty()) return {};
  const auto os = static_cast<std::size_t>(oversample);
  std::vector<cplx> out((taps.size() - 1) * os + 1, cplx(0.0, 0.0));
  for (std::size_t k = 0; k < taps.size(); ++k) out[k * os] = taps[k];
  return out;
}

std::vector<cplx> random_cir(std::size_t length, double decay_symbols, std::uint64_t seed) {
  if (length == 0) throw InvalidArgument("CIR length must be >= 1");
  if (!(decay_symbols > 0.0)) throw InvalidArgument("CIR decay constant must be positive");
  Rng rng(seed);
  std::vector<cplx> taps(length);
  double energy = 0.0;
  for (std::size_t k = 0; k < length; ++k) {
    taps[k] = rng.complex_normal(std::exp(-static_cast<double>(k) / decay_symbols));
    energy += std::norm(taps[k]);
  }
  const double scale = 1.0 / std::sqrt(energy);
  for (auto& t : taps) t *= scale;
  return taps;
}

SimulatedCapture simulate_capture(const ScenarioSpec& scenario) {
  if (scenario.bursts == 0) throw InvalidArgument("scenario must contain at least one burst");
  if (scenario.cir_template.empty()) throw InvalidArgument("scenario CIR template is empty");
  if (scenario.oversample < 1) throw InvalidArgument("oversample must be >= 1");
  if (scenario.perturbation_spread < 0.0) throw InvalidArgument("perturbation spread must be >= 0");

  const auto os = static_cast<std::size_t>(scenario.oversample);
  const std::size_t cl = scenario.cir_template.size();
  Rng rng(scenario.seed);

  SimulatedCapture cap;
  cap.stream.oversample = scenario.oversample;
  cap.stream.sample_rate_hz = kSymbolRateHz * static_cast<double>(os);
  cap.stream.scenario_id = scenario.label;

  // Transmit side: leading guard, then burst + guard repeated.
  const GuardStep lead = guard_step(scenario.oversample, 0);
  std::vector<std::vector<cplx>> segments;
  std::vector<std::size_t> segment_starts;
  std::size_t pos = 0;
  int remainder = lead.remainder;

  for (std::size_t n = 0; n < scenario.bursts; ++n) {
    std::vector<Bit> data(burst_layout::kPayloadBits);
    for (Bit& b : data) b = rng.bit();
    const std::array<Bit, 2> flags{rng.bit(), rng.bit()};
    NormalBurst burst = build_burst(data, scenario.tsc, flags);

    ChannelImpulseResponse h{scenario.cir_template};
    if (scenario.perturbation_spread > 0.0) {
      const double var = scenario.perturbation_spread * scenario.perturbation_spread;
      for (cplx& t : h.taps) t += rng.complex_normal(var);
    }

    ModulatedBurst mod = modulate(
        burst, {scenario.oversample, scenario.guard_amplitude, remainder});
    remainder = mod.guard_remainder;

    std::vector<cplx> segment;
    if (n == 0) {
      segment.assign(lead.samples, cplx(scenario.guard_amplitude, 0.0));
      cap.burst_starts.push_back(lead.samples);
      segment_starts.push_back(0);
      pos = lead.samples;
    } else {
      cap.burst_starts.push_back(pos);
      segment_starts.push_back(pos);
    }
    segment.insert(segment.end(), mod.samples.begin(), mod.samples.end());
    pos += mod.samples.size();

    segments.push_back(apply_channel(segment, upsample_taps(h.taps, scenario.oversample)));
    cap.ground_truth.push_back(std::move(h));
    cap.bursts.push_back(std::move(burst));
  }

  const std::size_t total = pos + (cl - 1) * os;
  cap.stream.samples.assign(total, cplx(0.0, 0.0));
  for (std::size_t n = 0; n < segments.size(); ++n) {
    const auto& seg = segments[n];
    for (std::size_t i = 0; i < seg.size(); ++i) cap.stream.samples[segment_starts[n] + i] += seg[i];
  }

  if (scenario.snr_db) {
    double power = 0.0;
    const std::size_t active = burst_layout::kActiveBits * os;
    for (std::size_t start : cap.burst_starts) {
      for (std::size_t i = start; i < start + active; ++i) power += std::norm(cap.stream.samples[i]);
    }
    power /= static_cast<double>(active * cap.burst_starts.size());
    cap.stream = add_awgn(cap.stream, {*scenario.snr_db, mix_seed(scenario.seed, 1)}, power);
  }
  return cap;
}

}  // namespace commsense
