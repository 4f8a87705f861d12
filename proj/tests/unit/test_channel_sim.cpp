#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "commsense/channel_sim.hpp"
#include "commsense/errors.hpp"
#include "commsense/random.hpp"
#include "oracles.hpp"

using namespace commsense;

namespace {

std::vector<cplx> random_signal(Rng& rng, std::size_t n) {
  std::vector<cplx> v(n);
  for (auto& s : v) s = rng.complex_normal(1.0);
  return v;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

IQStream as_stream(std::vector<cplx> s) {
  IQStream x;
  x.samples = std::move(s);
  return x;
}

}  // namespace

TEST_CASE("identity channel passes the input through") {
  Rng rng(1);
  const auto x = random_signal(rng, 50);
  const std::vector<cplx> h{cplx(1.0, 0.0)};
  CHECK(apply_channel(x, h) == x);
}

TEST_CASE("impulse input reads out the taps") {
  const std::vector<cplx> x{1.0, 0.0, 0.0};
  const std::vector<cplx> h{0.5, 0.25};
  const std::vector<cplx> expected{0.5, 0.25, 0.0, 0.0};
  CHECK(apply_channel(x, h) == expected);
}

TEST_CASE("convolution matches the direct double sum") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_signal(rng, 64);
    const auto h = random_signal(rng, 5);
    CHECK(max_abs_diff(apply_channel(x, h), oracle::direct_convolution(x, h)) < 1e-12);
  }
}

TEST_CASE("convolution is linear and commutes with tap scaling") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x1 = random_signal(rng, 40);
    const auto x2 = random_signal(rng, 40);
    const auto h = random_signal(rng, 7);
    const cplx a = rng.complex_normal(1.0);
    std::vector<cplx> mix(40);
    for (std::size_t i = 0; i < 40; ++i) mix[i] = a * x1[i] + x2[i];
    const auto y1 = apply_channel(x1, h);
    const auto y2 = apply_channel(x2, h);
    std::vector<cplx> combo(y1.size());
    for (std::size_t i = 0; i < y1.size(); ++i) combo[i] = a * y1[i] + y2[i];
    CHECK(max_abs_diff(apply_channel(mix, h), combo) < 1e-12);

    std::vector<cplx> scaled = h;
    for (auto& t : scaled) t *= a;
    auto ref = apply_channel(x1, h);
    for (auto& v : ref) v *= a;
    CHECK(max_abs_diff(apply_channel(x1, scaled), ref) < 1e-12);
  }
}

TEST_CASE("apply_channel rejects empty inputs") {
  const std::vector<cplx> empty;
  const std::vector<cplx> one{1.0};
  CHECK_THROWS_AS(apply_channel(empty, one), InvalidArgument);
  CHECK_THROWS_AS(apply_channel(one, empty), InvalidArgument);
}

TEST_CASE("vanishing noise at very high SNR") {
  Rng rng(3);
  const auto x = as_stream(random_signal(rng, 1000));
  const auto y = add_awgn(x, {300.0, 17});
  double rms = 0.0;
  for (const auto& s : x.samples) rms += std::norm(s);
  rms = std::sqrt(rms / 1000.0);
  CHECK(max_abs_diff(x.samples, y.samples) < 1e-10 * rms);
}

TEST_CASE("noise is deterministic for a fixed seed") {
  Rng rng(4);
  const auto x = as_stream(random_signal(rng, 500));
  CHECK(add_awgn(x, {10.0, 42}).samples == add_awgn(x, {10.0, 42}).samples);
  CHECK(add_awgn(x, {10.0, 42}).samples != add_awgn(x, {10.0, 43}).samples);
}

TEST_CASE("noise power and shape at 0 dB over 10^6 samples") {
  const std::size_t n = 1'000'000;
  IQStream x;
  x.samples.assign(n, cplx(1.0, 0.0));
  const auto y = add_awgn(x, {0.0, 2026});
  double p = 0.0;
  double m1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx e = y.samples[i] - x.samples[i];
    p += std::norm(e);
    m1 += e.real();
  }
  p /= static_cast<double>(n);
  m1 /= static_cast<double>(n);
  CHECK(std::abs(p - 1.0) < 0.01);

  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (y.samples[i] - x.samples[i]).real() - m1;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  CHECK(std::abs(m3 / std::pow(m2, 1.5)) < 0.05);
  CHECK(std::abs(m4 / (m2 * m2) - 3.0) < 0.05);
}

TEST_CASE("add_awgn argument checks") {
  IQStream x;
  x.samples.assign(10, cplx(1.0, 0.0));
  CHECK_THROWS_AS(add_awgn(x, {std::nan(""), 1}), InvalidArgument);
  CHECK_THROWS_AS(add_awgn(x, {10.0, 1}, -1.0), InvalidArgument);
}

TEST_CASE("single noiseless burst through an identity channel") {
  ScenarioSpec s;
  s.bursts = 1;
  s.tsc = 5;
  const auto sim = simulate_capture(s);
  REQUIRE(sim.burst_starts.size() == 1);
  CHECK(sim.burst_starts[0] == 8);
  const auto m = modulate(sim.bursts[0], {1, 0.0, 1});
  // Leading guard (8 samples, remainder 1), burst, trailing guard; no channel tail.
  CHECK(sim.stream.size() == 8 + m.samples.size());
  for (std::size_t i = 0; i < 8; ++i) CHECK(sim.stream.samples[i] == cplx(0.0, 0.0));
  for (std::size_t i = 0; i < m.samples.size(); ++i) CHECK(sim.stream.samples[8 + i] == m.samples[i]);
  CHECK(sim.bursts[0].training == training_sequence(5).bits);
}

TEST_CASE("burst starts follow the 156.25-symbol slot grid") {
  for (int os : {1, 2, 4}) {
    ScenarioSpec s;
    s.bursts = 40;
    s.oversample = os;
    const auto sim = simulate_capture(s);
    REQUIRE(sim.burst_starts.size() == 40);
    for (std::size_t n = 0; n < 40; ++n) {
      const auto expected = static_cast<std::size_t>(std::floor(8.25 * os + 156.25 * os * static_cast<double>(n)));
      CHECK(sim.burst_starts[n] == expected);
    }
  }
}

TEST_CASE("fixed channel gives identical ground truth for every burst") {
  ScenarioSpec s;
  s.bursts = 100;
  s.cir_template = {cplx(1.0, 0.0), cplx(0.5, 0.2), cplx(0.2, -0.1), cplx(0.1, 0.0), cplx(0.05, 0.02)};
  s.snr_db = 20.0;
  const auto sim = simulate_capture(s);
  REQUIRE(sim.ground_truth.size() == 100);
  for (const auto& g : sim.ground_truth) CHECK(g.taps == s.cir_template);
  // Stream ends with the channel tail after the last guard.
  CHECK(sim.stream.size() == 8 + 100 * 148 + (100 * 33 + 1) / 4 + 4);
}

TEST_CASE("noiseless stream is the sum of per-burst convolutions") {
  ScenarioSpec s;
  s.bursts = 3;
  s.oversample = 2;
  s.cir_template = {cplx(0.8, 0.1), cplx(0.0, 0.4), cplx(-0.2, 0.1)};
  s.perturbation_spread = 0.1;
  const auto sim = simulate_capture(s);
  std::vector<cplx> expected(sim.stream.size(), cplx(0.0, 0.0));
  for (std::size_t n = 0; n < 3; ++n) {
    const auto active = modulate(sim.bursts[n], {2, 0.0, 0});
    std::vector<cplx> burst(active.samples.begin(), active.samples.begin() + 296);
    const auto h = upsample_taps(sim.ground_truth[n].taps, 2);
    const auto y = oracle::direct_convolution(burst, h);
    for (std::size_t i = 0; i < y.size(); ++i) expected[sim.burst_starts[n] + i] += y[i];
  }
  CHECK(max_abs_diff(sim.stream.samples, expected) < 1e-12);
}

TEST_CASE("SNR is defined over the active samples") {
  ScenarioSpec s;
  s.bursts = 100;
  s.cir_template = {cplx(0.9, 0.0), cplx(0.3, 0.3)};
  s.seed = 77;
  const auto clean = simulate_capture(s);
  s.snr_db = 10.0;
  const auto noisy = simulate_capture(s);
  REQUIRE(clean.stream.size() == noisy.stream.size());
  double signal = 0.0;
  std::size_t active = 0;
  for (std::size_t n = 0; n < 100; ++n) {
    for (std::size_t i = 0; i < 148; ++i) {
      signal += std::norm(clean.stream.samples[clean.burst_starts[n] + i]);
      ++active;
    }
  }
  signal /= static_cast<double>(active);
  double noise = 0.0;
  for (std::size_t i = 0; i < clean.stream.size(); ++i) {
    noise += std::norm(noisy.stream.samples[i] - clean.stream.samples[i]);
  }
  noise /= static_cast<double>(clean.stream.size());
  CHECK(std::abs(10.0 * std::log10(signal / noise) - 10.0) < 0.1);
}

TEST_CASE("perturbed ensemble scatters around the template") {
  ScenarioSpec s;
  s.bursts = 2000;
  s.cir_template = {cplx(1.0, 0.0), cplx(0.0, 0.5)};
  s.perturbation_spread = 0.1;
  const auto sim = simulate_capture(s);
  cplx mean0(0.0, 0.0);
  double var0 = 0.0;
  for (const auto& g : sim.ground_truth) {
    mean0 += g.taps[0];
    var0 += std::norm(g.taps[0] - s.cir_template[0]);
  }
  mean0 /= 2000.0;
  var0 /= 2000.0;
  CHECK(std::abs(mean0 - s.cir_template[0]) < 0.01);
  CHECK(std::abs(var0 - 0.01) < 0.001);
  CHECK(sim.ground_truth[0].taps != sim.ground_truth[1].taps);
}

TEST_CASE("simulate_capture is deterministic and validates its input") {
  ScenarioSpec s;
  s.bursts = 5;
  s.snr_db = 5.0;
  s.perturbation_spread = 0.2;
  CHECK(simulate_capture(s).stream.samples == simulate_capture(s).stream.samples);
  ScenarioSpec bad = s;
  bad.bursts = 0;
  CHECK_THROWS_AS(simulate_capture(bad), InvalidArgument);
  bad = s;
  bad.cir_template.clear();
  CHECK_THROWS_AS(simulate_capture(bad), InvalidArgument);
  bad = s;
  bad.perturbation_spread = -1.0;
  CHECK_THROWS_AS(simulate_capture(bad), InvalidArgument);
  bad = s;
  bad.oversample = 0;
  CHECK_THROWS_AS(simulate_capture(bad), InvalidArgument);
}

TEST_CASE("upsample_taps places taps on the symbol grid") {
  const std::vector<cplx> h{1.0, 2.0, 3.0};
  const std::vector<cplx> expected{1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 3.0};
  CHECK(upsample_taps(h, 3) == expected);
  CHECK(upsample_taps(h, 1) == h);
}

TEST_CASE("random_cir has unit energy and a decaying profile") {
  const auto a = random_cir(40, 1.5, 9);
  REQUIRE(a.size() == 40);
  double e = 0.0;
  for (const auto& t : a) e += std::norm(t);
  CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(random_cir(40, 1.5, 9) == a);
  CHECK(random_cir(40, 1.5, 10) != a);

  // Average profile over many seeds follows exp(-k / decay).
  std::vector<double> profile(6, 0.0);
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    const auto h = random_cir(6, 2.0, seed);
    for (std::size_t k = 0; k < 6; ++k) profile[k] += std::norm(h[k]);
  }
  for (std::size_t k = 1; k < 6; ++k) CHECK(profile[k] / profile[k - 1] == doctest::Approx(std::exp(-0.5)).epsilon(0.08));

  CHECK_THROWS_AS(random_cir(0, 1.5, 1), InvalidArgument);
  CHECK_THROWS_AS(random_cir(5, 0.0, 1), InvalidArgument);
}
