#pragma once

// Reference computations used only by tests. Each one takes a different route from the
// library code it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "commsense/channel_sim.hpp"
#include "commsense/random.hpp"
#include "commsense/types.hpp"

namespace oracle {

using commsense::cplx;

/// y[n] = sum_k h[k] x[n-k], written as the textbook double loop.
inline std::vector<cplx> direct_convolution(std::span<const cplx> x, std::span<const cplx> h) {
  std::vector<cplx> y(x.size() + h.size() - 1, cplx(0.0, 0.0));
  for (std::size_t n = 0; n < y.size(); ++n) {
    for (std::size_t k = 0; k < h.size(); ++k) {
      if (n >= k && n - k < x.size()) y[n] += h[k] * x[n - k];
    }
  }
  return y;
}

/// Solves (M^H M) h = M^H y by Gaussian elimination with partial pivoting.
/// `m` is row-major, rows x cols.
inline std::vector<cplx> normal_equations(const std::vector<cplx>& m, std::size_t rows,
                                          std::size_t cols, std::span<const cplx> y) {
  std::vector<cplx> a(cols * (cols + 1), cplx(0.0, 0.0));
  auto at = [&](std::size_t r, std::size_t c) -> cplx& { return a[r * (cols + 1) + c]; };
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t r = 0; r < rows; ++r) at(i, j) += std::conj(m[r * cols + i]) * m[r * cols + j];
    }
    for (std::size_t r = 0; r < rows; ++r) at(i, cols) += std::conj(m[r * cols + i]) * y[r];
  }
  for (std::size_t p = 0; p < cols; ++p) {
    std::size_t piv = p;
    for (std::size_t r = p + 1; r < cols; ++r) {
      if (std::abs(at(r, p)) > std::abs(at(piv, p))) piv = r;
    }
    if (std::abs(at(piv, p)) == 0.0) throw std::runtime_error("oracle: singular normal matrix");
    for (std::size_t c = 0; c <= cols; ++c) std::swap(at(p, c), at(piv, c));
    for (std::size_t r = p + 1; r < cols; ++r) {
      const cplx f = at(r, p) / at(p, p);
      for (std::size_t c = p; c <= cols; ++c) at(r, c) -= f * at(p, c);
    }
  }
  std::vector<cplx> h(cols);
  for (std::size_t i = cols; i-- > 0;) {
    cplx s = at(i, cols);
    for (std::size_t j = i + 1; j < cols; ++j) s -= at(i, j) * h[j];
    h[i] = s / at(i, i);
  }
  return h;
}

/// Gamma(x) = int_0^inf t^(x-1) e^-t dt.
inline double gamma_integral(double x) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate([x](double t) {
    if (!std::isfinite(t)) return 0.0;
    return std::exp((x - 1.0) * std::log(t) - t);
  });
}

/// Gauss's integral psi(x) = int_0^inf (e^-t / t - e^(-x t) / (1 - e^-t)) dt.
inline double digamma_integral(double x) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate([x](double t) {
    if (t < 1e-8) return x - 1.5;  // limit of the integrand at 0
    return std::exp(-t) / t - std::exp(-x * t) / (-std::expm1(-t));
  });
}

/// Upper tail of chi-square(dof) by integrating its density from x to infinity.
inline double chi2_tail_integral(double x, int dof) {
  const double k = dof / 2.0;
  const double log_norm = -k * std::log(2.0) - std::lgamma(k);
  auto pdf = [=](double t) {
    if (t <= 0.0) return 0.0;
    return std::exp(log_norm + (k - 1.0) * std::log(t) - t / 2.0);
  };
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate(pdf, x, std::numeric_limits<double>::infinity());
}

/// int_a^b f for a finite interval.
template <class F>
inline double integrate(F f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, a, b);
}

template <class F>
inline double integrate_to_infinity(F f, double a) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate(f, a, std::numeric_limits<double>::infinity());
}

/// Frequency of the periodogram peak: a zero-padded DFT grid search followed by golden
/// section refinement of |X(f)| between the neighbouring grid points.
inline double periodogram_peak_hz(std::span<const cplx> x, double fs) {
  auto magnitude = [&](double f) {
    const double w = -2.0 * std::numbers::pi * f / fs;
    cplx acc(0.0, 0.0);
    for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * std::polar(1.0, w * static_cast<double>(k));
    return std::abs(acc);
  };
  // Coarse peak from a zero-padded FFT, then refine on the exact DTFT.
  const std::size_t grid = 4 * x.size();
  std::vector<cplx> padded(x.begin(), x.end());
  padded.resize(grid, cplx(0.0, 0.0));
  std::vector<cplx> spectrum;
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, padded);
  double best_f = 0.0;
  double best = -1.0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double v = std::abs(spectrum[i]);
    if (v > best) {
      best = v;
      best_f = fs * static_cast<double>(i) / static_cast<double>(grid);
    }
  }
  if (best_f >= fs / 2.0) best_f -= fs;
  double lo = best_f - fs / static_cast<double>(grid);
  double hi = best_f + fs / static_cast<double>(grid);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - g * (hi - lo);
  double d = lo + g * (hi - lo);
  double fc = magnitude(c);
  double fd = magnitude(d);
  while (hi - lo > 1e-4) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = magnitude(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = magnitude(d);
    }
  }
  return (lo + hi) / 2.0;
}

/// Unit eigenvector of the largest eigenvalue of [[a, b], [b, c]], in closed form.
inline std::array<double, 2> leading_eigenvector_2x2(double a, double b, double c) {
  const double mean = (a + c) / 2.0;
  const double lambda = mean + std::hypot((a - c) / 2.0, b);
  std::array<double, 2> v{};
  if (std::abs(b) > 1e-300) {
    v = {b, lambda - a};
  } else {
    v = a >= c ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
  }
  const double n = std::hypot(v[0], v[1]);
  return {v[0] / n, v[1] / n};
}

/// Marsaglia-Tsang gamma sampler, shape >= 1, on the library generator.
inline double sample_gamma(commsense::Rng& rng, double shape, double scale) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z = 0.0;
    double v = 0.0;
    do {
      z = rng.normal();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(1.0 - u) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v * scale;
  }
}

/// Scene CIR used by the discrimination tests: a line-of-sight tap, one reflection near
/// quadrature to it at `delay`, and weak diffuse scatter, scaled to unit energy.
inline std::vector<cplx> scene_template(std::uint64_t seed, int delay, double reflection = 0.7,
                                        double diffuse = 0.3, std::size_t length = 40) {
  commsense::Rng rng(seed);
  const auto scatter = commsense::random_cir(length, 1.5, seed + 99);
  std::vector<cplx> t(length);
  for (std::size_t k = 0; k < length; ++k) t[k] = diffuse * scatter[k];
  t[0] += std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
  const double theta = std::arg(t[0]);
  const double side = rng.bit() ? 1.0 : -1.0;
  const double quarter = std::numbers::pi / 2.0;
  t[static_cast<std::size_t>(delay)] +=
      std::polar(reflection, theta + side * (quarter + (rng.uniform() - 0.5) * quarter));
  double energy = 0.0;
  for (const auto& v : t) energy += std::norm(v);
  for (auto& v : t) v /= std::sqrt(energy);
  return t;
}

}  // namespace oracle
