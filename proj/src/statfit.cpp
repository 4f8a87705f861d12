#include "commsense/statfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "commsense/errors.hpp"
#include "commsense/special_functions.hpp"

namespace commsense {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_count(std::span<const double> s, std::size_t n, const char* what) {
  if (s.size() < n) {
    throw InsufficientData(std::string(what) + " needs at least " + std::to_string(n) +
                           " samples, got " + std::to_string(s.size()));
  }
}

void require_finite(std::span<const double> s, const char* what) {
  for (double x : s) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + ": samples must be finite");
  }
}

void require_positive(std::span<const double> s, const char* what) {
  for (double x : s) {
    if (!(x > 0.0)) {
      std::ostringstream os;
      os << what << ": all samples must be > 0 (found " << x << ")";
      throw DomainError(os.str());
    }
  }
}

double mean_of(std::span<const double> s) {
  double acc = 0.0;
  for (double x : s) acc += x;
  return acc / static_cast<double>(s.size());
}

double log_pdf(const DistributionFit& fit, double x) {
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  const double log_norm = std::log(kInvSqrt2Pi);
  return std::visit(
      overloaded{
          [&](const RayleighParams& p) {
            if (x <= 0.0) return ninf;
            const double s2 = p.sigma * p.sigma;
            return std::log(x / s2) - x * x / (2.0 * s2);
          },
          [&](const NormalParams& p) {
            if (!(p.sigma > 0.0)) return ninf;
            const double z = (x - p.mean) / p.sigma;
            return log_norm - std::log(p.sigma) - 0.5 * z * z;
          },
          [&](const LognormalParams& p) {
            if (x <= 0.0 || !(p.sigma > 0.0)) return ninf;
            const double z = (std::log(x) - p.mu) / p.sigma;
            return log_norm - std::log(x * p.sigma) - 0.5 * z * z;
          },
          [&](const GammaParams& p) {
            if (x < 0.0) return ninf;
            if (x == 0.0) {
              if (p.shape < 1.0) return std::numeric_limits<double>::infinity();
              return p.shape == 1.0 ? -std::log(p.scale) : ninf;
            }
            const double u = x / p.scale;
            return (p.shape - 1.0) * std::log(u) - u - special::log_gamma(p.shape) - std::log(p.scale);
          },
      },
      fit.params);
}

}  // namespace

std::vector<double> EmpiricalPDF::bin_centers() const {
  std::vector<double> c(bins());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (bin_edges[i] + bin_edges[i + 1]);
  return c;
}

EmpiricalPDF empirical_pdf(std::span<const double> samples, int bins) {
  if (bins < 2) throw InvalidArgument("empirical_pdf: need at least 2 bins");
  require_count(samples, 2, "empirical_pdf");
  require_finite(samples, "empirical_pdf");

  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw DegenerateInput("empirical_pdf: all samples identical (zero-width support)");

  const auto nb = static_cast<std::size_t>(bins);
  EmpiricalPDF pdf;
  pdf.n_samples = samples.size();
  pdf.bin_edges.resize(nb + 1);
  const double width = (hi - lo) / static_cast<double>(nb);
  for (std::size_t i = 0; i <= nb; ++i) pdf.bin_edges[i] = lo + width * static_cast<double>(i);
  pdf.bin_edges[nb] = hi;

  pdf.counts.assign(nb, 0);
  for (double x : samples) {
    auto idx = static_cast<std::size_t>(std::floor((x - lo) / width));
    idx = std::min(idx, nb - 1);
    while (idx + 1 < nb && x >= pdf.bin_edges[idx + 1]) ++idx;
    while (idx > 0 && x < pdf.bin_edges[idx]) --idx;
    ++pdf.counts[idx];
  }
  pdf.density.resize(nb);
  const auto n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < nb; ++i) {
    pdf.density[i] = static_cast<double>(pdf.counts[i]) / (n * pdf.bin_width(i));
  }
  return pdf;
}

std::string to_string(Family f) {
  switch (f) {
    case Family::rayleigh: return "rayleigh";
    case Family::normal: return "normal";
    case Family::lognormal: return "lognormal";
    case Family::gamma: return "gamma";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "rayleigh") return Family::rayleigh;
  if (name == "normal" || name == "norm" || name == "gaussian") return Family::normal;
  if (name == "lognormal" || name == "lognorm") return Family::lognormal;
  if (name == "gamma") return Family::gamma;
  throw InvalidArgument("unknown distribution family '" + name + "'");
}

Family DistributionFit::family() const noexcept {
  return static_cast<Family>(params.index());
}

DistributionFit make_fit(DistributionParams params) {
  DistributionFit f{params, {}};
  f.moments = moments(f);
  return f;
}

DistributionFit fit_normal(std::span<const double> samples) {
  require_count(samples, 2, "fit_normal");
  require_finite(samples, "fit_normal");
  const MeanVariance mv = sample_mean_variance(samples);
  return make_fit(NormalParams{mv.mean, std::sqrt(mv.variance)});
}

DistributionFit fit_rayleigh(std::span<const double> samples) {
  require_count(samples, 1, "fit_rayleigh");
  require_finite(samples, "fit_rayleigh");
  require_positive(samples, "fit_rayleigh");
  double ss = 0.0;
  for (double x : samples) ss += x * x;
  return make_fit(RayleighParams{std::sqrt(ss / (2.0 * static_cast<double>(samples.size())))});
}

DistributionFit fit_lognormal(std::span<const double> samples) {
  require_count(samples, 1, "fit_lognormal");
  require_finite(samples, "fit_lognormal");
  require_positive(samples, "fit_lognormal");
  std::vector<double> logs(samples.size());
  std::transform(samples.begin(), samples.end(), logs.begin(), [](double x) { return std::log(x); });
  const MeanVariance mv = sample_mean_variance(logs);
  return make_fit(LognormalParams{mv.mean, std::sqrt(mv.variance), std::exp(mv.mean)});
}

DistributionFit fit_gamma(std::span<const double> samples) {
  require_count(samples, 2, "fit_gamma");
  require_finite(samples, "fit_gamma");
  require_positive(samples, "fit_gamma");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) throw DegenerateInput("fit_gamma: all samples equal, shape is unbounded");

  const double mean = mean_of(samples);
  double mean_log = 0.0;
  for (double x : samples) mean_log += std::log(x);
  mean_log /= static_cast<double>(samples.size());
  const double s = std::log(mean) - mean_log;
  if (!(s > 0.0)) throw DegenerateInput("fit_gamma: log(mean / geometric mean) is not positive");

  double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  double lo_k = 0.0;
  double hi_k = std::numeric_limits<double>::infinity();
  std::vector<double> trace{k};

  for (int it = 1; it <= kGammaMaxIterations; ++it) {
    const double g = special::log_minus_digamma(k) - s;
    if (g > 0.0) {
      lo_k = std::max(lo_k, k);
    } else {
      hi_k = std::min(hi_k, k);
    }
    const double dg = 1.0 / k - special::trigamma(k);
    double next = k - g / dg;
    if (!std::isfinite(next) || next <= lo_k || next >= hi_k) {
      next = std::isfinite(hi_k) ? 0.5 * (lo_k + hi_k) : 2.0 * k;
    }
    const double step = next - k;
    k = next;
    trace.push_back(k);
    if (std::abs(step) < kGammaTolerance * std::max(1.0, k)) {
      return make_fit(GammaParams{k, mean / k, it});
    }
  }
  throw NumericalFailure("fit_gamma: Newton iteration did not converge in " +
                             std::to_string(kGammaMaxIterations) + " iterations",
                         std::move(trace));
}

DistributionFit fit(Family family, std::span<const double> samples) {
  switch (family) {
    case Family::rayleigh: return fit_rayleigh(samples);
    case Family::normal: return fit_normal(samples);
    case Family::lognormal: return fit_lognormal(samples);
    case Family::gamma: return fit_gamma(samples);
  }
  throw InvalidArgument("unknown family");
}

double pdf_value(const DistributionFit& fit, double x) { return std::exp(log_pdf(fit, x)); }

double cdf_value(const DistributionFit& fit, double x) {
  return std::visit(
      overloaded{
          [&](const RayleighParams& p) {
            return x <= 0.0 ? 0.0 : -std::expm1(-x * x / (2.0 * p.sigma * p.sigma));
          },
          [&](const NormalParams& p) {
            if (!(p.sigma > 0.0)) return x < p.mean ? 0.0 : 1.0;
            return 0.5 * std::erfc(-(x - p.mean) / (p.sigma * std::numbers::sqrt2));
          },
          [&](const LognormalParams& p) {
            if (x <= 0.0) return 0.0;
            if (!(p.sigma > 0.0)) return std::log(x) < p.mu ? 0.0 : 1.0;
            return 0.5 * std::erfc(-(std::log(x) - p.mu) / (p.sigma * std::numbers::sqrt2));
          },
          [&](const GammaParams& p) {
            return x <= 0.0 ? 0.0 : special::regularized_gamma_p(p.shape, x / p.scale);
          },
      },
      fit.params);
}

double log_likelihood(const DistributionFit& fit, std::span<const double> samples) {
  double ll = 0.0;
  for (double x : samples) ll += log_pdf(fit, x);
  return ll;
}

Moments moments(const DistributionFit& fit) {
  return std::visit(
      overloaded{
          [](const RayleighParams& p) {
            const double pi = std::numbers::pi;
            return Moments{p.sigma * std::sqrt(pi / 2.0), (4.0 - pi) / 2.0 * p.sigma * p.sigma,
                           2.0 * std::sqrt(pi) * (pi - 3.0) / std::pow(4.0 - pi, 1.5),
                           -(6.0 * pi * pi - 24.0 * pi + 16.0) / ((4.0 - pi) * (4.0 - pi))};
          },
          [](const NormalParams& p) { return Moments{p.mean, p.sigma * p.sigma, 0.0, 0.0}; },
          [](const LognormalParams& p) {
            const double w = std::exp(p.sigma * p.sigma);
            return Moments{p.median * std::sqrt(w), (w - 1.0) * w * p.median * p.median,
                           (w + 2.0) * std::sqrt(w - 1.0),
                           w * w * w * w + 2.0 * w * w * w + 3.0 * w * w - 6.0};
          },
          [](const GammaParams& p) {
            return Moments{p.shape * p.scale, p.shape * p.scale * p.scale, 2.0 / std::sqrt(p.shape),
                           6.0 / p.shape};
          },
      },
      fit.params);
}

MeanVariance sample_mean_variance(std::span<const double> samples) {
  require_count(samples, 1, "sample_mean_variance");
  const double mean = mean_of(samples);
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return {mean, ss / static_cast<double>(samples.size())};
}

Moments sample_moments(std::span<const double> samples) {
  require_count(samples, 4, "sample_moments");
  require_finite(samples, "sample_moments");
  const double mean = mean_of(samples);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const auto n = static_cast<double>(samples.size());
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) throw DegenerateInput("sample_moments: variance is 0, skew and kurtosis undefined");
  return {mean, m2, m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

ChiSquareResult chi_square(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size()) {
    throw InvalidArgument("chi_square: observed and expected lengths differ (" +
                          std::to_string(observed.size()) + " vs " +
                          std::to_string(expected.size()) + ")");
  }
  if (observed.size() < 2) throw InvalidArgument("chi_square: need at least 2 cells");
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0)) {
      throw DomainError("chi_square: expected value at cell " + std::to_string(i) +
                        " must be > 0");
    }
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  ChiSquareResult r;
  r.statistic = stat;
  r.dof = static_cast<int>(observed.size()) - 1;
  r.p_value = special::chi2_survival(stat, r.dof);
  return r;
}

namespace {

GoodnessOfFit finish_gof(std::vector<double> observed, std::vector<double> expected) {
  GoodnessOfFit g;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (!(expected[i] >= kExpectedFloor)) {
      expected[i] = kExpectedFloor;
      g.floored_bins.push_back(i);
    }
  }
  g.result = chi_square(observed, expected);
  g.observed = std::move(observed);
  g.expected = std::move(expected);
  return g;
}

}  // namespace

GoodnessOfFit goodness_of_fit(const EmpiricalPDF& pdf, const DistributionFit& fit) {
  std::vector<double> expected;
  for (double c : pdf.bin_centers()) expected.push_back(pdf_value(fit, c));
  return finish_gof(pdf.density, std::move(expected));
}

GoodnessOfFit goodness_of_fit_counts(const EmpiricalPDF& pdf, const DistributionFit& fit) {
  const std::size_t nb = pdf.bins();
  const auto n = static_cast<double>(pdf.n_samples);
  std::vector<double> observed(pdf.counts.begin(), pdf.counts.end());
  std::vector<double> expected(nb);
  double prev = 0.0;
  for (std::size_t i = 0; i < nb; ++i) {
    const double next = i + 1 == nb ? 1.0 : cdf_value(fit, pdf.bin_edges[i + 1]);
    expected[i] = n * (next - prev);
    prev = next;
  }
  return finish_gof(std::move(observed), std::move(expected));
}

}  // namespace commsense
