#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace commsense {

struct EmpiricalPDF {
  /// bins + 1 strictly increasing edges spanning [min, max] of the samples.
  std::vector<double> bin_edges;
  std::vector<double> density;
  std::vector<std::size_t> counts;
  std::size_t n_samples = 0;

  std::size_t bins() const noexcept { return density.size(); }
  double bin_width(std::size_t i) const { return bin_edges[i + 1] - bin_edges[i]; }
  std::vector<double> bin_centers() const;
};

inline constexpr int kDefaultBins = 101;

/// Uniform-width histogram over [min, max] normalized to unit integral.
EmpiricalPDF empirical_pdf(std::span<const double> samples, int bins = kDefaultBins);

enum class Family { rayleigh, normal, lognormal, gamma };

std::string to_string(Family f);
Family parse_family(const std::string& name);
inline constexpr Family kAllFamilies[] = {Family::rayleigh, Family::normal, Family::lognormal,
                                          Family::gamma};

struct RayleighParams {
  double sigma;
};
struct NormalParams {
  double mean;
  double sigma;
};
/// Location fixed at 0. mu and sigma are the mean and std of ln x; median = exp(mu).
struct LognormalParams {
  double mu;
  double sigma;
  double median;
};
/// Location fixed at 0.
struct GammaParams {
  double shape;
  double scale;
  int iterations = 0;
};

using DistributionParams = std::variant<RayleighParams, NormalParams, LognormalParams, GammaParams>;

/// Mean, variance, skewness and excess kurtosis.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double skew = 0.0;
  double kurtosis = 0.0;
};

struct DistributionFit {
  DistributionParams params;
  Moments moments;

  Family family() const noexcept;
};

DistributionFit make_fit(DistributionParams params);

DistributionFit fit_normal(std::span<const double> samples);
DistributionFit fit_rayleigh(std::span<const double> samples);
DistributionFit fit_lognormal(std::span<const double> samples);

inline constexpr double kGammaTolerance = 1e-10;
inline constexpr int kGammaMaxIterations = 100;

/// Solves ln(k) - psi(k) = ln(mean / geometric mean) by bracketed Newton from Minka's
/// closed-form start; scale = mean / k. Stops when |dk| < 1e-10 * max(1, k).
DistributionFit fit_gamma(std::span<const double> samples);

DistributionFit fit(Family family, std::span<const double> samples);

/// Density at x; 0 outside the support (and for zero-width normal / lognormal fits).
double pdf_value(const DistributionFit& fit, double x);
double cdf_value(const DistributionFit& fit, double x);
double log_likelihood(const DistributionFit& fit, std::span<const double> samples);

/// Closed-form moments of the fitted distribution.
Moments moments(const DistributionFit& fit);

struct MeanVariance {
  double mean;
  double variance;
};

/// Mean and biased (1/n) variance.
MeanVariance sample_mean_variance(std::span<const double> samples);

/// Central sample moments (1/n normalization), excess kurtosis. Needs n >= 4 and
/// nonzero variance.
Moments sample_moments(std::span<const double> samples);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson statistic sum (O_i - E_i)^2 / E_i, dof = len - 1.
ChiSquareResult chi_square(std::span<const double> observed, std::span<const double> expected);

inline constexpr double kExpectedFloor = 1e-12;

struct GoodnessOfFit {
  ChiSquareResult result;
  std::vector<double> observed;
  std::vector<double> expected;
  /// Bins whose expected density fell below kExpectedFloor and were raised to it.
  std::vector<std::size_t> floored_bins;
};

/// Density-domain test: observed = histogram density, expected = fitted pdf at the bin
/// centers, both on the histogram's grid.
GoodnessOfFit goodness_of_fit(const EmpiricalPDF& pdf, const DistributionFit& fit);

/// Count-domain test on the same grid: expected_i = n * P(bin i) under the fit, with
/// the outer bins extended to the edges of the support.
GoodnessOfFit goodness_of_fit_counts(const EmpiricalPDF& pdf, const DistributionFit& fit);

}  // namespace commsense
