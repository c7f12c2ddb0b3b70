#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dnapriv/rng.hpp"

namespace dnapriv::stats {

/// Gamma distribution parameterised by mean and coefficient of variation.
/// A zero CV degenerates to a point mass at the mean.
struct Gamma {
  double shape = 1.0;
  double scale = 1.0;
  double mean = 1.0;
  bool point_mass = false;

  static Gamma from_mean_cv(double mean, double cv);
  /// Moment-matched gamma for the sum of independent components with the
  /// given means, each with the same CV.
  static Gamma sum_of(double sum_mean, double sum_sq_mean, double cv);

  double sample(Stream& rng) const;
  double log_pdf(double x) const;
  double cdf(double x) const;
  double sf(double x) const;
  double log_cdf(double x) const;
  double log_sf(double x) const;
};

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for successes out of trials at the given
/// two-sided confidence.
Interval wilson(std::uint64_t successes, std::uint64_t trials, double confidence = 0.95);

/// Smallest [lo, hi] such that P(X < lo) <= alpha/2 and P(X > hi) <= alpha/2
/// for X ~ Binomial(n, p); alpha = 1 - confidence.
struct CountBand {
  std::uint64_t low = 0;
  std::uint64_t high = 0;
};
CountBand binomial_band(std::uint64_t n, double p, double confidence);

double binomial_cdf(std::uint64_t k, std::uint64_t n, double p);

double normal_quantile(double p);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Pearson chi-square goodness of fit; returns the upper-tail p-value.
double chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> expected_probs);

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);

/// log(sum(exp(xs))) without overflow; -inf for an empty span.
double log_sum_exp(std::span<const double> xs);

/// Draw from a symmetric Dirichlet with the given concentration.
std::vector<double> dirichlet(std::size_t k, double concentration, Stream& rng);

}  // namespace dnapriv::stats
