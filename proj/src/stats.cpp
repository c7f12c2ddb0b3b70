#include "dnapriv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace dnapriv::stats {

namespace {
constexpr double kLogFloor = -700.0;

double safe_log(double p) { return p > 0.0 ? std::max(std::log(p), kLogFloor) : kLogFloor; }
}  // namespace

Gamma Gamma::from_mean_cv(double mean, double cv) {
  if (!(mean > 0.0) || !(cv >= 0.0)) throw std::invalid_argument("gamma: mean must be > 0 and cv >= 0");
  Gamma g;
  g.mean = mean;
  if (cv == 0.0) {
    g.point_mass = true;
    return g;
  }
  g.shape = 1.0 / (cv * cv);
  g.scale = mean * cv * cv;
  return g;
}

Gamma Gamma::sum_of(double sum_mean, double sum_sq_mean, double cv) {
  if (!(sum_mean > 0.0)) throw std::invalid_argument("gamma: sum of means must be > 0");
  Gamma g;
  g.mean = sum_mean;
  const double var = cv * cv * sum_sq_mean;
  if (var <= 0.0) {
    g.point_mass = true;
    return g;
  }
  g.shape = sum_mean * sum_mean / var;
  g.scale = var / sum_mean;
  return g;
}

double Gamma::sample(Stream& rng) const {
  if (point_mass) return mean;
  return std::gamma_distribution<double>(shape, scale)(rng);
}

double Gamma::log_pdf(double x) const {
  if (point_mass) return x == mean ? 0.0 : kLogFloor;
  if (!(x > 0.0)) return kLogFloor;
  return (shape - 1.0) * std::log(x) - x / scale - std::lgamma(shape) - shape * std::log(scale);
}

double Gamma::cdf(double x) const {
  if (point_mass) return x >= mean ? 1.0 : 0.0;
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(shape, x / scale);
}

double Gamma::sf(double x) const {
  if (point_mass) return x >= mean ? 0.0 : 1.0;
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(shape, x / scale);
}

double Gamma::log_cdf(double x) const { return safe_log(cdf(x)); }
double Gamma::log_sf(double x) const { return safe_log(sf(x)); }

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

Interval wilson(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z = normal_quantile(0.5 + confidence / 2.0);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // Clamp so the interval always contains the point estimate despite rounding.
  return {std::min(std::max(0.0, centre - half), p), std::max(std::min(1.0, centre + half), p)};
}

double binomial_cdf(std::uint64_t k, std::uint64_t n, double p) {
  if (k >= n) return 1.0;
  // P(X <= k) = I_{1-p}(n-k, k+1)
  return boost::math::ibeta(static_cast<double>(n - k), static_cast<double>(k + 1), 1.0 - p);
}

CountBand binomial_band(std::uint64_t n, double p, double confidence) {
  const double tail = (1.0 - confidence) / 2.0;
  CountBand band{0, n};
  // low: largest k with P(X < k) <= tail
  std::uint64_t lo = 0;
  while (lo < n && binomial_cdf(lo, n, p) <= tail) ++lo;
  band.low = lo;
  // high: smallest k with P(X > k) <= tail
  std::uint64_t hi = n;
  while (hi > 0 && 1.0 - binomial_cdf(hi - 1, n, p) <= tail) --hi;
  band.high = hi;
  return band;
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n1 = static_cast<double>(x.size()), n2 = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  const double en = std::sqrt(n1 * n2 / (n1 + n2));
  const double lambda = (en + 0.12 + 0.11 / en) * d;
  double q = 0.0;
  if (lambda < 1e-3) {
    q = 1.0;
  } else {
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
      const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
      q += term;
      if (std::abs(term) < 1e-12) break;
      sign = -sign;
    }
    q = std::clamp(2.0 * q, 0.0, 1.0);
  }
  return {d, q};
}

double chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> expected_probs) {
  if (observed.size() != expected_probs.size() || observed.size() < 2)
    throw std::invalid_argument("chi-square: need matching bins, at least 2");
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * expected_probs[i];
    const double diff = static_cast<double>(observed[i]) - e;
    stat += diff * diff / e;
  }
  boost::math::chi_squared_distribution<double> dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> dirichlet(std::size_t k, double concentration, Stream& rng) {
  if (!(concentration > 0.0)) throw std::invalid_argument("dirichlet: concentration must be > 0");
  std::vector<double> w(k);
  double total = 0.0;
  std::gamma_distribution<double> g(concentration, 1.0);
  for (auto& x : w) {
    // Rejecting exact zeros keeps every component strictly positive.
    do { x = g(rng); } while (x <= 0.0);
    total += x;
  }
  for (auto& x : w) x /= total;
  return w;
}

}  // namespace dnapriv::stats
