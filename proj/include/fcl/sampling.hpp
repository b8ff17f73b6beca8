#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <variant>

#include "fcl/rng.hpp"

namespace fcl {

// Sufficient statistics for the supported sampling models. Each sampler draws
// the statistic directly under its exact sampling law instead of simulating
// the full data vector.

struct uniform_max_stat {
  std::uint32_t n = 0;
  double x_max = 0.0;  // max of n draws from Uniform(0, theta)
};

struct gaussian_mean_stat {
  std::uint32_t n = 0;
  double x_bar = 0.0;
};

struct gaussian_mean_var_stat {
  std::uint32_t n = 0;
  double x_bar = 0.0;
  double s2 = 0.0;  // unbiased sample variance
};

using sufficient_stat =
    std::variant<uniform_max_stat, gaussian_mean_stat, gaussian_mean_var_stat>;

/// X_(n) for n iid Uniform(0, theta) draws; X_(n)/theta ~ Beta(n, 1), sampled
/// by inverse CDF.
inline uniform_max_stat sample_uniform_max(std::uint32_t n, double theta, stream_rng& g) {
  if (n < 1) throw std::invalid_argument("sample_uniform_max: n must be >= 1");
  if (!(theta > 0.0)) throw std::invalid_argument("sample_uniform_max: theta must be positive");
  return {n, theta * std::pow(g.uniform01(), 1.0 / static_cast<double>(n))};
}

inline uniform_max_stat sample_uniform_max(std::uint32_t n, double theta, seed_spec s) {
  stream_rng g(s);
  return sample_uniform_max(n, theta, g);
}

/// Sample mean of n iid N(theta, sigma^2) observations.
inline gaussian_mean_stat sample_gaussian_mean(std::uint32_t n, double theta, double sigma,
                                               stream_rng& g) {
  if (n < 1) throw std::invalid_argument("sample_gaussian_mean: n must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("sample_gaussian_mean: sigma must be positive");
  return {n, g.normal(theta, sigma / std::sqrt(static_cast<double>(n)))};
}

inline gaussian_mean_stat sample_gaussian_mean(std::uint32_t n, double theta, double sigma,
                                               seed_spec s) {
  stream_rng g(s);
  return sample_gaussian_mean(n, theta, sigma, g);
}

/// (mean, variance) pair; (n-1) s^2 / sigma^2 is chi-squared with n-1 degrees
/// of freedom, drawn through the gamma sampler.
inline gaussian_mean_var_stat sample_gaussian_mean_var(std::uint32_t n, double theta,
                                                       double sigma, stream_rng& g) {
  if (n < 2) throw std::invalid_argument("sample_gaussian_mean_var: n must be >= 2");
  if (!(sigma > 0.0))
    throw std::invalid_argument("sample_gaussian_mean_var: sigma must be positive");
  const double x_bar = g.normal(theta, sigma / std::sqrt(static_cast<double>(n)));
  const double s2 = sigma * sigma * g.chi_squared(static_cast<double>(n - 1)) /
                    static_cast<double>(n - 1);
  return {n, x_bar, s2};
}

inline gaussian_mean_var_stat sample_gaussian_mean_var(std::uint32_t n, double theta,
                                                       double sigma, seed_spec s) {
  stream_rng g(s);
  return sample_gaussian_mean_var(n, theta, sigma, g);
}

}  // namespace fcl
