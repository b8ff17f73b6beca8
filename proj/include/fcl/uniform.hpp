#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fcl/math.hpp"

namespace fcl {

/// Posterior for the endpoint of Uniform(0, theta) data under the scale prior
/// 1/theta: a Pareto distribution with the given shape and scale (scale is the
/// observed sample maximum). Shape may be any positive real; integer sample
/// sizes are only required of the samplers.
class pareto_posterior {
 public:
  pareto_posterior(double shape, double scale) : shape_(shape), scale_(scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
      throw std::invalid_argument("pareto_posterior: shape and scale must be positive");
  }

  double shape() const noexcept { return shape_; }
  double scale() const noexcept { return scale_; }

  double cdf(double x) const {
    if (x <= scale_) return 0.0;
    return 1.0 - std::pow(scale_ / x, shape_);
  }

  double pdf(double x) const {
    if (x < scale_) return 0.0;
    return shape_ * std::pow(scale_, shape_) / std::pow(x, shape_ + 1.0);
  }

  /// Posterior probability of the interval [theta0 - eps, theta0 + eps].
  double ball_prob(double theta0, double eps) const {
    if (!(theta0 > 0.0)) throw std::invalid_argument("ball_prob: theta0 must be positive");
    if (!(eps >= 0.0) || eps >= theta0)
      throw std::invalid_argument("ball_prob: requires 0 <= eps < theta0");
    return cdf(theta0 + eps) - cdf(theta0 - eps);
  }

 private:
  double shape_;
  double scale_;
};

/// Sampling probability, over data generated at the true endpoint theta0, that
/// the Pareto posterior puts mass at most alpha on [theta0 - eps, theta0 + eps].
///
/// The event splits on the sample maximum t = X_(n). For t <= theta0 - eps both
/// CDF terms are active and the ball mass is increasing in t, giving t <= t1
/// with t1 = alpha^(1/n) * ((theta0-eps)^-n - (theta0+eps)^-n)^(-1/n). For
/// t > theta0 - eps the lower edge falls outside the support, the mass is
/// decreasing in t, and the condition becomes t >= t2 with
/// t2 = (1-alpha)^(1/n) * (theta0+eps). The two pieces are disjoint, so the
/// probability is the sum of P(X_(n) <= min(t1, theta0-eps)) and
/// P(X_(n) >= max(t2, theta0-eps)) under X_(n)/theta0 ~ Beta(n, 1).
inline double fct_prob_closed_form(double theta0, double eps, double alpha, double n) {
  if (!(theta0 > 0.0)) throw std::invalid_argument("fct_prob_closed_form: theta0 must be positive");
  if (!(eps >= 0.0) || eps >= theta0)
    throw std::invalid_argument("fct_prob_closed_form: requires 0 <= eps < theta0");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("fct_prob_closed_form: alpha must lie in (0,1)");
  if (!(n > 0.0)) throw std::invalid_argument("fct_prob_closed_form: n must be positive");
  if (eps == 0.0) return 1.0;  // the ball is a point, its posterior mass is zero

  const double lo = theta0 - eps;
  const double hi = theta0 + eps;
  const double span = std::pow(lo, -n) - std::pow(hi, -n);
  const double t1 = std::pow(alpha, 1.0 / n) * std::pow(span, -1.0 / n);
  const double t2 = std::pow(1.0 - alpha, 1.0 / n) * hi;

  const auto max_cdf = [&](double x) {  // P(X_(n) <= x) at the true theta0
    if (x <= 0.0) return 0.0;
    return std::min(std::pow(x / theta0, n), 1.0);
  };

  const double left = max_cdf(std::min(t1, lo));
  const double cut = std::max(t2, lo);
  const double right = cut > theta0 ? 0.0 : 1.0 - max_cdf(cut);
  return left + right;
}

/// Marginal posterior of psi = theta_x * theta_y when both factors carry
/// independent Pareto posteriors with shapes n, m and scales x_max, y_max.
/// Only the product S = x_max * y_max enters the distribution.
class product_posterior {
 public:
  product_posterior(double n, double m, double x_max, double y_max)
      : n_(n), m_(m), s_(x_max * y_max) {
    if (!(n > 0.0) || !(m > 0.0))
      throw std::invalid_argument("product_posterior: shapes must be positive");
    if (!(x_max > 0.0) || !(y_max > 0.0))
      throw std::invalid_argument("product_posterior: scales must be positive");
  }

  double support() const noexcept { return s_; }

  double cdf(double psi) const {
    if (psi <= s_) return 0.0;
    const double l = std::log(psi / s_);
    double v;
    if (n_ == m_) {
      v = 1.0 - (1.0 + n_ * l) * std::exp(-n_ * l);
    } else {
      v = 1.0 + (m_ / (n_ - m_)) * std::exp(-n_ * l) - (n_ / (n_ - m_)) * std::exp(-m_ * l);
    }
    return std::clamp(v, 0.0, 1.0);
  }

  double pdf(double psi) const {
    if (psi <= s_) return 0.0;
    const double l = std::log(psi / s_);
    if (n_ == m_) return n_ * n_ * l * std::exp(-n_ * l) / psi;
    return (n_ * m_ / (n_ - m_)) * (std::exp(-m_ * l) - std::exp(-n_ * l)) / psi;
  }

  /// Posterior mass of [psi0 - eps, psi0 + eps]; the lower edge clamps at the
  /// support boundary automatically.
  double ball_prob(double psi0, double eps) const {
    if (!(eps >= 0.0)) throw std::invalid_argument("ball_prob: eps must be nonnegative");
    return cdf(psi0 + eps) - cdf(psi0 - eps);
  }

 private:
  double n_;
  double m_;
  double s_;
};

}  // namespace fcl
