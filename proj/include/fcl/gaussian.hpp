#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fcl/math.hpp"
#include "fcl/rng.hpp"
#include "fcl/sampling.hpp"

namespace fcl {

/// Marginal posterior density of psi = theta_x / theta_y given flat priors and
/// iid N(theta_x, sigma^2), N(theta_y, sigma^2) samples of common size n.
/// Writing w(psi) = (psi*xbar + ybar) / (1 + psi^2), the density is
///   sqrt(n / (2 pi sigma^2 (1+psi^2)))
///     * exp( n/(2 sigma^2) * (w*(psi*xbar+ybar) - xbar^2 - ybar^2) )
///     * E|G|,  G ~ N(w, sigma^2 / (n (1+psi^2))).
/// The exponent is nonpositive by Cauchy-Schwarz, so evaluation never
/// overflows; far tails underflow gracefully to zero.
class ratio_posterior {
 public:
  ratio_posterior(double x_bar, double y_bar, std::uint32_t n, double sigma)
      : x_bar_(x_bar), y_bar_(y_bar), n_(n), sigma_(sigma) {
    if (n < 1) throw std::invalid_argument("ratio_posterior: n must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("ratio_posterior: sigma must be positive");
  }

  double density(double psi) const {
    const double q = 1.0 + psi * psi;
    const double t = psi * x_bar_ + y_bar_;
    const double w = t / q;
    const double s2 = sigma_ * sigma_;
    const double nd = static_cast<double>(n_);
    const double pref = std::sqrt(nd / (2.0 * pi * s2 * q));
    const double expo = nd / (2.0 * s2) * (w * t - x_bar_ * x_bar_ - y_bar_ * y_bar_);
    const double e_abs = folded_normal_mean(w, std::sqrt(s2 / (nd * q)));
    return pref * std::exp(expo) * e_abs;
  }

  /// Posterior probability of [psi0 - eps, psi0 + eps] by adaptive quadrature
  /// of the density.
  double ball_prob(double psi0, double eps, const quadrature_spec& quad = {}) const {
    if (!(eps >= 0.0)) throw std::invalid_argument("ball_prob: eps must be nonnegative");
    const double v = integrate([this](double t) { return density(t); },
                               psi0 - eps, psi0 + eps, quad);
    return std::clamp(v, 0.0, 1.0);
  }

  /// Center of mass heuristic: the plug-in ratio when ybar is usable,
  /// otherwise zero. Used to anchor truncation windows.
  /// Plug-in center and width of the main posterior mass. When |y_bar| is
  /// within one standard error of zero the ratio is Cauchy-like: the mass
  /// sits in lobes within a few multiples of 1 + |x_bar| sqrt(n) / sigma of
  /// zero, and the plug-in ratio x_bar / y_bar says nothing about them.
  std::pair<double, double> mode_scale() const {
    const double sdm = sigma_ / std::sqrt(static_cast<double>(n_));
    const double ay = std::abs(y_bar_);
    if (ay > sdm) {
      const double c = x_bar_ / y_bar_;
      return {c, sdm * std::sqrt(1.0 + c * c) / ay};
    }
    return {0.0, 1.0 + std::abs(x_bar_) / sdm};
  }

  double center() const {
    const double tiny = 1e-8 * (std::abs(x_bar_) + 1.0);
    if (std::abs(y_bar_) < tiny) return 0.0;
    return x_bar_ / y_bar_;
  }

  /// Total mass over an adaptively grown truncation window. The window doubles
  /// outward from the center until boundary density times half-width bounds
  /// the remaining tail under tail_tol; the tails decay quadratically, so that
  /// product is the right tail surrogate.
  double normalization(double tail_tol = 1e-6, const quadrature_spec& quad = {}) const {
    if (!(tail_tol > 0.0))
      throw std::invalid_argument("normalization: tail_tol must be positive");
    const auto [c, w] = mode_scale();
    double lo = std::min(c, 0.0) - 10.0 * w;
    double hi = std::max(c, 0.0) + 10.0 * w;
    for (int i = 0; i < 60; ++i) {
      const double span = hi - lo;
      const double bound = (density(lo) + density(hi)) * span;
      if (bound < tail_tol) break;
      lo -= span * 0.5;
      hi += span * 0.5;
    }
    std::vector<double> knots;
    knots.push_back(lo);
    for (const double j : {-100.0, -30.0, -10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0, 30.0, 100.0}) {
      const double x = c + j * w;
      if (x > lo && x < hi) knots.push_back(x);
    }
    knots.push_back(hi);
    std::sort(knots.begin(), knots.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
      total += integrate([this](double t) { return density(t); }, knots[i], knots[i + 1], quad);
    return total;
  }

  double x_bar() const noexcept { return x_bar_; }
  double y_bar() const noexcept { return y_bar_; }
  std::uint32_t n() const noexcept { return n_; }
  double sigma() const noexcept { return sigma_; }

 private:
  double x_bar_;
  double y_bar_;
  std::uint32_t n_;
  double sigma_;
};

/// Conjugate normal posterior: N(mu, tau^2) prior, known sigma^2, n
/// observations with mean x_bar.
class conjugate_posterior {
 public:
  static conjugate_posterior from_data(double x_bar, std::uint32_t n, double sigma2,
                                       double mu, double tau2) {
    if (n < 1) throw std::invalid_argument("conjugate_posterior: n must be >= 1");
    if (!(sigma2 > 0.0) || !(tau2 > 0.0))
      throw std::invalid_argument("conjugate_posterior: variances must be positive");
    const double nd = static_cast<double>(n);
    const double tau_n2 = 1.0 / (1.0 / tau2 + nd / sigma2);
    const double mu_n = (mu / tau2 + nd * x_bar / sigma2) * tau_n2;
    return conjugate_posterior(mu_n, tau_n2);
  }

  conjugate_posterior(double mu_n, double tau_n2) : mu_n_(mu_n), tau_n2_(tau_n2) {
    if (!(tau_n2 > 0.0))
      throw std::invalid_argument("conjugate_posterior: tau_n2 must be positive");
  }

  double mu_n() const noexcept { return mu_n_; }
  double tau_n2() const noexcept { return tau_n2_; }
  double tau_n() const noexcept { return std::sqrt(tau_n2_); }

  double density(double theta) const {
    const double t = tau_n();
    return normal_pdf((theta - mu_n_) / t) / t;
  }

  double ball_prob(double theta0, double eps) const {
    if (!(eps >= 0.0)) throw std::invalid_argument("ball_prob: eps must be nonnegative");
    const double t = tau_n();
    const double z = (theta0 - mu_n_) / t;
    const double u = eps / t;
    return normal_cdf(z + u) - normal_cdf(z - u);
  }

 private:
  double mu_n_;
  double tau_n2_;
};

/// Prior on (theta, sigma^2) for the coefficient of variation model. Both are
/// standard objective choices; they differ only in the posterior degrees of
/// freedom for sigma^2.
enum class scale_prior {
  reference,  // pi(theta, sigma^2) proportional to 1/sigma^2, df = n-1
  jeffreys    // pi(theta, sigma^2) proportional to 1/sigma^3, df = n
};

/// One posterior draw of psi = sigma / theta given (x_bar, s^2, n):
/// sigma^2 | data ~ (n-1) s^2 / chi^2_df, theta | sigma^2, data ~ N(x_bar,
/// sigma^2/n). Draws with |theta| below 1e-300 are rejected and redrawn so the
/// ratio stays finite.
inline double coefvar_draw_psi(const gaussian_mean_var_stat& st, scale_prior prior,
                               stream_rng& g) {
  if (st.n < 2) throw std::invalid_argument("coefvar_draw_psi: needs n >= 2");
  if (!(st.s2 > 0.0)) throw std::invalid_argument("coefvar_draw_psi: needs s2 > 0");
  const double df =
      prior == scale_prior::reference ? static_cast<double>(st.n - 1) : static_cast<double>(st.n);
  const double sigma2 = static_cast<double>(st.n - 1) * st.s2 / g.chi_squared(df);
  const double sd = std::sqrt(sigma2 / static_cast<double>(st.n));
  double theta;
  do {
    theta = g.normal(st.x_bar, sd);
  } while (std::abs(theta) < 1e-300);
  return std::sqrt(sigma2) / theta;
}

}  // namespace fcl
