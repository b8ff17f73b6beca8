#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fcl/engine.hpp"
#include "fcl/gaussian.hpp"
#include "fcl/rng.hpp"
#include "fcl/sampling.hpp"
#include "fcl/uniform.hpp"

namespace fcl {

// The five study models. Each one binds a data-generating truth to its
// posterior and exposes the uniform interface the engine consumes: draw a
// sufficient statistic under the truth, score the posterior mass of an
// interval, and hint how far the interval radius may need to grow before the
// mass clears a level.

/// Uniform(0, theta) endpoint, scale prior, Pareto(n, x_max) posterior.
class uniform_support_model {
 public:
  using stat_type = uniform_max_stat;

  uniform_support_model(std::uint32_t n, double theta0) : n_(n), theta0_(theta0) {
    if (n < 1) throw std::invalid_argument("uniform_support_model: n must be >= 1");
    if (!(theta0 > 0.0))
      throw std::invalid_argument("uniform_support_model: theta0 must be positive");
  }

  stat_type draw_stat(seed_spec s) const { return sample_uniform_max(n_, theta0_, s); }

  double ball_prob(const stat_type& st, double psi0, double eps) const {
    const pareto_posterior post(static_cast<double>(st.n), st.x_max);
    return post.cdf(psi0 + eps) - post.cdf(psi0 - eps);
  }

  double true_functional() const noexcept { return theta0_; }
  std::string tag() const { return "uniform-support"; }

  std::pair<double, bool> epsilon_bracket(const stat_type&) const {
    return {theta0_, true};
  }

  std::vector<double> posterior_curve(const stat_type& st,
                                      const std::vector<double>& grid) const {
    const pareto_posterior post(static_cast<double>(st.n), st.x_max);
    std::vector<double> out(grid.size());
    std::transform(grid.begin(), grid.end(), out.begin(),
                   [&](double x) { return post.pdf(x); });
    return out;
  }
  std::string curve_kind() const { return "density"; }

  std::uint32_t n() const noexcept { return n_; }

 private:
  std::uint32_t n_;
  double theta0_;
};

struct product_stat {
  uniform_max_stat x;
  uniform_max_stat y;
};

/// Product of two independent uniform endpoints, psi = theta_x * theta_y.
class uniform_product_model {
 public:
  using stat_type = product_stat;

  uniform_product_model(std::uint32_t n, std::uint32_t m, double theta_x, double theta_y)
      : n_(n), m_(m), tx_(theta_x), ty_(theta_y) {
    if (n < 1 || m < 1)
      throw std::invalid_argument("uniform_product_model: sample sizes must be >= 1");
    if (!(theta_x > 0.0) || !(theta_y > 0.0))
      throw std::invalid_argument("uniform_product_model: endpoints must be positive");
  }

  stat_type draw_stat(seed_spec s) const {
    stream_rng g(s);
    stat_type st;
    st.x = sample_uniform_max(n_, tx_, g);
    st.y = sample_uniform_max(m_, ty_, g);
    return st;
  }

  double ball_prob(const stat_type& st, double psi0, double eps) const {
    const product_posterior post(static_cast<double>(st.x.n), static_cast<double>(st.y.n),
                                 st.x.x_max, st.y.x_max);
    return post.ball_prob(psi0, eps);
  }

  double true_functional() const noexcept { return tx_ * ty_; }
  std::string tag() const { return "uniform-product"; }

  std::pair<double, bool> epsilon_bracket(const stat_type&) const {
    return {tx_ * ty_, true};
  }

  std::vector<double> posterior_curve(const stat_type& st,
                                      const std::vector<double>& grid) const {
    const product_posterior post(static_cast<double>(st.x.n), static_cast<double>(st.y.n),
                                 st.x.x_max, st.y.x_max);
    std::vector<double> out(grid.size());
    std::transform(grid.begin(), grid.end(), out.begin(),
                   [&](double x) { return post.pdf(x); });
    return out;
  }
  std::string curve_kind() const { return "density"; }

 private:
  std::uint32_t n_;
  std::uint32_t m_;
  double tx_;
  double ty_;
};

struct ratio_stat {
  std::uint32_t n = 0;
  double x_bar = 0.0;
  double y_bar = 0.0;
};

/// Ratio of two normal means with common known sigma, psi = theta_x / theta_y.
/// Posterior mass comes from adaptive quadrature of the marginal density, with
/// the integration interval pre-split around the plug-in ratio so a narrow
/// mode inside a wide ball is never stepped over.
class gaussian_ratio_model {
 public:
  using stat_type = ratio_stat;

  gaussian_ratio_model(std::uint32_t n, double theta_x, double theta_y, double sigma,
                       quadrature_spec quad = {}, std::uint32_t riemann_cells = 0)
      : n_(n), tx_(theta_x), ty_(theta_y), sigma_(sigma), quad_(quad),
        riemann_cells_(riemann_cells) {
    if (n < 1) throw std::invalid_argument("gaussian_ratio_model: n must be >= 1");
    if (!(sigma > 0.0))
      throw std::invalid_argument("gaussian_ratio_model: sigma must be positive");
    if (theta_y == 0.0)
      throw std::invalid_argument("gaussian_ratio_model: theta_y must be nonzero");
  }

  stat_type draw_stat(seed_spec s) const {
    stream_rng g(s);
    stat_type st;
    st.n = n_;
    st.x_bar = sample_gaussian_mean(n_, tx_, sigma_, g).x_bar;
    st.y_bar = sample_gaussian_mean(n_, ty_, sigma_, g).x_bar;
    return st;
  }

  double ball_prob(const stat_type& st, double psi0, double eps) const {
    const ratio_posterior post(st.x_bar, st.y_bar, st.n, sigma_);
    const double lo = psi0 - eps;
    const double hi = psi0 + eps;
    if (!(eps >= 0.0)) throw std::invalid_argument("ball_prob: eps must be nonnegative");
    if (eps == 0.0) return 0.0;

    if (riemann_cells_ > 0)
      return std::clamp(
          riemann_sum([&](double t) { return post.density(t); }, lo, hi, riemann_cells_),
          0.0, 1.0);

    const auto [c, w] = post.mode_scale();
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
      total += integrate([&](double t) { return post.density(t); }, knots[i], knots[i + 1],
                         quad_);
    return std::clamp(total, 0.0, 1.0);
  }

  double true_functional() const noexcept { return tx_ / ty_; }
  std::string tag() const { return "gaussian-ratio"; }

  std::pair<double, bool> epsilon_bracket(const stat_type& st) const {
    const ratio_posterior post(st.x_bar, st.y_bar, st.n, sigma_);
    const auto [c, w] = post.mode_scale();
    return {std::abs(c - true_functional()) + 10.0 * w + 1.0, true};
  }

  std::vector<double> posterior_curve(const stat_type& st,
                                      const std::vector<double>& grid) const {
    const ratio_posterior post(st.x_bar, st.y_bar, st.n, sigma_);
    std::vector<double> out(grid.size());
    std::transform(grid.begin(), grid.end(), out.begin(),
                   [&](double x) { return post.density(x); });
    return out;
  }
  std::string curve_kind() const { return "density"; }

  const quadrature_spec& quad() const noexcept { return quad_; }

 private:
  std::uint32_t n_;
  double tx_;
  double ty_;
  double sigma_;
  quadrature_spec quad_;
  std::uint32_t riemann_cells_;
};

/// Normal mean with conjugate normal prior and known sigma.
class gaussian_conjugate_model {
 public:
  using stat_type = gaussian_mean_stat;

  gaussian_conjugate_model(std::uint32_t n, double theta0, double sigma, double mu,
                           double tau2)
      : n_(n), theta0_(theta0), sigma_(sigma), mu_(mu), tau2_(tau2) {
    if (n < 1) throw std::invalid_argument("gaussian_conjugate_model: n must be >= 1");
    if (!(sigma > 0.0))
      throw std::invalid_argument("gaussian_conjugate_model: sigma must be positive");
    if (!(tau2 > 0.0))
      throw std::invalid_argument("gaussian_conjugate_model: tau2 must be positive");
  }

  stat_type draw_stat(seed_spec s) const {
    return sample_gaussian_mean(n_, theta0_, sigma_, s);
  }

  double ball_prob(const stat_type& st, double psi0, double eps) const {
    return posterior(st).ball_prob(psi0, eps);
  }

  double true_functional() const noexcept { return theta0_; }
  std::string tag() const { return "gaussian-conjugate"; }

  std::pair<double, bool> epsilon_bracket(const stat_type& st) const {
    const auto post = posterior(st);
    return {std::abs(theta0_ - post.mu_n()) + 10.0 * post.tau_n(), true};
  }

  std::vector<double> posterior_curve(const stat_type& st,
                                      const std::vector<double>& grid) const {
    const auto post = posterior(st);
    std::vector<double> out(grid.size());
    std::transform(grid.begin(), grid.end(), out.begin(),
                   [&](double x) { return post.density(x); });
    return out;
  }
  std::string curve_kind() const { return "density"; }

  conjugate_posterior posterior(const stat_type& st) const {
    return conjugate_posterior::from_data(st.x_bar, st.n, sigma_ * sigma_, mu_, tau2_);
  }

 private:
  std::uint32_t n_;
  double theta0_;
  double sigma_;
  double mu_;
  double tau2_;
};

struct coefvar_stat {
  gaussian_mean_var_stat data;
  std::vector<double> psi;  // posterior draws of sigma/theta, sorted ascending
};

/// Coefficient of variation psi = sigma / theta for normal data with both
/// parameters unknown. The posterior has no usable closed form on psi, so each
/// replicate carries a fixed panel of posterior draws and interval masses are
/// empirical fractions of that panel.
class coef_variation_model {
 public:
  using stat_type = coefvar_stat;

  coef_variation_model(std::uint32_t n, double theta0, double sigma,
                       scale_prior prior = scale_prior::reference,
                       std::uint32_t m_post = 2000)
      : n_(n), theta0_(theta0), sigma_(sigma), prior_(prior), m_post_(m_post) {
    if (n < 2) throw std::invalid_argument("coef_variation_model: n must be >= 2");
    if (theta0 == 0.0)
      throw std::invalid_argument("coef_variation_model: theta0 must be nonzero");
    if (!(sigma > 0.0))
      throw std::invalid_argument("coef_variation_model: sigma must be positive");
    if (m_post < 10)
      throw std::invalid_argument("coef_variation_model: m_post must be >= 10");
  }

  stat_type draw_stat(seed_spec s) const {
    stream_rng g(s);
    stat_type st;
    st.data = sample_gaussian_mean_var(n_, theta0_, sigma_, g);
    st.psi.resize(m_post_);
    for (auto& v : st.psi) v = coefvar_draw_psi(st.data, prior_, g);
    std::sort(st.psi.begin(), st.psi.end());
    return st;
  }

  double ball_prob(const stat_type& st, double psi0, double eps) const {
    const auto lo = std::lower_bound(st.psi.begin(), st.psi.end(), psi0 - eps);
    const auto hi = std::upper_bound(st.psi.begin(), st.psi.end(), psi0 + eps);
    return static_cast<double>(hi - lo) / static_cast<double>(st.psi.size());
  }

  double true_functional() const noexcept { return sigma_ / theta0_; }
  std::string tag() const { return "coef-variation"; }

  // Once the interval holds every draw its mass is exactly one, so the hint is
  // already the largest radius that can matter and never needs to expand.
  std::pair<double, bool> epsilon_bracket(const stat_type& st) const {
    const double psi0 = true_functional();
    const double lo_d = std::abs(st.psi.front() - psi0);
    const double hi_d = std::abs(st.psi.back() - psi0);
    return {std::max(lo_d, hi_d) * (1.0 + 1e-12) + 1e-12, false};
  }

  std::uint32_t posterior_draws() const noexcept { return m_post_; }
  scale_prior prior() const noexcept { return prior_; }

 private:
  std::uint32_t n_;
  double theta0_;
  double sigma_;
  scale_prior prior_;
  std::uint32_t m_post_;
};

static_assert(belief_model<uniform_support_model>);
static_assert(belief_model<uniform_product_model>);
static_assert(belief_model<gaussian_ratio_model>);
static_assert(belief_model<gaussian_conjugate_model>);
static_assert(belief_model<coef_variation_model>);
static_assert(snapshot_model<uniform_support_model>);
static_assert(snapshot_model<uniform_product_model>);
static_assert(snapshot_model<gaussian_ratio_model>);
static_assert(snapshot_model<gaussian_conjugate_model>);
static_assert(!snapshot_model<coef_variation_model>);

}  // namespace fcl
