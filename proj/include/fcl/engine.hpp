#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fcl/rng.hpp"

namespace fcl {

/// A belief model exposes everything the engine needs to measure false
/// confidence: a sampler for the sufficient statistic under the true
/// parameter, the posterior mass of an interval around a candidate functional
/// value, the true functional value itself, and a bracket hint for how far the
/// interval radius may need to grow.
template <typename M>
concept belief_model = requires(const M m, const typename M::stat_type& st, seed_spec s,
                                double x) {
  typename M::stat_type;
  { m.draw_stat(s) } -> std::same_as<typename M::stat_type>;
  { m.ball_prob(st, x, x) } -> std::convertible_to<double>;
  { m.true_functional() } -> std::convertible_to<double>;
  { m.tag() } -> std::convertible_to<std::string>;
  { m.epsilon_bracket(st) } -> std::convertible_to<std::pair<double, bool>>;
};

/// Models that can tabulate their posterior over a grid (density, or CDF when
/// only that is closed form).
template <typename M>
concept snapshot_model = belief_model<M> &&
    requires(const M m, const typename M::stat_type& st, const std::vector<double>& grid) {
      { m.posterior_curve(st, grid) } -> std::same_as<std::vector<double>>;
      { m.curve_kind() } -> std::convertible_to<std::string>;
    };

struct epsilon_ball {
  double center = 0.0;
  double radius = 0.0;
};

struct probe_result {
  double epsilon = 0.0;
  double alpha = 0.0;
  double p_hat = 0.0;
  double mc_se = 0.0;
  std::uint64_t k = 0;
  std::uint64_t seed = 0;
  std::string model;
};

struct run_options {
  unsigned workers = 1;
  double eps_xtol = 1e-9;        // absolute bisection tolerance on the radius
  double bracket_cap = 1e15;     // absolute ceiling for bracket expansion
};

class replicate_error : public std::runtime_error {
 public:
  replicate_error(std::uint64_t index, const std::string& what)
      : std::runtime_error("replicate " + std::to_string(index) + ": " + what),
        index_(index) {}
  std::uint64_t index() const noexcept { return index_; }

 private:
  std::uint64_t index_;
};

namespace detail {

// Runs body(i) for i in [0, k). Work is split into contiguous blocks, one per
// worker; every replicate's output goes to its own slot, so results are
// identical for any worker count. The lowest-index failure wins when several
// replicates throw.
template <typename Body>
void for_each_replicate(std::uint64_t k, unsigned workers, Body&& body) {
  struct failure {
    std::uint64_t index = ~0ull;
    std::string message;
    bool set = false;
  };
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < k; ++i) {
      try {
        body(i);
      } catch (const std::exception& e) {
        throw replicate_error(i, e.what());
      }
    }
    return;
  }
  const unsigned w = static_cast<unsigned>(std::min<std::uint64_t>(workers, k ? k : 1));
  std::vector<failure> fails(w);
  std::vector<std::thread> pool;
  pool.reserve(w);
  const std::uint64_t chunk = (k + w - 1) / w;
  for (unsigned t = 0; t < w; ++t) {
    const std::uint64_t lo = static_cast<std::uint64_t>(t) * chunk;
    const std::uint64_t hi = std::min(k, lo + chunk);
    pool.emplace_back([&, t, lo, hi] {
      for (std::uint64_t i = lo; i < hi; ++i) {
        try {
          body(i);
        } catch (const std::exception& e) {
          fails[t] = {i, e.what(), true};
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  const failure* first = nullptr;
  for (const auto& f : fails)
    if (f.set && (!first || f.index < first->index)) first = &f;
  if (first) throw replicate_error(first->index, first->message);
}

}  // namespace detail

/// Sampling probability that the posterior puts mass at most alpha on the ball
/// of radius eps around the true functional value, estimated over k fresh data
/// replicates. Replicate i always uses stream id i, so the estimate is a pure
/// function of (model, eps, alpha, k, master_seed).
template <belief_model M>
probe_result probe(const M& model, double eps, double alpha, std::uint64_t k,
                   std::uint64_t master_seed, const run_options& opt = {}) {
  if (k < 1) throw std::invalid_argument("probe: k must be >= 1");
  if (!(eps >= 0.0)) throw std::invalid_argument("probe: eps must be nonnegative");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("probe: alpha must lie in (0,1)");
  const double psi0 = model.true_functional();
  std::vector<std::uint8_t> hit(k);
  detail::for_each_replicate(k, opt.workers, [&](std::uint64_t i) {
    const auto st = model.draw_stat(seed_spec{master_seed, i});
    hit[i] = model.ball_prob(st, psi0, eps) <= alpha ? 1 : 0;
  });
  std::uint64_t count = 0;
  for (std::uint64_t i = 0; i < k; ++i) count += hit[i];
  probe_result r;
  r.epsilon = eps;
  r.alpha = alpha;
  r.p_hat = static_cast<double>(count) / static_cast<double>(k);
  r.mc_se = std::sqrt(r.p_hat * (1.0 - r.p_hat) / static_cast<double>(k));
  r.k = k;
  r.seed = master_seed;
  r.model = model.tag();
  return r;
}

struct epsilon_star_set {
  std::vector<double> values;     // per replicate: sup{eps : ball mass <= alpha}
  std::uint64_t degenerate = 0;   // replicates that hit the bracket ceiling
};

/// Per-replicate critical radius by bisection. The posterior ball mass is
/// nondecreasing in the radius, ball(0) = 0 <= alpha, and the bracket grows
/// geometrically from the model's hint until it encloses the crossing. A
/// replicate whose mass never exceeds alpha inside the ceiling is flagged
/// degenerate and reports the ceiling.
template <belief_model M>
epsilon_star_set epsilon_stars(const M& model, double alpha, std::uint64_t k,
                               std::uint64_t master_seed, const run_options& opt = {},
                               double radius_cap = 0.0) {
  if (k < 1) throw std::invalid_argument("epsilon_stars: k must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("epsilon_stars: alpha must lie in (0,1)");
  const double psi0 = model.true_functional();
  epsilon_star_set out;
  out.values.assign(k, 0.0);
  std::vector<std::uint8_t> flagged(k, 0);
  detail::for_each_replicate(k, opt.workers, [&](std::uint64_t i) {
    const auto st = model.draw_stat(seed_spec{master_seed, i});
    const auto [hint, expandable] = model.epsilon_bracket(st);
    double cap = opt.bracket_cap;
    if (radius_cap > 0.0) cap = std::min(cap, radius_cap);
    double hi = std::min(std::max(hint, opt.eps_xtol), cap);
    double lo = 0.0;
    double ball_hi = model.ball_prob(st, psi0, hi);
    while (ball_hi <= alpha) {
      if (!expandable || hi >= cap) {
        out.values[i] = hi;
        flagged[i] = 1;
        return;
      }
      lo = hi;
      hi = std::min(hi * 2.0, cap);
      ball_hi = model.ball_prob(st, psi0, hi);
    }
    int iter = 0;
    while (hi - lo > opt.eps_xtol && iter < 200) {
      const double mid = 0.5 * (lo + hi);
      if (model.ball_prob(st, psi0, mid) <= alpha)
        lo = mid;
      else
        hi = mid;
      ++iter;
    }
    out.values[i] = 0.5 * (lo + hi);
  });
  for (std::uint64_t i = 0; i < k; ++i) out.degenerate += flagged[i];
  return out;
}

namespace detail {

// Largest eps with p_hat(eps) >= p, given every replicate's critical radius:
// the ascending order statistic at rank k - ceil(p k) + 1.
inline double epsilon_quantile(std::vector<double> values, double p) {
  const std::uint64_t k = values.size();
  const auto need = static_cast<std::uint64_t>(std::ceil(p * static_cast<double>(k)));
  const std::uint64_t idx = k - std::min(std::max<std::uint64_t>(need, 1), k);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(idx),
                   values.end());
  return values[idx];
}

}  // namespace detail

/// Points of the false confidence curve p_hat(eps) over a fixed radius grid.
/// All grid points share one replicate set: each replicate's critical radius
/// is computed once, then thresholded against every grid value, which makes
/// the reported curve nonincreasing by construction.
template <belief_model M>
std::vector<probe_result> curve(const M& model, const std::vector<double>& eps_grid,
                                double alpha, std::uint64_t k, std::uint64_t master_seed,
                                const run_options& opt = {}) {
  if (eps_grid.empty()) throw std::invalid_argument("curve: eps grid must be nonempty");
  for (std::size_t j = 0; j + 1 < eps_grid.size(); ++j)
    if (!(eps_grid[j] < eps_grid[j + 1]))
      throw std::invalid_argument("curve: eps grid must be strictly increasing");
  if (!(eps_grid.front() >= 0.0))
    throw std::invalid_argument("curve: eps grid must be nonnegative");

  // Radii beyond the grid cannot change any reported point, so the bisection
  // bracket is capped just past the last grid value.
  const double span = eps_grid.back() - eps_grid.front();
  const double cap = eps_grid.back() + std::max(1.0, 0.01 * span);
  auto stars = epsilon_stars(model, alpha, k, master_seed, opt, cap);
  std::sort(stars.values.begin(), stars.values.end());

  std::vector<probe_result> rows;
  rows.reserve(eps_grid.size());
  for (const double eps : eps_grid) {
    const auto below =
        std::lower_bound(stars.values.begin(), stars.values.end(), eps) - stars.values.begin();
    probe_result r;
    r.epsilon = eps;
    r.alpha = alpha;
    r.p_hat = static_cast<double>(k - static_cast<std::uint64_t>(below)) / static_cast<double>(k);
    r.mc_se = std::sqrt(r.p_hat * (1.0 - r.p_hat) / static_cast<double>(k));
    r.k = k;
    r.seed = master_seed;
    r.model = model.tag();
    rows.push_back(std::move(r));
  }
  return rows;
}

struct solve_result {
  double epsilon = 0.0;
  std::uint64_t degenerate = 0;
  std::uint64_t k = 0;
  std::uint64_t seed = 0;
};

/// Largest radius eps such that, with sampling probability at least p, the
/// posterior ball mass stays at or below alpha: the empirical (1-p) quantile
/// of the per-replicate critical radii.
template <belief_model M>
solve_result solve_epsilon(const M& model, double alpha, double p, std::uint64_t k,
                           std::uint64_t master_seed, const run_options& opt = {}) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("solve_epsilon: p must lie in (0,1)");
  auto stars = epsilon_stars(model, alpha, k, master_seed, opt);
  solve_result r;
  r.degenerate = stars.degenerate;
  r.k = k;
  r.seed = master_seed;
  r.epsilon = detail::epsilon_quantile(std::move(stars.values), p);
  return r;
}

struct contour_table {
  std::vector<double> alphas;
  std::vector<double> ps;
  std::vector<double> eps;  // row-major, eps[a * ps.size() + ip]
  std::uint64_t degenerate = 0;

  double at(std::size_t ia, std::size_t ip) const { return eps[ia * ps.size() + ip]; }
};

/// eps(alpha, p) over a full grid. Every cell shares the same replicate set
/// (stream ids are reused across alphas), one critical-radius family is
/// computed per alpha, and each family is quantiled across all p.
template <belief_model M>
contour_table contour_grid(const M& model, const std::vector<double>& alphas,
                           const std::vector<double>& ps, std::uint64_t k,
                           std::uint64_t master_seed, const run_options& opt = {}) {
  if (alphas.empty() || ps.empty())
    throw std::invalid_argument("contour_grid: alpha and p grids must be nonempty");
  for (const double p : ps)
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("contour_grid: p must lie in (0,1)");
  contour_table out;
  out.alphas = alphas;
  out.ps = ps;
  out.eps.resize(alphas.size() * ps.size());
  for (std::size_t ia = 0; ia < alphas.size(); ++ia) {
    auto stars = epsilon_stars(model, alphas[ia], k, master_seed, opt);
    out.degenerate += stars.degenerate;
    std::sort(stars.values.begin(), stars.values.end());
    for (std::size_t ip = 0; ip < ps.size(); ++ip) {
      const auto need =
          static_cast<std::uint64_t>(std::ceil(ps[ip] * static_cast<double>(k)));
      const std::uint64_t idx = k - std::min(std::max<std::uint64_t>(need, 1), k);
      out.eps[ia * ps.size() + ip] = stars.values[idx];
    }
  }
  return out;
}

struct snapshot_table {
  std::vector<double> grid;
  std::vector<std::vector<double>> values;  // one row per replicate
  std::string kind;                         // "density" or "cdf"
};

/// Posterior curves for the first `count` replicates, tabulated on a common
/// grid. Uses the same stream ids as the probes, so snapshot r shows the same
/// posterior that replicate r contributed to the estimates.
template <snapshot_model M>
snapshot_table posterior_snapshots(const M& model, std::uint32_t count,
                                   std::uint64_t master_seed,
                                   const std::vector<double>& psi_grid) {
  if (count < 1) throw std::invalid_argument("posterior_snapshots: count must be >= 1");
  if (psi_grid.size() < 2)
    throw std::invalid_argument("posterior_snapshots: grid needs at least two points");
  snapshot_table out;
  out.grid = psi_grid;
  out.kind = model.curve_kind();
  out.values.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto st = model.draw_stat(seed_spec{master_seed, i});
    out.values.push_back(model.posterior_curve(st, psi_grid));
  }
  return out;
}

}  // namespace fcl
