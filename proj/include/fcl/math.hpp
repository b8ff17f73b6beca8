#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace fcl {

inline constexpr double pi = 3.14159265358979323846;

/// Standard normal CDF, evaluated through the complementary error function
/// so that the far left tail keeps full relative accuracy.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

inline double normal_pdf(double x) {
  return 0.3989422804014326779 * std::exp(-0.5 * x * x);
}

/// Standard normal quantile (inverse CDF), Wichura's rational approximation.
/// Relative error is below 1e-15 over (0, 1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must lie strictly in (0,1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) *
                    r +
                4.5921953931549871457e4) *
                   r +
               1.3731693765509461125e4) *
                  r +
              1.9715909503065514427e3) *
                 r +
             1.3314166789178437745e2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) *
                    r +
                2.1213794301586595867e4) *
                   r +
               5.3941960214247511077e3) *
                  r +
              6.8718700749205790830e2) *
                 r +
             4.2313330701600911252e1) *
                r +
            1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double v;
  if (r <= 5.0) {
    r -= 1.6;
    v = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e0) *
                r +
            3.64784832476320460504e0) *
               r +
           5.76949722146069140550e0) *
              r +
          4.63033784615654529590e0) *
             r +
         1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e0) *
              r +
          2.05319162663775882187e0) *
             r +
         1.0);
  } else {
    r -= 5.0;
    v = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e0) *
              r +
          5.46378491116411436990e0) *
             r +
         6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
  }
  return q < 0.0 ? -v : v;
}

/// Mean of |G| for G ~ N(mean, sd^2).
inline double folded_normal_mean(double mean, double sd) {
  if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean))
    throw std::invalid_argument("folded_normal_mean: sd must be finite and positive");
  const double r = mean / sd;
  return sd * 0.7978845608028653559 * std::exp(-0.5 * r * r) +
         mean * (1.0 - 2.0 * normal_cdf(-r));
}

/// Thrown when an accuracy target could not be met within the allotted work.
/// Carries the best estimate produced so far.
class accuracy_error : public std::runtime_error {
 public:
  accuracy_error(const std::string& msg, double best_estimate, double error_estimate)
      : std::runtime_error(msg), best_(best_estimate), err_(error_estimate) {}
  double best_estimate() const noexcept { return best_; }
  double error_estimate() const noexcept { return err_; }

 private:
  double best_;
  double err_;
};

class bracket_error : public std::runtime_error {
 public:
  explicit bracket_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct quadrature_spec {
  double abs_tol = 1e-10;
  std::size_t max_intervals = 200000;  // total interval splits allowed
  int initial_panels = 8;
};

namespace detail {

template <typename F>
struct adapt_state {
  F& f;
  std::size_t budget;
  double err_acc = 0.0;
  bool converged = true;
};

// Classic adaptive Simpson with a Richardson correction term. Each level
// compares the two-panel estimate against the parent panel and accepts once
// the difference falls under 15x the local tolerance.
template <typename F>
double adapt_simpson(adapt_state<F>& st, double a, double fa, double m, double fm,
                     double b, double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  if (depth >= 60 || st.budget == 0) {
    st.converged = false;
    st.err_acc += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  --st.budget;
  const double half_tol = 0.5 * tol;
  return adapt_simpson(st, a, fa, lm, flm, m, fm, left, half_tol, depth + 1) +
         adapt_simpson(st, m, fm, rm, frm, b, fb, right, half_tol, depth + 1);
}

}  // namespace detail

/// Integrate f over [a, b] with adaptive Simpson subdivision.
/// Throws accuracy_error (carrying the best estimate) if the interval budget
/// runs out before the tolerance is met.
template <typename F>
double integrate(F&& f, double a, double b, const quadrature_spec& spec = {}) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("integrate: bounds must be finite");
  if (a > b) throw std::invalid_argument("integrate: requires a <= b");
  if (a == b) return 0.0;
  if (!(spec.abs_tol > 0.0)) throw std::invalid_argument("integrate: abs_tol must be positive");
  const int panels = spec.initial_panels < 1 ? 1 : spec.initial_panels;

  detail::adapt_state<F> st{f, spec.max_intervals};
  const double panel_tol = spec.abs_tol / panels;
  const double h = (b - a) / panels;
  double total = 0.0;
  double x0 = a;
  double f0 = f(x0);
  for (int i = 0; i < panels; ++i) {
    const double x1 = (i + 1 == panels) ? b : a + (i + 1) * h;
    const double xm = 0.5 * (x0 + x1);
    const double f1 = f(x1);
    const double fm = f(xm);
    const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    total += detail::adapt_simpson(st, x0, f0, xm, fm, x1, f1, whole, panel_tol, 0);
    x0 = x1;
    f0 = f1;
  }
  if (!st.converged)
    throw accuracy_error("integrate: interval budget exhausted before reaching tolerance",
                         total, st.err_acc);
  return total;
}

/// Fixed-resolution midpoint rule. Kept as a slow reference mode so adaptive
/// results can be cross-checked on an implementation-independent path.
template <typename F>
double riemann_sum(F&& f, double a, double b, std::size_t cells) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("riemann_sum: bounds must be finite");
  if (cells == 0) throw std::invalid_argument("riemann_sum: needs at least one cell");
  if (a == b) return 0.0;
  const double h = (b - a) / static_cast<double>(cells);
  double acc = 0.0;
  for (std::size_t i = 0; i < cells; ++i)
    acc += f(a + (static_cast<double>(i) + 0.5) * h);
  return acc * h;
}

/// Root bracket. f(lo) and f(hi) may be supplied when already known;
/// NaN means "evaluate on entry".
struct bracket {
  double lo = 0.0;
  double hi = 0.0;
  double f_lo = std::numeric_limits<double>::quiet_NaN();
  double f_hi = std::numeric_limits<double>::quiet_NaN();
};

/// Bisection for monotone f: returns x with f(x) = target, accurate to xtol.
/// Also works on monotone step functions, in which case the returned point is
/// within xtol of the jump past the target.
template <typename F>
double bisect_monotone(F&& f, double target, bracket br, double xtol) {
  if (!(xtol > 0.0)) throw std::invalid_argument("bisect_monotone: xtol must be positive");
  if (!(br.lo < br.hi) || !std::isfinite(br.lo) || !std::isfinite(br.hi))
    throw std::invalid_argument("bisect_monotone: bracket requires finite lo < hi");
  double lo = br.lo, hi = br.hi;
  double flo = std::isnan(br.f_lo) ? f(lo) : br.f_lo;
  double fhi = std::isnan(br.f_hi) ? f(hi) : br.f_hi;
  const double fmin = std::min(flo, fhi);
  const double fmax = std::max(flo, fhi);
  if (target < fmin || target > fmax)
    throw bracket_error("bisect_monotone: target not enclosed by f(lo), f(hi)");
  const bool increasing = fhi >= flo;
  int iter = 0;
  while (hi - lo > xtol && iter < 200) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    const bool root_left = increasing ? (fm >= target) : (fm <= target);
    if (root_left)
      hi = mid;
    else
      lo = mid;
    ++iter;
  }
  return 0.5 * (lo + hi);
}

}  // namespace fcl
