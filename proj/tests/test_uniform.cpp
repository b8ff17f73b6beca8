#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fcl/engine.hpp"
#include "fcl/math.hpp"
#include "fcl/models.hpp"
#include "fcl/rng.hpp"
#include "fcl/uniform.hpp"

TEST_CASE("pareto_posterior cdf and pdf pinned values", "[uniform]") {
  fcl::pareto_posterior post(3.0, 0.9);
  CHECK(post.cdf(0.9) == 0.0);
  CHECK(post.cdf(0.5) == 0.0);
  CHECK(post.cdf(1.3) ==
        Catch::Approx(0.66818388711879836140191169777).margin(1e-15));
  CHECK(post.cdf(1e9) == Catch::Approx(1.0).margin(1e-15));
  CHECK(post.pdf(0.5) == 0.0);
  // pdf = shape * scale^shape / x^(shape+1)
  CHECK(post.pdf(1.3) ==
        Catch::Approx(3.0 * std::pow(0.9, 3.0) / std::pow(1.3, 4.0))
            .epsilon(1e-14));
  CHECK_THROWS_AS(fcl::pareto_posterior(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(fcl::pareto_posterior(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("pareto_posterior pdf integrates back to the cdf", "[uniform]") {
  fcl::pareto_posterior post(2.0, 1.1);
  for (double x : {1.2, 1.8, 3.0, 9.0}) {
    const double mass =
        fcl::integrate([&](double t) { return post.pdf(t); }, 1.1, x);
    CHECK(mass == Catch::Approx(post.cdf(x)).margin(1e-9));
  }
}

TEST_CASE("pareto_posterior ball probabilities pinned", "[uniform]") {
  // n = 1, x_max = 0.5: mass of [0.7, 1.3] under Pareto(1, 0.5)
  fcl::pareto_posterior a(1.0, 0.5);
  CHECK(a.ball_prob(1.0, 0.3) ==
        Catch::Approx(0.32967032967032967).margin(1e-15));
  // n = 1, x_max = 0.9: support truncates the lower edge of the ball
  fcl::pareto_posterior b(1.0, 0.9);
  CHECK(b.ball_prob(1.0, 0.3) ==
        Catch::Approx(0.30769230769230769).margin(1e-15));
  CHECK(a.ball_prob(1.0, 0.0) == 0.0);
  CHECK_THROWS_AS(a.ball_prob(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(a.ball_prob(-2.0, 0.1), std::invalid_argument);
}

TEST_CASE("fct_prob_closed_form pinned values", "[uniform]") {
  CHECK(fcl::fct_prob_closed_form(1.0, 0.05, 0.5, 10.0) ==
        Catch::Approx(0.658916810849582012618977551824).margin(1e-14));
  // the textbook case: every data set assigns the ball no more than alpha
  CHECK(fcl::fct_prob_closed_form(1.0, 0.3, 0.5, 1.0) == 1.0);
  CHECK(fcl::fct_prob_closed_form(1.0, 0.0, 0.5, 4.0) == 1.0);
}

TEST_CASE("fct_prob_closed_form scale invariance", "[uniform]") {
  for (double c : {0.5, 2.0, 7.0}) {
    CHECK(fcl::fct_prob_closed_form(c, 0.3 * c, 0.5, 1.0) ==
          Catch::Approx(fcl::fct_prob_closed_form(1.0, 0.3, 0.5, 1.0))
              .margin(1e-14));
    CHECK(fcl::fct_prob_closed_form(c, 0.05 * c, 0.25, 10.0) ==
          Catch::Approx(fcl::fct_prob_closed_form(1.0, 0.05, 0.25, 10.0))
              .margin(1e-13));
  }
}

TEST_CASE("fct_prob_closed_form is a probability, monotone in alpha",
          "[uniform]") {
  for (double n : {1.0, 3.0, 20.0}) {
    for (double eps : {0.01, 0.2, 0.6, 0.9}) {
      double prev = -1.0;
      for (double alpha : {0.05, 0.25, 0.5, 0.75, 0.95}) {
        const double p = fcl::fct_prob_closed_form(1.0, eps, alpha, n);
        INFO("n=" << n << " eps=" << eps << " alpha=" << alpha);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        // larger alpha makes (ball <= alpha) easier to satisfy
        CHECK(p >= prev - 1e-12);
        prev = p;
      }
    }
  }
}

TEST_CASE("fct_prob_closed_form argument validation", "[uniform]") {
  CHECK_THROWS_AS(fcl::fct_prob_closed_form(0.0, 0.1, 0.5, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fcl::fct_prob_closed_form(1.0, 1.0, 0.5, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fcl::fct_prob_closed_form(1.0, -0.1, 0.5, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fcl::fct_prob_closed_form(1.0, 0.1, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fcl::fct_prob_closed_form(1.0, 0.1, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fcl::fct_prob_closed_form(1.0, 0.1, 0.5, 0.0),
                  std::invalid_argument);
}

TEST_CASE("fct_prob_closed_form matches the Monte Carlo probe", "[uniform]") {
  // the probe estimates the same sampling probability by simulation
  fcl::stream_rng pick({20260821, 0});
  const std::size_t k = 20000;
  for (int c = 0; c < 10; ++c) {
    const double theta0 = 0.5 + 2.0 * pick.uniform01();
    const double eps = theta0 * (0.05 + 0.85 * pick.uniform01());
    const double alpha = 0.1 + 0.8 * pick.uniform01();
    const double n = 1.0 + std::floor(12.0 * pick.uniform01());
    const double p = fcl::fct_prob_closed_form(theta0, eps, alpha, n);
    fcl::uniform_support_model model(static_cast<std::uint32_t>(n), theta0);
    const auto r =
        fcl::probe(model, eps, alpha, k, 9000 + static_cast<std::uint64_t>(c));
    const double se = std::sqrt(std::max(p * (1.0 - p), 0.0) /
                                static_cast<double>(k));
    INFO("theta0=" << theta0 << " eps=" << eps << " alpha=" << alpha
                   << " n=" << n << " p=" << p << " p_hat=" << r.p_hat);
    if (p == 0.0 || p == 1.0) {
      CHECK(r.p_hat == p);
    } else {
      CHECK(std::fabs(r.p_hat - p) <= 3.0 * se + 1e-9);
    }
  }
}

TEST_CASE("product_posterior cdf pinned values for both branches",
          "[uniform]") {
  // equal shapes: 1 - (1 + nL) e^{-nL}
  fcl::product_posterior eq(1.0, 1.0, 1.0, 1.0);
  const double e1 = std::exp(1.0);
  CHECK(eq.cdf(e1) ==
        Catch::Approx(0.264241117657115356808952459677).margin(1e-14));
  CHECK(eq.cdf(1.0) == 0.0);
  CHECK(eq.cdf(0.2) == 0.0);
  // unequal shapes: 1 + m/(n-m) e^{-nL} - n/(n-m) e^{-mL}
  fcl::product_posterior uneq(2.0, 1.0, 1.0, 1.0);
  CHECK(uneq.cdf(e1) ==
        Catch::Approx(0.399576400893728048702951954650).margin(1e-14));
  fcl::product_posterior uneq2(2.0, 1.0, 0.5, 0.5);
  CHECK(uneq2.cdf(2.0) == Catch::Approx(0.765625).margin(1e-14));
  CHECK(uneq2.support() == Catch::Approx(0.25).margin(1e-16));
  CHECK_THROWS_AS(fcl::product_posterior(0.0, 1.0, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fcl::product_posterior(1.0, 1.0, 0.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("product_posterior pdf pinned values and consistency", "[uniform]") {
  fcl::product_posterior uneq(2.0, 1.0, 1.0, 1.0);
  CHECK(uneq.pdf(std::exp(1.0)) ==
        Catch::Approx(0.171096429737497497829314158645).margin(1e-14));
  fcl::product_posterior eq3(3.0, 3.0, 1.0, 1.0);
  CHECK(eq3.pdf(2.0) ==
        Catch::Approx(0.389895289064969236547193068320).margin(1e-14));
  CHECK(eq3.pdf(0.7) == 0.0);
  // pdf integrates to the cdf on both branches
  for (double x : {1.3, 2.0, 5.0}) {
    CHECK(fcl::integrate([&](double t) { return eq3.pdf(t); }, 1.0, x) ==
          Catch::Approx(eq3.cdf(x)).margin(1e-9));
    CHECK(fcl::integrate([&](double t) { return uneq.pdf(t); }, 1.0, x) ==
          Catch::Approx(uneq.cdf(x)).margin(1e-9));
  }
}

TEST_CASE("product_posterior cdf is continuous across the shape branch",
          "[uniform]") {
  // as m -> n the general form converges to the equal-shape form
  for (double n : {1.0, 2.5, 7.0}) {
    fcl::product_posterior equal(n, n, 1.0, 0.8);
    for (double rel : {1e-7, -1e-7}) {
      fcl::product_posterior close(n, n * (1.0 + rel), 1.0, 0.8);
      for (double psi = 0.9; psi < 30.0; psi *= 1.4) {
        INFO("n=" << n << " rel=" << rel << " psi=" << psi);
        CHECK(std::fabs(close.cdf(psi) - equal.cdf(psi)) <= 1e-4);
      }
    }
  }
}

TEST_CASE("product_posterior cdf matches brute-force posterior draws",
          "[uniform]") {
  // draw (theta_x, theta_y) from the independent Pareto posteriors and
  // compare the empirical cdf of the product against the closed form
  struct pcase {
    double n, m, xm, ym;
  };
  for (pcase c : {pcase{2.0, 2.0, 1.0, 1.0}, pcase{3.0, 1.0, 2.0, 0.5}}) {
    fcl::product_posterior post(c.n, c.m, c.xm, c.ym);
    fcl::stream_rng g({7777, 1});
    const std::size_t reps = 200000;
    std::vector<double> draws(reps);
    for (auto& d : draws) {
      const double tx = c.xm * std::pow(g.uniform01(), -1.0 / c.n);
      const double ty = c.ym * std::pow(g.uniform01(), -1.0 / c.m);
      d = tx * ty;
    }
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < reps; ++i) {
      const double cd = post.cdf(draws[i]);
      ks = std::max(ks, std::fabs(cd - static_cast<double>(i) / reps));
      ks = std::max(ks, std::fabs(static_cast<double>(i + 1) / reps - cd));
    }
    INFO("n=" << c.n << " m=" << c.m);
    CHECK(ks <= 0.005);
  }
}

TEST_CASE("product_posterior ball_prob is the cdf difference", "[uniform]") {
  fcl::product_posterior post(2.0, 3.0, 1.0, 1.5);
  CHECK(post.ball_prob(4.0, 1.5) ==
        Catch::Approx(post.cdf(5.5) - post.cdf(2.5)).margin(1e-16));
  CHECK(post.ball_prob(4.0, 0.0) == 0.0);
  // tail mass decays like psi^{-min(n,m)}: at radius 1e4 it is ~7e-8
  CHECK(post.ball_prob(4.0, 1e4) == Catch::Approx(1.0).margin(1e-6));
  CHECK_THROWS_AS(post.ball_prob(4.0, -0.5), std::invalid_argument);
}
