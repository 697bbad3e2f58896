#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "smre/poisson.hpp"
#include "smre/statistics.hpp"

using namespace smre;

TEST_SUITE("poisson") {
  TEST_CASE("anscombe transform") {
    CHECK(anscombe(ImageField(1, 1), 3.0 / 8.0)[0] == doctest::Approx(1.224744871391589).epsilon(1e-15));
    const ImageField y(1, 4, std::vector<double>{0, 1, 2, 10});
    const ImageField x = anscombe(y);
    for (std::size_t k = 1; k < 4; ++k) CHECK(x[k] > x[k - 1]);
    CHECK(anscombe(y, 0.25)[1] == doctest::Approx(2.0 * std::sqrt(1.25)));
    CHECK_THROWS_AS(anscombe(ImageField(1, 1, -1.0)), std::invalid_argument);
  }

  TEST_CASE("config validation") {
    PoissonConfig c;
    CHECK_NOTHROW(c.validate());
    c.c_anscombe = 0.3;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.delta = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }

  TEST_CASE("box smoothing") {
    const ImageField c(4, 5, 3.0);
    CHECK(max_abs_diff(box_smooth3(c), c) < 1e-15);
    ImageField d(3, 3);
    d(1, 1) = 9.0;
    const ImageField s = box_smooth3(d);
    CHECK(s(1, 1) == doctest::Approx(1.0));
    CHECK(s(0, 0) == doctest::Approx(9.0 / 4.0));
    CHECK(s(0, 1) == doctest::Approx(9.0 / 6.0));
  }

  TEST_CASE("square-root residual is convex in the intensity") {
    for (double c : {0.0, 0.5, 2.0, 7.0})
      for (double t = 0.0; t < 50.0; t += 0.37)
        for (double h : {0.01, 0.5, 3.0}) {
          auto f = [c](double x) { return std::pow(std::sqrt(x) - c, 2); };
          CHECK(f(t + h) <= 0.5 * (f(t) + f(t + 2 * h)) + 1e-12);
        }
  }

  TEST_CASE("constant counts give a nearly constant estimate") {
    // On the root scale a unit residual is about 2 sqrt(400) / 40, so the
    // estimate may sit anywhere within roughly 10% of the counts.
    const ImageField y(12, 12, 400.0);
    const auto cal = assign_weights(build_system_s2(12, 12), 2.0);
    const SolveReport r = poisson_admm(y, LinearOperator::identity(), cal, CostSpec::tv());
    CHECK(r.converged);
    CHECK(max_abs_diff(r.u_hat, y) <= 0.1 * 400.0);
    const auto [lo, hi] = std::minmax_element(r.u_hat.values().begin(), r.u_hat.values().end());
    CHECK(*hi - *lo <= 0.01 * 400.0);
  }

  TEST_CASE("uncalibrated system is rejected") {
    CHECK_THROWS_AS(poisson_admm(ImageField(4, 4, 3.0), LinearOperator::identity(), build_system_s2(4, 4),
                                 CostSpec::tv()),
                    StateError);
  }

  TEST_CASE("phantom run: fixed point and feasibility") {
    const std::size_t m = 16, n = 16;
    ImageField u0(m, n, 10.0);
    for (std::size_t i = 4; i < 12; ++i)
      for (std::size_t j = 3; j < 10; ++j) u0(i, j) = 120.0;
    std::mt19937_64 g(8);
    ImageField y(m, n);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = std::poisson_distribution<int>(u0[k])(g);
    const auto sys = build_system_s2(m, n);
    const auto cal = assign_weights(sys, simulate_quantile(sys, 0.9, 300, 3));
    const SolveReport r = poisson_admm(y, LinearOperator::identity(), cal, CostSpec::tv());
    REQUIRE(r.converged);
    for (double w : r.v_hat.values()) CHECK(w >= -1e-9);
    ImageField w2 = r.v_hat;
    for (double& w : w2.values()) w *= w;
    CHECK(norm(w2 - r.u_hat) / norm(r.u_hat) <= 5e-3);
    ImageField root(m, n);
    const ImageField x = anscombe(y);
    for (std::size_t k = 0; k < root.size(); ++k) root[k] = 2.0 * std::sqrt(std::max(r.u_hat[k], 0.0)) - x[k];
    CHECK(transformed_statistic(root, cal, 1.0) <= 1.01 * *cal.q_alpha());
  }

  TEST_CASE("zero counts engage the floor") {
    ImageField y(8, 8, 0.0);
    y(3, 3) = 4.0;
    const auto cal = assign_weights(build_system_s2(8, 8), 1.0);
    PoissonConfig pc;
    pc.admm.max_outer = 5;
    const SolveReport r = poisson_admm(y, LinearOperator::identity(), cal, CostSpec::tv(), pc);
    CHECK(r.iterations >= 1);
    for (double v : r.u_hat.values()) CHECK(std::isfinite(v));
  }
}
