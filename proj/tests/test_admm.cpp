#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "smre/admm.hpp"
#include "smre/random.hpp"
#include "smre/statistics.hpp"

using namespace smre;

namespace {

ImageField blocks(std::size_t m, std::size_t n) {
  ImageField u(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) u(i, j) = (i >= m / 4 && i < 3 * m / 4 && j >= n / 3) ? 1.0 : 0.0;
  return u;
}

ImageField noisy(const ImageField& u, double sd, std::uint64_t seed) {
  ImageField e(u.rows(), u.cols());
  NormalStream(seed, 0).fill(e);
  return u + e * sd;
}

}  // namespace

TEST_SUITE("admm") {
  TEST_CASE("stopping rule") {
    const AdmmConfig cfg;
    CHECK(stopping_check({0, 0, 0, 0, 0, 0}, 2.0, cfg));
    CHECK_FALSE(stopping_check({0, 0, 1.02 * 2.0, 0, 0, 0}, 2.0, cfg));
    CHECK(stopping_check({0, 0, 1.01 * 2.0, 0, 0, 0}, 2.0, cfg));
    CHECK(stopping_check({1e-3, 1e-3, 0, 0, 0, 0}, 2.0, cfg));
    CHECK_FALSE(stopping_check({1.0001e-3, 0, 0, 0, 0, 0}, 2.0, cfg));
    CHECK_FALSE(stopping_check({0, 1.0001e-3, 0, 0, 0, 0}, 2.0, cfg));
  }

  TEST_CASE("config validation") {
    AdmmConfig c;
    CHECK_NOTHROW(c.validate(1.0));
    CHECK(c.effective_zeta(1.0) == doctest::Approx(1.01));
    c.zeta = 0.5;
    CHECK_THROWS_AS(c.validate(1.0), std::invalid_argument);
    c = {};
    c.lambda = 0.0;
    CHECK_THROWS_AS(c.validate(1.0), std::invalid_argument);
    c = {};
    c.alpha = 1.0;
    CHECK_THROWS_AS(c.validate(1.0), std::invalid_argument);
  }

  TEST_CASE("uncalibrated system is a state error") {
    const ImageField y(4, 4, 0.5);
    CHECK_THROWS_AS(admm_solve(y, LinearOperator::identity(), build_system_s2(4, 4), 0.01, CostSpec::tv()), StateError);
    const auto cal = assign_weights(build_system_s2(4, 4), 1.0);
    CHECK_THROWS_AS(admm_solve(ImageField(4, 5), LinearOperator::identity(), cal, 0.01, CostSpec::tv()),
                    std::invalid_argument);
    CHECK_THROWS_AS(admm_solve(y, LinearOperator::identity(), cal, 0.0, CostSpec::tv()), std::invalid_argument);
  }

  TEST_CASE("constant data gives a feasible flat estimate") {
    // Every constant close enough to Y is a minimizer, so only flatness and
    // feasibility are determined.
    const ImageField y(16, 16, 0.6);
    const auto cal = assign_weights(build_system_s2(16, 16), 2.0);
    const SolveReport r = admm_solve(y, LinearOperator::identity(), cal, 0.01, CostSpec::tv());
    CHECK(r.converged);
    CHECK(tv_value(r.u_hat, CostSpec::tv()) < 0.05);
    CHECK(transformed_statistic(r.u_hat - y, cal, 0.01) <= 1.01 * 2.0);
    CHECK(r.history.size() == r.iterations);
  }

  TEST_CASE("denoising run satisfies the stopping rule") {
    const ImageField u0 = blocks(24, 24);
    const ImageField y = noisy(u0, 0.1, 3);
    const auto sys = build_system_s2(24, 24);
    const auto cal = assign_weights(sys, simulate_quantile(sys, 0.9, 300, 1));
    AdmmConfig cfg;
    cfg.average_iterates = true;
    const SolveReport r = admm_solve(y, LinearOperator::identity(), cal, 0.01, CostSpec::tv(), cfg);
    REQUIRE(r.converged);
    const auto& last = r.history.back();
    CHECK(last.stat <= 1.01 * *cal.q_alpha());
    CHECK(last.rel_gap <= 1e-3);
    CHECK(last.rel_change <= 1e-3);
    CHECK(transformed_statistic(r.u_hat - y, cal, 0.01) == doctest::Approx(last.stat));
    CHECK(norm(r.u_hat - r.v_hat) / norm(y) <= 1e-3);
    REQUIRE(r.u_avg.has_value());
    CHECK(r.u_avg->same_shape(y));
    // Cost history is bounded.
    for (const auto& h : r.history) CHECK(h.cost <= 10.0 * tv_value(y, CostSpec::tv()));
  }

  TEST_CASE("deconvolution and inpainting runs") {
    const ImageField u0 = blocks(16, 16);
    const auto sys = build_system_s2(16, 16);
    const auto cal = assign_weights(sys, simulate_quantile(sys, 0.9, 200, 2));

    const auto blur = LinearOperator::gaussian(1.0);
    const ImageField yb = noisy(blur.apply(u0), 0.05, 4);
    const SolveReport rb = admm_solve(yb, blur, cal, 0.0025, CostSpec::tv());
    CHECK(rb.converged);
    CHECK(rb.history.back().stat <= 1.01 * *cal.q_alpha());

    ImageField mask(16, 16, 1.0);
    for (std::size_t k = 3; k < mask.size(); k += 7) mask[k] = 0.0;
    const auto mk = LinearOperator::mask(mask);
    const ImageField ym = mk.apply(noisy(u0, 0.1, 5));
    const SolveReport rm = admm_solve(ym, mk, cal, 0.01, CostSpec::tv_plus_l2(0.01));
    CHECK(rm.converged);
    CHECK(rm.history.back().stat <= 1.01 * *cal.q_alpha());
  }

  TEST_CASE("iteration cap reports non-convergence") {
    const ImageField y = noisy(blocks(12, 12), 0.1, 6);
    const auto cal = assign_weights(build_system_s2(12, 12), 1.5);
    AdmmConfig cfg;
    cfg.max_outer = 3;
    const SolveReport r = admm_solve(y, LinearOperator::identity(), cal, 0.01, CostSpec::tv(), cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.status == SolveStatus::MaxIterations);
    CHECK(r.iterations == 3);
    CHECK(r.history.size() == 3);
  }

  TEST_CASE("history csv") {
    std::ostringstream os;
    write_history_csv(os, {{0.5, 0.25, 1.0, 2.0, 1, 1}, {0.1, 0.05, 0.9, 1.5, 1, 1}});
    const std::string s = os.str();
    CHECK(s.rfind("iter,rel_change,rel_gap,stat,J\n1,0.5,0.25,1,2\n2,", 0) == 0);
  }
}
