#include "rbcast/spectral.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace rbcast;

TEST_CASE("tilted matrix at zero tilt is the transition matrix")
{
  std::mt19937_64 rng{1};
  for (const auto& m : {gilbert_elliott(0.4, 0.4), testing::random_chain(2, rng), testing::random_chain(3, rng)}) {
    auto pi = m.dense_matrix();
    auto t = tilted(m, 0.0).dense();
    for (std::size_t s = 0; s < pi.size(); ++s)
      for (std::size_t u = 0; u < pi.size(); ++u)
        CHECK(t[s][u] == pi[s][u]);
  }
  CHECK(tilted(memoryless(0.3), 0.0).entry(0, 0) == 1.0);
}

TEST_CASE("memoryless tilt is the Bernoulli moment generating function")
{
  const double theta = std::log(2.0);
  auto t = tilted(memoryless(0.5), theta);
  CHECK(t.dim() == 1);
  CHECK(t.entry(0, 0) == doctest::Approx(0.5 + 0.5 * 2.0).epsilon(1e-15));
  CHECK(perron_root(t) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("Gilbert-Elliott tilt by log 2")
{
  auto t = tilted(gilbert_elliott(0.4, 0.4), std::log(2.0)).dense();
  CHECK(t[0][0] == doctest::Approx(0.6));
  CHECK(t[0][1] == doctest::Approx(0.8));
  CHECK(t[1][0] == doctest::Approx(0.4));
  CHECK(t[1][1] == doctest::Approx(1.2));

  // x^2 - 1.8x + 0.4 = 0
  const double expected = (1.8 + std::sqrt(1.64)) / 2.0;
  auto m = tilted(gilbert_elliott(0.4, 0.4), std::log(2.0));
  CHECK(perron_root(m) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(perron_root_iterative(m).root == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("tilt overflow guard")
{
  auto m = gilbert_elliott(0.4, 0.4);
  CHECK_NOTHROW(tilted(m, 700.0));
  CHECK_THROWS_AS(tilted(m, 700.5), std::domain_error);
  CHECK_THROWS_AS(tilted(m, -701.0), std::domain_error);
}

TEST_CASE("stochastic matrices have Perron root one")
{
  std::mt19937_64 rng{2};
  for (int order = 1; order <= 5; ++order)
    for (int rep = 0; rep < 20; ++rep) {
      auto m = testing::random_chain(order, rng);
      CHECK(std::abs(perron_root(tilted(m, 0.0)) - 1.0) < 1e-10);
    }
  CHECK(perron_root(tilted(memoryless(0.7), 0.0)) == 1.0);
}

TEST_CASE("2x2 closed form matches power iteration")
{
  std::mt19937_64 rng{3};
  std::uniform_real_distribution<double> p{0.01, 1.0};
  std::uniform_real_distribution<double> th{-5.0, 5.0};
  for (int rep = 0; rep < 100; ++rep) {
    double p01 = p(rng), p10 = p(rng), theta = th(rng);
    if (p01 == 1.0 && p10 == 1.0)
      continue;
    auto t = tilted(gilbert_elliott(p01, p10), theta);
    const double closed = perron_root(t);
    const double iterated = perron_root_iterative(t).root;
    CHECK(std::abs(closed - iterated) <= 1e-10 * closed);
    // Independent characteristic-polynomial evaluation.
    const double e = std::exp(theta);
    const double oracle = testing::quadratic_root(1.0 - p01, p01 * e, p10, (1.0 - p10) * e);
    CHECK(std::abs(closed - oracle) <= 1e-12 * oracle);
  }
}

TEST_CASE("power iteration brackets the root")
{
  std::mt19937_64 rng{4};
  auto m = testing::random_chain(3, rng);
  auto r = perron_root_iterative(tilted(m, 0.7));
  CHECK(r.lower <= r.root);
  CHECK(r.root <= r.upper);
  CHECK((r.upper - r.lower) <= 1e-12 * r.root);
}

TEST_CASE("rate function examples")
{
  auto mem = memoryless(0.5);
  auto at_mean = rate_function(mem, 0.5);
  CHECK(std::abs(at_mean.value) < 1e-12);
  CHECK(std::abs(at_mean.theta_star) < 1e-5);

  auto quarter = rate_function(mem, 0.25);
  const double closed = 0.25 * std::log(0.5) + 0.75 * std::log(1.5);
  CHECK(quarter.value == doctest::Approx(closed).epsilon(1e-10));
  CHECK(quarter.value == doctest::Approx(0.130812).epsilon(1e-5));
  CHECK(rate_function_memoryless(0.5, 0.25) == doctest::Approx(closed).epsilon(1e-14));
  CHECK_FALSE(quarter.boundary);
  CHECK(std::abs(quarter.value - (quarter.theta_star * 0.25 - std::log(perron_root(tilted(mem, quarter.theta_star))))) <
        1e-12);

  SUBCASE("memoryless closed form and its edges")
  {
    CHECK(rate_function_memoryless(0.3, 0.3) == 0.0);
    CHECK(rate_function_memoryless(0.5, 1e-12) == doctest::Approx(std::numbers::ln2).epsilon(1e-9));
    CHECK(rate_function_memoryless(0.5, 0.0) == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
    auto edge = rate_function(mem, 1e-7);
    CHECK(edge.boundary);
    CHECK(edge.value == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
  }
}

TEST_CASE("Gilbert-Elliott rate function against a tilt grid")
{
  // Independent evaluation: quadratic Perron root over theta in [-20, 20], step 1e-4.
  const double p01 = 0.4, p10 = 0.4, beta = 0.25;
  double best = -1e300;
  for (long i = -200'000; i <= 200'000; ++i) {
    const double theta = i * 1e-4;
    const double e = std::exp(theta);
    const double rho = testing::quadratic_root(1.0 - p01, p01 * e, p10, (1.0 - p10) * e);
    best = std::max(best, theta * beta - std::log(rho));
  }
  auto eval = rate_function(gilbert_elliott(p01, p10), beta);
  CHECK(std::abs(eval.value - best) < 1e-6);
  CHECK(eval.value >= best - 1e-12);
  CHECK(eval.theta_star < 0.0);
}

namespace {

std::vector<ChannelModel> property_models()
{
  std::mt19937_64 rng{8};
  return {memoryless(0.5),           memoryless(0.2),           gilbert_elliott(0.4, 0.4),
          gilbert_elliott(0.1, 0.3), gilbert_elliott(0.9, 0.6), testing::random_chain(2, rng),
          testing::random_chain(3, rng)};
}

} // namespace

TEST_CASE("rate function is nonnegative, convex and vanishes at gamma")
{
  for (const auto& m : property_models()) {
    std::vector<double> values;
    for (int i = 1; i <= 19; ++i) {
      auto eval = rate_function(m, 0.05 * i);
      CHECK(eval.value >= -1e-12);
      values.push_back(eval.value);
    }
    for (std::size_t i = 1; i + 1 < values.size(); ++i)
      CHECK(values[i] <= 0.5 * (values[i - 1] + values[i + 1]) + 1e-8);
    CHECK(std::abs(rate_function(m, m.success_prob()).value) < 1e-8);
  }
}

TEST_CASE("memoryless numeric rate function equals the divergence")
{
  for (double g : {0.1, 0.25, 0.5, 0.75, 0.9})
    for (int i = 1; i <= 19; ++i) {
      const double beta = 0.05 * i;
      CHECK(std::abs(rate_function(memoryless(g), beta).value - testing::kl_bernoulli(beta, g)) < 1e-8);
    }
}

TEST_CASE("tilted objective is concave in theta")
{
  std::mt19937_64 rng{9};
  std::uniform_real_distribution<double> th{-10.0, 10.0};
  std::uniform_real_distribution<double> b{0.05, 0.95};
  for (const auto& m : property_models())
    for (int rep = 0; rep < 50; ++rep) {
      const double beta = b(rng), t1 = th(rng), t2 = th(rng);
      const double mid = rate_objective(m, beta, 0.5 * (t1 + t2));
      CHECK(mid >= 0.5 * (rate_objective(m, beta, t1) + rate_objective(m, beta, t2)) - 1e-9);
    }
}

TEST_CASE("boundary extension for chains with unreachable outcomes")
{
  // p10 = 1: a success is always followed by an erasure, so fractions near 1
  // are unreachable while long erasure runs are not.
  auto m = gilbert_elliott(0.5, 1.0);
  auto low = rate_function(m, 1e-9);
  CHECK(low.boundary);
  CHECK(low.value == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
  auto high = rate_function(m, 1.0 - 1e-9);
  CHECK(high.boundary);
  CHECK(high.capped);
  CHECK(std::isinf(high.value));
}
