#include "rbcast/selftest.hpp"

#include "rbcast/asymptotic.hpp"
#include "rbcast/bounds.hpp"
#include "rbcast/channel.hpp"
#include "rbcast/simulator.hpp"
#include "rbcast/spectral.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <sstream>

namespace rbcast {

namespace {

SelftestResult check(std::string name, const std::function<std::string()>& body)
{
  SelftestResult r{std::move(name), false, {}};
  try {
    r.detail = body();
    r.passed = r.detail.empty();
  } catch (const std::exception& e) {
    r.detail = std::string{"exception: "} + e.what();
  }
  return r;
}

std::string expect_close(double got, double want, double tol)
{
  if (std::abs(got - want) <= tol)
    return {};
  std::ostringstream os;
  os.precision(15);
  os << "got " << got << ", want " << want << " (tol " << tol << ")";
  return os.str();
}

} // namespace

std::vector<SelftestResult> run_selftest()
{
  std::vector<SelftestResult> out;

  out.push_back(check("oracle n=2 k=1 gamma=0.5 is 8/3", [] {
    return expect_close(exact_expected_completion_memoryless(0.5, 2, 1), 8.0 / 3.0, 1e-9);
  }));
  out.push_back(check("oracle n=1 matches negative binomial mean", [] {
    return expect_close(exact_expected_completion_memoryless(0.25, 1, 7), 28.0, 1e-9);
  }));
  out.push_back(check("Perron root of untilted chain is 1", [] {
    auto m = from_transition(2, {{0.3, 0.7, 0, 0}, {0, 0, 0.6, 0.4}, {0.2, 0.8, 0, 0}, {0, 0, 0.5, 0.5}});
    return expect_close(perron_root_iterative(tilted(m, 0.0)).root, 1.0, 1e-10);
  }));
  out.push_back(check("memoryless rate function numeric = closed form", [] {
    auto m = memoryless(0.5);
    for (double beta = 0.05; beta < 0.96; beta += 0.05) {
      auto msg = expect_close(rate_function(m, beta).value, rate_function_memoryless(0.5, beta), 1e-8);
      if (!msg.empty())
        return msg;
    }
    return std::string{};
  }));
  out.push_back(check("asymptotic regimes c=0 and c=inf", [] {
    auto m = gilbert_elliott(0.4, 0.4);
    auto msg = expect_close(asymptotic_throughput(m, BlockRatio::finite(0.0)).beta_c, 0.0, 0.0);
    return msg.empty() ? expect_close(asymptotic_throughput(m, BlockRatio::infinite()).beta_c, 0.5, 0.0) : msg;
  }));
  out.push_back(check("K0 for p01 = p10 = 0.4 is 1", [] {
    return k_zero(0.4, 0.4) == 1 ? std::string{} : "K0 = " + std::to_string(k_zero(0.4, 0.4));
  }));
  out.push_back(check("Monte Carlo E[T(5,10)] within 4 SE of oracle", [] {
    auto stats = estimate_expected_completion(memoryless(0.5), 5, 10, InitPolicy::stationary(), 20'000, 11);
    double exact = exact_expected_completion_memoryless(0.5, 5, 10);
    return expect_close(stats.mean, exact, 4.0 * stats.std_error);
  }));
  out.push_back(check("simulated GE(0.4,0.4) throughput exceeds the n=2, k=5 bound", [] {
    auto est = estimate_throughput(gilbert_elliott(0.4, 0.4), 2, 5, 20'000, 3);
    double bound = finite_lower_bound(GilbertElliott{0.4, 0.4}, 2, 5).our_bound;
    if (est.eta_hat + 3.0 * est.std_error > bound)
      return std::string{};
    return "eta_hat " + std::to_string(est.eta_hat) + " below bound " + std::to_string(bound);
  }));
  return out;
}

} // namespace rbcast
