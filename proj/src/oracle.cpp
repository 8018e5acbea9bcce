// Exact E[T(n, k)] for memoryless channels. Kept apart from the simulation
// engines so it can serve as their reference.

#include "rbcast/simulator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rbcast {

namespace {

constexpr long long kMaxTerms = 100'000'000;

// log P[Binomial(t, gamma) <= k - 1], built from log pmf ratios
// pmf(j + 1) / pmf(j) = (t - j) / (j + 1) * gamma / (1 - gamma).
double log_binomial_lower_tail(long long t, int k, double log_q, double log_odds, std::vector<double>& scratch)
{
  const long long top = std::min<long long>(t, k - 1);
  scratch.resize(static_cast<std::size_t>(top + 1));
  double lp = static_cast<double>(t) * log_q;
  double peak = lp;
  scratch[0] = lp;
  for (long long j = 0; j < top; ++j) {
    lp += std::log(static_cast<double>(t - j) / static_cast<double>(j + 1)) + log_odds;
    scratch[static_cast<std::size_t>(j + 1)] = lp;
    peak = std::max(peak, lp);
  }
  double acc = 0.0;
  for (double v : scratch)
    acc += std::exp(v - peak);
  return peak + std::log(acc);
}

} // namespace

double exact_expected_completion_memoryless(double gamma, long long n, int k, double tail_tol)
{
  if (!(gamma > 0.0 && gamma < 1.0) || n < 1 || k < 1 || !(tail_tol > 0.0))
    throw std::invalid_argument("invalid memoryless oracle arguments");

  const double log_q = std::log1p(-gamma);
  const double log_odds = std::log(gamma) - log_q;
  const double receivers = static_cast<double>(n);
  std::vector<double> scratch;

  // E[T] = sum_{t >= 0} P[T > t] with P[T > t] = 1 - (1 - P[T_i > t])^n and
  // P[T_i > t] = P[Binomial(t, gamma) <= k - 1]. The summand is 1 for t < k.
  double total = static_cast<double>(k);
  double previous = 1.0;
  for (long long t = k; t < kMaxTerms; ++t) {
    double tail_one = std::exp(log_binomial_lower_tail(t, k, log_q, log_odds, scratch));
    double term = -std::expm1(receivers * std::log1p(-std::min(tail_one, 1.0)));
    total += term;
    if (term < tail_tol && term <= previous)
      return total;
    previous = term;
  }
  throw std::runtime_error("memoryless oracle did not converge");
}

} // namespace rbcast
