#include "rbcast/asymptotic.hpp"

#include "rbcast/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace rbcast {

namespace {

constexpr double kEdge = 1e-9;
constexpr double kBisectWidth = 1e-13;
constexpr int kBisectMaxIter = 200;
// Below this beta the rate function returns its constant boundary extension.
constexpr double kFlatBeta = 1e-6;

double ratio_or_zero(double beta, double lambda)
{
  return std::isinf(lambda) ? 0.0 : beta / lambda;
}

} // namespace

BlockRatio BlockRatio::finite(double c)
{
  if (!(c >= 0.0) || std::isinf(c))
    throw std::invalid_argument("block ratio must be finite and >= 0");
  BlockRatio r;
  r.m_value = c;
  r.m_infinite = false;
  return r;
}

double beta_over_lambda(const ChannelModel& model, double beta)
{
  if (!(beta > 0.0 && beta < model.success_prob()))
    throw std::domain_error("beta must lie in (0, gamma)");
  return ratio_or_zero(beta, rate_function(model, beta).value);
}

AsymptoticResult asymptotic_throughput(const ChannelModel& model, BlockRatio c)
{
  const double gamma = model.success_prob();
  AsymptoticResult out;
  out.c = c;
  if (c.is_infinite()) {
    out.beta_c = gamma;
    out.attained = false;
    return out;
  }
  const double cv = c.value();
  if (cv == 0.0)
    return out;

  auto excess = [&](double beta) { return cv - beta_over_lambda(model, beta); };
  auto finish = [&](double beta) {
    out.beta_c = beta;
    double lambda = rate_function(model, beta).value;
    out.residual = std::isinf(lambda) ? 0.0 : std::abs(cv * lambda - beta);
    return out;
  };

  // The rate function is flat near zero, so there the root is explicit.
  double flat = rate_function(model, kFlatBeta / 2).value;
  if (!std::isinf(flat) && cv * flat <= kFlatBeta)
    return finish(cv * flat);

  double lo = kEdge, hi = gamma - kEdge;
  if (excess(hi) >= 0.0)
    return finish(hi);

  int iter = 0;
  while (hi - lo > kBisectWidth && iter < kBisectMaxIter) {
    double mid = 0.5 * (lo + hi);
    if (excess(mid) >= 0.0)
      lo = mid;
    else
      hi = mid;
    ++iter;
  }
  out.iterations = iter;
  return finish(0.5 * (lo + hi));
}

double memoryless_asymptotic(double gamma, double c)
{
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(c >= 0.0))
    throw std::invalid_argument("c must be >= 0");
  if (std::isinf(c))
    return gamma;
  if (c == 0.0)
    return 0.0;

  // beta is feasible while D(beta || gamma) >= beta / c.
  auto feasible = [&](double beta) { return c * rate_function_memoryless(gamma, beta) >= beta; };
  double lo = 0.0, hi = gamma;
  for (int i = 0; i < kBisectMaxIter && hi - lo > kBisectWidth; ++i) {
    double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace rbcast
