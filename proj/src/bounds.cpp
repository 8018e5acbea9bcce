#include "rbcast/bounds.hpp"

#include "rbcast/asymptotic.hpp"

#include <cmath>
#include <stdexcept>

namespace rbcast {

namespace {

// Slack for conditions that hold with equality in exact arithmetic, such as
// p01 + p10 = 1 for memoryless-equivalent channels.
constexpr double kSlack = 1e-12;

BoundReport lower_bound_impl(const ChannelModel& model, int k0, long long n, long long k,
                             const BoundOptions& options)
{
  if (n < 1 || k < 1)
    throw std::invalid_argument("bounds need n >= 1 and k >= 1");

  BoundReport r;
  r.n = n;
  r.k = k;
  r.k_zero = k0;
  const double gamma = model.success_prob();
  if (n == 1) {
    r.degenerate = true;
    r.our_bound = gamma;
    r.asymptotic_ref = gamma;
  } else {
    r.ratio = static_cast<double>(k + k0) / std::log(static_cast<double>(n));
    r.asymptotic_ref = asymptotic_throughput(model, BlockRatio::finite(r.ratio)).beta_c;
    r.our_bound = static_cast<double>(k) / static_cast<double>(k + k0) * r.asymptotic_ref;
  }

  if (model.is_memoryless())
    r.cse1 = cse_bound_1(gamma, n, k, options.cse1_numerator);
  if (auto ge = as_gilbert_elliott(model))
    r.cse2 = cse_bound_2(*ge, n, k);
  return r;
}

} // namespace

int k_zero(double p01, double p10)
{
  (void)GilbertElliott{p01, p10}; // validates
  const double stay = 1.0 - p10;
  double partial = 0.0;
  double term = p10;
  for (int m = 0;; ++m) {
    partial += term;
    if (partial + p01 >= 1.0 - kSlack)
      return m;
    term *= stay;
    // The geometric series tends to 1 > 1 - p01, so this only trips on
    // parameters far below any practical resolution.
    if (term == 0.0)
      return m + 1;
  }
}

BoundReport finite_lower_bound(const GilbertElliott& ge, long long n, long long k,
                               const BoundOptions& options)
{
  return lower_bound_impl(ge.model(), k_zero(ge.p01, ge.p10), n, k, options);
}

BoundReport finite_lower_bound(const ChannelModel& model, long long n, long long k,
                               const BoundOptions& options)
{
  if (model.order() == 0)
    return lower_bound_impl(model, 0, n, k, options);
  if (model.order() == 1) {
    auto ge = *as_gilbert_elliott(model);
    return lower_bound_impl(model, k_zero(ge.p01, ge.p10), n, k, options);
  }
  throw std::invalid_argument("finite lower bound is defined for Gilbert-Elliott channels only");
}

std::optional<double> cse_bound_1(double gamma, long long n, long long k, Cse1Numerator numerator)
{
  if (k <= 16 || n < 1)
    return std::nullopt;
  const double kk = static_cast<double>(k);
  const double top = numerator == Cse1Numerator::one_minus_gamma ? 1.0 - gamma : gamma;
  return top * kk / (kk + (std::log(static_cast<double>(n)) + 0.78) * std::sqrt(kk) + 2.61);
}

std::optional<double> cse_bound_2(const GilbertElliott& ge, long long n, long long k)
{
  if (n < 1)
    return std::nullopt;
  const double kk = static_cast<double>(k);
  const double logn = std::log(static_cast<double>(n));
  if (1.0 - ge.p10 - ge.p01 < -kSlack || kk < 21.0 * logn - 4.0)
    return std::nullopt;
  return ge.p01 * kk / (kk + 2.0 * std::sqrt((0.78 * kk + 3.37) * logn) + 2.61);
}

} // namespace rbcast
