#pragma once

// Finite-(n, K) throughput lower bound for Gilbert-Elliott channels and the
// earlier CSE stability bounds it is compared against.

#include "rbcast/channel.hpp"

#include <optional>

namespace rbcast {

enum class Cse1Numerator
{
  one_minus_gamma, ///< as printed in the original statement
  gamma,
};

struct BoundOptions
{
  Cse1Numerator cse1_numerator = Cse1Numerator::one_minus_gamma;
};

struct BoundReport
{
  long long n = 0;
  long long k = 0;
  int k_zero = 0;
  /// (k + k_zero) / log n; zero when n == 1.
  double ratio = 0.0;
  double our_bound = 0.0;
  std::optional<double> cse1;
  std::optional<double> cse2;
  /// R(ratio) before the k / (k + k_zero) factor.
  double asymptotic_ref = 0.0;
  /// n == 1: no straggler effect, the bound is gamma itself.
  bool degenerate = false;
};

/// Smallest m >= 0 with sum_{d=0}^{m} (1 - p10)^d p10 + p01 >= 1.
int k_zero(double p01, double p10);

BoundReport finite_lower_bound(const GilbertElliott& ge, long long n, long long k,
                               const BoundOptions& options = {});

/// Order-0 and order-1 models; memoryless channels use K0 = 0 and their own
/// rate function. Throws std::invalid_argument for order >= 2.
BoundReport finite_lower_bound(const ChannelModel& model, long long n, long long k,
                               const BoundOptions& options = {});

/// Memoryless channels, K > 16.
std::optional<double> cse_bound_1(double gamma, long long n, long long k,
                                  Cse1Numerator numerator = Cse1Numerator::one_minus_gamma);

/// Gilbert-Elliott channels with 1 - p10 - p01 >= 0 and K >= 21 log n - 4.
std::optional<double> cse_bound_2(const GilbertElliott& ge, long long n, long long k);

} // namespace rbcast
