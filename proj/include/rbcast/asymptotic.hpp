#pragma once

// Asymptotic throughput when K / log n -> c: the largest beta < gamma with
// beta / Lambda(beta) <= c.

#include "rbcast/channel.hpp"

namespace rbcast {

/// Limit of K / log n. Infinity is its own regime, not a large number.
class BlockRatio
{
public:
  static BlockRatio finite(double c);
  static BlockRatio infinite() noexcept { return BlockRatio{}; }

  bool is_infinite() const noexcept { return m_infinite; }
  /// Only meaningful when finite.
  double value() const noexcept { return m_value; }

private:
  BlockRatio() = default;

  double m_value = 0.0;
  bool m_infinite = true;
};

struct AsymptoticResult
{
  BlockRatio c = BlockRatio::infinite();
  double beta_c = 0.0;
  /// |c * Lambda(beta_c) - beta_c| for interior solutions, 0 otherwise.
  double residual = 0.0;
  /// False when the supremum gamma is approached but not reached (c infinite).
  bool attained = true;
  int iterations = 0;
};

/// beta / Lambda(beta); strictly increasing on (0, gamma).
double beta_over_lambda(const ChannelModel& model, double beta);

AsymptoticResult asymptotic_throughput(const ChannelModel& model, BlockRatio c);

/// Same quantity for a memoryless channel, solved through the closed-form
/// divergence. Accepts c = +inf.
double memoryless_asymptotic(double gamma, double c);

} // namespace rbcast
