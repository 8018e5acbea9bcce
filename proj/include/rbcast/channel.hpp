#pragma once

// Order-l Markov-modulated binary erasure channels.
//
// A channel state is the history of the last l slot outcomes packed into an
// integer with the newest slot in the least significant bit. Transitions are
// restricted to one-slot shifts: from history s the next history is
// ((s << 1) | x) & mask where x is the new outcome. Only P[x = 1 | s] is free
// per state, so the model stores that vector instead of the dense matrix.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace rbcast {

inline constexpr int kMaxOrder = 16;

struct ChannelState
{
  std::uint32_t bits = 0;

  static ChannelState from_history(std::span<const int> history);
  std::vector<int> history(int order) const;

  friend bool operator==(ChannelState, ChannelState) = default;
};

class ChannelModel
{
public:
  int order() const noexcept { return m_order; }
  std::uint32_t num_states() const noexcept { return std::uint32_t{1} << m_order; }

  /// Stationary per-slot success probability.
  double success_prob() const noexcept { return m_gamma; }

  /// P[next outcome = 1 | current history].
  double success_given(std::uint32_t state) const noexcept { return m_success[state]; }
  std::span<const double> success_given() const noexcept { return m_success; }

  /// Dense entry pi(s, u); zero off the shift structure.
  double transition(std::uint32_t from, std::uint32_t to) const noexcept;
  std::vector<std::vector<double>> dense_matrix() const;

  /// Stationary law over histories. Size 1 (= {1}) for memoryless channels.
  std::span<const double> stationary() const noexcept { return m_stationary; }

  std::uint32_t shift(std::uint32_t state, int bit) const noexcept
  {
    return ((state << 1) | static_cast<std::uint32_t>(bit & 1)) & m_mask;
  }

  static int newest_bit(std::uint32_t state) noexcept { return static_cast<int>(state & 1u); }

  std::uint32_t all_ones_state() const noexcept { return m_mask; }

  /// True when every history has the same success probability.
  bool is_memoryless() const noexcept;

  /// Number of power-iteration sweeps used for the stationary law.
  int stationary_iterations() const noexcept { return m_stationary_iterations; }

  friend ChannelModel memoryless(double gamma);
  friend ChannelModel from_transition(int order, const std::vector<std::vector<double>>& rows);

private:
  ChannelModel() = default;

  int m_order = 0;
  std::uint32_t m_mask = 0;
  double m_gamma = 0.0;
  std::vector<double> m_success;
  std::vector<double> m_stationary;
  int m_stationary_iterations = 0;
};

/// Two-state (order 1) channel: p01 = P[0 -> 1], p10 = P[1 -> 0].
struct GilbertElliott
{
  double p01 = 0.0;
  double p10 = 0.0;

  GilbertElliott() = default;
  GilbertElliott(double p01_, double p10_);

  double gamma() const noexcept { return p01 / (p01 + p10); }
  ChannelModel model() const;
};

ChannelModel memoryless(double gamma);
ChannelModel gilbert_elliott(double p01, double p10);
ChannelModel from_transition(int order, const std::vector<std::vector<double>>& rows);

/// Stationary distribution of the history chain (order >= 1).
std::vector<double> stationary_distribution(const ChannelModel& model);

/// One slot of the channel: emits 1 iff draw < P[1 | history].
std::pair<int, ChannelState> next_slot(const ChannelModel& model, ChannelState state, double uniform_draw);

/// Gilbert-Elliott view of an order-0 or order-1 model; memoryless channels map
/// to p01 = gamma, p10 = 1 - gamma. Empty for order >= 2.
std::optional<GilbertElliott> as_gilbert_elliott(const ChannelModel& model);

} // namespace rbcast
