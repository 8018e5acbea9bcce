#pragma once

// Engine internals shared by the estimators in simulator.cpp.

#include "rbcast/channel.hpp"
#include "rbcast/random.hpp"
#include "rbcast/simulator.hpp"

#include <memory>
#include <span>
#include <vector>

namespace rbcast::detail {

/// The n receiver channels of a broadcast, advanced together.
class Population
{
public:
  virtual ~Population() = default;

  /// Runs one block from the current histories and returns its length in slots.
  virtual long long run_block() = 0;

  /// Advances every channel by one slot with no block in service.
  virtual void idle_slot() = 0;
};

/// Distribution of a single receiver's block time T_i and its channel history
/// at the moment the whole block ends, per starting history s.
class FirstPassageTable
{
public:
  /// Extends the horizon until max_receivers * P[T_i > t] < 1e-17 for every s.
  FirstPassageTable(const ChannelModel& model, int k, long long max_receivers);

  int k() const noexcept { return m_k; }
  std::uint32_t num_states() const noexcept { return m_states; }
  long long horizon() const noexcept { return static_cast<long long>(m_survival.size()) / m_states - 1; }

  /// P[T_i > t | s]
  double survival(std::uint32_t s, long long t) const { return m_survival[idx(t, s)]; }
  /// P[T_i <= t | s]
  double cdf(std::uint32_t s, long long t) const { return m_cdf[idx(t, s)]; }
  double log_cdf(std::uint32_t s, long long t) const;

  /// P[T_i = t, H_t = u | s] over u.
  std::span<const double> finish_at(std::uint32_t s, long long t) const
  {
    return {m_finish.data() + idx(t, s) * m_states, m_states};
  }
  /// P[T_i <= t - 1, H_t = u | s] over u.
  std::span<const double> finished_before(std::uint32_t s, long long t) const
  {
    return {m_before.data() + idx(t, s) * m_states, m_states};
  }

private:
  std::size_t idx(long long t, std::uint32_t s) const
  {
    return static_cast<std::size_t>(t) * m_states + s;
  }

  int m_k;
  std::uint32_t m_states;
  std::vector<double> m_survival;
  std::vector<double> m_cdf;
  std::vector<double> m_finish;
  std::vector<double> m_before;
};

std::unique_ptr<Population> make_receiver_population(const ChannelModel& model, long long n, int k,
                                                     const InitPolicy& init, const StreamKey& key);

std::unique_ptr<Population> make_aggregate_population(const ChannelModel& model,
                                                      std::shared_ptr<const FirstPassageTable> table,
                                                      long long n, const InitPolicy& init,
                                                      const StreamKey& key);

/// Per-receiver run that also reports the end-of-block histories.
BlockOutcome run_receiver_block(const ChannelModel& model, long long n, int k, const InitPolicy& init,
                                const StreamKey& key);

} // namespace rbcast::detail
