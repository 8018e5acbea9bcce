#pragma once

// Monte Carlo engine for block completion times and renewal throughput of
// rateless-coded broadcast.
//
// Two exact engines are available:
//  - per_receiver: every receiver owns a keyed random stream and its channel
//    is stepped slot by slot. Receiver i's draws do not depend on n, which is
//    what the common-random-numbers mode relies on.
//  - population: receivers are exchangeable, so only the number of receivers
//    in each channel history is tracked. The block time is drawn by inverting
//    prod_s P[T_i <= t | start s]^{m_s}, and end-of-block histories are drawn
//    conditionally on that time from first-passage tables. Cost per block is
//    independent of n.

#include "rbcast/channel.hpp"
#include "rbcast/random.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace rbcast {

enum class Engine
{
  automatic,
  per_receiver,
  population,
};

std::string_view to_string(Engine e);
Engine engine_from_string(std::string_view name);

/// How each receiver's channel history is set before the first block.
struct InitPolicy
{
  enum class Kind
  {
    stationary, ///< exact draw from the stationary law of histories
    all_ones,   ///< every receiver just saw l successes
    explicit_states,
    burn_in, ///< run the chain from the all-zero history
  };

  Kind kind = Kind::stationary;
  /// explicit_states: one per receiver, or a single state shared by all.
  std::vector<ChannelState> states;
  /// burn_in: slot count; 0 selects max(1000, 100 * 2^l).
  long long burn_in_slots = 0;

  static InitPolicy stationary() { return {}; }
  static InitPolicy all_ones() { return {Kind::all_ones, {}, 0}; }
  static InitPolicy from_states(std::vector<ChannelState> s) { return {Kind::explicit_states, std::move(s), 0}; }
  static InitPolicy burn_in(long long slots = 0) { return {Kind::burn_in, {}, slots}; }
};

struct SimulationOptions
{
  Engine engine = Engine::automatic;
  /// Key receiver streams without (n, k) so that settings share draws. Only
  /// for paired comparisons; independent settings must leave this off.
  bool common_random_numbers = false;
  int jobs = 1;
  /// Extra identifier mixed into every stream key.
  std::uint64_t salt = 0;
};

/// Engine that `automatic` resolves to for a given setting.
Engine resolve_engine(const ChannelModel& model, long long n, Engine requested);

struct BlockOutcome
{
  long long slots = 0;
  std::vector<ChannelState> end_states;
};

/// One coding block with per-receiver streams keyed by `key` (receiver field
/// is overwritten per receiver). Every channel runs for the full block.
BlockOutcome block_time(const ChannelModel& model, long long n, int k, const InitPolicy& init,
                        const StreamKey& key);

struct CompletionStats
{
  double mean = 0.0;
  double std_error = 0.0;
  long long trials = 0;
  long long min = 0;
  long long max = 0;
};

CompletionStats summarize_completion(std::span<const long long> samples);

/// Independent block completion times T(n, k), each trial re-initialized.
std::vector<long long> sample_completion_times(const ChannelModel& model, long long n, int k,
                                               const InitPolicy& init, long long trials,
                                               std::uint64_t seed, const SimulationOptions& options = {});

CompletionStats estimate_expected_completion(const ChannelModel& model, long long n, int k,
                                             const InitPolicy& init, long long trials,
                                             std::uint64_t seed, const SimulationOptions& options = {});

struct ThroughputEstimate
{
  double eta_hat = 0.0;
  long long blocks_completed = 0;
  long long total_slots = 0;
  /// Batch-means standard error of eta_hat.
  double std_error = 0.0;
  double mean_block_slots = 0.0;
  double mean_block_se = 0.0;
  int batches = 0;
};

/// Renewal trace: blocks back to back, each inheriting every channel history
/// from the end of the previous one. Starts from the stationary law.
ThroughputEstimate estimate_throughput(const ChannelModel& model, long long n, int k, long long blocks,
                                       std::uint64_t seed, const SimulationOptions& options = {});

/// E[T(n, k)] for memoryless channels by summing P[T > t]. Shares no code with
/// the engines above.
double exact_expected_completion_memoryless(double gamma, long long n, int k, double tail_tol = 1e-12);

struct FirstSuccessSamples
{
  std::vector<int> samples;

  /// Empirical P[X > t] and its binomial standard error.
  double tail(int t) const;
  double tail_se(int t) const;
};

/// Slots until the first success on a Gilbert-Elliott channel whose previous
/// slot was `start_bit`; with terms > 1 each sample is a sum of that many
/// independent copies.
FirstSuccessSamples first_success_times(const GilbertElliott& ge, int start_bit, long long trials,
                                        std::uint64_t seed, int terms = 1);

enum class Arrival
{
  bernoulli_batch, ///< floor(lambda) packets plus one more with probability frac(lambda)
  poisson,
};

enum class QueueVerdict
{
  stable,
  unstable,
  inconclusive,
};

std::string_view to_string(QueueVerdict v);

struct QueueOptions
{
  /// Stable when the late-horizon trend is below this and the queue stays bounded.
  double stable_slope = 1e-4;
  /// Unstable when the late-horizon trend exceeds this.
  double unstable_slope = 1e-3;
  /// "Bounded" means mean late-horizon queue <= factor * k.
  double bounded_queue_factor = 50.0;
  Engine engine = Engine::automatic;
  std::uint64_t salt = 0;
};

struct QueueStats
{
  double lambda = 0.0;
  double mean_queue = 0.0;
  /// Least-squares slope of the queue length over the second half of the run.
  double queue_trend_slope = 0.0;
  QueueVerdict verdict = QueueVerdict::inconclusive;
  long long blocks_served = 0;
  long long final_queue = 0;
};

/// Slotted queue feeding the block encoder: whenever the server is idle and at
/// least k packets wait, k of them leave the queue and occupy one block time.
/// Channels keep running through idle slots.
QueueStats simulate_queue(const ChannelModel& model, long long n, int k, double lambda, Arrival arrival,
                          long long slots, std::uint64_t seed, const QueueOptions& options = {});

} // namespace rbcast
