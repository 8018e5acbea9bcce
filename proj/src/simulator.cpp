#include "rbcast/simulator.hpp"

#include "parallel.hpp"
#include "population.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>

namespace rbcast {

namespace {

// Per-receiver streams beat table inversion below this many receivers.
constexpr long long kPerReceiverLimit = 64;
constexpr int kMaxPopulationOrder = 6;

constexpr std::uint64_t kFirstSuccessSalt = 0x6669727374ull;
constexpr std::uint64_t kQueueSalt = 0x7175657565ull;

double pairwise_sum(std::span<const double> xs)
{
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs)
      s += x;
    return s;
  }
  auto half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct MeanSe
{
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(std::span<const double> xs)
{
  MeanSe out;
  const auto n = static_cast<double>(xs.size());
  if (xs.empty())
    return out;
  out.mean = pairwise_sum(xs) / n;
  if (xs.size() < 2)
    return out;
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    sq[i] = (xs[i] - out.mean) * (xs[i] - out.mean);
  out.se = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  return out;
}

std::uint64_t setting_salt(const SimulationOptions& options, long long n, int k)
{
  if (options.common_random_numbers)
    return options.salt;
  return hash_combine(hash_combine(options.salt, static_cast<std::uint64_t>(n)), static_cast<std::uint64_t>(k));
}

void check_setting(long long n, int k)
{
  if (n < 1 || k < 1)
    throw std::invalid_argument("need n >= 1 and k >= 1");
  if (n > static_cast<long long>(kSharedStream))
    throw std::invalid_argument("too many receivers");
}

class PopulationFactory
{
public:
  PopulationFactory(const ChannelModel& model, long long n, int k, Engine requested)
    : m_model{model}
    , m_n{n}
    , m_k{k}
    , m_engine{resolve_engine(model, n, requested)}
  {
    if (m_engine == Engine::population)
      m_table = std::make_shared<detail::FirstPassageTable>(model, k, n);
  }

  std::unique_ptr<detail::Population> make(const InitPolicy& init, const StreamKey& key) const
  {
    if (m_engine == Engine::population)
      return detail::make_aggregate_population(m_model, m_table, m_n, init, key);
    return detail::make_receiver_population(m_model, m_n, m_k, init, key);
  }

private:
  const ChannelModel& m_model;
  long long m_n;
  int m_k;
  Engine m_engine;
  std::shared_ptr<const detail::FirstPassageTable> m_table;
};

} // namespace

std::string_view to_string(Engine e)
{
  switch (e) {
  case Engine::automatic:
    return "auto";
  case Engine::per_receiver:
    return "per_receiver";
  case Engine::population:
    return "population";
  }
  return "auto";
}

Engine engine_from_string(std::string_view name)
{
  if (name == "auto" || name == "automatic")
    return Engine::automatic;
  if (name == "per_receiver")
    return Engine::per_receiver;
  if (name == "population")
    return Engine::population;
  throw std::invalid_argument("unknown engine: " + std::string{name});
}

std::string_view to_string(QueueVerdict v)
{
  switch (v) {
  case QueueVerdict::stable:
    return "stable";
  case QueueVerdict::unstable:
    return "unstable";
  case QueueVerdict::inconclusive:
    return "inconclusive";
  }
  return "inconclusive";
}

Engine resolve_engine(const ChannelModel& model, long long n, Engine requested)
{
  if (requested == Engine::population && model.order() > kMaxPopulationOrder)
    throw std::invalid_argument("population engine supports channel order <= " +
                                std::to_string(kMaxPopulationOrder));
  if (requested != Engine::automatic)
    return requested;
  if (n <= kPerReceiverLimit || model.order() > 3)
    return Engine::per_receiver;
  return Engine::population;
}

BlockOutcome block_time(const ChannelModel& model, long long n, int k, const InitPolicy& init,
                        const StreamKey& key)
{
  check_setting(n, k);
  return detail::run_receiver_block(model, n, k, init, key);
}

CompletionStats summarize_completion(std::span<const long long> samples)
{
  CompletionStats out;
  out.trials = static_cast<long long>(samples.size());
  if (samples.empty())
    return out;
  std::vector<double> xs(samples.begin(), samples.end());
  auto ms = mean_and_se(xs);
  out.mean = ms.mean;
  out.std_error = ms.se;
  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  out.min = *lo;
  out.max = *hi;
  return out;
}

std::vector<long long> sample_completion_times(const ChannelModel& model, long long n, int k,
                                               const InitPolicy& init, long long trials,
                                               std::uint64_t seed, const SimulationOptions& options)
{
  check_setting(n, k);
  if (trials < 1)
    throw std::invalid_argument("need at least one trial");
  PopulationFactory factory{model, n, k, options.engine};
  const auto salt = setting_salt(options, n, k);

  std::vector<long long> times(static_cast<std::size_t>(trials));
  detail::parallel_for(times.size(), options.jobs, [&](std::size_t i) {
    StreamKey key{seed, salt, static_cast<std::uint32_t>(i), 0};
    times[i] = factory.make(init, key)->run_block();
  });
  return times;
}

CompletionStats estimate_expected_completion(const ChannelModel& model, long long n, int k,
                                             const InitPolicy& init, long long trials,
                                             std::uint64_t seed, const SimulationOptions& options)
{
  if (trials < 100)
    throw std::invalid_argument("expected completion estimates need >= 100 trials");
  auto times = sample_completion_times(model, n, k, init, trials, seed, options);
  return summarize_completion(times);
}

ThroughputEstimate estimate_throughput(const ChannelModel& model, long long n, int k, long long blocks,
                                       std::uint64_t seed, const SimulationOptions& options)
{
  check_setting(n, k);
  if (blocks < 100)
    throw std::invalid_argument("throughput estimates need >= 100 blocks");
  PopulationFactory factory{model, n, k, options.engine};
  StreamKey key{seed, setting_salt(options, n, k), 0, 0};
  auto pop = factory.make(InitPolicy::stationary(), key);

  std::vector<long long> lengths(static_cast<std::size_t>(blocks));
  for (auto& len : lengths)
    len = pop->run_block();

  ThroughputEstimate out;
  out.blocks_completed = blocks;
  for (auto len : lengths)
    out.total_slots += len;
  out.eta_hat = static_cast<double>(k) * static_cast<double>(blocks) / static_cast<double>(out.total_slots);
  out.mean_block_slots = static_cast<double>(out.total_slots) / static_cast<double>(blocks);

  // Batch means over floor(sqrt(blocks)) consecutive batches.
  const auto batches = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(blocks))));
  const std::size_t per_batch = lengths.size() / batches;
  std::vector<double> batch_eta(batches), batch_len(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    std::size_t begin = b * per_batch;
    std::size_t end = b + 1 == batches ? lengths.size() : begin + per_batch;
    long long slots = 0;
    for (std::size_t i = begin; i < end; ++i)
      slots += lengths[i];
    double count = static_cast<double>(end - begin);
    batch_eta[b] = static_cast<double>(k) * count / static_cast<double>(slots);
    batch_len[b] = static_cast<double>(slots) / count;
  }
  out.batches = static_cast<int>(batches);
  out.std_error = mean_and_se(batch_eta).se;
  out.mean_block_se = mean_and_se(batch_len).se;
  return out;
}

double FirstSuccessSamples::tail(int t) const
{
  if (samples.empty())
    return 0.0;
  auto over = std::count_if(samples.begin(), samples.end(), [t](int x) { return x > t; });
  return static_cast<double>(over) / static_cast<double>(samples.size());
}

double FirstSuccessSamples::tail_se(int t) const
{
  if (samples.empty())
    return 0.0;
  double p = tail(t);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(samples.size()));
}

FirstSuccessSamples first_success_times(const GilbertElliott& ge, int start_bit, long long trials,
                                        std::uint64_t seed, int terms)
{
  if (trials < 10'000)
    throw std::invalid_argument("first-success sampling needs >= 10^4 trials");
  if (start_bit != 0 && start_bit != 1)
    throw std::invalid_argument("start bit must be 0 or 1");
  if (terms < 1)
    throw std::invalid_argument("terms must be >= 1");

  const double up = ge.p01;         // P[1 | previous 0]
  const double stay = 1.0 - ge.p10; // P[1 | previous 1]
  FirstSuccessSamples out;
  out.samples.resize(static_cast<std::size_t>(trials));
  for (long long i = 0; i < trials; ++i) {
    Philox rng{StreamKey{seed, kFirstSuccessSalt + static_cast<std::uint64_t>(start_bit), static_cast<std::uint32_t>(i),
                         static_cast<std::uint32_t>(terms)}};
    int prev = start_bit;
    int slots = 0;
    for (int got = 0; got < terms;) {
      double p = prev == 1 ? stay : up;
      prev = static_cast<double>(rng() >> 11) * 0x1.0p-53 < p ? 1 : 0;
      got += prev;
      ++slots;
    }
    out.samples[static_cast<std::size_t>(i)] = slots;
  }
  return out;
}

QueueStats simulate_queue(const ChannelModel& model, long long n, int k, double lambda, Arrival arrival,
                          long long slots, std::uint64_t seed, const QueueOptions& options)
{
  check_setting(n, k);
  if (slots < 100'000)
    throw std::invalid_argument("queue simulation needs >= 10^5 slots");
  if (!(lambda > 0.0))
    throw std::invalid_argument("arrival rate must be positive");

  PopulationFactory factory{model, n, k, options.engine};
  const auto salt = hash_combine(options.salt ^ kQueueSalt, hash_combine(static_cast<std::uint64_t>(n), k));
  auto pop = factory.make(InitPolicy::stationary(), StreamKey{seed, salt, 0, 0});
  Philox arrivals_rng{StreamKey{seed, salt, 1, kSharedStream}};

  const double whole = std::floor(lambda);
  const double frac = lambda - whole;
  std::poisson_distribution<long long> poisson{lambda};
  auto arrivals = [&]() -> long long {
    if (arrival == Arrival::poisson)
      return poisson(arrivals_rng);
    long long a = static_cast<long long>(whole);
    if (frac > 0.0 && arrivals_rng.uniform() < frac)
      ++a;
    return a;
  };

  // Running means for the whole run and a Welford regression of queue length
  // on slot index over the second half.
  const long long half = slots / 2;
  long long slot = 0, queue = 0;
  double total_queue = 0.0;
  double late_n = 0.0, mean_x = 0.0, mean_y = 0.0, cov_xy = 0.0, var_x = 0.0;
  auto record = [&] {
    total_queue += static_cast<double>(queue);
    if (slot >= half) {
      double x = static_cast<double>(slot), y = static_cast<double>(queue);
      late_n += 1.0;
      double dx = x - mean_x;
      mean_x += dx / late_n;
      mean_y += (y - mean_y) / late_n;
      cov_xy += dx * (y - mean_y);
      var_x += dx * (x - mean_x);
    }
    ++slot;
  };

  QueueStats out;
  out.lambda = lambda;
  while (slot < slots) {
    if (queue >= k) {
      queue -= k;
      long long len = pop->run_block();
      ++out.blocks_served;
      for (long long j = 0; j < len && slot < slots; ++j) {
        queue += arrivals();
        record();
      }
    } else {
      pop->idle_slot();
      queue += arrivals();
      record();
    }
  }

  out.mean_queue = total_queue / static_cast<double>(slots);
  out.queue_trend_slope = var_x > 0.0 ? cov_xy / var_x : 0.0;
  out.final_queue = queue;
  const bool bounded = mean_y <= options.bounded_queue_factor * k;
  if (out.queue_trend_slope < options.stable_slope && bounded)
    out.verdict = QueueVerdict::stable;
  else if (out.queue_trend_slope > options.unstable_slope || (!bounded && out.queue_trend_slope >= options.stable_slope))
    out.verdict = QueueVerdict::unstable;
  else
    out.verdict = QueueVerdict::inconclusive;
  return out;
}

} // namespace rbcast
