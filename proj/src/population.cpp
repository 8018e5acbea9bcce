#include "population.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace rbcast::detail {

namespace {

constexpr double kNegligibleTail = 1e-17;
constexpr std::size_t kMaxTableEntries = std::size_t{1} << 28;

inline double unit_draw(Philox& rng) noexcept
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

long long binomial(Philox& rng, long long trials, double p)
{
  if (trials <= 0 || p <= 0.0)
    return 0;
  if (p >= 1.0)
    return trials;
  return std::binomial_distribution<long long>{trials, p}(rng);
}

// Adds a multinomial(count, weights / sum(weights)) draw into out.
void scatter(Philox& rng, long long count, std::span<const double> weights, std::vector<long long>& out)
{
  double rest = 0.0;
  std::size_t last = 0;
  for (std::size_t u = 0; u < weights.size(); ++u) {
    rest += weights[u];
    if (weights[u] > 0.0)
      last = u;
  }
  for (std::size_t u = 0; u < weights.size() && count > 0; ++u) {
    if (u == last) {
      out[u] += count;
      break;
    }
    if (weights[u] <= 0.0)
      continue;
    long long b = binomial(rng, count, weights[u] / rest);
    out[u] += b;
    count -= b;
    rest -= weights[u];
  }
}

std::uint32_t checked_state(const ChannelModel& model, ChannelState st)
{
  if (st.bits >= model.num_states())
    throw std::invalid_argument("initial history longer than the channel order");
  return st.bits;
}

long long burn_in_length(const ChannelModel& model, const InitPolicy& init)
{
  if (init.burn_in_slots > 0)
    return init.burn_in_slots;
  return std::max<long long>(1000, 100LL * model.num_states());
}

class ReceiverPopulation final : public Population
{
public:
  ReceiverPopulation(const ChannelModel& model, long long n, int k, const InitPolicy& init,
                     const StreamKey& key)
    : m_success{model.success_given().begin(), model.success_given().end()}
    , m_mask{model.num_states() - 1}
    , m_memoryless{model.order() == 0}
    , m_k{k}
    , m_state(static_cast<std::size_t>(n), 0u)
    , m_finish(static_cast<std::size_t>(n), 0)
  {
    m_rng.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
      StreamKey rk = key;
      rk.receiver = static_cast<std::uint32_t>(i);
      m_rng.emplace_back(rk);
    }
    initialize(model, init);
  }

  long long run_block() override
  {
    const std::size_t n = m_state.size();
    long long block = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t s = m_state[i];
      int got = 0;
      long long t = 0;
      while (got < m_k) {
        int bit = unit_draw(m_rng[i]) < m_success[s] ? 1 : 0;
        s = ((s << 1) | static_cast<std::uint32_t>(bit)) & m_mask;
        got += bit;
        ++t;
      }
      m_state[i] = s;
      m_finish[i] = t;
      block = std::max(block, t);
    }
    // Receivers that finished early keep their channel running to the block end.
    if (!m_memoryless) {
      for (std::size_t i = 0; i < n; ++i)
        for (long long t = m_finish[i]; t < block; ++t)
          step(i);
    }
    return block;
  }

  void idle_slot() override
  {
    for (std::size_t i = 0; i < m_state.size(); ++i)
      step(i);
  }

  std::vector<ChannelState> states() const
  {
    std::vector<ChannelState> out(m_state.size());
    for (std::size_t i = 0; i < m_state.size(); ++i)
      out[i].bits = m_state[i];
    return out;
  }

private:
  void step(std::size_t i)
  {
    std::uint32_t s = m_state[i];
    int bit = unit_draw(m_rng[i]) < m_success[s] ? 1 : 0;
    m_state[i] = ((s << 1) | static_cast<std::uint32_t>(bit)) & m_mask;
  }

  void initialize(const ChannelModel& model, const InitPolicy& init)
  {
    const std::size_t n = m_state.size();
    switch (init.kind) {
    case InitPolicy::Kind::stationary: {
      if (m_memoryless)
        return;
      auto pi = model.stationary();
      for (std::size_t i = 0; i < n; ++i) {
        double u = unit_draw(m_rng[i]);
        std::uint32_t s = 0;
        double acc = pi[0];
        while (u >= acc && s + 1 < pi.size())
          acc += pi[++s];
        m_state[i] = s;
      }
      return;
    }
    case InitPolicy::Kind::all_ones:
      std::fill(m_state.begin(), m_state.end(), m_mask);
      return;
    case InitPolicy::Kind::explicit_states:
      if (init.states.size() == 1) {
        std::fill(m_state.begin(), m_state.end(), checked_state(model, init.states.front()));
      } else if (init.states.size() == n) {
        for (std::size_t i = 0; i < n; ++i)
          m_state[i] = checked_state(model, init.states[i]);
      } else {
        throw std::invalid_argument("explicit initial states must number 1 or n");
      }
      return;
    case InitPolicy::Kind::burn_in: {
      long long slots = burn_in_length(model, init);
      for (long long t = 0; t < slots; ++t)
        idle_slot();
      return;
    }
    }
  }

  std::vector<double> m_success;
  std::uint32_t m_mask;
  bool m_memoryless;
  int m_k;
  std::vector<std::uint32_t> m_state;
  std::vector<long long> m_finish;
  std::vector<Philox> m_rng;
};

class AggregatePopulation final : public Population
{
public:
  AggregatePopulation(const ChannelModel& model, std::shared_ptr<const FirstPassageTable> table, long long n,
                      const InitPolicy& init, const StreamKey& key)
    : m_success{model.success_given().begin(), model.success_given().end()}
    , m_mask{model.num_states() - 1}
    , m_table{std::move(table)}
    , m_counts(model.num_states(), 0)
    , m_rng{StreamKey{key.seed, key.salt, key.trial, kSharedStream}}
  {
    initialize(model, n, init);
  }

  long long run_block() override
  {
    const auto& tab = *m_table;
    const std::uint32_t S = tab.num_states();
    const double log_u = std::log(m_rng.uniform());

    auto log_joint_cdf = [&](long long t) {
      double acc = 0.0;
      for (std::uint32_t s = 0; s < S; ++s)
        if (m_counts[s] > 0)
          acc += static_cast<double>(m_counts[s]) * tab.log_cdf(s, t);
      return acc;
    };

    // Smallest t with P[T <= t] >= u.
    long long lo = tab.k(), hi = tab.horizon();
    if (log_joint_cdf(hi) >= log_u) {
      while (lo < hi) {
        long long mid = lo + (hi - lo) / 2;
        if (log_joint_cdf(mid) >= log_u)
          hi = mid;
        else
          lo = mid + 1;
      }
    }
    const long long t = hi;

    // Given T = t the receivers are independent with T_i <= t, conditioned on
    // at least one of them having T_i = t.
    std::vector<double> finish_share(S, 0.0), log_none(S, 0.0);
    for (std::uint32_t s = 0; s < S; ++s) {
      if (m_counts[s] == 0)
        continue;
      double at_t = 0.0;
      for (double w : tab.finish_at(s, t))
        at_t += w;
      double upto_t = tab.cdf(s, t);
      double a = upto_t > 0.0 ? std::min(1.0, at_t / upto_t) : 1.0;
      finish_share[s] = a;
      log_none[s] = a >= 1.0 ? -std::numeric_limits<double>::infinity()
                             : static_cast<double>(m_counts[s]) * std::log1p(-a);
    }
    std::vector<double> suffix(S + 1, 0.0);
    for (std::uint32_t s = S; s-- > 0;)
      suffix[s] = suffix[s + 1] + log_none[s];

    std::vector<long long> next(S, 0);
    bool need_finisher = true;
    for (std::uint32_t s = 0; s < S; ++s) {
      const long long m = m_counts[s];
      if (m == 0)
        continue;
      const double a = finish_share[s];
      long long finishers = 0;
      if (need_finisher) {
        double any_here = -std::expm1(log_none[s]);
        double any_left = -std::expm1(suffix[s]);
        double pick = any_left > 0.0 ? any_here / any_left : 1.0;
        if (m_rng.uniform() < pick) {
          // Receivers ahead of the first finisher are not finishers.
          const long long first = first_finisher(a, any_here, m);
          finishers = 1 + binomial(m_rng, m - first, a);
          need_finisher = false;
        }
      } else {
        finishers = binomial(m_rng, m, a);
      }
      scatter(m_rng, finishers, tab.finish_at(s, t), next);
      scatter(m_rng, m - finishers, tab.finished_before(s, t), next);
    }
    m_counts.swap(next);
    return t;
  }

  void idle_slot() override
  {
    std::vector<long long> next(m_counts.size(), 0);
    for (std::uint32_t s = 0; s < m_counts.size(); ++s) {
      long long m = m_counts[s];
      if (m == 0)
        continue;
      long long ones = binomial(m_rng, m, m_success[s]);
      next[((s << 1) | 1u) & m_mask] += ones;
      next[(s << 1) & m_mask] += m - ones;
    }
    m_counts.swap(next);
  }

private:
  // Position of the first success among m Bernoulli(a) trials, given at least
  // one (any = 1 - (1 - a)^m).
  long long first_finisher(double a, double any, long long m)
  {
    if (a >= 1.0)
      return 1;
    double f = std::ceil(std::log1p(-m_rng.uniform() * any) / std::log1p(-a));
    return std::clamp<long long>(static_cast<long long>(f), 1, m);
  }

  void initialize(const ChannelModel& model, long long n, const InitPolicy& init)
  {
    switch (init.kind) {
    case InitPolicy::Kind::stationary:
      scatter(m_rng, n, model.stationary(), m_counts);
      return;
    case InitPolicy::Kind::all_ones:
      m_counts[m_mask] = n;
      return;
    case InitPolicy::Kind::explicit_states:
      if (init.states.size() == 1) {
        m_counts[checked_state(model, init.states.front())] = n;
      } else if (static_cast<long long>(init.states.size()) == n) {
        for (auto st : init.states)
          ++m_counts[checked_state(model, st)];
      } else {
        throw std::invalid_argument("explicit initial states must number 1 or n");
      }
      return;
    case InitPolicy::Kind::burn_in: {
      m_counts[0] = n;
      long long slots = burn_in_length(model, init);
      for (long long t = 0; t < slots; ++t)
        idle_slot();
      return;
    }
    }
  }

  std::vector<double> m_success;
  std::uint32_t m_mask;
  std::shared_ptr<const FirstPassageTable> m_table;
  std::vector<long long> m_counts;
  Philox m_rng;
};

} // namespace

FirstPassageTable::FirstPassageTable(const ChannelModel& model, int k, long long max_receivers)
  : m_k{k}
  , m_states{model.num_states()}
{
  if (k < 1)
    throw std::invalid_argument("block size must be >= 1");
  const std::uint32_t S = m_states;
  const auto K = static_cast<std::size_t>(k);

  // Per start state: mass still collecting, indexed [successes][history],
  // and mass already done, indexed [history].
  std::vector<std::vector<double>> active(S, std::vector<double>(K * S, 0.0));
  std::vector<std::vector<double>> done(S, std::vector<double>(S, 0.0));
  for (std::uint32_t s = 0; s < S; ++s)
    active[s][s] = 1.0;

  m_survival.assign(S, 1.0);
  m_cdf.assign(S, 0.0);
  m_finish.assign(std::size_t{S} * S, 0.0);
  m_before.assign(std::size_t{S} * S, 0.0);

  std::vector<double> next_active(K * S), finish(S), before(S);
  for (long long t = 1;; ++t) {
    double worst_tail = 0.0;
    for (std::uint32_t s = 0; s < S; ++s) {
      std::fill(next_active.begin(), next_active.end(), 0.0);
      std::fill(finish.begin(), finish.end(), 0.0);
      std::fill(before.begin(), before.end(), 0.0);
      for (std::size_t c = 0; c < K; ++c) {
        for (std::uint32_t h = 0; h < S; ++h) {
          double mass = active[s][c * S + h];
          if (mass == 0.0)
            continue;
          double p = model.success_given(h);
          std::uint32_t up = model.shift(h, 1), down = model.shift(h, 0);
          if (c + 1 == K)
            finish[up] += mass * p;
          else
            next_active[(c + 1) * S + up] += mass * p;
          next_active[c * S + down] += mass * (1.0 - p);
        }
      }
      for (std::uint32_t h = 0; h < S; ++h) {
        double mass = done[s][h];
        if (mass == 0.0)
          continue;
        double p = model.success_given(h);
        before[model.shift(h, 1)] += mass * p;
        before[model.shift(h, 0)] += mass * (1.0 - p);
      }
      active[s].swap(next_active);
      double tail = 0.0, reached = 0.0;
      for (double m : active[s])
        tail += m;
      for (std::uint32_t h = 0; h < S; ++h) {
        done[s][h] = before[h] + finish[h];
        reached += done[s][h];
      }
      m_survival.push_back(tail);
      m_cdf.push_back(reached);
      m_finish.insert(m_finish.end(), finish.begin(), finish.end());
      m_before.insert(m_before.end(), before.begin(), before.end());
      worst_tail = std::max(worst_tail, tail);
    }
    if (t >= k && worst_tail * static_cast<double>(max_receivers) < kNegligibleTail)
      break;
    if (m_finish.size() > kMaxTableEntries)
      throw std::runtime_error("first-passage table exceeded its size limit");
  }
}

double FirstPassageTable::log_cdf(std::uint32_t s, long long t) const
{
  double g = cdf(s, t);
  if (g < 0.5)
    return g > 0.0 ? std::log(g) : -std::numeric_limits<double>::infinity();
  return std::log1p(-survival(s, t));
}

std::unique_ptr<Population> make_receiver_population(const ChannelModel& model, long long n, int k,
                                                     const InitPolicy& init, const StreamKey& key)
{
  return std::make_unique<ReceiverPopulation>(model, n, k, init, key);
}

std::unique_ptr<Population> make_aggregate_population(const ChannelModel& model,
                                                      std::shared_ptr<const FirstPassageTable> table,
                                                      long long n, const InitPolicy& init,
                                                      const StreamKey& key)
{
  return std::make_unique<AggregatePopulation>(model, std::move(table), n, init, key);
}

BlockOutcome run_receiver_block(const ChannelModel& model, long long n, int k, const InitPolicy& init,
                                const StreamKey& key)
{
  ReceiverPopulation pop{model, n, k, init, key};
  BlockOutcome out;
  out.slots = pop.run_block();
  out.end_states = pop.states();
  return out;
}

} // namespace rbcast::detail
